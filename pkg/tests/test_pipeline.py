"""
Tests for the experiment pipeline behind the CLI commands
"""
import json
import os

import pytest

from src.config import config_from_dict, parse_config, settings
from src.errors import CoercivityViolation, InvalidArgumentError
from src.models import JobStatus
from src.pipeline import COMMANDS, ExperimentPipeline

EPS_SHORT = [0.25, 0.125, 0.0625]
FAST_SOLVER = {"lambdas": [0.01, 0.005], "cell_points": 32}


def constant_force_config(**sections):
    document = {
        "scenario": {"name": "unit"},
        "force": {"family": "constant", "value": 1.0},
        "grid": {"topology": "box", "points_per_axis": 64, "L": 2.0},
        "initial": {"kind": "cone"},
        "solver": dict(FAST_SOLVER, horizon=0.05),
        "experiment": {"eps_list": EPS_SHORT, "T": 0.1, "P": 3.0, "samples_per_axis": 3},
    }
    document.update(sections)
    return config_from_dict(document)


def test_commands():
    assert COMMANDS == ("check", "evolve", "cell", "table", "effective", "rate", "cone", "monitors")


def test_rejects_non_positive_jobs(tmp_path):
    with pytest.raises(InvalidArgumentError):
        ExperimentPipeline(constant_force_config(), tmp_path, jobs=0)


async def test_unknown_command(tmp_path):
    pipeline = ExperimentPipeline(constant_force_config(), tmp_path)
    with pytest.raises(InvalidArgumentError):
        await pipeline.run("render")
    assert pipeline.get_job_status() is None


async def test_check_writes_certificate(tmp_path):
    pipeline = ExperimentPipeline(constant_force_config(), tmp_path)
    progress = []
    outputs = await pipeline.run("check", progress_callback=lambda p, step: progress.append(p))

    assert outputs == [tmp_path / "certificate.json"]
    certificate = json.loads(outputs[0].read_text())
    assert certificate["min_margin"] == pytest.approx(1.0)
    assert certificate["delta"] == pytest.approx(0.1)

    assert progress[-1] == 100
    job = pipeline.get_job_status()
    assert job.status == JobStatus.COMPLETED
    assert job.outputs == [str(outputs[0])]


async def test_failed_command_marks_job(tmp_path):
    config = parse_config(settings.configs_dir / "cone.toml")
    pipeline = ExperimentPipeline(config, tmp_path)
    with pytest.raises(CoercivityViolation):
        await pipeline.run("check")
    job = pipeline.get_job_status()
    assert job.status == JobStatus.FAILED
    assert "coercivity margin" in job.error


async def test_evolve_exports_trace(tmp_path):
    outputs = await ExperimentPipeline(constant_force_config(), tmp_path).run("evolve")
    assert outputs
    assert all(path.parent == tmp_path / "evolve" for path in outputs)
    assert all(path.exists() for path in outputs)


async def test_cell_writes_value_and_corrector(tmp_path):
    config = constant_force_config(cell={"p": [0.5], "lam": 0.01})
    outputs = await ExperimentPipeline(config, tmp_path).run("cell")
    assert [p.name for p in outputs] == ["cell.json", "corrector.csv"]

    document = json.loads((tmp_path / "cell.json").read_text())
    assert document["F_bar"] == pytest.approx(-(1.25 ** 0.5), abs=1e-6)
    assert document["lambdas"] == FAST_SOLVER["lambdas"]
    assert set(document["corrector_bounds"]) == {"sup_v", "sup_dv", "sup_d2v"}


async def test_table_is_cached(tmp_path):
    outputs = await ExperimentPipeline(constant_force_config(), tmp_path, jobs=2).run("table")
    assert outputs[0] == tmp_path / "table.csv"
    assert outputs[1].parent == tmp_path / "cache"
    assert outputs[1].read_text() == outputs[0].read_text()

    uncached = tmp_path / "nocache"
    outputs = await ExperimentPipeline(constant_force_config(), uncached, cache_enabled=False).run("table")
    assert outputs == [uncached / "table.csv"]


async def test_effective_uses_closed_form(tmp_path):
    config = constant_force_config(initial={"kind": "flat"})
    outputs = await ExperimentPipeline(config, tmp_path).run("effective")
    assert outputs
    assert all(path.parent == tmp_path / "effective" for path in outputs)


async def test_rate_on_constant_force_is_degenerate(tmp_path):
    config = constant_force_config(initial={"kind": "flat"})
    outputs = await ExperimentPipeline(config, tmp_path).run("rate")
    assert [p.name for p in outputs] == ["report.json", "errors.csv", "rate_plot.svg"]

    report = json.loads((tmp_path / "report.json").read_text())
    assert report["note"] == "degenerate: zero error"
    assert report["config"]["scenario"]["name"] == "unit"


async def test_forced_cone(tmp_path):
    config = constant_force_config(
        initial={"kind": "negative_cone"},
        experiment={"eps_list": EPS_SHORT, "cone_variant": "forced"},
    )
    outputs = await ExperimentPipeline(config, tmp_path).run("cone")
    assert [p.name for p in outputs] == ["report.json", "errors.csv", "rate_plot.svg"]


async def test_monitors_for_curvature_flow(tmp_path):
    config = constant_force_config(
        force={"family": "constant", "value": 0.0},
        grid={"topology": "torus", "points_per_axis": 64},
        initial={"kind": "sine", "amplitude": 0.1, "wavevector": [1]},
        solver=dict(FAST_SOLVER, horizon=0.2),
    )
    outputs = await ExperimentPipeline(config, tmp_path).run("monitors")
    assert outputs == [tmp_path / "monitors.json"]
    estimates = json.loads(outputs[0].read_text())
    assert all(check["passed"] for check in estimates["checks"])
    assert estimates["M_emp"] <= estimates["N0"] + 1e-12


async def test_table_run_prunes_cache(tmp_path):
    cache = tmp_path / "cache"
    cache.mkdir()
    stale = cache / "stale.csv"
    stale.write_text("old\n")
    os.utime(stale, (1_000_000, 1_000_000))

    outputs = await ExperimentPipeline(constant_force_config(), tmp_path, cache_keep=1).run("table")
    assert [p.name for p in cache.iterdir()] == [outputs[1].name]
    table_lines = outputs[0].read_text().splitlines()
    assert table_lines[2].startswith("# diagnostics ")


REPEATED_RUNS = {
    "rate": {},
    "cone": {"initial": {"kind": "negative_cone"}, "experiment": {"eps_list": EPS_SHORT, "cone_variant": "forced"}},
}


@pytest.mark.parametrize("command", list(REPEATED_RUNS))
async def test_repeated_runs_write_identical_files(tmp_path, command):
    config = constant_force_config(**REPEATED_RUNS[command])
    first = await ExperimentPipeline(config, tmp_path / "first").run(command)
    second = await ExperimentPipeline(config, tmp_path / "second", jobs=2).run(command)
    assert [p.name for p in first] == [p.name for p in second] == ["report.json", "errors.csv", "rate_plot.svg"]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes(), a.name


@pytest.mark.slow
async def test_forced_sweep_error_constant_is_stable(tmp_path):
    config = parse_config(settings.configs_dir / "forced_sweep.toml")
    await ExperimentPipeline(config, tmp_path, jobs=4).run("rate")
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["failures"] == {}
    assert [r["eps"] for r in report["records"]] == config.experiment.eps_list
    assert report["monitors"]["error_monotone"] is True
    assert report["monitors"]["constant_ratio"] <= 2.0


@pytest.mark.slow
async def test_forced_monitors_under_horizon_doubling(tmp_path):
    estimates = {}
    for T in (2.0, 4.0):
        config = parse_config(settings.configs_dir / "forced_monitors.toml", [f"solver.horizon={T}"])
        outputs = await ExperimentPipeline(config, tmp_path / f"T{T:g}").run("monitors")
        estimates[T] = json.loads(outputs[0].read_text())
        assert all(check["passed"] for check in estimates[T]["checks"])
    assert estimates[4.0]["M_emp"] > 0.0
    assert abs(estimates[4.0]["M_emp"] - estimates[2.0]["M_emp"]) < 0.05 * estimates[2.0]["M_emp"]

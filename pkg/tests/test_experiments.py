"""
Tests for exponent fitting, rate sweeps, cone examples, monitors and reports
"""
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.cell import EffectiveHamiltonianTable
from src.effective import TableHamiltonian
from src.errors import DegenerateFitError, DegenerateReportError, InvalidArgumentError, PreconditionError
from src.experiments import (
    apriori_monitor_suite,
    cone_experiment,
    emit_report,
    epsilon_grid,
    expander_profile,
    fit_exponent,
    forced_cone_experiment,
    huygens_solution,
    measure_expander,
    monitor_time_step,
    report_payload,
    run_rate_sweep,
    validate_eps_list,
)
from src.experiments.sweep import DEGENERATE_NOTE
from src.flow import cone, flat, sine
from src.grid import GridSpec
from src.models import ConeVariant, RateRecord, RateReport

EPS_SHORT = [1 / 4, 1 / 8, 1 / 16]


def test_fit_exact_square_root():
    fit = fit_exponent([(1 / 4, 1 / 2), (1 / 16, 1 / 4), (1 / 64, 1 / 8)])
    assert fit.exponent == pytest.approx(0.5, abs=1e-12)
    assert fit.constant == pytest.approx(1.0, rel=1e-12)
    assert_allclose(fit.residuals, 0.0, atol=1e-12)


def test_fit_linear_pairs():
    fit = fit_exponent([(e, e) for e in (0.5, 0.25, 0.125, 0.0625)])
    assert fit.exponent == pytest.approx(1.0, abs=1e-12)


def test_fit_noisy_square_root(rng):
    eps = np.array([1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64])
    err = eps ** 0.5 * (1.0 + 0.01 * rng.uniform(-1.0, 1.0, size=eps.size))
    fit = fit_exponent(list(zip(eps, err)))
    assert abs(fit.exponent - 0.5) <= 0.02


@pytest.mark.parametrize("records", [
    [(0.5, 0.1), (0.25, 0.05)],
    [(0.5, 0.1), (0.25, 0.0), (0.125, 0.02)],
    [(0.5, 0.1), (0.25, float("nan")), (0.125, 0.02)],
])
def test_fit_refuses_degenerate_data(records):
    with pytest.raises(DegenerateFitError):
        fit_exponent(records)


def test_validate_eps_list():
    assert validate_eps_list([0.5, 0.25]) == [0.5, 0.25]
    for bad in ([], [1.5], [0.25, 0.5], [0.0]):
        with pytest.raises(InvalidArgumentError):
            validate_eps_list(bad)


def test_epsilon_grid_resolution():
    for eps in (1 / 3, 1 / 4, 0.3):
        spec = epsilon_grid(1, eps, 2.0, 16)
        assert spec.points_per_axis % 2 == 0
        assert spec.h <= eps / 16 * (1 + 1e-9)
        assert spec.axis()[spec.origin_index[0]] == pytest.approx(0.0, abs=1e-12)


def test_constant_force_sweep_is_degenerate(unit_force):
    report = run_rate_sweep(unit_force, flat, 0.25, EPS_SHORT, lipschitz_bound=0.0)
    assert report.note == DEGENERATE_NOTE
    assert report.fit is None
    assert [r.eps for r in report.records] == EPS_SHORT
    assert all(r.error <= 1e-10 for r in report.records)
    assert report.scenario["hamiltonian"] == "constant(1)"


def test_curvature_sweep_rate():
    report = run_rate_sweep(None, cone, 1.0, EPS_SHORT, lipschitz_bound=1.0)
    assert report.failures == {}
    assert report.fit is not None
    assert 0.45 <= report.fit.exponent <= 0.55
    assert report.monitors["error_monotone"] is True
    assert report.monitors["constant_ratio"] <= 2.0
    assert report.records[0].times == [0.25, 0.5, 1.0]


def test_sweep_needs_hamiltonian_for_oscillating_force(laminated_force):
    with pytest.raises(PreconditionError):
        run_rate_sweep(laminated_force, cone, 1.0, EPS_SHORT, lipschitz_bound=1.0)


def test_sweep_collects_failures():
    small = TableHamiltonian(EffectiveHamiltonianTable(1, 1.5, 7, np.zeros(7), np.zeros(7)))
    report = run_rate_sweep(None, cone, 0.01, EPS_SHORT, hamiltonian=small, lipschitz_bound=1.0)
    assert report.records == []
    assert set(report.failures) == {"1/4", "1/8", "1/16"}
    assert all(msg.startswith("PreconditionError") for msg in report.failures.values())
    assert report.note == "no successful runs"


def test_huygens_solution():
    assert float(huygens_solution(0.0, 1.0)) == pytest.approx(1.0)
    assert float(huygens_solution(0.0, 1.0, mollifier=0.01)) == pytest.approx(0.99)
    assert float(huygens_solution(1.0, 1.0)) == pytest.approx(np.sqrt(2.0) - 1.0)
    x = 0.5 / np.sqrt(2.0)
    assert float(huygens_solution(x, 0.5)) == pytest.approx(float(huygens_solution(x + 1e-12, 0.5)), abs=1e-9)


def test_expander_profile_shape():
    profile = expander_profile(1)
    assert profile.constant > 0.0
    assert profile.slope[-1] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(profile.g) > 0.0)
    with pytest.raises(InvalidArgumentError):
        expander_profile(3)


def test_small_cone_experiment():
    report = cone_experiment(EPS_SHORT, resolutions=(128,))
    assert report.variant == ConeVariant.CURVATURE
    assert all(v > 0 for v in report.lower_bound_values)
    assert report.fit is not None
    assert 0.45 <= report.fit.exponent <= 0.55
    assert report.expander_values == [report.expander_constant]
    assert_allclose(report.predicted_values, np.sqrt(EPS_SHORT) * report.expander_constant)


@pytest.fixture(scope="module")
def forced_cone_report():
    return forced_cone_experiment(EPS_SHORT)


def test_forced_cone_experiment(forced_cone_report):
    report = forced_cone_report
    assert report.variant == ConeVariant.FORCED
    assert report.effective_value == 1.0
    assert report.expander_constant is None
    assert_allclose(report.predicted_values, 1.0 - np.asarray(report.h))
    assert len(report.lower_bound_values) == len(EPS_SHORT)


def test_monitor_time_step(torus_64):
    u0 = torus_64.constant(0.0)
    h = torus_64.h
    assert monitor_time_step(u0, None, 1.0) == pytest.approx(min(0.9 * h * h / 2.0, h))


def test_monitors_pass_for_curvature_flow():
    spec = GridSpec.torus(1, 64)
    u0 = sine(spec, 0.1, [1])
    estimates = apriori_monitor_suite(None, u0, 0.2)
    assert estimates.passed
    assert [c.name for c in estimates.checks] == ["gradient", "time_derivative", "short_time_growth"]
    assert estimates.N0 == pytest.approx(0.2 * np.pi, rel=5e-3)
    assert estimates.M_emp <= estimates.N0
    assert estimates.T_star > 0.0
    assert estimates.hessian_constant >= 0.0


def test_monitors_report_without_raising(laminated_force):
    spec = GridSpec.torus(1, 64)
    estimates = apriori_monitor_suite(laminated_force, sine(spec, 0.05, [1]), 0.1,
                                      gradient_bound=3.0, strict=False)
    assert len(estimates.checks) == 3
    assert estimates.C1_proxy >= 0.0


def _exact_report() -> RateReport:
    records = [RateRecord(eps=e, error=e ** 0.5, h=e / 16, times=[0.25, 0.5, 1.0]) for e in (0.25, 1 / 16, 1 / 64)]
    report = RateReport(scenario={"name": "synthetic"}, records=records)
    report.fit = fit_exponent([(r.eps, r.error) for r in records])
    return report


def test_emit_report_files(tmp_path):
    paths = emit_report(_exact_report(), tmp_path)
    assert [p.name for p in paths] == ["report.json", "errors.csv", "rate_plot.svg"]

    document = json.loads(paths[0].read_text())
    assert document["fit"]["exponent"] == pytest.approx(0.5)
    assert set(document) >= {"scenario", "records", "fit", "monitors", "version"}

    csv_lines = paths[1].read_text().splitlines()
    assert csv_lines[0] == "eps,error,h"
    assert len(csv_lines) == 4

    svg = paths[2].read_text()
    assert "fitted exponent 0.500000" in svg


def test_emit_report_is_deterministic(tmp_path):
    first = emit_report(_exact_report(), tmp_path / "a", config={"seed": 0})
    second = emit_report(_exact_report(), tmp_path / "b", config={"seed": 0})
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


def test_emit_report_refuses_empty(tmp_path):
    with pytest.raises(DegenerateReportError):
        emit_report(RateReport(scenario={}, records=[]), tmp_path)


def test_cone_report_payload(forced_cone_report):
    payload = report_payload(forced_cone_report)
    assert payload["scenario"]["variant"] == "forced"
    assert len(payload["records"]) == 3
    assert payload["cone"]["effective_value"] == 1.0


@pytest.mark.slow
def test_expander_constant_matches_oracle():
    value, residual, _ = measure_expander(1, 1024)
    oracle = expander_profile(1).constant
    assert abs(value - oracle) <= 0.01 * oracle
    assert residual <= 1e-3


@pytest.mark.slow
def test_cone_rate_at_full_scale():
    eps = [1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64]
    report = cone_experiment(eps, resolutions=(1024,))
    assert 0.45 <= report.fit.exponent <= 0.55
    assert all(v > 0 for v in report.lower_bound_values)
    assert abs(report.expander_constant - report.oracle_constant) <= 0.01 * report.oracle_constant

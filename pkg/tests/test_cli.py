"""
Tests for the command-line entry point
"""
import json

import pytest

import main as cli
from src.config import RunConfig, parse_config, settings


def test_template(tmp_path):
    assert cli.main(["--template", "--out", str(tmp_path)]) == 0
    template = tmp_path / "templates" / "run_template.toml"
    assert template.exists()
    assert parse_config(template) == RunConfig()


def test_command_required(capsys):
    assert cli.main([]) == 1
    assert "a command is required" in capsys.readouterr().err


def test_unknown_command_is_rejected_by_argparse():
    with pytest.raises(SystemExit):
        cli.main(["render"])


def test_check_writes_certificate(tmp_path, capsys):
    config = settings.configs_dir / "constant_force.toml"
    assert cli.main(["check", "--config", str(config), "--out", str(tmp_path)]) == 0
    certificate = json.loads((tmp_path / "certificate.json").read_text())
    assert certificate["min_margin"] == pytest.approx(1.0)
    assert "[SUCCESS] check finished in " in capsys.readouterr().out


def test_check_fails_for_zero_force(tmp_path, capsys):
    config = settings.configs_dir / "cone.toml"
    assert cli.main(["check", "--config", str(config), "--out", str(tmp_path)]) == 1
    assert "[ERROR] CoercivityViolation" in capsys.readouterr().err
    assert not (tmp_path / "certificate.json").exists()


def test_missing_config(tmp_path, capsys):
    assert cli.main(["check", "--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path)]) == 1
    assert "[ERROR] ConfigError" in capsys.readouterr().err


def test_invalid_override(tmp_path, capsys):
    config = settings.configs_dir / "constant_force.toml"
    argv = ["check", "--config", str(config), "--out", str(tmp_path), "--override", "experiment.eps_list=[2.0]"]
    assert cli.main(argv) == 1
    assert "experiment.eps_list" in capsys.readouterr().err


def test_out_falls_back_to_config(tmp_path):
    config = RunConfig.model_validate({"output_dir": str(tmp_path / "from_config")})
    assert cli.resolve_out(None, config) == tmp_path / "from_config"
    assert cli.resolve_out(str(tmp_path), config) == tmp_path
    assert cli.resolve_out(None, None) == settings.out

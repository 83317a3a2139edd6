"""Testes do subcomando 'set' da CLI.

- Generate template (--generate-template, --scenario)
- Apply YAML files (--file, --reset)
- Key-value pairs (key=value)
- Scopes (--local, --global)
"""

from __future__ import annotations

import json
from pathlib import Path

from core.cli.exit_codes import ExitCode
from core.cli.root import main
from core.infrastructure.config.scenario import load_scenario
from core.simulation.scenario import Scenario


def _run_ok(argv):
    """Executa main e verifica código 0"""
    assert main(argv) == 0


def _local_config(root: Path) -> dict:
    return json.loads((root / ".poe" / "config.json").read_text(encoding="utf-8"))


# === GENERATE TEMPLATE FUNCTIONALITY ===


def test_set_generate_template_stdout(isolated_config, capsys):
    _run_ok(["set", "--generate-template"])
    out = capsys.readouterr().out
    assert "poe-sim run defaults" in out
    assert "run:" in out


def test_set_generate_template_to_file(isolated_config, capsys):
    out_file = isolated_config / "sample.yaml"
    _run_ok(["set", "--generate-template", "-o", str(out_file)])
    assert "poe-sim run defaults" in out_file.read_text(encoding="utf-8")
    assert "[local] template = " in capsys.readouterr().out


def test_generated_scenario_template_is_loadable(isolated_config):
    out_file = isolated_config / "scenario.yaml"
    _run_ok(["set", "--generate-template", "--scenario", "-o", str(out_file)])
    assert load_scenario(out_file) == Scenario()


# === YAML FILE APPLICATION ===


def test_generated_template_applies_cleanly(isolated_config):
    out_yaml = isolated_config / "poe.yaml"
    _run_ok(["set", "--generate-template", "-o", str(out_yaml)])
    _run_ok(["set", "--file", str(out_yaml)])
    assert _local_config(isolated_config) == {
        "run": {"out_dir": "poe-out", "scheme": "ts", "log_level": "WARNING", "workers": 1}
    }


def test_set_file_merge_and_reset(isolated_config):
    _run_ok(["set", "run.scheme=mac"])
    cfg = isolated_config / "cfg.yaml"
    cfg.write_text("run:\n  workers: 3\n", encoding="utf-8")
    _run_ok(["set", "--file", str(cfg)])
    assert _local_config(isolated_config)["run"] == {"scheme": "mac", "workers": 3}
    _run_ok(["set", "--file", str(cfg), "--reset"])
    assert _local_config(isolated_config)["run"] == {"workers": 3}


# === KEY-VALUE PAIR FUNCTIONALITY ===


def test_set_key_value_pairs(isolated_config, capsys):
    _run_ok(["set", "run.workers=4"])
    _run_ok(["set", "run.log_level=info"])
    assert _local_config(isolated_config)["run"] == {"workers": 4, "log_level": "INFO"}
    assert "[local] run.log_level = info" in capsys.readouterr().out


def test_set_global_scope(isolated_config):
    _run_ok(["set", "--global", "run.scheme=mac"])
    path = isolated_config / "xdg" / "poe-sim" / "config.json"
    assert json.loads(path.read_text(encoding="utf-8")) == {"run": {"scheme": "mac"}}
    assert not (isolated_config / ".poe").exists()


# === ERROR HANDLING ===


def test_set_invalid_entry_format(isolated_config, capsys):
    assert main(["set", "invalid_format"]) == ExitCode.CONFIG_ERROR
    assert "entry must be in the form key=value" in capsys.readouterr().err


def test_set_unsupported_key(isolated_config):
    assert main(["set", "engine.model=x"]) == ExitCode.CONFIG_ERROR


def test_set_no_arguments_error(isolated_config, capsys):
    assert main(["set"]) == ExitCode.CONFIG_ERROR
    assert "nothing to do" in capsys.readouterr().err


def test_set_invalid_yaml_file(isolated_config):
    invalid_yaml = isolated_config / "invalid.yaml"
    invalid_yaml.write_text("invalid: yaml: content: [", encoding="utf-8")
    assert main(["set", "--file", str(invalid_yaml)]) == ExitCode.CONFIG_ERROR


def test_set_nonexistent_yaml_file(isolated_config):
    missing = isolated_config / "nonexistent" / "file.yaml"
    assert main(["set", "--file", str(missing)]) == ExitCode.INPUT_ERROR

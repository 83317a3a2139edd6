from __future__ import annotations

import json
from pathlib import Path

import pytest

from core.domain.errors import ConfigInvalid
from core.infrastructure.config.manager import ConfigManager


# === HAPPY PATH TESTS ===
def test_manager_basic_get_set(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    mgr = ConfigManager("local")
    mgr.set("run.scheme", "MAC")
    mgr.set("run.workers", "4")
    assert mgr.get("run.scheme") == "mac"
    assert mgr.get("run.workers") == 4
    assert mgr.get("run.out_dir", "default") == "default"
    stored = json.loads((tmp_path / ".poe" / "config.json").read_text(encoding="utf-8"))
    assert stored == {"run": {"scheme": "mac", "workers": 4}}


def test_global_scope_honours_xdg(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    mgr = ConfigManager("global")
    mgr.set("run.log_level", "debug")
    assert mgr.path == tmp_path / "xdg" / "poe-sim" / "config.json"
    assert ConfigManager("global").get("run.log_level") == "DEBUG"


def test_manager_apply_yaml_valid(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    p = Path("valid.yaml")
    p.write_text("run:\n  out_dir: results\n  workers: 2\n", encoding="utf-8")
    mgr = ConfigManager("local")
    mgr.apply_yaml(str(p))
    assert mgr.get("run.out_dir") == "results"
    assert mgr.get("run.workers") == 2


def test_merge_nested_dicts_on_apply(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    mgr = ConfigManager("local")
    mgr.set("run.scheme", "mac")
    p = Path("merge.yaml")
    p.write_text("run:\n  log_level: info\n", encoding="utf-8")
    mgr.apply_yaml(str(p))
    # mantém scheme e adiciona log_level
    assert mgr.get("run.scheme") == "mac"
    assert mgr.get("run.log_level") == "INFO"
    mgr.apply_yaml(str(p), reset=True)
    assert mgr.get("run.scheme") is None


# === ERROR TESTS ===
def test_invalid_scope():
    with pytest.raises(ValueError):
        ConfigManager("project")


@pytest.mark.parametrize(
    ("key", "value"),
    [
        ("run.unknown", 1),
        ("engine.provider", "x"),
        ("run", "ts"),
        ("run.scheme", "pbft"),
        ("run.log_level", "LOUD"),
        ("run.workers", "many"),
        ("run.workers", 0),
    ],
)
def test_set_rejects_bad_entries(tmp_path, monkeypatch, key, value):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigInvalid):
        ConfigManager("local").set(key, value)


def test_apply_yaml_invalid_root(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    p = Path("bad.yaml")
    p.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigInvalid, match="mapping"):
        ConfigManager("local").apply_yaml(str(p))


def test_apply_yaml_unknown_section_or_key(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    mgr = ConfigManager("local")
    p = Path("bad2.yaml")
    p.write_text(json.dumps({"engine": {"provider": "nope"}}), encoding="utf-8")
    with pytest.raises(ConfigInvalid, match="unsupported section"):
        mgr.apply_yaml(str(p))
    p.write_text(json.dumps({"run": {"threads": 3}}), encoding="utf-8")
    with pytest.raises(ConfigInvalid, match="unsupported run key"):
        mgr.apply_yaml(str(p))


def test_load_invalid_json_defaults_to_empty(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg_path = tmp_path / ".poe" / "config.json"
    cfg_path.parent.mkdir(parents=True, exist_ok=True)
    cfg_path.write_text("{invalid json}", encoding="utf-8")
    mgr = ConfigManager("local")
    # .get devolve o default quando o JSON é inválido
    assert mgr.get("run.scheme", "missing") == "missing"

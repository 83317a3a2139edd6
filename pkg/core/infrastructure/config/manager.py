"""Simple configuration manager with local/global scopes.

Stores run defaults in JSON files written atomically with restricted
permissions.
"""

from __future__ import annotations

import contextlib
import json
import os
from pathlib import Path
from typing import Any

from core.domain.errors import ConfigInvalid

# Constants for configuration validation
CONFIG_KEY_PARTS_COUNT = 2

_SUPPORTED_RUN_KEYS = {"out_dir", "scheme", "log_level", "workers"}
_SUPPORTED_SCHEMES = {"ts", "mac"}
_SUPPORTED_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _ensure_parent_permissions(p: Path) -> None:
    p.parent.mkdir(parents=True, exist_ok=True)
    if os.name == "posix":
        with contextlib.suppress(Exception):
            os.chmod(p.parent, 0o700)


def _write_secure_json(p: Path, data: dict[str, Any]) -> None:
    _ensure_parent_permissions(p)
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_text(json.dumps(data, ensure_ascii=False, indent=2), encoding="utf-8")
    tmp.replace(p)
    if os.name == "posix":
        with contextlib.suppress(Exception):
            os.chmod(p, 0o600)


def _coerce_run_value(name: str, value: Any) -> Any:
    if name == "scheme":
        if str(value).lower() not in _SUPPORTED_SCHEMES:
            raise ConfigInvalid(
                "unsupported scheme; allowed: " + ", ".join(sorted(_SUPPORTED_SCHEMES))
            )
        return str(value).lower()
    if name == "log_level":
        if str(value).upper() not in _SUPPORTED_LEVELS:
            raise ConfigInvalid(
                "unsupported log level; allowed: " + ", ".join(sorted(_SUPPORTED_LEVELS))
            )
        return str(value).upper()
    if name == "workers":
        try:
            workers = int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid("run.workers must be an integer") from exc
        if workers < 1:
            raise ConfigInvalid("run.workers must be >= 1")
        return workers
    return str(value)


class ConfigManager:
    """Manage configuration entries in a given scope (local or global)."""

    def __init__(self, scope: str = "local") -> None:
        if scope not in {"local", "global"}:
            raise ValueError("scope must be 'local' or 'global'")
        self.scope = scope
        self.path = self._resolve_path(scope)
        self._cache: dict[str, Any] | None = None

    def _resolve_path(self, scope: str) -> Path:
        if scope == "local":
            return Path.cwd() / ".poe" / "config.json"
        base = Path(os.environ.get("XDG_CONFIG_HOME", str(Path.home() / ".config")))
        return base / "poe-sim" / "config.json"

    # Basic load/save
    def _load(self) -> dict[str, Any]:
        if self._cache is not None:
            return self._cache
        p = self.path
        if p.exists():
            try:
                data = json.loads(p.read_text(encoding="utf-8"))
            except (OSError, ValueError):
                data = {}
        else:
            data = {}
        self._cache = data if isinstance(data, dict) else {}
        return self._cache

    def _save(self, data: dict[str, Any]) -> None:
        self._cache = data
        _write_secure_json(self.path, data)

    # Public API
    def get(self, key: str, default: Any | None = None) -> Any:
        cur: Any = self._load()
        for part in key.split("."):
            if not isinstance(cur, dict) or part not in cur:
                return default
            cur = cur[part]
        return cur

    def set(self, key: str, value: Any) -> None:
        parts = key.split(".")
        if (
            len(parts) != CONFIG_KEY_PARTS_COUNT
            or parts[0] != "run"
            or parts[1] not in _SUPPORTED_RUN_KEYS
        ):
            raise ConfigInvalid(
                "unsupported key; allowed: "
                + ", ".join(f"run.{k}" for k in sorted(_SUPPORTED_RUN_KEYS))
            )
        data = self._load()
        run = data.setdefault("run", {})
        if not isinstance(run, dict):
            run = data["run"] = {}
        run[parts[1]] = _coerce_run_value(parts[1], value)
        self._save(data)

    def apply_yaml(self, yaml_path: str, reset: bool = False) -> None:
        import yaml  # lazy import

        p = Path(yaml_path).expanduser().resolve()
        content = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        if not isinstance(content, dict):
            raise ConfigInvalid("YAML root must be a mapping")
        unknown = sorted(set(content) - {"run"})
        if unknown:
            raise ConfigInvalid(f"unsupported section(s): {', '.join(unknown)}")
        run_section = content.get("run") or {}
        if not isinstance(run_section, dict):
            raise ConfigInvalid("run must be a mapping")
        incoming: dict[str, Any] = {}
        for k, v in run_section.items():
            if k not in _SUPPORTED_RUN_KEYS:
                raise ConfigInvalid(
                    f"unsupported run key '{k}'; allowed: "
                    + ", ".join(sorted(_SUPPORTED_RUN_KEYS))
                )
            incoming[k] = _coerce_run_value(k, v)

        data = {} if reset else dict(self._load())
        merged = self._merge_dicts(data, {"run": incoming})
        self._save(merged)

    def _merge_dicts(self, base: dict[str, Any], incoming: dict[str, Any]) -> dict[str, Any]:
        def merge(dst: dict[str, Any], src: dict[str, Any]) -> None:
            for k, v in src.items():
                if isinstance(v, dict) and isinstance(dst.get(k), dict):
                    merge(dst[k], v)
                else:
                    dst[k] = v

        out = dict(base)
        merge(out, incoming)
        return out

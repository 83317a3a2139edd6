"""Scenario files: YAML (or JSON) validated against the scenario schema.

Every key mirrors a `Scenario` field; nested mappings configure the
workload, delay model, partitions and adversary. Unknown keys are errors.
"""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml
from jsonschema import Draft7Validator

from core.consensus.workload import WorkloadSpec
from core.domain.errors import ConfigInvalid
from core.domain.types import Scheme
from core.resources import SCENARIO_SCHEMA_PATH
from core.simulation.adversary import build_adversary
from core.simulation.scenario import AdversarySpec, DelayModel, Partition, Scenario

_SCALAR_KEYS = (
    "n",
    "f",
    "seed",
    "clients",
    "client_timeout",
    "drop_rate",
    "duration",
    "decision_target",
    "drain_time",
    "watermark_window",
    "checkpoint_interval",
    "timeout_base",
    "batch_size",
    "flush_timeout",
    "pipeline_depth",
    "backoff_cap_exponent",
    "timers_enabled",
    "authenticate",
    "record_messages",
    "sample_interval",
)


@lru_cache(maxsize=1)
def _validator() -> Draft7Validator:
    schema = json.loads(Path(SCENARIO_SCHEMA_PATH).read_text(encoding="utf-8"))
    return Draft7Validator(schema)


def _loc(error: Any) -> str:
    parts = list(getattr(error, "path", []))
    return "/".join(map(str, parts)) if parts else "<root>"


def validate_mapping(data: Any) -> None:
    """Raise ConfigInvalid listing every schema violation, sorted by path."""
    errors = sorted(
        _validator().iter_errors(data),
        key=lambda e: (tuple(map(str, e.path)), getattr(e, "validator", ""), e.message),
    )
    if errors:
        msgs = [f"{_loc(e)}: {e.message}" for e in errors]
        raise ConfigInvalid("Scenario validation failed: " + "; ".join(msgs))


def _delay(data: dict[str, Any]) -> DelayModel:
    if data["kind"] == "fixed":
        value = data.get("value", data.get("low"))
        if value is None:
            raise ConfigInvalid("delay: fixed model needs 'value'")
        return DelayModel.fixed(float(value))
    defaults = DelayModel()
    return DelayModel(
        kind="uniform",
        low=float(data.get("low", defaults.low)),
        high=float(data.get("high", defaults.high)),
    )


def _partition(data: dict[str, Any]) -> Partition:
    return Partition(
        start=float(data["start"]),
        end=float(data["end"]),
        groups=tuple(tuple(int(r) for r in group) for group in data["groups"]),
    )


def _adversary(data: dict[str, Any]) -> AdversarySpec:
    params = {
        k: (tuple(v) if isinstance(v, list) else v) for k, v in (data.get("params") or {}).items()
    }
    return AdversarySpec.of(data["program"], **params)


def scenario_from_mapping(data: Any) -> Scenario:
    """Build and validate a Scenario from a parsed mapping.

    Raises:
        ConfigInvalid: schema violation, n <= 3f, or an invalid adversary.
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigInvalid("Scenario validation failed: <root>: must be a mapping")
    validate_mapping(data)
    fields: dict[str, Any] = {k: data[k] for k in _SCALAR_KEYS if k in data}
    if "scheme" in data:
        fields["scheme"] = Scheme(data["scheme"])
    if "workload" in data:
        fields["workload"] = WorkloadSpec(**data["workload"])
    if "delay" in data:
        fields["delay"] = _delay(data["delay"])
    if "partitions" in data:
        fields["partitions"] = tuple(_partition(p) for p in data["partitions"])
    if "adversary" in data:
        fields["adversary"] = _adversary(data["adversary"])
    scenario = Scenario(**fields)
    scenario.validate()
    build_adversary(scenario.adversary, scenario.n, scenario.f)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file.

    Raises:
        FileNotFoundError: the file does not exist.
        ConfigInvalid: the content is not valid YAML or not a valid scenario.
    """
    p = Path(path).expanduser().resolve()
    text = p.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"Scenario file {p.name} is not valid YAML: {exc}") from exc
    return scenario_from_mapping(data)


def scenario_to_mapping(scenario: Scenario) -> dict[str, Any]:
    """Inverse of `scenario_from_mapping`, used for summaries."""
    out: dict[str, Any] = {k: getattr(scenario, k) for k in _SCALAR_KEYS}
    out["scheme"] = scenario.scheme.value
    w = scenario.workload
    out["workload"] = {
        "requests": w.requests,
        "keyspace": w.keyspace,
        "write_ratio": w.write_ratio,
        "outstanding": w.outstanding,
        "padding": w.padding,
    }
    d = scenario.delay
    out["delay"] = {"kind": d.kind, "low": d.low, "high": d.high}
    out["partitions"] = [
        {"start": p.start, "end": p.end, "groups": [list(g) for g in p.groups]}
        for p in scenario.partitions
    ]
    out["adversary"] = {
        "program": scenario.adversary.program,
        "params": {
            k: (list(v) if isinstance(v, tuple) else v) for k, v in scenario.adversary.params
        },
    }
    return out

from __future__ import annotations

from pathlib import Path

import pytest

from core.domain.errors import ConfigInvalid
from core.domain.types import Scheme
from core.infrastructure.config.scenario import (
    load_scenario,
    scenario_from_mapping,
    scenario_to_mapping,
    validate_mapping,
)
from core.resources.templates.manager import render_template
from core.simulation.scenario import AdversarySpec, DelayModel, Partition, Scenario


def _write(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "scenario.yaml"
    p.write_text(text, encoding="utf-8")
    return p


# === HAPPY PATH TESTS ===
def test_empty_mapping_gives_default_scenario():
    assert scenario_from_mapping(None) == Scenario()
    assert scenario_from_mapping({}) == Scenario()


def test_full_scenario_file(tmp_path):
    p = _write(
        tmp_path,
        """
n: 7
f: 2
seed: 42
scheme: mac
workload:
  requests: 5
  outstanding: 2
delay:
  kind: fixed
  value: 2.0
partitions:
  - start: 10
    end: 20
    groups: [[0, 1, 2], [3, 4, 5, 6]]
adversary:
  program: crash
  params:
    at_time: 15
    victims: [1, 2]
""".strip(),
    )
    scenario = load_scenario(p)
    assert (scenario.n, scenario.f, scenario.seed) == (7, 2, 42)
    assert scenario.scheme is Scheme.MAC
    assert scenario.workload.requests == 5 and scenario.workload.outstanding == 2
    assert scenario.delay == DelayModel.fixed(2.0)
    assert scenario.partitions == (
        Partition(start=10.0, end=20.0, groups=((0, 1, 2), (3, 4, 5, 6))),
    )
    assert scenario.adversary == AdversarySpec.of("crash", at_time=15, victims=(1, 2))


def test_template_loads_to_default_scenario(tmp_path):
    p = _write(tmp_path, render_template("scenario_template.yaml.j2"))
    assert load_scenario(p) == Scenario()


def test_mapping_roundtrip_keeps_scenario():
    scenario = Scenario(
        n=7,
        f=2,
        delay=DelayModel.fixed(1.0),
        adversary=AdversarySpec.of("delay-links", extra=3.0, victims=(0,)),
    )
    assert scenario_from_mapping(scenario_to_mapping(scenario)) == scenario


# === ERROR TESTS ===
@pytest.mark.parametrize(
    ("data", "match"),
    [
        ({"n": 3, "f": 1}, "3f"),
        ({"colour": "red"}, "Additional properties"),
        ({"scheme": "pbft"}, "scheme"),
        ({"delay": {"low": 1.0}}, "delay: 'kind'"),
        ({"adversary": {"program": "crash", "params": {"victims": [0, 1]}}}, "f=1"),
        ([1, 2], "must be a mapping"),
    ],
)
def test_invalid_mappings(data, match):
    with pytest.raises(ConfigInvalid, match=match):
        scenario_from_mapping(data)


def test_schema_errors_are_sorted_by_path():
    with pytest.raises(ConfigInvalid) as excinfo:
        validate_mapping({"seed": -1, "n": "four"})
    message = str(excinfo.value)
    assert message.index("n:") < message.index("seed:")


def test_invalid_yaml(tmp_path):
    p = _write(tmp_path, "n: [4\n")
    with pytest.raises(ConfigInvalid, match="not valid YAML"):
        load_scenario(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "absent.yaml")

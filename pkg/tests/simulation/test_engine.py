"""Simulator runs: liveness, recovery, determinism and adversary safety."""

from __future__ import annotations

from dataclasses import replace

import pytest

from core.consensus.records import NEW_VIEW, SETUP, STATE_TRANSFER, Transition
from core.domain.types import Scheme
from core.simulation.adversary import CAMPAIGN_PROGRAMS
from core.simulation.checker import check_trace
from core.simulation.engine import Simulation, run
from core.simulation.scenario import AdversarySpec, DelayModel, Partition, Scenario
from core.simulation.trace import EventKind, format_lines


def _transitions(result, name: str) -> list[Transition]:
    return [
        e.payload
        for e in result.trace
        if e.kind is EventKind.STATE_TRANSITION and e.payload.name == name
    ]


# === HONEST RUNS ===


@pytest.mark.parametrize("scheme", [Scheme.TS, Scheme.MAC])
def test_honest_run_commits_everything(scheme):
    result = run(Scenario(seed=1, scheme=scheme))
    assert result.all_committed
    assert result.metrics.commits == 20
    assert result.metrics.view_changes == 0
    assert check_trace(result.trace).ok
    # MAC proofs differ per replica; the header chain must not
    assert len({r.ledger.tip_hash for r in result.replicas}) == 1
    assert all(r.ledger.tip_seq + 1 == result.metrics.decisions for r in result.replicas)


def test_setup_record_comes_first():
    result = run(Scenario(seed=0, adversary=AdversarySpec.of("crash", victims=[2])))
    first = result.trace[0].payload
    assert first.name == SETUP
    assert (first.view, first.aux, tuple(first.aux_digest)) == (1, 4, (2,))


def test_message_events_only_when_recorded():
    quiet = run(Scenario(seed=2, record_messages=False))
    kinds = {e.kind for e in quiet.trace}
    assert kinds <= {EventKind.STATE_TRANSITION, EventKind.CLIENT_COMMIT}
    loud = run(Scenario(seed=2))
    assert EventKind.SEND in {e.kind for e in loud.trace}
    assert quiet.metrics.summary() == loud.metrics.summary()


def test_checkpoints_and_larger_cluster():
    scenario = Scenario(
        n=7,
        f=2,
        seed=4,
        clients=3,
        checkpoint_interval=5,
        watermark_window=10,
        record_messages=False,
    )
    result = run(scenario)
    assert result.all_committed
    assert all(r.low_watermark >= 25 for r in result.replicas)
    assert check_trace(result.trace).ok


def test_decision_target_stops_run():
    scenario = Scenario(
        seed=3,
        clients=1,
        workload=replace(Scenario().workload, requests=50, outstanding=50),
        decision_target=10,
    )
    result = run(scenario)
    assert 10 <= result.metrics.decisions < 50


# === DETERMINISM ===


def test_same_seed_gives_identical_trace():
    scenario = Scenario(seed=11, adversary=AdversarySpec.of("equivocating-primary"))
    a = list(format_lines(run(scenario).trace))
    b = list(format_lines(run(scenario).trace))
    assert a == b


def test_different_seeds_differ():
    a = list(format_lines(run(Scenario(seed=1)).trace))
    b = list(format_lines(run(Scenario(seed=2)).trace))
    assert a != b


# === FAILURES ===


@pytest.mark.parametrize("scheme", [Scheme.TS, Scheme.MAC])
def test_primary_crash_recovers_through_view_change(scheme):
    scenario = Scenario(seed=5, scheme=scheme, adversary=AdversarySpec.of("crash", at_time=20.0))
    result = run(scenario)
    assert result.metrics.view_changes >= 1
    assert result.all_committed
    assert check_trace(result.trace).ok
    adopted = _transitions(result, NEW_VIEW)
    assert {t.replica for t in adopted} >= {1, 2, 3}


def test_partition_without_quorum_stays_safe():
    scenario = Scenario(
        seed=6,
        partitions=(Partition(start=10.0, end=60.0, groups=((0, 1), (2, 3))),),
        record_messages=False,
    )
    result = run(scenario)
    assert result.metrics.decisions > 0
    assert check_trace(result.trace).ok


def test_message_loss_stays_safe():
    result = run(Scenario(seed=8, drop_rate=0.05, record_messages=False))
    assert result.metrics.decisions > 0
    assert check_trace(result.trace).ok


def test_message_loss_with_checkpoints_stays_safe_and_live():
    scenario = Scenario(
        seed=9,
        clients=3,
        workload=replace(Scenario().workload, requests=25, outstanding=3),
        delay=DelayModel(low=0.2, high=4.0),
        drop_rate=0.05,
        checkpoint_interval=5,
        watermark_window=10,
        record_messages=False,
    )
    result = run(scenario)
    report = check_trace(result.trace)
    assert report.ok, report.violations[:3]
    assert result.all_committed
    common = min(r.applied_seq for r in result.replicas)
    assert len({r.ledger.hash_at(common) for r in result.replicas}) == 1


def test_message_loss_across_view_changes_stays_safe():
    scenario = Scenario(
        seed=5,
        drop_rate=0.05,
        adversary=AdversarySpec.of("crash", at_time=20.0),
        checkpoint_interval=5,
        watermark_window=10,
        record_messages=False,
    )
    result = run(scenario)
    assert result.metrics.view_changes >= 1
    report = check_trace(result.trace)
    assert report.ok, report.violations[:3]


def test_dark_primary_victim_catches_up_by_state_transfer():
    scenario = Scenario(
        seed=3,
        adversary=AdversarySpec.of("dark-primary"),
        checkpoint_interval=5,
        watermark_window=10,
        record_messages=False,
    )
    result = run(scenario)
    assert result.all_committed
    assert check_trace(result.trace).ok
    victim = result.replicas[3]
    assert any(t.replica == 3 for t in _transitions(result, STATE_TRANSFER))
    assert victim.low_watermark >= 5
    peer = result.replicas[1]
    assert victim.ledger.tip_hash == peer.ledger.hash_at(victim.applied_seq)


def test_forged_spoofed_messages_are_dropped_by_link_mac():
    result = run(Scenario(seed=9, adversary=AdversarySpec.of("forge-shares")))
    notes = {e.note for e in result.trace if e.kind is EventKind.DROP}
    assert "mac" in notes
    assert check_trace(result.trace).ok


@pytest.mark.integration
@pytest.mark.parametrize("scheme", [Scheme.TS, Scheme.MAC])
@pytest.mark.parametrize("program", CAMPAIGN_PROGRAMS)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_adversary_programs_never_violate_safety(scheme, program, seed):
    scenario = Scenario(
        seed=seed,
        scheme=scheme,
        adversary=AdversarySpec.of(program),
        record_messages=False,
    )
    report = check_trace(Simulation(scenario).run().trace)
    assert report.ok, report.violations[:3]


@pytest.mark.integration
def test_equivocation_forces_view_change_and_stays_live():
    scenario = Scenario(
        seed=0,
        adversary=AdversarySpec.of("equivocating-primary"),
        delay=DelayModel.fixed(1.0),
    )
    result = run(scenario)
    assert result.metrics.view_changes >= 1
    assert result.all_committed
    assert check_trace(result.trace).ok

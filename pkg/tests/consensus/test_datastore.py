from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.consensus.codec import make_batch, sign_transaction
from core.consensus.datastore import RESULT_INVALID, RESULT_OK, Datastore, parse_command, replay
from core.domain.errors import OutOfOrderExecution
from core.infrastructure.crypto import NullAuthenticator

_AUTH = NullAuthenticator(4, 3)


def _batch(*payloads: bytes, client: int = 0, start: int = 0):
    txns = [sign_transaction(_AUTH, client, start + i, p) for i, p in enumerate(payloads)]
    return make_batch(txns)


# === EXECUTION ===


def test_put_then_get_returns_value():
    store = Datastore()
    store.execute(0, 0, _batch(b"put k1 hello"))
    execution = store.execute(0, 1, _batch(b"get k1", start=1))
    assert execution.results == (b"hello",)
    assert store.applied_seq == 1


def test_get_of_missing_key_is_empty_and_garbage_is_invalid():
    store = Datastore()
    execution = store.execute(0, 0, _batch(b"get nope", b"frobnicate x"))
    assert execution.results == (b"", RESULT_INVALID)


def test_padding_after_nul_is_ignored():
    assert parse_command(b"put k v\x00\x00\x00") == ("put", "k", "v")


def test_execute_out_of_order_rejected():
    store = Datastore()
    with pytest.raises(OutOfOrderExecution):
        store.execute(0, 1, _batch(b"put k v"))


def test_duplicate_request_executes_once():
    store = Datastore()
    batch = _batch(b"put k v1")
    store.execute(0, 0, batch)
    again = store.execute(0, 1, batch)
    assert again.informs == ()
    assert again.request_keys == ()
    row = store.lookup(0, 0)
    assert row is not None and row.seq == 0 and row.result == RESULT_OK


def test_inform_carries_view_seq_and_request_digest():
    store = Datastore()
    execution = store.execute(3, 0, _batch(b"put k v"))
    (txn, inform), = execution.informs
    assert (inform.view, inform.seq, inform.result) == (3, 0, RESULT_OK)
    assert store.lookup(*txn.key).txn_digest == inform.txn_digest


# === UNDO ===


def test_revert_restores_previous_values_and_dedup_table():
    store = Datastore()
    store.execute(0, 0, _batch(b"put k a"))
    before = store.state_digest()
    execution = store.execute(0, 1, _batch(b"put k b", b"put j c", start=1))
    store.revert(1, execution.undo, execution.request_keys)
    assert store.kv == {"k": "a"}
    assert store.lookup(0, 1) is None
    assert store.state_digest() == before


def test_revert_only_latest_entry():
    store = Datastore()
    execution = store.execute(0, 0, _batch(b"put k a"))
    store.execute(0, 1, _batch(b"put k b", start=1))
    with pytest.raises(OutOfOrderExecution):
        store.revert(0, execution.undo, execution.request_keys)


def test_snapshot_install_roundtrip():
    store = replay([_batch(b"put a 1"), _batch(b"put b 2", start=1)])
    other = Datastore()
    other.install(store.snapshot())
    assert other.state_digest() == store.state_digest()
    assert other.applied_seq == 1


# === PROPERTIES ===

_commands = st.one_of(
    st.builds(lambda k, v: f"put k{k} v{v}".encode(), st.integers(0, 4), st.integers(0, 99)),
    st.builds(lambda k: f"get k{k}".encode(), st.integers(0, 4)),
)


@settings(max_examples=60, deadline=None)
@given(
    payloads=st.lists(st.lists(_commands, min_size=1, max_size=3), min_size=1, max_size=8),
    data=st.data(),
)
def test_rollback_equals_replay_of_prefix(payloads, data):
    batches = []
    nonce = 0
    for group in payloads:
        batches.append(_batch(*group, start=nonce))
        nonce += len(group)
    store = Datastore()
    undo_log = [store.execute(0, seq, b) for seq, b in enumerate(batches)]
    target = data.draw(st.integers(-1, len(batches) - 1))
    for seq in range(len(batches) - 1, target, -1):
        store.revert(seq, undo_log[seq].undo, undo_log[seq].request_keys)
    assert store.snapshot() == replay(batches[: target + 1]).snapshot()

from __future__ import annotations

from itertools import combinations

import pytest

from core.domain.errors import ConfigInvalid
from core.domain.types import ReplicaConfig, client_addr, parse_addr, replica_addr

# === QUORUMS ===

_SIZES = [(n, f) for n in range(1, 8) for f in range((n - 1) // 3 + 1)]


@pytest.mark.parametrize(("n", "f"), _SIZES)
def test_any_two_quorums_share_f_plus_one_replicas(n, f):
    nf = ReplicaConfig(id=0, n=n, f=f).nf
    quorums = [frozenset(q) for q in combinations(range(n), nf)]
    assert min(len(a & b) for a in quorums for b in quorums) >= f + 1


@pytest.mark.parametrize(("n", "f"), [(3, 1), (6, 2), (4, -1)])
def test_too_few_replicas_rejected(n, f):
    with pytest.raises(ConfigInvalid):
        ReplicaConfig(id=0, n=n, f=f).validate()


def test_primary_rotates_round_robin():
    config = ReplicaConfig(id=0, n=4, f=1)
    assert [config.primary_of(v) for v in range(6)] == [0, 1, 2, 3, 0, 1]


# === ADDRESSES ===


def test_addresses_parse_back():
    assert parse_addr(replica_addr(3)) == ("r", 3)
    assert parse_addr(client_addr(12)) == ("c", 12)


@pytest.mark.parametrize("addr", ["", "r", "x1", "r-1", "c1a"])
def test_malformed_address_rejected(addr):
    with pytest.raises(ValueError):
        parse_addr(addr)

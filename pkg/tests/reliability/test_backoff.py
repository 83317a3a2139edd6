from __future__ import annotations

import pytest

from core.reliability.backoff import compute_backoff


@pytest.mark.parametrize(
    ("attempt", "expected"),
    [(0, 30.0), (1, 60.0), (3, 240.0), (-2, 30.0), (10, 30.0 * 1024), (50, 30.0 * 1024)],
)
def test_backoff_doubles_up_to_cap(attempt, expected):
    assert compute_backoff(30.0, attempt) == expected


def test_backoff_custom_cap():
    assert compute_backoff(1.0, 9, cap_exponent=2) == 4.0


def test_backoff_rejects_non_positive_base():
    with pytest.raises(ValueError):
        compute_backoff(0.0, 1)

from __future__ import annotations

# Teto padrão do expoente (tempo virtual)
DEFAULT_BACKOFF_CAP_EXPONENT = 10


def compute_backoff(
    base: float,
    attempt_index: int,
    cap_exponent: int = DEFAULT_BACKOFF_CAP_EXPONENT,
) -> float:
    """Exponential backoff base * 2^attempt, capped at base * 2^cap_exponent."""
    if base <= 0:
        raise ValueError("backoff base must be positive")
    return base * (2 ** min(max(attempt_index, 0), cap_exponent))

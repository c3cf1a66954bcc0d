"""Stick-breaking weights and truncated GEM machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GROWTH_FACTOR = 1.5


def stick_transform(fractions, L: int | None = None) -> np.ndarray:
    """Map stick fractions to weights: ``w_j = x_j * prod_{l<j} (1 - x_l)``.

    Returns exactly ``L`` weights (default: all of them).
    """
    x = np.asarray(fractions, dtype=float).reshape(-1)
    if L is None:
        L = len(x)
    if L > len(x):
        raise ValueError(f"need {L} fractions, got {len(x)}")
    x = x[:L]
    if np.any(~(x > 0)) or np.any(x > 1):
        raise ValueError("stick fractions must lie in (0, 1]")
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - x)[:-1])) if L else x
    return x * remaining


def residual_mass(fractions) -> float:
    """Stick length left after breaking off every fraction, ``prod (1 - x_j)``."""
    return float(np.prod(1.0 - np.asarray(fractions, dtype=float)))


def sample_beta1(rng, concentration: float, size: int) -> np.ndarray:
    """Beta(1, c) draws by inversion: ``1 - U**(1/c)``."""
    if size == 0:
        return np.zeros(0)
    U = np.asarray(rng.random(size), dtype=float)
    return 1.0 - U ** (1.0 / concentration)


def grown_length(L: int) -> int:
    return max(L + 1, math.ceil(GROWTH_FACTOR * L))


@dataclass
class StickState:
    fractions: np.ndarray
    concentration: float

    def __post_init__(self):
        self.fractions = np.asarray(self.fractions, dtype=float).reshape(-1)
        if self.concentration <= 0:
            raise ValueError("concentration must be positive")

    def __len__(self) -> int:
        return len(self.fractions)

    @property
    def weights(self) -> np.ndarray:
        return stick_transform(self.fractions)

    @property
    def residual(self) -> float:
        return residual_mass(self.fractions)


def extend_sticks(state: StickState, rng, target_len: int) -> StickState:
    """Append i.i.d. Beta(1, concentration) fractions up to ``target_len``."""
    if target_len < len(state):
        raise ValueError(
            f"target_len {target_len} is shorter than current length {len(state)}"
        )
    extra = sample_beta1(rng, state.concentration, target_len - len(state))
    return StickState(np.concatenate((state.fractions, extra)), state.concentration)


def slice_sup(weights, u: float) -> int:
    """Largest 1-based index ``g`` with ``weights[g] >= u``; 0 if none."""
    w = np.asarray(weights, dtype=float)
    hits = np.flatnonzero(w >= u)
    return int(hits[-1]) + 1 if hits.size else 0


def slice_sups(weights, u) -> np.ndarray:
    """Vectorized :func:`slice_sup` over an array of thresholds."""
    w = np.asarray(weights, dtype=float)
    u = np.asarray(u, dtype=float)
    if w.size == 0:
        return np.zeros(u.shape, dtype=np.int64)
    ok = w[None, :] >= u[:, None]
    last = w.size - np.argmax(ok[:, ::-1], axis=1)
    return np.where(ok.any(axis=1), last, 0).astype(np.int64)


def ensure_slice_coverage(state: StickState, u_min: float, rng) -> StickState:
    """Extend the sticks until the residual mass is below ``u_min``.

    Every index whose weight could reach ``u_min`` is then inside the
    represented prefix. Growth is geometric by a factor 1.5 per round.
    """
    if not 0 < u_min < 1:
        raise ValueError(f"u_min must lie in (0, 1), got {u_min}")
    while state.residual >= u_min:
        state = extend_sticks(state, rng, grown_length(len(state)))
    return state

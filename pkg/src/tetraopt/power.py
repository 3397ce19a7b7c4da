"""Locate a tensor's largest entry by repeated elementwise squaring.

Squaring a nonnegative tensor widens the gap between its top entry and the
rest; after a few squarings the dominant entry is easy to pick out of a
cheap cross interpolation of the iterate.  In train format each squaring
multiplies the bond ranks, so every step rounds back to a rank budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .cross import tensor_oracle, tt_cross
from .tt import (
    TensorTrain,
    frobenius_norm,
    tt_eval,
    tt_eval_many,
    tt_hadamard,
    tt_round,
    tt_scale,
    tt_shift,
)

_PROBE_COUNT = 10_000


@dataclass(frozen=True)
class PowerConfig:
    """Squaring schedule and rank budget.

    ``shift`` is added to every entry before squaring so the iterate is
    nonnegative and the largest entry is also the largest in modulus.  Leave
    it ``None`` to estimate one from seeded probes: the estimate flips the
    probed minimum to sit slightly above zero, which also sharpens the
    contrast between the top entries.
    """

    steps: int = 8
    max_rank: int = 16
    rel_tol: float = 0.0
    shift: float | None = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")


def _probe_indices(rng, shape, count: int) -> np.ndarray:
    cols = [rng.integers(0, n, size=count) for n in shape]
    return np.stack(cols, axis=1)


def _estimate_shift(tt: TensorTrain, rng) -> float:
    count = min(_PROBE_COUNT, prod(tt.mode_sizes))
    values = tt_eval_many(tt, _probe_indices(rng, tt.mode_sizes, count))
    low, high = float(values.min()), float(values.max())
    margin = 1e-3 * (high - low) if high > low else 1.0
    return -low + margin


def tt_power_argmax(
    tt: TensorTrain, config: PowerConfig, *, seed: int = 0
) -> tuple[tuple[int, ...], float]:
    """Index and value of (approximately) the largest entry of ``tt``.

    Iterates ``y <- round(y * y, max_rank, rel_tol)`` starting from the
    shifted tensor, normalizing each step.  The final iterate is cross
    sampled with maxvol pivoting, and the sampled index with the largest
    iterate value is returned together with the value of the ORIGINAL tensor
    there.
    """
    rng = np.random.default_rng(seed)
    shift = config.shift if config.shift is not None else _estimate_shift(tt, rng)
    y = tt_shift(tt, shift)

    for step in range(config.steps):
        y = tt_round(tt_hadamard(y, y), config.max_rank, config.rel_tol)
        norm = frobenius_norm(y)
        if not np.isfinite(norm) or norm == 0.0 or any(
            not np.all(np.isfinite(core)) for core in y.cores
        ):
            raise RuntimeError(
                f"power iteration produced a non-finite iterate at step {step + 1}"
            )
        y = tt_scale(y, 1.0 / norm)

    cross_rank = min(config.max_rank, max(y.ranks))
    _, log = tt_cross(
        tensor_oracle(y),
        y.mode_sizes,
        rank=cross_rank,
        sweeps=2,
        seed=int(rng.integers(0, 2**63)),
    )
    best_idx = None
    best_val = -np.inf
    for idx, value, _ in log.entries:
        if value > best_val or (value == best_val and idx < best_idx):
            best_val = value
            best_idx = idx
    return best_idx, tt_eval(tt, best_idx)


def rank_growth_probe(tt: TensorTrain, steps: int) -> list[int]:
    """Bond-rank growth of repeated squaring, before any lossy rounding.

    Entry 0 is the current maximal bond rank; each following entry squares
    every interior bond rank and clips it at that bond's unfolding bound
    (the largest rank a lossless representation can need).  With generous
    mode sizes the sequence is ``r, r**2, r**4, ...``.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    shape = tt.mode_sizes
    d = tt.order
    if d == 1:
        return [1] * (steps + 1)
    caps = [
        min(prod(shape[: j + 1]), prod(shape[j + 1 :])) for j in range(d - 1)
    ]
    ranks = list(tt.ranks[1:d])
    sequence = [max(ranks)]
    for _ in range(steps):
        ranks = [min(r * r, cap) for r, cap in zip(ranks, caps)]
        sequence.append(max(ranks))
    return sequence

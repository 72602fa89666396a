"""Batched stochastic hill climbing used by all sup/inf estimators.

Every point the climber reports was actually evaluated, so the best value is
attained and a max-estimate is a certified lower bound of the supremum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SamplingConfig:
    """Budget and seed for sampling estimators.

    ``samples`` random starts are scored, the best ``starts`` of them (plus any
    structural seeds) are refined by ``iters`` hill-climbing steps.
    """

    samples: int = 10_000
    seed: int = 0
    starts: int = 8
    iters: int = 300
    slack: float = 0.02

    def scaled(self, factor: int = 4) -> "SamplingConfig":
        """A strictly larger budget, used for right-hand sides of inequalities."""
        return SamplingConfig(self.samples * factor, self.seed + 1, self.starts * 2,
                              self.iters * 2, self.slack)

    def to_json(self) -> dict:
        return {"samples": self.samples, "seed": self.seed, "starts": self.starts,
                "iters": self.iters, "slack": self.slack}


def complex_noise(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def hill_climb(objective, X0, rng, project, iters=300, step=0.3, min_step=1e-10):
    """Maximize ``objective`` (rows -> values, ``-inf`` when infeasible) from each row of ``X0``.

    ``project`` maps arbitrary rows back onto the search manifold. Steps adapt
    per start: x1.5 after an accepted move, x0.5 after a rejected one, and are
    reset to ``step`` once they collapse below ``min_step``.
    """
    X = project(np.array(X0, dtype=np.complex128))
    f = objective(X)
    k, n = X.shape
    if k == 0 or iters <= 0:
        return X, f
    steps = np.full(k, step)
    scale = 1.0 / np.sqrt(n)
    for _ in range(iters):
        Y = project(X + (steps * scale)[:, None] * complex_noise(rng, (k, n)))
        g = objective(Y)
        better = g > f
        X[better] = Y[better]
        f = np.where(better, g, f)
        steps = np.where(better, np.minimum(steps * 1.5, 1.0), steps * 0.5)
        steps = np.where(steps < min_step, step, steps)
    return X, f


def top_rows(values, count):
    """Indices of the ``count`` largest finite values, lowest index first on ties."""
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0:
        return finite
    order = finite[np.argsort(-values[finite], kind="stable")]
    return order[:count]


def bisect_max(feasible, lo, hi, steps=60):
    """Largest ``s`` in [lo, hi] with ``feasible(s)``, for row-wise monotone predicates.

    ``lo`` must be feasible. Works on arrays of independent problems.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = feasible(mid)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo

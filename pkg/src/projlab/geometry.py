"""Convexity moduli of l^p spaces.

``delta`` is the modulus of convexity (an infimum, so estimates are upper
bounds) and ``beta`` the largest chord with a deep midpoint (a supremum, so
estimates are lower bounds). Both are exact in l^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import SamplingConfig, bisect_max, hill_climb, top_rows
from .errors import InputError
from .linalg import SpaceDescriptor, norms, normalize, random_unit_vectors


@dataclass(frozen=True)
class GeometryEstimate:
    epsilon: float
    value: float
    exact: bool
    samples: int
    seed: int
    side: str  # "exact", "upper" or "lower": which side of the true value is certified
    pair: tuple = field(default=(), compare=False)  # witness (x, y) when estimated


def delta_hilbert(epsilon: float) -> float:
    return 1.0 - math.sqrt(max(0.0, 1.0 - epsilon * epsilon / 4.0))


def beta_hilbert(epsilon: float) -> float:
    """sup ||x - y|| over the unit ball with ||x + y||/2 >= 1 - eps, in any inner-product space.

    The optimum puts the midpoint at norm 1 - eps and the half-chord orthogonal
    to it, reaching the sphere: ||x - y|| = 2 sqrt(1 - (1 - eps)^2).
    """
    return 2.0 * math.sqrt(max(0.0, 1.0 - (1.0 - epsilon) ** 2))


def _coordinate_seeds(n, p, limit=64):
    """Rows (u, v) of coordinate pairs (e_k, e_j) plus two flat directions.

    Extreme points of the l^1 and l^inf balls are where those norms fail to be
    strictly convex, so random sampling alone rarely finds them.
    """
    eye = np.eye(n, dtype=np.complex128)
    rows = [np.concatenate([eye[k], eye[j]]) for k in range(n) for j in range(n)][:limit]
    ones = normalize(np.ones((1, n), dtype=np.complex128), p)[0]
    alt = normalize(((-1.0) ** np.arange(n)).astype(np.complex128)[None], p)[0]
    rows.append(np.concatenate([ones, alt]))
    rows.append(np.concatenate([alt, ones]))
    return np.array(rows)


def _split(Z, n):
    return Z[:, :n], Z[:, n:]


def _search_pairs(space, cfg, objective, project):
    n, p = space.dim, space.p
    rng = np.random.default_rng(cfg.seed)
    Z = np.hstack([random_unit_vectors(rng, cfg.samples, n, p),
                   random_unit_vectors(rng, cfg.samples, n, p)])
    Z = np.vstack([_coordinate_seeds(n, p), Z])
    Z = project(Z)
    f = objective(Z)
    idx = top_rows(f, cfg.starts)
    W, g = hill_climb(objective, Z[idx], rng, project, iters=cfg.iters)
    allZ = np.vstack([Z, W])
    allf = np.concatenate([f, g])
    k = int(np.argmax(allf))
    return allZ[k], float(allf[k])


def delta_modulus(space: SpaceDescriptor, epsilon: float, seed: int = 0,
                  cfg: SamplingConfig | None = None) -> GeometryEstimate:
    """Modulus of convexity inf{1 - ||x+y||/2 : ||x||, ||y|| <= 1, ||x-y|| >= eps}.

    Closed form in l^2. Otherwise pairs ``x, y = m +- h`` with ``||h|| = eps/2``
    are searched; for each (direction of m, h) the longest feasible midpoint is
    found by bisection. Any such pair is feasible, so the result is an upper
    bound of the infimum.
    """
    if not (0 < epsilon <= 2):
        raise InputError(f"epsilon must lie in (0, 2], got {epsilon}")
    cfg = cfg or SamplingConfig(samples=2000, seed=seed, starts=8, iters=300)
    if space.p == 2:
        return GeometryEstimate(epsilon, delta_hilbert(epsilon), True, 0, cfg.seed, "exact")
    n, p = space.dim, space.p

    def project(Z):
        u, h = _split(Z, n)
        return np.hstack([normalize(u, p), normalize(h, p) * (epsilon / 2)])

    def objective(Z):
        u, h = _split(Z, n)
        ok = lambda s: np.maximum(norms(s[:, None] * u + h, p),
                                  norms(s[:, None] * u - h, p)) <= 1.0
        return bisect_max(ok, np.zeros(len(Z)), np.full(len(Z), 2.0))

    z, best = _search_pairs(space, cfg, objective, project)
    u, h = z[:n], z[n:]
    x, y = best * u + h, best * u - h
    value = max(0.0, 1.0 - float(norms(x + y, p)) / 2.0)
    return GeometryEstimate(epsilon, value, False, cfg.samples, cfg.seed, "upper", (x, y))


def beta_modulus(space: SpaceDescriptor, epsilon: float, seed: int = 0,
                 cfg: SamplingConfig | None = None) -> GeometryEstimate:
    """sup{||x-y|| : ||x||, ||y|| <= 1, ||x+y||/2 >= 1 - eps}.

    Closed form in l^2. Otherwise the midpoint is fixed at norm ``1 - eps`` and
    the half-chord is stretched along a searched direction until it leaves
    the ball, so the result is a lower bound of the supremum. ``epsilon = 0``
    is allowed and gives the characteristic of convexity.
    """
    if not (0 <= epsilon <= 1):
        raise InputError(f"epsilon must lie in [0, 1], got {epsilon}")
    cfg = cfg or SamplingConfig(samples=2000, seed=seed, starts=8, iters=300)
    if space.p == 2:
        return GeometryEstimate(epsilon, beta_hilbert(epsilon), True, 0, cfg.seed, "exact")
    n, p = space.dim, space.p

    def project(Z):
        u, v = _split(Z, n)
        return np.hstack([normalize(u, p), normalize(v, p)])

    def objective(Z):
        u, v = _split(Z, n)
        m = (1.0 - epsilon) * u
        ok = lambda s: np.maximum(norms(m + s[:, None] * v, p),
                                  norms(m - s[:, None] * v, p)) <= 1.0
        return 2.0 * bisect_max(ok, np.zeros(len(Z)), np.full(len(Z), 2.0))

    z, best = _search_pairs(space, cfg, objective, project)
    u, v = z[:n], z[n:]
    m = (1.0 - epsilon) * u
    x, y = m + 0.5 * best * v, m - 0.5 * best * v
    value = float(norms(x - y, p))
    return GeometryEstimate(epsilon, value, False, cfg.samples, cfg.seed, "lower", (x, y))

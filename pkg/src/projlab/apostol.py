"""Apostol moduli of contractions and the inequalities relating them.

For a contraction T,

    phi(eps)       = sup{||x - Tx|| : ||x|| <= 1, ||x|| - ||Tx|| <= eps}
    phi_tilde(eps) = sup{||x - Tx|| : ||x|| <= 1, 1 - ||Tx|| <= eps}   (||T|| = 1)

and omega is their common limit as eps -> 0.

Both constraints are homogeneous along rays, so the search runs over unit
vectors u only: for ``phi`` the best multiple of ``u`` is
``min(1, eps / (1 - ||Tu||)) u``, and for ``phi_tilde`` the feasible multiple
is ``u`` itself when ``||Tu|| >= 1 - eps``. All estimates are values attained
at recorded feasible vectors, i.e. lower bounds of the suprema.

Estimates that must be compared with each other are read off one shared
:class:`CandidatePool`. On a common pool the estimate is nondecreasing in
eps and ``phi_tilde <= phi`` holds exactly, as it does for the true moduli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import SamplingConfig, hill_climb, top_rows
from .errors import InputError, PreconditionError
from .geometry import beta_hilbert, beta_modulus
from .linalg import (SpaceDescriptor, _power_ascent, as_matrix, exact_norm, norms,
                     normalize, operator_norm, random_unit_vectors)
from .report import combine, compare, vacuous
from .spectral import boundary_vectors

PHI, PHI_TILDE = "phi", "phi-tilde"
VARIANTS = (PHI, PHI_TILDE)
EPS_GRID = tuple(2.0 ** -k for k in range(1, 11))
NORM_TOL = 1e-10     # ||T|| <= 1 + NORM_TOL
UNIT_TOL = 1e-8      # ||T|| >= 1 - UNIT_TOL for phi-tilde


@dataclass(frozen=True)
class ModulusEstimate:
    epsilon: float
    variant: str
    value: float
    maximizer: np.ndarray = field(compare=False)
    samples: int
    seed: int


@dataclass(frozen=True)
class OmegaEstimate:
    values: tuple            # ModulusEstimate per eps in the grid
    extrapolated: float
    variant: str
    norm: float

    @property
    def grid(self):
        return tuple(v.epsilon for v in self.values)


class CandidatePool:
    """Unit vectors u with cached ``1 - ||Tu||`` and ``||u - Tu||``."""

    def __init__(self, T, p):
        self.T = T
        self.p = p
        n = T.shape[0]
        self.U = np.zeros((0, n), dtype=np.complex128)
        self.gap = np.zeros(0)
        self.dist = np.zeros(0)

    def __len__(self):
        return len(self.U)

    def measure(self, U):
        TU = U @ self.T.T
        return 1.0 - norms(TU, self.p), norms(U - TU, self.p)

    def add(self, U):
        U = normalize(np.atleast_2d(np.asarray(U, dtype=np.complex128)), self.p)
        U = U[norms(U, self.p) > 0]
        gap, dist = self.measure(U)
        self.U = np.vstack([self.U, U])
        self.gap = np.concatenate([self.gap, gap])
        self.dist = np.concatenate([self.dist, dist])

    def objective(self, eps, variant):
        def f(U):
            return _values(*self.measure(U), eps, variant)
        return f

    def values(self, eps, variant):
        return _values(self.gap, self.dist, eps, variant)

    def best(self, eps, variant):
        vals = self.values(eps, variant)
        if vals.size == 0 or not np.isfinite(vals).any():
            return 0.0, np.zeros(self.T.shape[0], dtype=np.complex128)
        k = int(np.argmax(vals))
        u = self.U[k]
        if variant == PHI:
            u = _scale(self.gap[k], eps) * u
        return max(0.0, float(vals[k])), u


def _scale(gap, eps):
    gap = np.asarray(gap, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(gap <= eps, 1.0, eps / np.where(gap > 0, gap, 1.0))


def _values(gap, dist, eps, variant):
    if variant == PHI:
        return dist * _scale(gap, eps)
    return np.where(gap <= eps, dist, -np.inf)


def _norm(T, space, seed):
    est = operator_norm(T, space, seed)
    return est.value


def _check_contraction(T, space, seed):
    nrm = _norm(T, space, seed)
    if nrm > 1 + NORM_TOL:
        raise PreconditionError(f"not a contraction: ||T|| = {nrm:.12g}")
    return nrm


def _seeds(T, space, cfg, rng):
    """Boundary eigenvectors, norming vectors and points of the (near-)isometric set."""
    n, p = space.dim, space.p
    rows = [boundary_vectors(T, p)]
    if p == 2:
        _, s, Vh = np.linalg.svd(T)
        rows.append(Vh.conj())
        iso = Vh.conj()[s >= s[0] - 1e-8]
        if len(iso) > 1:
            C = rng.standard_normal((cfg.starts, len(iso))) + 1j * rng.standard_normal((cfg.starts, len(iso)))
            rows.append(C @ iso)
    else:
        X0 = random_unit_vectors(rng, cfg.starts, n, p)
        X, _, _ = _power_ascent(T, np.vstack([X0, np.eye(n, dtype=np.complex128)]), p, 50)
        rows.append(X)
    return np.vstack(rows)


def build_pool(T, space: SpaceDescriptor, cfg: SamplingConfig, targets) -> CandidatePool:
    """Random samples and structural seeds, refined by hill climbing for every
    ``(eps, variant)`` in ``targets``; all refined points are kept in the pool."""
    T = as_matrix(T)
    if T.shape[0] != space.dim:
        raise InputError(f"operator is {T.shape[0]}x{T.shape[0]}, space has dimension {space.dim}")
    rng = np.random.default_rng(cfg.seed)
    pool = CandidatePool(T, space.p)
    pool.add(_seeds(T, space, cfg, rng))
    pool.add(random_unit_vectors(rng, cfg.samples, space.dim, space.p))
    project = lambda U: normalize(U, space.p)
    for eps, variant in targets:
        idx = top_rows(pool.values(eps, variant), cfg.starts)
        if idx.size == 0:
            continue
        X, _ = hill_climb(pool.objective(eps, variant), pool.U[idx], rng, project, iters=cfg.iters)
        pool.add(X)
    return pool


def _estimate(pool, eps, variant, cfg):
    value, x = pool.best(eps, variant)
    return ModulusEstimate(eps, variant, value, x, len(pool), cfg.seed)


def _check_eps(eps):
    if not (0 < eps <= 1):
        raise InputError(f"epsilon must lie in (0, 1], got {eps}")


def apostol_phi(T, space: SpaceDescriptor, epsilon: float, variant: str = PHI,
                cfg: SamplingConfig | None = None) -> ModulusEstimate:
    """Lower-bound estimate of ``phi_T(eps)`` or ``phi_tilde_T(eps)``.

    ``phi-tilde`` is only defined when ||T|| = 1 and raises
    :class:`PreconditionError` for strict contractions.
    """
    cfg = cfg or SamplingConfig()
    _check_eps(epsilon)
    if variant not in VARIANTS:
        raise InputError(f"variant must be one of {VARIANTS}")
    T = as_matrix(T)
    nrm = _check_contraction(T, space, cfg.seed)
    if variant == PHI_TILDE and nrm < 1 - UNIT_TOL:
        raise PreconditionError(f"phi-tilde needs ||T|| = 1, got {nrm:.12g}")
    pool = build_pool(T, space, cfg, [(epsilon, variant)])
    return _estimate(pool, epsilon, variant, cfg)


def modulus_profile(T, space, eps_list, variant, cfg=None, pool=None):
    """Estimates on a list of eps read off one pool (monotone in eps by construction)."""
    cfg = cfg or SamplingConfig()
    if pool is None:
        pool = build_pool(T, space, cfg, [(e, variant) for e in eps_list])
    return [_estimate(pool, e, variant, cfg) for e in eps_list]


def omega(T, space: SpaceDescriptor, cfg: SamplingConfig | None = None,
          grid=EPS_GRID) -> OmegaEstimate:
    """omega_T from the dyadic eps grid.

    The extrapolated value is the smallest grid estimate. For ||T|| < 1 the
    profile of ``phi`` is reported and omega is 0 by definition.
    """
    cfg = cfg or SamplingConfig()
    T = as_matrix(T)
    nrm = _check_contraction(T, space, cfg.seed)
    variant = PHI_TILDE if nrm >= 1 - UNIT_TOL else PHI
    values = modulus_profile(T, space, list(grid), variant, cfg)
    extrap = min(v.value for v in values) if variant == PHI_TILDE else 0.0
    return OmegaEstimate(tuple(values), extrap, variant, nrm)


def check_modulus_chain(T, space: SpaceDescriptor, epsilon: float,
                        cfg: SamplingConfig | None = None, tol: float = 1e-12):
    """0 <= omega <= phi_tilde(eps) <= phi(eps) <= ||I - T|| <= 2 on shared samples."""
    cfg = cfg or SamplingConfig()
    _check_eps(epsilon)
    T = as_matrix(T)
    nrm = _check_contraction(T, space, cfg.seed)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise PreconditionError(f"modulus chain needs ||T|| = 1, got {nrm:.12g}")
    grid = sorted(set(EPS_GRID) | {epsilon})
    targets = [(e, v) for e in grid for v in VARIANTS]
    pool = build_pool(T, space, cfg, targets)
    tilde = {e: pool.best(e, PHI_TILDE)[0] for e in grid}
    om = min(tilde[e] for e in EPS_GRID)
    pt = tilde[epsilon]
    ph = pool.best(epsilon, PHI)[0]
    I = np.eye(space.dim)
    dist = operator_norm(I - T, space, cfg.seed)
    links = [
        compare("0<=omega", 0.0, om, tol),
        compare("omega<=phi_tilde", om, pt, tol),
        compare("phi_tilde<=phi", pt, ph, tol),
    ]
    if dist.exact:
        links.append(compare("phi<=||I-T||", ph, dist.value, tol))
    else:
        links.append(vacuous("phi<=||I-T||", "||I-T|| is only a lower-bound estimate"))
    links.append(compare("||I-T||<=2", dist.value, 2.0, tol))
    return combine("modulus-chain", links, {
        "epsilon": epsilon, "omega": om, "phi_tilde": pt, "phi": ph,
        "norm_I_minus_T": dist.value, "pool_size": len(pool), "seed": cfg.seed,
    })


def _tilde(T, space, eps, cfg):
    """phi_tilde at eps; for eps >= 1 the constraint is void and the value is ||I - T||."""
    if eps >= 1:
        return operator_norm(np.eye(space.dim) - T, space, cfg.seed).value
    return apostol_phi(T, space, eps, PHI_TILDE, cfg).value


def check_composition_bounds(operators, weights, space: SpaceDescriptor, epsilon: float,
                             cfg: SamplingConfig | None = None):
    """Product and convex-combination bounds for phi_tilde.

    product:  phi_tilde_AB(e) <= phi_tilde_A(phi_tilde_B(e) + e) + phi_tilde_B(e)
              with A the first operator and B the product of the rest;
    convex:   phi_tilde_T(e) <= sum_k w_k phi_tilde_{A_k}(e / w_k),  T = sum_k w_k A_k.

    Left sides are estimated at the base budget, right sides at a larger one,
    and ``cfg.slack`` absorbs the one-sided error. Each part is vacuous when the
    combined operator is a strict contraction.
    """
    cfg = cfg or SamplingConfig()
    _check_eps(epsilon)
    ops = [as_matrix(A) for A in operators]
    if len(ops) < 2:
        raise InputError("need at least two operators")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(ops),) or np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
        raise InputError("weights must be positive, one per operator, summing to 1")
    big = cfg.scaled()
    norms_ = [_check_contraction(A, space, cfg.seed) for A in ops]
    if min(norms_) < 1 - UNIT_TOL:
        why = "an operator has norm < 1"
        return combine("composition-bounds", [vacuous("product", why), vacuous("convex", why)])

    A = ops[0]
    B = ops[1]
    for C in ops[2:]:
        B = B @ C
    AB = A @ B
    parts = []
    if _norm(AB, space, cfg.seed) < 1 - UNIT_TOL or _norm(B, space, cfg.seed) < 1 - UNIT_TOL:
        parts.append(vacuous("product", "||AB|| < 1"))
    else:
        lhs = apostol_phi(AB, space, epsilon, PHI_TILDE, cfg).value
        tb = _tilde(B, space, epsilon, big)
        ta = _tilde(A, space, min(1.0, tb + epsilon), big)
        parts.append(compare("product", lhs, ta + tb, cfg.slack,
                             details={"phi_tilde_B": tb, "phi_tilde_A": ta}))

    T = sum(wk * Ak for wk, Ak in zip(w, ops))
    if _norm(T, space, cfg.seed) < 1 - UNIT_TOL:
        parts.append(vacuous("convex", "||T|| < 1"))
    else:
        lhs = apostol_phi(T, space, epsilon, PHI_TILDE, cfg).value
        terms = [_tilde(Ak, space, min(1.0, epsilon / wk), big) for wk, Ak in zip(w, ops)]
        parts.append(compare("convex", lhs, float(np.dot(w, terms)), cfg.slack,
                             details={"terms": terms}))
    return combine("composition-bounds", parts,
                   {"epsilon": epsilon, "weights": w, "seed": cfg.seed})


def check_beta_bound(P, space: SpaceDescriptor, epsilon: float,
                     cfg: SamplingConfig | None = None):
    """phi_tilde_P(eps) <= beta_X(eps) for an orthoprojection P of norm 1."""
    cfg = cfg or SamplingConfig()
    _check_eps(epsilon)
    P = as_matrix(P)
    nrm = _check_contraction(P, space, cfg.seed)
    if nrm < 1 - UNIT_TOL:
        return vacuous("beta-bound", "not applicable: ||P|| < 1 (P = 0)")
    lhs = apostol_phi(P, space, epsilon, PHI_TILDE, cfg).value
    if space.p == 2:
        rhs, how = beta_hilbert(epsilon), "closed form"
    else:
        rhs, how = beta_modulus(space, epsilon, cfg=cfg.scaled()).value, "estimate"
    return compare("beta-bound", lhs, rhs, cfg.slack,
                   details={"epsilon": epsilon, "beta": how, "seed": cfg.seed})

"""Contraction classes (H), (D), (W') and their closure under products and averages.

    (H)   ||x - Tx||^2 <= K (||x||^2 - ||Tx||^2) for all x; K(T) is the least such K
    (D)   ||T - rI|| <= 1 - r for some r in (0, 1); R(T) is the set of such r
    (W')  ||Tx|| = ||x||  implies  Tx = x
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import SamplingConfig, hill_climb, top_rows
from .errors import PreconditionError
from .linalg import (SpaceDescriptor, _power_ascent, as_matrix, norms, normalize,
                     operator_norm, random_unit_vectors)
from .report import combine, compare, vacuous
from .spectral import boundary_vectors

NORM_TOL = 1e-10
UNBOUNDED = 1e6
DEN_CUTOFF = 1e-12
RESOLVE_GAP = 1e-4
ISOMETRY_TOL = 1e-14
R_TOL = 1e-10
R_EDGE = 1e-9


def _require_contraction(T, space, seed):
    nrm = operator_norm(T, space, seed).value
    if nrm > 1 + NORM_TOL:
        raise PreconditionError(f"not a contraction: ||T|| = {nrm:.12g}")
    return nrm


# --- (H) ---------------------------------------------------------------------

@dataclass(frozen=True)
class HalperinEstimate:
    """Lower bound of K(T), or evidence that no finite K exists."""

    value: float
    unbounded: bool
    maximizer: np.ndarray | None = field(compare=False)
    samples: int
    seed: int

    def to_json(self):
        return {"value": "unbounded-evidence" if self.unbounded else self.value,
                "maximizer": self.maximizer, "samples": self.samples, "seed": self.seed}


def halperin_terms(T, X, p):
    """Numerator ``||x - Tx||^2`` and denominator ``||x||^2 - ||Tx||^2`` for rows of X.

    In l^2 both are Hermitian forms, evaluated with precomputed Gram matrices
    so the denominator does not come from subtracting two nearly equal norms.
    """
    if p == 2:
        D = np.eye(T.shape[0]) - T
        G = np.eye(T.shape[0]) - T.conj().T @ T
        N = D.conj().T @ D
        form = lambda M: np.einsum("ki,ij,kj->k", X.conj(), M, X).real
        return form(N), form(G)
    TX = X @ T.T
    nx, ntx = norms(X, p), norms(TX, p)
    return norms(X - TX, p) ** 2, (nx - ntx) * (nx + ntx)


def halperin_ratios(T, X, p, gap=RESOLVE_GAP):
    """Ratios for unit rows of X; ``-inf`` where the denominator is unresolved.

    Rounding in the denominator is ~1e-16 in absolute terms, so it must
    exceed ``gap`` for the ratio to be good to ~1e-11.
    """
    num, den = halperin_terms(T, X, p)
    ok = den > max(DEN_CUTOFF, gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, num / np.where(ok, den, 1.0), -np.inf)


def halperin_constant(T, space: SpaceDescriptor, cfg: SamplingConfig | None = None,
                      gap: float = RESOLVE_GAP) -> HalperinEstimate:
    """Estimate K(T) from below by sampling unit vectors and climbing the ratio.

    Returns 0 when no sample has a resolvable denominator and nothing points
    the other way (e.g. T = I). Reports ``unbounded`` when some sample shows a
    ratio above 1e6 even after charging its denominator the worst rounding
    error, which is what an isometric direction with ``Tx != x`` produces.
    """
    cfg = cfg or SamplingConfig()
    T = as_matrix(T)
    _require_contraction(T, space, cfg.seed)
    n, p = space.dim, space.p
    rng = np.random.default_rng(cfg.seed)
    X = random_unit_vectors(rng, cfg.samples, n, p)
    seeds = boundary_vectors(T, p)
    if len(seeds):
        X = np.vstack([seeds, X])

    num, den = halperin_terms(T, X, p)
    err = 8 * n * np.finfo(float).eps
    with np.errstate(divide="ignore"):
        floor = num / (np.maximum(den, 0.0) + err)
    if np.any(floor > UNBOUNDED):
        k = int(np.argmax(floor))
        return HalperinEstimate(math.inf, True, X[k], cfg.samples, cfg.seed)

    f = halperin_ratios(T, X, p, gap)
    idx = top_rows(f, cfg.starts)
    if idx.size == 0:
        return HalperinEstimate(0.0, False, None, cfg.samples, cfg.seed)
    # the quotient is badly conditioned near isometric directions, so the
    # ascent gets a larger budget than the other searches
    W, g = hill_climb(lambda Y: halperin_ratios(T, Y, p, gap), X[idx], rng,
                      lambda Y: normalize(Y, p), iters=10 * cfg.iters)
    allX, allf = np.vstack([X, W]), np.concatenate([f, g])
    k = int(np.argmax(allf))
    val = float(allf[k])
    if val > UNBOUNDED:
        return HalperinEstimate(math.inf, True, allX[k], cfg.samples, cfg.seed)
    return HalperinEstimate(val, False, allX[k], cfg.samples, cfg.seed)


# --- (D) ---------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusInterval:
    """Closed interval ``[lo, hi]`` intersected with (0, 1), or empty.

    ``certified`` is False when norms were only estimated (general p), in
    which case the interval may be too large.
    """

    lo: float
    hi: float
    empty: bool
    certified: bool

    def __contains__(self, r):
        return (not self.empty) and 0 < r < 1 and self.lo <= r <= self.hi

    def __bool__(self):
        return not self.empty

    @property
    def midpoint(self):
        return 0.5 * (max(self.lo, R_EDGE) + min(self.hi, 1 - R_EDGE))

    def to_json(self):
        if self.empty:
            return {"empty": True, "certified": self.certified}
        return {"empty": False, "lo": self.lo, "hi": self.hi, "certified": self.certified}


def d_gap(T, r, space, seed=0):
    """``||T - rI|| + r - 1``; nonpositive exactly when r is a (D)-radius of T."""
    return operator_norm(T - r * np.eye(T.shape[0]), space, seed).value + r - 1.0


def _golden_min(g, a, b, tol=1e-12):
    phi = (math.sqrt(5) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + phi * (b - a)
            gd = g(d)
    x = 0.5 * (a + b)
    return x, g(x)


def _bisect_edge(g, inside, outside, tol=1e-13):
    """Boundary of the sublevel set {g <= R_TOL} between an inside and an outside point."""
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if g(mid) <= R_TOL:
            inside = mid
        else:
            outside = mid
    return inside


def d_radius_interval(T, space: SpaceDescriptor, seed: int = 0) -> RadiusInterval:
    """R(T) = {r in (0,1) : ||T - rI|| <= 1 - r}.

    ``g(r) = ||T - rI|| + r - 1`` is convex, so R(T) is an interval: the
    minimizer is located by golden-section search on ``[1e-9, 1 - 1e-9]`` and
    the two edges of ``{g <= 1e-10}`` by bisection. Edges that reach the ends
    of the search range are reported as 0 and 1.
    """
    T = as_matrix(T)
    g = lambda r: d_gap(T, r, space, seed)
    a, b = R_EDGE, 1 - R_EDGE
    r_star, g_star = _golden_min(g, a, b)
    certified = space.exact
    if g_star > R_TOL:
        return RadiusInterval(math.nan, math.nan, True, certified)
    lo = 0.0 if g(a) <= R_TOL else _bisect_edge(g, r_star, a)
    hi = 1.0 if g(b) <= R_TOL else _bisect_edge(g, r_star, b)
    return RadiusInterval(lo, hi, False, certified)


# --- (W') --------------------------------------------------------------------

@dataclass(frozen=True)
class WPrimeDefect:
    value: float
    maximizer: np.ndarray | None = field(compare=False)
    feasible: int
    isometry_tol: float
    seed: int

    def __float__(self):
        return self.value


def wprime_defect(T, space: SpaceDescriptor, cfg: SamplingConfig | None = None,
                  isometry_tol: float = ISOMETRY_TOL) -> WPrimeDefect:
    """sup ||Tx - x|| over unit x with ||Tx|| >= 1 - isometry_tol.

    In l^2 the near-isometric vectors span the right singular vectors with
    singular value >= 1 - isometry_tol, and the sup over that subspace is the
    largest singular value of (T - I) restricted to it. Otherwise candidates
    are boundary eigenvectors, norm-ascent vectors and random starts, refined
    by hill climbing inside the feasible set.

    The default tolerance is far below 1e-8 on purpose: a Euclidean
    orthoprojection admits feasible x with ||x - Px|| = sqrt(2 tol), so the
    defect of a genuine (W') operator only drops under 1e-6 for tol < 5e-13.
    """
    cfg = cfg or SamplingConfig()
    T = as_matrix(T)
    _require_contraction(T, space, cfg.seed)
    n, p = space.dim, space.p
    I = np.eye(n)
    if p == 2:
        _, s, Vh = np.linalg.svd(T)
        V = Vh.conj()[s >= 1 - isometry_tol].T
        if V.shape[1] == 0:
            return WPrimeDefect(0.0, None, 0, isometry_tol, cfg.seed)
        _, sv, Wh = np.linalg.svd((T - I) @ V)
        x = V @ Wh[0].conj()
        return WPrimeDefect(float(sv[0]), x, V.shape[1], isometry_tol, cfg.seed)

    rng = np.random.default_rng(cfg.seed)
    X0 = random_unit_vectors(rng, cfg.samples, n, p)
    pushed, _, _ = _power_ascent(T, np.vstack([X0[: cfg.starts * 4], np.eye(n, dtype=complex)]), p, 100)
    X = np.vstack([boundary_vectors(T, p), pushed, X0])

    def objective(Y):
        TY = Y @ T.T
        ok = norms(TY, p) >= 1 - isometry_tol
        return np.where(ok, norms(TY - Y, p), -np.inf)

    f = objective(X)
    idx = top_rows(f, cfg.starts)
    if idx.size == 0:
        return WPrimeDefect(0.0, None, 0, isometry_tol, cfg.seed)
    W, g = hill_climb(objective, X[idx], rng, lambda Y: normalize(Y, p), iters=cfg.iters)
    allX, allf = np.vstack([X, W]), np.concatenate([f, g])
    k = int(np.argmax(allf))
    return WPrimeDefect(float(allf[k]), allX[k], int(np.isfinite(allf).sum()), isometry_tol, cfg.seed)


# --- closure and summary ------------------------------------------------------

def _radii(R):
    """A few certified radii from an interval: both edges and the midpoint."""
    lo, hi = max(R.lo, R_EDGE), min(R.hi, 1 - R_EDGE)
    return sorted({lo, R.midpoint, hi})


def closure_report(A, B, alpha: float, space: SpaceDescriptor,
                   cfg: SamplingConfig | None = None, k_slack: float = 0.01,
                   tol: float = 1e-9):
    """Check K(AB) <= 2 max(K(A), K(B)) and the (D)-radius arithmetic
    ``rs in R(AB)``, ``alpha r + (1 - alpha) s in R(alpha A + (1 - alpha) B)``.

    The K comparison pits a base-budget estimate for AB against larger-budget
    estimates for A and B with relative slack ``k_slack``. The radius checks
    are exact norm evaluations at the edges and midpoints of R(A) and R(B).
    """
    cfg = cfg or SamplingConfig()
    if not 0 < alpha < 1:
        raise PreconditionError("alpha must lie in (0, 1)")
    A, B = as_matrix(A), as_matrix(B)
    AB = A @ B
    C = alpha * A + (1 - alpha) * B

    big = cfg.scaled()
    kab = halperin_constant(AB, space, cfg)
    ka, kb = halperin_constant(A, space, big), halperin_constant(B, space, big)
    if ka.unbounded or kb.unbounded:
        k_part = vacuous("halperin-product", "K(A) or K(B) unbounded")
    elif kab.unbounded:
        k_part = compare("halperin-product", math.inf, 2 * max(ka.value, kb.value))
    else:
        rhs = 2 * max(ka.value, kb.value)
        k_part = compare("halperin-product", kab.value, rhs, k_slack * rhs + 1e-9,
                         details={"K_AB": kab.value, "K_A": ka.value, "K_B": kb.value})

    parts = [k_part]
    RA, RB = d_radius_interval(A, space), d_radius_interval(B, space)
    if not space.exact:
        why = "norms are estimates for this p"
        parts += [vacuous("d-product", why), vacuous("d-convex", why)]
    elif RA.empty or RB.empty:
        why = "R(A) or R(B) empty"
        parts += [vacuous("d-product", why), vacuous("d-convex", why)]
    else:
        worst_p, worst_c, pairs = -math.inf, -math.inf, []
        for r in _radii(RA):
            for s in _radii(RB):
                gp = d_gap(AB, r * s, space)
                gc = d_gap(C, alpha * r + (1 - alpha) * s, space)
                worst_p, worst_c = max(worst_p, gp), max(worst_c, gc)
                pairs.append({"r": r, "s": s, "gap_product": gp, "gap_convex": gc})
        parts.append(compare("d-product", worst_p, 0.0, tol))
        parts.append(compare("d-convex", worst_c, 0.0, tol))
        parts[-1].details["evaluations"] = pairs
    return combine("closure", parts, {"alpha": alpha, "R_A": RA, "R_B": RB, "seed": cfg.seed})


@dataclass(frozen=True)
class ClassReport:
    halperin_K: HalperinEstimate
    d_interval: RadiusInterval
    wprime_defect: WPrimeDefect
    s_class_evidence: object  # OmegaEstimate
    seed: int
    samples: int


def class_report(T, space: SpaceDescriptor, cfg: SamplingConfig | None = None) -> ClassReport:
    """All class certificates for one operator; class (S) evidence is the omega estimate."""
    from .apostol import omega

    cfg = cfg or SamplingConfig()
    return ClassReport(
        halperin_constant(T, space, cfg),
        d_radius_interval(T, space, cfg.seed),
        wprime_defect(T, space, cfg),
        omega(T, space, cfg),
        cfg.seed,
        cfg.samples,
    )

"""Powers of contractions: convergence, the ergodic projection, decay of
consecutive differences, and the fixed-space formulas for semigroup elements.

Spaces are finite-dimensional here, so strong and uniform convergence of
powers coincide and Ran(I - T) is always closed.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import semigroup
from ._search import SamplingConfig
from .classes import wprime_defect
from .errors import InputError, PreconditionError, StructuralError
from .linalg import (RANK_TOL, SpaceDescriptor, as_matrix, column_space, exact_norm,
                     null_space, operator_norm, same_subspace)
from .projections import is_orthoprojection
from .report import CheckResult, combine, compare, vacuous
from .spectral import kt_bound, kt_bound_from_omega, spectral_report

NORM_TOL = 1e-8
STRICT_GAP = 1e-6
AUDIT_EVERY = 1024


def _norm(A, space: SpaceDescriptor, seed: int = 0) -> float:
    if space.exact:
        return exact_norm(A, space.p)
    return operator_norm(A, space, seed, starts=8).value


def _power(T, n):
    """T^n by binary powering; used to audit the running product."""
    R = np.eye(T.shape[0], dtype=np.complex128)
    B = T
    while n:
        if n & 1:
            R = R @ B
        B = B @ B
        n >>= 1
    return R


def _require_contraction(T, space):
    nrm = _norm(T, space)
    if nrm > 1 + NORM_TOL:
        raise PreconditionError(f"not a contraction: ||T|| = {nrm:.12g}")
    return nrm


@dataclass(frozen=True)
class IterationReport:
    """Outcome of iterating T.

    ``diffs[k]`` is ``||T^(k+1) - T^(k+2)||`` and ``power_norms[k]`` is
    ``||T^(k+1)||``. ``limit_residual`` is ``||T^n_stop - limit||``.
    ``cesaro_mean`` is the mean of ``T^0 .. T^(n_stop-1)``; ``cesaro_limit``
    is the ergodic projection those means converge to (absent if 1 is not a
    semisimple eigenvalue, which a contraction rules out).
    """

    diffs: np.ndarray
    power_norms: np.ndarray
    converged: bool
    n_stop: int
    limit: np.ndarray | None
    limit_residual: float
    cesaro_mean: np.ndarray
    cesaro_limit: np.ndarray | None
    decay_bound_check: CheckResult
    stop_reason: str
    audit_drift: float
    semantics: str = "uniform"

    def to_json(self):
        return {
            "converged": self.converged,
            "n_stop": self.n_stop,
            "stop_reason": self.stop_reason,
            "semantics": self.semantics,
            "limit": self.limit,
            "limit_residual": self.limit_residual,
            "cesaro_mean": self.cesaro_mean,
            "cesaro_limit": self.cesaro_limit,
            "decay_bound_check": self.decay_bound_check,
            "audit_drift": self.audit_drift,
            "diffs": self.diffs,
            "power_norms": self.power_norms,
        }

    def csv_rows(self):
        """(n, ||T^n - T^(n+1)||, ||T^n||) for n = 1, 2, ..."""
        return [(k + 1, float(d), float(m)) for k, (d, m) in enumerate(zip(self.diffs, self.power_norms))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "diff", "power_norm"])
        w.writerows(self.csv_rows())
        return buf.getvalue()


def power_diffs(T, space: SpaceDescriptor, n_max: int):
    """``||T^n - T^(n+1)||`` and ``||T^n||`` for n = 1..n_max, no early exit."""
    T = as_matrix(T)
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    diffs, pn = np.empty(n_max), np.empty(n_max)
    P = T.copy()
    for k in range(n_max):
        nxt = P @ T
        diffs[k] = _norm(P - nxt, space)
        pn[k] = _norm(P, space)
        P = nxt
    return diffs, pn


def _tail_check(diffs, T, space):
    rep = spectral_report(T)
    a = 0.0 if rep.amplitude is None else rep.amplitude
    name = "decay-bound"
    if a >= 2 - 1e-12:
        return vacuous(name, "amplitude 2: bound undefined", {"amplitude": a})
    lo = len(diffs) // 2
    tail = float(np.max(diffs[max(lo - 1, 0):])) if len(diffs) else 0.0
    return compare(name, tail, kt_bound(a), 1e-6,
                   details={"amplitude": rep.amplitude, "tau": rep.tau,
                            "window": [max(lo, 1), len(diffs)]})


def iterate(T, space: SpaceDescriptor, n_max: int = 100_000, tol: float = 1e-10) -> IterationReport:
    """Multiply out T^n until the powers settle or ``n_max`` is reached.

    Stops when ``||T^n - T^(n+1)|| <= tol`` and also ``||T^n - T^(2n)|| <= tol``;
    small consecutive differences alone do not imply convergence. If some
    ``||T^m|| < 1 - 1e-6`` the limit is 0, and repeated squaring drives
    ``T^(m 2^k)`` below ``tol`` to certify it. Running out of steps is
    reported with ``converged=False``, not raised.
    """
    T = as_matrix(T)
    if T.shape[0] != space.dim:
        raise InputError(f"operator is {T.shape[0]}x{T.shape[0]}, space has dimension {space.dim}")
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    _require_contraction(T, space)
    n = T.shape[0]
    diffs, pn = [], []
    P = T.copy()
    csum = np.eye(n, dtype=np.complex128)  # T^0 + ... + T^(k-1)
    drift = 0.0
    converged, limit, residual, reason = False, None, math.nan, "n_max"
    k = 1
    while True:
        csum += P
        nxt = P @ T
        d = _norm(P - nxt, space)
        m = _norm(P, space)
        diffs.append(d)
        pn.append(m)
        if k % AUDIT_EVERY == 0:
            drift = max(drift, _norm(P - _power(T, k), space))
        if d <= tol:
            P2 = P @ P
            gap = _norm(P - P2, space)
            if gap <= tol:
                converged, limit, residual, reason = True, P2, gap, "doubling"
                break
        if m < 1 - STRICT_GAP:
            S, j = P, k
            while _norm(S, space) > tol and j < 2 ** 62:
                S, j = S @ S, 2 * j
            limit = np.zeros_like(T)
            residual = _norm(S, space)
            converged, reason = True, "strict-contraction"
            k = j
            break
        if k >= n_max:
            residual = _norm(P - P @ P, space)
            break
        P = nxt
        k += 1

    diffs_arr, pn_arr = np.array(diffs), np.array(pn)
    n_mean = len(diffs)
    try:
        E = ergodic_projection(T)
    except StructuralError:
        E = None
    return IterationReport(
        diffs=diffs_arr,
        power_norms=pn_arr,
        converged=converged,
        n_stop=k,
        limit=limit,
        limit_residual=residual,
        cesaro_mean=(csum - P) / n_mean if n_mean else csum,
        cesaro_limit=E,
        decay_bound_check=_tail_check(diffs_arr, T, space),
        stop_reason=reason,
        audit_drift=drift,
    )


def cesaro_mean(T, N: int) -> np.ndarray:
    """(1/N) sum_{k<N} T^k."""
    T = as_matrix(T)
    S = np.zeros_like(T)
    P = np.eye(T.shape[0], dtype=np.complex128)
    for _ in range(N):
        S += P
        P = P @ T
    return S / N


def ergodic_projection(T, tol: float = RANK_TOL) -> np.ndarray:
    """Projection onto Ker(I - T) along Ran(I - T).

    Both subspaces come from one SVD of ``I - T``. They are complementary
    exactly when 1 is a semisimple eigenvalue; otherwise a structural error
    is raised.
    """
    T = as_matrix(T)
    n = T.shape[0]
    D = np.eye(n) - T
    L = null_space(D, tol)
    M = column_space(D, tol)
    if L.shape[1] + M.shape[1] != n:
        raise StructuralError(f"dim Ker(I-T) + dim Ran(I-T) = {L.shape[1] + M.shape[1]} != {n}")
    if L.shape[1] == 0:
        return np.zeros((n, n), dtype=np.complex128)
    S = np.hstack([L, M])
    smin = np.linalg.svd(S, compute_uv=False)[-1]
    if smin < math.sqrt(tol):
        raise StructuralError(f"eigenvalue 1 is not semisimple (subspace gap {smin:.3g})")
    J = np.zeros(n)
    J[: L.shape[1]] = 1.0
    E = (S * J) @ np.linalg.inv(S)
    defect = max(np.abs(E @ E - E).max(), np.abs(T @ E - E).max(), np.abs(E @ T - E).max())
    if defect > 1e-8 * max(1.0, np.abs(E).max()):
        raise StructuralError(f"ergodic projection defect {defect:.3g}")
    return E


def fixed_space(T, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of Ker(I - T)."""
    T = as_matrix(T)
    return null_space(np.eye(T.shape[0]) - T, tol)


def common_fixed_space(operators, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the intersection of Ker(I - A_k), by one stacked null space."""
    ops = [as_matrix(A) for A in operators]
    n = ops[0].shape[0]
    return null_space(np.vstack([np.eye(n) - A for A in ops]), tol)


def check_range_formula(expr, generators, space: SpaceDescriptor, tol: float = 1e-6,
                        claim_wprime: bool = False, seed: int = 0) -> CheckResult:
    """Compare the fixed space of T = evaluate(expr) with the intersection of
    Ran(P_k) over the generators that occur in ``expr``.

    Ran(P_k) = Ker(I - P_k) for a projection, so both sides are null spaces.
    Generator hypotheses (contractive projection; (W') when claimed) are
    certified and reported, but the comparison runs either way.
    """
    gens = [as_matrix(G) for G in generators]
    bad = semigroup.validate(expr, len(gens))
    if bad:
        raise InputError("invalid expression: " + "; ".join(bad))
    T = semigroup.evaluate(expr, gens)
    F = sorted(semigroup.index_set(expr))
    hyp = {}
    for k in F:
        rep = is_orthoprojection(gens[k - 1], space, seed)
        h = {"orthoprojection": bool(rep), "verdict": rep.verdict}
        if claim_wprime:
            w = wprime_defect(gens[k - 1], space, SamplingConfig(seed=seed)) if rep else None
            h["wprime_defect"] = None if w is None else w.value
            h["wprime"] = w is not None and w.value <= 1e-6
        hyp[k] = h
    certified = all(h["orthoprojection"] and h.get("wprime", True) for h in hyp.values())

    lhs = fixed_space(T)
    rhs = common_fixed_space([gens[k - 1] for k in F])
    same, worst = same_subspace(lhs, rhs, tol)
    res = compare("range-formula", worst, 0.0, tol,
                  details={"index_set": F, "dim_fixed": lhs.shape[1], "dim_intersection": rhs.shape[1],
                           "max_angle": worst, "hypotheses": hyp,
                           "hypothesis_status": "certified" if certified else "hypothesis not certified"})
    if not same and res.passed:
        res.verdict = "fail"
    return res


def check_kernel_formulas(A, B, alpha: float = 0.5, tol: float = 1e-8) -> CheckResult:
    """Ker(I - AB) and Ker(I - (alpha A + (1 - alpha) B)) both equal Ker(I - A) and Ker(I - B) intersected."""
    A, B = as_matrix(A), as_matrix(B)
    both = common_fixed_space([A, B])
    parts = []
    for name, T in (("kernel-product", A @ B), ("kernel-convex", alpha * A + (1 - alpha) * B)):
        K = fixed_space(T)
        same, worst = same_subspace(K, both, tol)
        r = compare(name, worst, 0.0, tol, details={"dim": K.shape[1], "dim_intersection": both.shape[1]})
        if not same:
            r.verdict = "fail"
        parts.append(r)
    return combine("kernel-formulas", parts, {"alpha": alpha})


def check_decay_bound(T, space: SpaceDescriptor, n_max: int = 1000,
                      cfg: SamplingConfig | None = None) -> CheckResult:
    """Largest ``||T^n - T^(n+1)||`` over ``n in [n_max/2, n_max]`` against
    ``2a / sqrt(4 - a^2)``, a the amplitude (0 for an empty boundary spectrum).

    With ``cfg`` the omega-based bound is computed too, for context only.
    """
    T = as_matrix(T)
    _require_contraction(T, space)
    diffs, _ = power_diffs(T, space, n_max)
    res = _tail_check(diffs, T, space)
    res.details["n_max"] = n_max
    if cfg is not None:
        from .apostol import omega

        w = omega(T, space, cfg).extrapolated
        res.details["omega"] = w
        res.details["omega_bound"] = kt_bound_from_omega(w) if w < 2 else math.inf
    return res

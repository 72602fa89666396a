"""Dense complex linear algebra on l^p spaces.

Operators are plain ``numpy`` complex128 arrays. A :class:`SpaceDescriptor`
fixes the vector norm, and every induced operator norm is taken with respect
to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

EXACT_P = (1.0, 2.0, math.inf)
RANK_TOL = 1e-8


def dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class SpaceDescriptor:
    """The space l^p_dim over the complex field. ``p`` may be ``math.inf``."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dim must be a positive integer, got {self.dim!r}")
        if not (self.p >= 1):
            raise InputError(f"p must be >= 1, got {self.p!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))

    @property
    def exact(self) -> bool:
        """True when induced operator norms have a closed form (p in {1, 2, inf})."""
        return self.p in EXACT_P

    @property
    def q(self) -> float:
        """Dual exponent, 1/p + 1/q = 1."""
        return dual_exponent(self.p)

    def dual(self) -> "SpaceDescriptor":
        return SpaceDescriptor(self.dim, self.q)

    def to_json(self) -> dict:
        return {"dim": self.dim, "p": "inf" if math.isinf(self.p) else self.p}

    @classmethod
    def from_json(cls, obj) -> "SpaceDescriptor":
        try:
            p = obj.get("p", 2)
            p = math.inf if p in ("inf", "Infinity", None) else float(p)
            return cls(int(obj["dim"]), p)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"bad space descriptor {obj!r}: {exc}") from exc


@dataclass(frozen=True)
class NormEstimate:
    """An operator norm. When ``exact`` is False, ``value`` is attained by
    ``maximizer`` and is therefore a lower bound of the true norm."""

    value: float
    exact: bool
    iterations: int = 0
    seed: int = 0
    maximizer: np.ndarray | None = field(default=None, compare=False)

    def __float__(self):
        return float(self.value)


# --- matrices ---------------------------------------------------------------

def as_matrix(A, square: bool = True) -> np.ndarray:
    """Coerce ``A`` to a finite complex128 2-d array."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return M


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise InputError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise InputError(f"vector has length {v.shape[0]}, space has dimension {dim}")
    return v


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    rows, cols = A.shape
    return {
        "rows": rows,
        "cols": cols,
        "entries": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
        if len(entries) != rows * cols:
            raise InputError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        flat = [complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in entries]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"bad matrix JSON: {exc}") from exc
    return as_matrix(np.array(flat, dtype=np.complex128).reshape(rows, cols), square=False)


def vector_to_json(x) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(x, dtype=np.complex128)]


def compose(A, B) -> np.ndarray:
    """Matrix product ``AB`` (apply ``B`` first)."""
    A = as_matrix(A, square=False)
    B = as_matrix(B, square=False)
    if A.shape[1] != B.shape[0]:
        raise InputError(f"cannot compose {A.shape} with {B.shape}")
    return A @ B


def adjoint(A) -> np.ndarray:
    """Conjugate transpose. As an operator on l^p it acts on the dual l^q."""
    return as_matrix(A).conj().T


# --- vector norms -----------------------------------------------------------

def norms(X, p: float) -> np.ndarray:
    """l^p norms along the last axis of ``X``."""
    a = np.abs(X)
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.einsum("...i,...i->...", a, a))
    # scale first so large p does not overflow
    m = a.max(axis=-1, keepdims=True)
    m = np.where(m == 0, 1.0, m)
    return m[..., 0] * ((a / m) ** p).sum(axis=-1) ** (1.0 / p)


def vec_norm(x, space: SpaceDescriptor) -> float:
    x = as_vector(x, space.dim)
    return float(norms(x, space.p))


def normalize(X, p: float) -> np.ndarray:
    """Scale rows of ``X`` to unit l^p norm; zero rows are left alone."""
    n = norms(X, p)
    n = np.where(n == 0, 1.0, n)
    return X / n[..., None]


def duality_map(Y, p: float) -> np.ndarray:
    """Norming functionals: rows ``g`` with ||g||_q = 1 and <y, g> = ||y||_p.

    Returned as the vector of conjugate coefficients, so ``sum(conj(g) * y)``
    is the pairing.
    """
    a = np.abs(Y)
    phase = np.exp(1j * np.angle(Y))
    if math.isinf(p):
        mx = a.max(axis=-1, keepdims=True)
        G = np.where(a >= mx * (1 - 1e-12), phase, 0)
        return G / np.maximum(np.abs(G).sum(axis=-1, keepdims=True), 1e-300)
    if p == 1:
        return np.where(a > 0, phase, 1.0 + 0j)
    G = phase * a ** (p - 1)
    n = norms(Y, p)[..., None]
    n = np.where(n == 0, 1.0, n)
    return G / n ** (p - 1)


def random_unit_vectors(rng: np.random.Generator, count: int, dim: int, p: float) -> np.ndarray:
    """Complex Gaussian directions normalized in l^p."""
    X = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return normalize(X, p)


# --- operator norms ---------------------------------------------------------

def exact_norm(A, p: float) -> float:
    """Closed-form induced norm for p in {1, 2, inf}."""
    A = np.asarray(A)
    if p == 1:
        return float(np.abs(A).sum(axis=0).max()) if A.size else 0.0
    if math.isinf(p):
        return float(np.abs(A).sum(axis=1).max()) if A.size else 0.0
    if p == 2:
        return float(np.linalg.norm(A, 2)) if A.size else 0.0
    raise InputError(f"no closed-form operator norm for p={p}")


def _power_ascent(A, X, p, iters=100):
    """Boyd/Higham duality iteration for max ||Ax||_p on the unit sphere,
    run on all rows of ``X`` at once. Returns the final rows and their values."""
    q = dual_exponent(p)
    AH = A.conj().T
    best_X = X.copy()
    best = norms(X @ A.T, p)
    for it in range(iters):
        Y = X @ A.T
        Z = duality_map(Y, p) @ AH.T
        X = duality_map(Z, q)
        X = normalize(X, p)
        val = norms(X @ A.T, p)
        improved = val > best * (1 + 1e-14)
        best_X[improved] = X[improved]
        best = np.maximum(best, val)
        if not improved.any():
            return best_X, best, it + 1
    return best_X, best, iters


def operator_norm(A, space: SpaceDescriptor, seed: int = 0, starts: int = 32,
                  iters: int = 100) -> NormEstimate:
    """Induced operator norm of ``A`` on ``space``.

    Exact for p in {1, 2, inf}. For other p the result is the best value of
    ``||Ax||_p`` found by the duality-map ascent from ``starts`` random unit
    vectors (plus coordinate and all-ones starts), hence a lower bound.
    """
    A = as_matrix(A)
    if A.shape[0] != space.dim:
        raise InputError(f"matrix is {A.shape[0]}x{A.shape[0]}, space has dimension {space.dim}")
    if space.exact:
        return NormEstimate(exact_norm(A, space.p), True, 0, seed)
    n = space.dim
    rng = np.random.default_rng(seed)
    X = np.vstack([
        random_unit_vectors(rng, starts, n, space.p),
        np.eye(n, dtype=np.complex128),
        normalize(np.ones((1, n), dtype=np.complex128), space.p),
    ])
    X, vals, used = _power_ascent(A, X, space.p, iters)
    # ties go to the lowest start index
    k = int(np.argmax(vals))
    return NormEstimate(float(vals[k]), False, used, seed, X[k])


def norm_value(A, space: SpaceDescriptor, seed: int = 0) -> float:
    return operator_norm(A, space, seed).value


# --- subspaces --------------------------------------------------------------

def null_space(A, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the right singular vectors of ``A``
    whose singular value is at most ``tol``."""
    A = as_matrix(A, square=False)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, Vh = np.linalg.svd(A)
    sv = np.zeros(n)
    sv[: s.size] = s
    return Vh[sv <= tol].conj().T


def column_space(A, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the span of left singular vectors with singular value > tol."""
    A = as_matrix(A, square=False)
    U, s, _ = np.linalg.svd(A)
    return U[:, : int((s > tol).sum())]


def orthonormal_basis(vectors, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the span of the columns of ``vectors``."""
    V = np.asarray(vectors, dtype=np.complex128)
    if V.size == 0:
        return V.reshape(V.shape[0] if V.ndim == 2 else 0, 0)
    return column_space(V, tol)


def principal_angles(U, V) -> np.ndarray:
    """Principal angles (ascending) between the column spans of ``U`` and ``V``.

    Bases are re-orthonormalized. Small angles come from the sines of
    ``(I - QQ*)W`` rather than arccos of the cosines, which loses half the
    digits near zero.
    """
    Q = orthonormal_basis(U)
    W = orthonormal_basis(V)
    k = min(Q.shape[1], W.shape[1])
    if k == 0:
        return np.zeros(0)
    if Q.shape[1] < W.shape[1]:
        Q, W = W, Q
    cos = np.clip(np.linalg.svd(Q.conj().T @ W, compute_uv=False), 0.0, 1.0)
    sin = np.linalg.svd(W - Q @ (Q.conj().T @ W), compute_uv=False)
    sin = np.clip(np.sort(sin), 0.0, 1.0)
    # cos is descending, sin ascending: both index the angles smallest-first
    ang = np.where(cos ** 2 < 0.5, np.arccos(cos), np.arcsin(sin))
    return np.sort(ang)


def same_subspace(U, V, tol: float = 1e-6) -> tuple[bool, float]:
    """Whether two column spans coincide up to principal-angle tolerance.

    Returns the verdict and the largest angle (``pi/2`` on a dimension mismatch).
    """
    Q, W = orthonormal_basis(U), orthonormal_basis(V)
    if Q.shape[1] != W.shape[1]:
        return False, math.pi / 2
    ang = principal_angles(Q, W)
    worst = float(ang.max()) if ang.size else 0.0
    return worst <= tol, worst

"""Building and recognizing projections, orthoprojections and hermitian projections."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, InputError
from .expm import expm, projection_exp
from .linalg import SpaceDescriptor, as_matrix, exact_norm, operator_norm

IDEMPOTENT_TOL = 1e-10
KINDS = ("hilbert-span", "coordinate", "oblique")


@dataclass(frozen=True)
class ProjectionSpec:
    """Recipe for a projection.

    ``index_set`` uses 1-based coordinates, like generator indices elsewhere.
    """

    kind: str
    range_basis: tuple = ()
    kernel_basis: tuple = ()
    index_set: tuple = ()

    @classmethod
    def from_json(cls, obj) -> "ProjectionSpec":
        def vecs(key):
            out = []
            for v in obj.get(key, []) or []:
                out.append(tuple(complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
                                 for e in v))
            return tuple(out)
        try:
            kind = obj["kind"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"projection spec needs a 'kind': {obj!r}") from exc
        if kind not in KINDS:
            raise InputError(f"unknown projection kind {kind!r}")
        return cls(kind, vecs("range_basis"), vecs("kernel_basis"),
                   tuple(int(i) for i in obj.get("index_set", []) or []))

    def to_json(self) -> dict:
        enc = lambda vs: [[[z.real, z.imag] for z in v] for v in vs]
        return {"kind": self.kind, "range_basis": enc(self.range_basis),
                "kernel_basis": enc(self.kernel_basis), "index_set": list(self.index_set)}


def _basis(vectors, dim, what):
    if len(vectors) == 0:
        return np.zeros((dim, 0), dtype=np.complex128)
    B = np.array(vectors, dtype=np.complex128).T
    if B.shape[0] != dim:
        raise ConstructionError(f"{what} vectors have length {B.shape[0]}, space has dimension {dim}")
    return B


def make_projection(spec: ProjectionSpec, space: SpaceDescriptor) -> np.ndarray:
    """Matrix of the projection described by ``spec``.

    hilbert-span gives the Euclidean orthoprojection ``B (B*B)^-1 B*`` onto the
    span of the range basis (computed as ``QQ*`` from a QR factorization),
    coordinate gives a diagonal 0/1 matrix, oblique the projection with the
    given range along the given kernel.
    """
    n = space.dim
    if spec.kind == "coordinate":
        d = np.zeros(n)
        for i in spec.index_set:
            if not 1 <= i <= n:
                raise ConstructionError(f"coordinate {i} outside 1..{n}")
            d[i - 1] = 1.0
        return np.diag(d).astype(np.complex128)

    R = _basis(spec.range_basis, n, "range")
    if R.shape[1] and np.linalg.matrix_rank(R) < R.shape[1]:
        raise ConstructionError("range basis is linearly dependent")

    if spec.kind == "hilbert-span":
        if R.shape[1] == 0:
            return np.zeros((n, n), dtype=np.complex128)
        Q, _ = np.linalg.qr(R)
        return Q @ Q.conj().T

    if spec.kind == "oblique":
        K = _basis(spec.kernel_basis, n, "kernel")
        S = np.hstack([R, K])
        if S.shape[1] != n or np.linalg.matrix_rank(S) < n:
            raise ConstructionError("range and kernel bases must be complementary")
        D = np.diag([1.0] * R.shape[1] + [0.0] * K.shape[1])
        return S @ D @ np.linalg.inv(S)

    raise ConstructionError(f"unknown projection kind {spec.kind!r}")


def orthoprojection_onto(vectors) -> np.ndarray:
    """Euclidean orthoprojection onto the span of the columns of ``vectors``."""
    V = np.asarray(vectors, dtype=np.complex128)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[1] == 0:
        return np.zeros((V.shape[0], V.shape[0]), dtype=np.complex128)
    Q, _ = np.linalg.qr(V)
    return Q @ Q.conj().T


def idempotency_defect(P) -> float:
    P = as_matrix(P)
    return float(np.abs(P @ P - P).max()) if P.size else 0.0


@dataclass(frozen=True)
class OrthoReport:
    """Outcome of :func:`is_orthoprojection`; truthy iff the verdict is positive."""

    ok: bool
    idempotency_defect: float
    norm: float
    exact: bool
    verdict: str
    seed: int = 0
    maximizer: np.ndarray | None = field(default=None, compare=False)

    def __bool__(self):
        return self.ok


def is_orthoprojection(P, space: SpaceDescriptor, seed: int = 0) -> OrthoReport:
    """Is ``P`` an idempotent contraction on ``space``?

    For p outside {1, 2, inf} the norm is a lower-bound estimate, so a positive
    answer only means the contraction property was not falsified.
    """
    P = as_matrix(P)
    defect = idempotency_defect(P)
    est = operator_norm(P, space, seed)
    if defect > IDEMPOTENT_TOL:
        return OrthoReport(False, defect, est.value, est.exact, "not a projection", seed, est.maximizer)
    if est.exact:
        ok = est.value <= 1 + 1e-10
        verdict = "orthoprojection" if ok else "not a contraction"
    else:
        ok = est.value <= 1 + 1e-8
        verdict = "not falsified" if ok else "not a contraction"
    return OrthoReport(ok, defect, est.value, est.exact, verdict, seed, est.maximizer)


def default_t_grid(points: int = 129) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, points)


def hermitian_defect(T, space: SpaceDescriptor, t_grid=None, seed: int = 0) -> float:
    """max over the grid of | ||exp(itT)|| - 1 |.

    Idempotent ``T`` uses the closed form ``(I - T) + e^{it} T``; anything else
    goes through :func:`expm`. Norms are exact for p in {1, 2, inf} and
    lower-bound estimates otherwise.
    """
    T = as_matrix(T)
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid.size == 0:
        raise InputError("t_grid must be nonempty")
    is_proj = idempotency_defect(T) <= IDEMPOTENT_TOL
    worst = 0.0
    for t in grid:
        E = projection_exp(T, t) if is_proj else expm(1j * t * T)
        nrm = exact_norm(E, space.p) if space.exact else operator_norm(E, space, seed).value
        worst = max(worst, abs(nrm - 1.0))
    return worst

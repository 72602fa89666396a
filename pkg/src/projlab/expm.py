"""Matrix exponential by scaling and squaring with a diagonal Pade(6) approximant."""
from __future__ import annotations

import math

import numpy as np

from .linalg import as_matrix

PADE_DEGREE = 6


def _pade_coefficients(q: int) -> list[float]:
    # c_k = (2q - k)! q! / ((2q)! k! (q - k)!)
    f = math.factorial
    return [f(2 * q - k) * f(q) / (f(2 * q) * f(k) * f(q - k)) for k in range(q + 1)]


_C = _pade_coefficients(PADE_DEGREE)


def expm(A) -> np.ndarray:
    """exp(A). ``A`` is scaled by ``2**-s`` until its 1-norm is at most 1/2,
    the Pade approximant is evaluated, and the result squared ``s`` times."""
    A = as_matrix(A)
    n = A.shape[0]
    norm1 = float(np.abs(A).sum(axis=0).max()) if n else 0.0
    s = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    X = A / (2.0 ** s)
    eye = np.eye(n, dtype=np.complex128)
    N = _C[0] * eye
    D = _C[0] * eye
    P = eye
    for k in range(1, PADE_DEGREE + 1):
        P = P @ X
        N = N + _C[k] * P
        D = D + ((-1) ** k) * _C[k] * P
    E = np.linalg.solve(D, N)
    for _ in range(s):
        E = E @ E
    return E


def projection_exp(P, t: float) -> np.ndarray:
    """exp(itP) = (I - P) + e^{it} P, valid for any idempotent ``P``."""
    P = as_matrix(P)
    return (np.eye(P.shape[0]) - P) + np.exp(1j * t) * P

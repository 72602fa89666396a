"""Eigenvalues of dense complex matrices.

Balancing, Householder reduction to upper Hessenberg form, then explicit
single-shift QR sweeps with Wilkinson shifts and deflation. Every returned
eigenvalue carries a residual certificate: a unit vector ``v`` minimizing
``||Av - lambda v||_2`` (the smallest right singular vector of ``A - lambda I``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .linalg import as_matrix, null_space

EIG_TOL = 1e-10
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray      # (n,) complex, with multiplicity
    residuals: np.ndarray   # (n,) ||A v_k - lambda_k v_k||_2
    vectors: np.ndarray     # (n, n) columns v_k, unit in l^2
    iterations: int

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def balance(A: np.ndarray) -> np.ndarray:
    """Parlett-Reinsch diagonal scaling by powers of two; similar to ``A``."""
    B = A.copy()
    n = B.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            off = np.arange(n) != i
            c = np.abs(B[off, i]).sum()
            r = np.abs(B[i, off]).sum()
            if c == 0 or r == 0:
                continue
            g, f, s = r / radix, 1.0, c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                B[i, :] /= f
                B[:, i] *= f
    return B


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Unitary similarity to upper Hessenberg form via Householder reflectors."""
    H = np.array(A, dtype=np.complex128)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0
    return H


def _eig2(a, b, c, d):
    """Both eigenvalues of [[a, b], [c, d]] by the quadratic formula."""
    m = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c + 0j)
    l1 = m + disc if abs(m + disc) >= abs(m - disc) else m - disc
    det = a * d - b * c
    # det / l1 avoids cancellation in m - disc, but is useless when l1 is
    # itself at rounding level (near-defective block); take the smaller error
    if abs(l1) * (abs(m) + abs(disc)) > abs(a * d) + abs(b * c):
        return l1, det / l1
    return l1, 2 * m - l1


def _givens(a, b):
    r = np.hypot(abs(a), abs(b))
    if r == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, 1.0 + 0j
    return abs(a) / r, (a / abs(a)) * np.conj(b) / r


def _qr_sweep(W, shift):
    """One explicit shifted QR step ``W - sI = QR, W <- RQ + sI`` in place."""
    m = W.shape[0]
    idx = np.arange(m)
    W[idx, idx] -= shift
    rots = []
    for k in range(m - 1):
        c, s = _givens(W[k, k], W[k + 1, k])
        G = np.array([[c, s], [-np.conj(s), c]])
        W[k:k + 2, k:] = G @ W[k:k + 2, k:]
        rots.append(G)
    for k, G in enumerate(rots):
        W[:k + 2, k:k + 2] = W[:k + 2, k:k + 2] @ G.conj().T
    W[idx, idx] += shift


def _hessenberg_qr(H, max_iter):
    n = H.shape[0]
    vals = np.zeros(n, dtype=np.complex128)
    found = np.zeros(n, dtype=bool)
    hnorm = np.abs(H).max() if n else 0.0
    hi, total, since_deflate = n - 1, 0, 0
    while hi >= 0:
        l = hi
        while l > 0:
            scale = abs(H[l, l]) + abs(H[l - 1, l - 1])
            if scale == 0:
                scale = hnorm
            if abs(H[l, l - 1]) <= _EPS * scale:
                H[l, l - 1] = 0
                break
            l -= 1
        if l == hi:
            vals[hi], found[hi] = H[hi, hi], True
            hi -= 1
            since_deflate = 0
            continue
        if l == hi - 1:
            vals[hi - 1], vals[hi] = _eig2(H[l, l], H[l, hi], H[hi, l], H[hi, hi])
            found[[hi - 1, hi]] = True
            hi -= 2
            since_deflate = 0
            continue
        if total >= max_iter:
            raise NumericalError(
                f"shifted QR did not converge after {total} iterations",
                partial=vals[found],
            )
        a, b, c, d = H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
        if since_deflate and since_deflate % 10 == 0:
            # exceptional shift to break cycles
            shift = d + 1.5 * abs(c) * np.exp(1j * since_deflate)
        else:
            l1, l2 = _eig2(a, b, c, d)
            shift = l1 if abs(l1 - d) <= abs(l2 - d) else l2
        W = H[l:hi + 1, l:hi + 1]
        _qr_sweep(W, shift)
        H[l:hi + 1, l:hi + 1] = W
        total += 1
        since_deflate += 1
    return vals, total


def _ldexp(Z, k):
    return np.ldexp(Z.real, k) + 1j * np.ldexp(Z.imag, k)


def residual_certificate(A, lam):
    """Smallest singular value of ``A - lam I`` and its right singular vector."""
    n = A.shape[0]
    _, s, Vh = np.linalg.svd(A - lam * np.eye(n))
    return float(s[-1]), Vh[-1].conj()


def eigenvalues(A, tol: float = EIG_TOL) -> EigenResult:
    """All eigenvalues of ``A`` with multiplicity, each with a residual certificate.

    The residual of each eigenvalue must be at most ``tol * max(1, ||A||_2)``;
    when the raw QR value misses it, one Rayleigh-quotient refinement is tried
    before giving up with :class:`NumericalError`.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    A = as_matrix(A)
    n = A.shape[0]
    if n == 0:
        return EigenResult(np.zeros(0, complex), np.zeros(0), np.zeros((0, 0), complex), 0)
    # work at unit scale with negligible entries flushed, so subnormal or huge
    # inputs cannot overflow the rotations
    amax = float(max(np.abs(A.real).max(), np.abs(A.imag).max()))
    if amax == 0:
        return EigenResult(np.zeros(n, complex), np.zeros(n), np.eye(n, dtype=complex), 0)
    _, e = np.frexp(amax)
    S = _ldexp(A, -int(e))  # exact power-of-two scaling, safe for subnormals
    amax = float(np.ldexp(1.0, int(e)))
    S[np.abs(S) < _EPS * _EPS] = 0
    vals, its = _hessenberg_qr(hessenberg(balance(S)), 100 * n * n)
    # residuals are certified on S and scaled back; S differs from A / amax by
    # less than n eps^2 in norm, far below any usable tolerance
    scale = max(1.0, float(np.linalg.norm(S, 2)) * amax)
    res = np.zeros(n)
    vecs = np.zeros((n, n), dtype=np.complex128)
    for k, mu in enumerate(vals):
        r, v = residual_certificate(S, mu)
        if r * amax > tol * scale:
            mu2 = complex(v.conj() @ S @ v)
            r2, v2 = residual_certificate(S, mu2)
            if r2 < r:
                vals[k], r, v = mu2, r2, v2
        if r * amax > tol * scale:
            raise NumericalError(
                f"eigenvalue {vals[k] * amax} has residual {r * amax:.3e} > {tol * scale:.3e}",
                partial=vals[:k] * amax,
            )
        res[k], vecs[:, k] = r * amax, v
    vals = vals * amax
    order = np.lexsort((vals.imag, vals.real))
    return EigenResult(vals[order], res[order], vecs[:, order], its)


def spectral_radius(A) -> float:
    vals = eigenvalues(A).values
    return float(np.abs(vals).max()) if vals.size else 0.0


def eigenspace(A, lam, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the approximate kernel of ``A - lam I``."""
    A = as_matrix(A)
    return null_space(A - lam * np.eye(A.shape[0]), tol)

"""Boundary spectrum, amplitude, primitivity, and Katznelson-Tzafriri type bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._search import SamplingConfig
from .eigen import eigenspace, eigenvalues, residual_certificate
from .errors import DomainError
from .linalg import SpaceDescriptor, as_matrix, normalize, operator_norm
from .report import compare, vacuous

BAND = 1e-8


@dataclass(frozen=True)
class SpectralReport:
    spectrum: np.ndarray
    residuals: np.ndarray
    boundary: np.ndarray
    amplitude: float | None  # None when the boundary spectrum is empty
    tau: float | None
    primitive: bool
    band: float

    @property
    def boundary_empty(self) -> bool:
        return self.boundary.size == 0

    def to_json(self) -> dict:
        return {
            "eigenvalues": [{"value": [float(z.real), float(z.imag)], "residual": float(r)}
                            for z, r in zip(self.spectrum, self.residuals)],
            "boundary": [[float(z.real), float(z.imag)] for z in self.boundary],
            "amplitude": "empty" if self.amplitude is None else self.amplitude,
            "tau": "empty" if self.tau is None else self.tau,
            "primitive": self.primitive,
            "band": self.band,
        }


def amplitude_to_tau(a: float) -> float:
    return 2.0 * math.asin(min(1.0, a / 2.0))


def spectral_report(T, band: float = BAND) -> SpectralReport:
    """Eigenvalues with residuals, the boundary part ``||lambda| - 1| <= band``,
    the amplitude ``max |lambda - 1|`` over it and its arc length ``tau``.

    ``primitive`` means the boundary spectrum lies within ``band`` of 1; an
    empty boundary spectrum counts as primitive but has no amplitude.
    """
    T = as_matrix(T)
    eig = eigenvalues(T)
    vals = eig.values
    on_circle = np.abs(np.abs(vals) - 1.0) <= band
    boundary = vals[on_circle]
    if boundary.size == 0:
        return SpectralReport(vals, eig.residuals, boundary, None, None, True, band)
    a = float(np.abs(boundary - 1.0).max())
    a = min(a, 2.0)
    primitive = bool(np.all(np.abs(boundary - 1.0) <= band))
    return SpectralReport(vals, eig.residuals, boundary, a, amplitude_to_tau(a), primitive, band)


def boundary_vectors(T, p: float, band: float = BAND, tol: float = 1e-6) -> np.ndarray:
    """Unit (in l^p) eigenvectors for every distinct boundary eigenvalue, as rows."""
    T = as_matrix(T)
    rep = spectral_report(T, band)
    rows = []
    seen: list[complex] = []
    for lam in rep.boundary:
        if any(abs(lam - s) <= 1e-7 for s in seen):
            continue
        seen.append(lam)
        B = eigenspace(T, lam, tol)
        if B.shape[1] == 0:
            B = residual_certificate(T, lam)[1][:, None]
        rows.extend(B.T)
        if B.shape[1] > 1:
            rows.append(B.sum(axis=1))
    if not rows:
        return np.zeros((0, T.shape[0]), dtype=np.complex128)
    return normalize(np.array(rows), p)


def kt_bound(a: float) -> float:
    """Allan-Ransford bound 2a / sqrt(4 - a^2) = 2 tan(tau/2) on limsup ||T^n - T^{n+1}||."""
    if a is None:
        return 0.0
    if a < 0:
        raise DomainError(f"amplitude must be nonnegative, got {a}")
    if a >= 2:
        raise DomainError("bound undefined for amplitude 2 (-1 in the spectrum)")
    return 2.0 * a / math.sqrt(4.0 - a * a)


def kt_bound_from_omega(w: float) -> float:
    """Same bound with the Apostol limit omega in place of the amplitude."""
    if w >= 2:
        raise DomainError("bound undefined for omega = 2")
    return kt_bound(w)


def check_amplitude_omega(T, space: SpaceDescriptor, cfg: SamplingConfig | None = None):
    """Constructive form of ``a_T <= omega_T``: the eigenvector-seeded omega
    estimate must reach the exact amplitude up to ``cfg.slack``."""
    from .apostol import omega

    cfg = cfg or SamplingConfig(slack=0.01)
    T = as_matrix(T)
    nrm = operator_norm(T, space, cfg.seed).value
    if abs(nrm - 1.0) > 1e-8:
        return vacuous("amplitude-omega", f"||T|| = {nrm:.12g} differs from 1")
    rep = spectral_report(T)
    a = 0.0 if rep.amplitude is None else rep.amplitude
    om = omega(T, space, cfg)
    return compare("amplitude-omega", om.extrapolated, a, cfg.slack, ">=",
                   {"amplitude": rep.amplitude, "omega": om.extrapolated,
                    "boundary": rep.boundary, "seed": cfg.seed})

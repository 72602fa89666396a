import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings, strategies as st

from projlab._search import SamplingConfig
from projlab.classes import (class_report, closure_report, d_gap, d_radius_interval,
                             halperin_constant, halperin_terms, wprime_defect)
from projlab.eigen import eigenvalues
from projlab.errors import PreconditionError
from projlab.linalg import SpaceDescriptor, exact_norm
from projlab.report import PASS, VACUOUS
from conftest import INF, cgauss, random_projection


def halperin_oracle(T):
    """K(T) for a strict l^2 contraction: largest generalized eigenvalue of
    ((I-T)*(I-T), I - T*T)."""
    n = T.shape[0]
    D = np.eye(n) - T
    return sl.eigh(D.conj().T @ D, np.eye(n) - T.conj().T @ T, eigvals_only=True).max()


def strict_contraction(rng, n, r):
    A = cgauss(rng, n, n)
    return r * A / np.linalg.norm(A, 2)


def test_halperin_examples(rng):
    for n in (2, 5, 8):
        P = random_projection(rng, n, 1)
        assert 0.99 <= halperin_constant(P, SpaceDescriptor(n)).value <= 1 + 1e-9
    assert halperin_constant(np.eye(3), SpaceDescriptor(3)).value == 0
    assert halperin_constant(0.5 * np.eye(2), SpaceDescriptor(2)).value == pytest.approx(1 / 3, abs=1e-12)


def test_halperin_flags_isometries():
    est = halperin_constant(np.diag([1j, 1]), SpaceDescriptor(2))
    assert est.unbounded and est.to_json()["value"] == "unbounded-evidence"


def test_halperin_requires_contraction():
    with pytest.raises(PreconditionError):
        halperin_constant(2 * np.eye(2), SpaceDescriptor(2))


@pytest.mark.parametrize("r", [0.3, 0.9, 0.99])
def test_halperin_matches_generalized_eigen_oracle(r, rng):
    for n in (2, 4, 6):
        T = strict_contraction(rng, n, r)
        k = halperin_oracle(T)
        est = halperin_constant(T, SpaceDescriptor(n), SamplingConfig(samples=4000)).value
        assert 0.99 * k <= est <= k * (1 + 1e-9)


@settings(max_examples=15)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 5))
def test_halperin_inequality_holds_with_estimate(seed, n):
    rng = np.random.default_rng(seed)
    T = strict_contraction(rng, n, 0.95) if seed % 2 else random_projection(rng, n, 1)
    K = halperin_constant(T, SpaceDescriptor(n), SamplingConfig(samples=3000, seed=seed)).value
    X = cgauss(rng, 500, n)
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    num, den = halperin_terms(T, X, 2)
    assert np.all(num <= K * den + 1e-9)


def test_halperin_in_lp_is_a_lower_bound():
    T = np.array([[0.5, 0.2], [0.1, 0.4]])
    s = SpaceDescriptor(2, 3)
    est = halperin_constant(T, s, SamplingConfig(samples=3000))
    x = est.maximizer
    num, den = halperin_terms(T, x[None], 3)
    assert est.value == pytest.approx(num[0] / den[0], rel=1e-9)


def brute_interval(T, p, grid=20001):
    rs = np.linspace(0, 1, grid)[1:-1]
    ok = [r for r in rs if exact_norm(T - r * np.eye(T.shape[0]), p) <= 1 - r + 1e-10]
    return (ok[0], ok[-1]) if ok else None


def test_d_radius_examples():
    P = np.diag([1.0, 0, 1])
    R = d_radius_interval(P, SpaceDescriptor(3))
    assert 0.5 in R and R.certified
    assert exact_norm(P - np.eye(3) / 2, 2) == pytest.approx(0.5, abs=1e-12)
    R = d_radius_interval(np.eye(2), SpaceDescriptor(2))
    assert (R.lo, R.hi) == (0.0, 1.0) and 1e-6 in R and 1 - 1e-6 in R
    assert d_radius_interval(-np.eye(2), SpaceDescriptor(2)).empty
    assert not d_radius_interval(np.array([[0, 1], [0, -1]]), SpaceDescriptor(2, INF))
    assert not d_radius_interval(np.eye(2), SpaceDescriptor(2, 3)).certified


@pytest.mark.parametrize("p", [1, 2, INF])
def test_d_radius_matches_grid_oracle(p, rng):
    for _ in range(4):
        n = 3
        T = 0.4 * np.eye(n) + 0.6 * random_projection(rng, n, 1) @ random_projection(rng, n, 2)
        R = d_radius_interval(T, SpaceDescriptor(n, p))
        ref = brute_interval(T, p)
        if ref is None:
            assert R.empty
        else:
            assert not R.empty
            assert abs(R.lo - ref[0]) <= 1e-4 and abs(R.hi - ref[1]) <= 1e-4


@settings(max_examples=20)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 5), c=st.floats(0.05, 0.95))
def test_certified_radii_force_primitivity(seed, n, c):
    rng = np.random.default_rng(seed)
    T = c * np.eye(n) + (1 - c) * random_projection(rng, n, 1) @ random_projection(rng, n, 2)
    s = SpaceDescriptor(n)
    R = d_radius_interval(T, s)
    assert not R.empty
    for r in (max(R.lo, 1e-9), R.midpoint, min(R.hi, 1 - 1e-9)):
        assert d_gap(T, r, s) <= 1e-10
        vals = eigenvalues(T).values
        assert np.all(np.abs(vals - r) <= 1 - r + 1e-8)
        if exact_norm(T, 2) >= 1 - 1e-12:
            assert exact_norm(T - r * np.eye(n), 2) == pytest.approx(1 - r, abs=1e-9)
    on_circle = np.abs(np.abs(vals) - 1) <= 1e-8
    assert np.all(np.abs(vals[on_circle] - 1) <= 1e-6)


def test_wprime_examples(rng):
    P = random_projection(rng, 5, 2)
    assert wprime_defect(P, SpaceDescriptor(5)).value <= 1e-6
    assert wprime_defect(np.diag([-1, 0]), SpaceDescriptor(2)).value == pytest.approx(2)
    assert wprime_defect(0.9 * np.eye(2), SpaceDescriptor(2)).value == 0
    # estimation route in l^3 finds the same isometric eigenvector
    assert wprime_defect(np.diag([-1, 0]), SpaceDescriptor(2, 3)).value == pytest.approx(2, abs=1e-9)
    # In l^3 the threshold ||Tx|| >= 1 - eta admits ||x - Px|| up to about
    # (3 eta)^(1/3) even for a coordinate projection; nothing larger is found.
    w = wprime_defect(np.diag([1, 0, 1]), SpaceDescriptor(3, 3))
    assert w.value <= 2 * (3 * w.isometry_tol) ** (1 / 3)


def test_closure_examples(rng):
    s = SpaceDescriptor(4)
    for _ in range(3):
        A, B = random_projection(rng, 4, 2), random_projection(rng, 4, 2)
        rep = closure_report(A, B, 0.3, s, SamplingConfig(samples=2000))
        assert rep.verdict == PASS, rep
    rep = closure_report(np.eye(2), np.eye(2), 0.5, SpaceDescriptor(2), SamplingConfig(samples=500))
    parts = {p.name: p for p in rep.details["parts"]}
    assert parts["halperin-product"].lhs == 0
    assert rep.verdict == PASS
    A, B = np.diag([1.0, 0, 1]), np.diag([1.0, 1, 0])
    assert d_gap(A @ B, 0.25, SpaceDescriptor(3)) <= 1e-12


def test_closure_in_general_p_is_vacuous_for_radii():
    s = SpaceDescriptor(3, 3)
    rep = closure_report(np.diag([1.0, 0, 1]), np.diag([1.0, 1, 0]), 0.5, s, SamplingConfig(samples=500))
    parts = {p.name: p.verdict for p in rep.details["parts"]}
    assert parts["d-product"] == VACUOUS and parts["d-convex"] == VACUOUS


def test_class_report_fields(rng):
    P = random_projection(rng, 3, 1)
    rep = class_report(P, SpaceDescriptor(3), SamplingConfig(samples=1000))
    assert 0.99 <= rep.halperin_K.value <= 1 + 1e-9
    assert 0.5 in rep.d_interval
    assert rep.wprime_defect.value <= 1e-6
    assert rep.s_class_evidence.extrapolated <= 0.1
    assert rep.samples == 1000

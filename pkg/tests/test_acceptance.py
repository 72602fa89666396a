"""Acceptance suite. Each test covers one numbered criterion, enforces its
tolerance and runtime budget, and records a one-line verdict that is printed
in the terminal summary (and immediately with ``-s``)."""
import cmath
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from projlab import semigroup
from projlab._search import SamplingConfig
from projlab.apostol import PHI, apostol_phi, check_composition_bounds, check_modulus_chain
from projlab.classes import closure_report, d_radius_interval, halperin_constant
from projlab.cli import main
from projlab.dynamics import check_kernel_formulas, check_range_formula, iterate, power_diffs
from projlab.linalg import SpaceDescriptor, exact_norm
from projlab.projections import ProjectionSpec, is_orthoprojection, make_projection, orthoprojection_onto
from projlab.report import PASS
from projlab.scenarios import SCENARIOS, planted_subspaces
from projlab.spectral import check_amplitude_omega, kt_bound, spectral_report
from conftest import ACCEPTANCE, INF, cgauss

L2 = lambda n: SpaceDescriptor(n, 2)


@contextmanager
def criterion(k, title, budget_s=None):
    """Time the block, record PASS/FAIL with a detail line, enforce the budget."""
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        msg = str(exc).strip().splitlines()[0][:160] if str(exc).strip() else type(exc).__name__
        _record(k, title, False, f"{msg} ({time.perf_counter() - t0:.2f} s)")
        raise
    dt = time.perf_counter() - t0
    detail = ", ".join(f"{key}={val}" for key, val in info.items())
    if budget_s is not None and dt >= budget_s:
        _record(k, title, False, f"{detail}; runtime {dt:.2f} s over budget {budget_s} s")
        pytest.fail(f"criterion {k} runtime {dt:.2f} s >= {budget_s} s")
    _record(k, title, True, f"{detail}; {dt:.2f} s" if detail else f"{dt:.2f} s")


def _record(k, title, ok, detail):
    ACCEPTANCE[k] = (title, ok, detail)
    print(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")


def gram_projection(B):
    """Orthoprojection onto span(B) from the Gram matrix, built independently of the package."""
    return B @ np.linalg.solve(B.conj().T @ B, B.conj().T)


def random_projections(seed, count=20, max_dim=8):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, max_dim + 1))
        k = int(rng.integers(1, n))
        out.append(gram_projection(cgauss(rng, n, k)))
    return out


# ---------------------------------------------------------------------------

def test_criterion_01_counterexample():
    with criterion(1, "non-converging product of l^inf projections", 1.0) as info:
        space = SpaceDescriptor(2, INF)
        P1 = np.array([[1, 0], [-1, 0]], dtype=complex)
        P2 = np.array([[0, 1], [0, 1]], dtype=complex)
        for P in (P1, P2):
            rep = is_orthoprojection(P, space)
            assert rep and rep.exact and rep.verdict == "orthoprojection", "generator is not an orthoprojection"
        T = P1 @ P2
        M = np.eye(2, dtype=complex)
        for n in range(1, 51):
            M = M @ T
            want = np.array([[0, (-1) ** (n + 1)], [0, (-1) ** n]])
            assert np.array_equal(M, want), f"T^{n} differs from the closed form"
        rep = iterate(T, space, n_max=50)
        assert not rep.converged
        assert np.abs(rep.diffs - 2).max() <= 1e-12, "consecutive differences are not 2"
        sr = spectral_report(T)
        assert sr.boundary.size == 1 and abs(sr.boundary[0] + 1) <= 1e-12, "boundary spectrum is not {-1}"
        assert abs(sr.amplitude - 2) <= 1e-12
        info.update(diff=float(rep.diffs.max()), amplitude=sr.amplitude)


def _three_projection_case(weights):
    worst_err, worst_angle, worst_n = 0.0, 0.0, 0
    for seed in range(5):
        rng = np.random.default_rng(1000 + seed)
        bases, common = planted_subspaces(6, (4, 4, 3), rng)
        gens = [orthoprojection_onto(B) for B in bases]
        E = gram_projection(common)
        L = semigroup.Leaf
        if weights is None:
            expr = semigroup.Product(tuple(L(k) for k in (1, 2, 3)))
        else:
            expr = semigroup.Convex(tuple((w, L(k)) for w, k in zip(weights, (1, 2, 3))))
        T = semigroup.evaluate(expr, gens)
        rep = iterate(T, L2(6), n_max=100_000)
        assert rep.converged and rep.n_stop <= 100_000, f"no convergence within 1e5 steps (seed {seed})"
        Tn = np.linalg.matrix_power(T, rep.n_stop)
        err = exact_norm(Tn - E, 2)
        assert err <= 1e-6, f"||T^n - E|| = {err:.3g} (seed {seed})"
        res = check_range_formula(expr, gens, L2(6), tol=1e-6)
        assert res.verdict == PASS, f"range formula failed: max angle {res.details['max_angle']:.3g}"
        worst_err = max(worst_err, err)
        worst_angle = max(worst_angle, res.details["max_angle"])
        worst_n = max(worst_n, rep.n_stop)
    return {"max_err": f"{worst_err:.2e}", "max_angle": f"{worst_angle:.2e}", "max_n": worst_n}


def test_criterion_02_alternating_product():
    with criterion(2, "powers of P1 P2 P3 approach the intersection projection", 30.0) as info:
        info.update(_three_projection_case(None))


def test_criterion_03_convex_combination():
    with criterion(3, "powers of 0.2 P1 + 0.3 P2 + 0.5 P3 approach the intersection projection", 30.0) as info:
        info.update(_three_projection_case((0.2, 0.3, 0.5)))


def test_criterion_04_halperin_constant_of_projections():
    with criterion(4, "K(P) = 1 for Euclidean orthoprojections", 20.0) as info:
        vals = []
        for i, P in enumerate(random_projections(4)):
            est = halperin_constant(P, L2(P.shape[0]), SamplingConfig(samples=10_000, seed=i))
            assert not est.unbounded and 0.99 <= est.value <= 1 + 1e-9, f"K estimate {est.value!r}"
            vals.append(est.value)
        info.update(min=f"{min(vals):.6f}", max=f"{max(vals):.12f}")


def test_criterion_05_modulus_of_projections():
    with criterion(5, "phi_P(eps) <= sqrt(2 eps) for Euclidean orthoprojections", 60.0) as info:
        worst_lo, worst_hi = math.inf, -math.inf
        for i, P in enumerate(random_projections(4)):
            for eps in (0.05, 0.1, 0.2):
                v = apostol_phi(P, L2(P.shape[0]), eps, PHI, SamplingConfig(seed=i)).value
                bound = math.sqrt(2 * eps)
                assert v <= bound + 1e-9, f"phi = {v!r} above sqrt(2 eps) at eps {eps}"
                assert v >= 0.9 * bound, f"phi = {v!r} below 0.9 sqrt(2 eps) at eps {eps}"
                worst_lo, worst_hi = min(worst_lo, v / bound), max(worst_hi, v - bound)
        info.update(min_ratio=f"{worst_lo:.4f}", max_excess=f"{worst_hi:.2e}")


def test_criterion_06_u_projection_radius():
    with criterion(6, "hermitian projections have (D)-radius 1/2") as info:
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(20):
            n = int(rng.integers(2, 9))
            P = gram_projection(rng.standard_normal((n, int(rng.integers(1, n)))))
            R = d_radius_interval(P, L2(n))
            assert R.certified and 0.5 in R, f"R(P) = {R.to_json()} misses 1/2"
            dev = abs(exact_norm(P - 0.5 * np.eye(n), 2) - 0.5)
            assert dev <= 1e-10, f"||P - I/2|| off by {dev:.3g}"
            worst = max(worst, dev)
        info.update(max_dev=f"{worst:.2e}")


def test_criterion_07_l_projection_modulus():
    with criterion(7, "phi_P(eps) = eps for coordinate projections in l^1") as info:
        space = SpaceDescriptor(4, 1)
        worst = 0.0
        for idx in ((1,), (2, 4), (1, 2, 3)):
            P = make_projection(ProjectionSpec("coordinate", index_set=idx), space)
            for eps in (0.1, 0.3, 0.5, 0.9):
                v = apostol_phi(P, space, eps, PHI).value
                assert eps - 1e-3 <= v <= eps + 1e-9, f"phi = {v!r} at eps {eps}, index set {idx}"
                worst = max(worst, abs(v - eps))
        info.update(max_dev=f"{worst:.2e}")


def test_criterion_08_modulus_chain():
    with criterion(8, "omega <= phi_tilde <= phi <= ||I - T|| <= 2 on semigroup elements") as info:
        rng = np.random.default_rng(8)
        count = 0
        while count < 50:
            n = int(rng.integers(3, 7))
            bases, _ = planted_subspaces(n, [int(rng.integers(1, n)) for _ in range(3)], rng)
            gens = [orthoprojection_onto(B) for B in bases]
            for _ in range(5):
                expr = semigroup.random_element(3, 3, int(rng.integers(2**31)))
                T = semigroup.evaluate(expr, gens)
                res = check_modulus_chain(T, L2(n), 0.05, SamplingConfig(samples=2000, seed=count))
                assert res.verdict == PASS, f"chain failed on element {count}: {semigroup.to_json(expr)}"
                count += 1
        info.update(elements=count)


def test_criterion_09_composition_bounds():
    with criterion(9, "phi_tilde product and convex-combination bounds") as info:
        rng = np.random.default_rng(9)
        done = 0
        for i in range(20):
            n = int(rng.integers(3, 7))
            m = 2 if i % 2 == 0 else 3
            bases, _ = planted_subspaces(n, [int(rng.integers(1, n)) for _ in range(m)], rng)
            ops = [orthoprojection_onto(B) for B in bases]
            w = rng.dirichlet(np.ones(m))
            w[-1] = 1 - w[:-1].sum()
            prod = ops[0]
            for A in ops[1:]:
                prod = prod @ A
            assert abs(exact_norm(prod, 2) - 1) <= 1e-10
            for eps in (0.02, 0.05, 0.1):
                res = check_composition_bounds(ops, w, L2(n), eps, SamplingConfig(samples=2000, seed=i,
                                                                                 slack=0.02))
                verdicts = {p.name: p.verdict for p in res.details["parts"]}
                assert verdicts == {"product": PASS, "convex": PASS}, f"instance {i} eps {eps}: {verdicts}"
                done += 1
        info.update(checks=done)


def _d_operator(rng, n):
    """A contraction with a known (D)-radius r: rI + (1 - r)C, ||C|| <= 1."""
    r = float(rng.uniform(0.1, 0.9))
    C = cgauss(rng, n, n)
    return r * np.eye(n) + (1 - r) * C / exact_norm(C, 2)


def test_criterion_10_d_closure():
    with criterion(10, "(D)-radius arithmetic under products and convex combinations") as info:
        rng = np.random.default_rng(10)
        worst = -math.inf
        for i in range(20):
            n = int(rng.integers(2, 7))
            if i % 2:
                A, B = (gram_projection(cgauss(rng, n, int(rng.integers(1, n)))) for _ in range(2))
            else:
                A, B = _d_operator(rng, n), _d_operator(rng, n)
            RA, RB = d_radius_interval(A, L2(n)), d_radius_interval(B, L2(n))
            assert RA.certified and RB.certified and RA and RB
            alpha = float(rng.uniform(0.1, 0.9))
            res = closure_report(A, B, alpha, L2(n), SamplingConfig(samples=500, seed=i), tol=1e-9)
            parts = {p.name: p for p in res.details["parts"]}
            for name in ("d-product", "d-convex"):
                assert parts[name].verdict == PASS, f"pair {i}: {name} gap {parts[name].lhs!r}"
                worst = max(worst, parts[name].lhs)
        info.update(max_gap=f"{worst:.2e}")


def test_criterion_11_kernel_formulas():
    with criterion(11, "Ker(I - PQ) and Ker(I - aP - (1-a)Q) equal the common fixed space") as info:
        rng = np.random.default_rng(11)
        for i in range(20):
            n = int(rng.integers(2, 9))
            shared = int(rng.integers(0, n - 1)) if n > 2 else 0
            dims = [int(rng.integers(shared + 1, n + 1)) if shared + 1 < n else shared + 1 for _ in range(2)]
            if shared:
                bases, _ = planted_subspaces(n, dims, rng, shared=shared)
            else:
                bases = [cgauss(rng, n, d) for d in dims]
            P, Q = (orthoprojection_onto(B) for B in bases)
            res = check_kernel_formulas(P, Q, float(rng.uniform(0.1, 0.9)), tol=1e-8)
            assert res.verdict == PASS, f"pair {i}: {[(p.name, p.lhs) for p in res.details['parts']]}"
        info.update(pairs=20)


def test_criterion_12_amplitude_attainment():
    with criterion(12, "omega reaches the boundary-spectrum amplitude") as info:
        rng = np.random.default_rng(12)
        worst = math.inf
        for i in range(20):
            m, k = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            thetas = rng.uniform(-math.pi + 0.05, math.pi - 0.05, m)
            C = cgauss(rng, k, k)
            C *= rng.uniform(0, 0.9) / exact_norm(C, 2)
            T = np.zeros((m + k, m + k), dtype=complex)
            T[:m, :m] = np.diag(np.exp(1j * thetas))
            T[m:, m:] = C
            Q = np.linalg.qr(cgauss(rng, m + k, m + k))[0]
            T = Q @ T @ Q.conj().T
            a = float(np.abs(np.exp(1j * thetas) - 1).max())
            res = check_amplitude_omega(T, L2(m + k), SamplingConfig(samples=2000, seed=i, slack=0.01))
            assert abs(res.details["amplitude"] - a) <= 1e-8, "amplitude differs from the planted one"
            assert res.verdict == PASS and res.details["omega"] >= a - 0.01, f"instance {i}: omega too small"
            worst = min(worst, res.details["omega"] - a)
        info.update(min_margin=f"{worst:.2e}")


def test_criterion_13_decay_bounds():
    with criterion(13, "tail of ||T^n - T^(n+1)|| against 2a/sqrt(4 - a^2)") as info:
        for theta in (0.1, 0.3, 0.7):
            T = np.diag([cmath.exp(1j * theta), 0.5])
            diffs, _ = power_diffs(T, L2(2), 1000)
            tail = float(diffs[499:].max())  # n = 500..1000
            a = abs(1 - cmath.exp(1j * theta))
            assert abs(tail - a) <= 1e-9, f"theta {theta}: tail {tail!r} vs {a!r}"
            assert tail <= kt_bound(spectral_report(T).amplitude) + 1e-9
        rng = np.random.default_rng(13)
        worst = 0.0
        for i in range(3):
            bases, _ = planted_subspaces(4, (2, 3), rng)
            P, Q = (orthoprojection_onto(B) for B in bases)
            for T in (P @ Q, 0.5 * P + 0.5 * Q):
                assert spectral_report(T).primitive
                diffs, _ = power_diffs(T, L2(4), 100_000)
                tail = float(diffs[49_999:].max())
                assert tail <= 1e-4, f"primitive tail {tail!r}"
                worst = max(worst, tail)
        info.update(primitive_tail=f"{worst:.2e}")


def _reports(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix == ".json"}


def test_criterion_14_determinism(tmp_path, monkeypatch):
    with criterion(14, "scenario reports are byte-identical across re-runs") as info:
        files = 0
        for name in sorted(SCENARIOS):
            out = tmp_path / name
            main(["scenario", name, "--seed", "7", "--out", str(out)])
            first = _reports(out)
            monkeypatch.setenv("PROJLAB_THREADS", "3")
            main(["scenario", name, "--seed", "7", "--out", str(out)])
            monkeypatch.delenv("PROJLAB_THREADS")
            assert first and _reports(out) == first, f"scenario {name} reports differ"
            files += len(first)
        info.update(scenarios=len(SCENARIOS), files=files)

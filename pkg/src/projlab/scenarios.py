"""Builtin scenarios: self-contained run configs generated from a seed."""
from __future__ import annotations

import math

import numpy as np

from . import semigroup
from .linalg import matrix_to_json
from .projections import ProjectionSpec


def planted_subspaces(dim, dims, rng, shared=1):
    """Random complex subspaces (as column bases) of the given dimensions that all
    contain one common random ``shared``-dimensional subspace, and its basis."""
    cplx = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    common = np.linalg.qr(cplx(dim, shared))[0]
    bases = [np.hstack([common, cplx(dim, d - shared)]) for d in dims]
    return bases, common


def _span_spec(B):
    return ProjectionSpec("hilbert-span", tuple(tuple(complex(z) for z in col) for col in B.T)).to_json()


def _mat(A):
    return matrix_to_json(np.asarray(A, dtype=complex))


def counterexample(seed):
    P1 = [[1, 0], [-1, 0]]
    P2 = [[0, 1], [0, 1]]
    checks = [
        {"name": "orthoprojection", "params": {"target": {"generator": 1}}},
        {"name": "orthoprojection", "params": {"target": {"generator": 2}}},
        {"name": "iterate", "params": {"target": {"expr": 0}, "n_max": 50, "expect": "diverge"}},
        {"name": "spectral", "params": {"target": {"expr": 0}, "amplitude": 2.0}},
        {"name": "decay-bound", "params": {"target": {"expr": 0}, "n_max": 50}},
        {"name": "modulus-chain", "params": {"target": {"expr": 0}, "epsilon": 0.1, "samples": 2000}},
    ]
    return {"space": {"dim": 2, "p": "inf"}, "generators": [_mat(P1), _mat(P2)],
            "expressions": [semigroup.to_json(semigroup.Product((semigroup.Leaf(1), semigroup.Leaf(2))))],
            "checks": checks, "seed": seed}


def _three_subspaces(seed, expr):
    rng = np.random.default_rng(seed)
    bases, _ = planted_subspaces(6, (4, 4, 3), rng)
    checks = [{"name": "iterate", "params": {"target": {"expr": 0}, "n_max": 100_000}},
              {"name": "range-formula", "params": {"expr": 0, "claim_wprime": True}}]
    for k in (1, 2, 3):
        checks += [{"name": "halperin", "params": {"target": {"generator": k}, "min": 0.99, "max": 1.0,
                                                   "tol": 1e-9}},
                   {"name": "d-radius", "params": {"target": {"generator": k}, "contains": 0.5}}]
    checks.append({"name": "closure", "params": {"operators": [{"generator": 1}, {"generator": 2}],
                                                 "alpha": 0.3}})
    return {"space": {"dim": 6, "p": 2}, "generators": [_span_spec(B) for B in bases],
            "expressions": [semigroup.to_json(expr)], "checks": checks, "seed": seed}


def halperin(seed):
    L = semigroup.Leaf
    return _three_subspaces(seed, semigroup.Product((L(1), L(2), L(3))))


def lapidus(seed):
    L = semigroup.Leaf
    return _three_subspaces(seed, semigroup.Convex(((0.2, L(1)), (0.3, L(2)), (0.5, L(3)))))


def decay_bounds(seed):
    thetas = (0.1, 0.3, 0.7)
    gens = [_mat(np.diag([np.exp(1j * t), 0.5])) for t in thetas]
    gens += [_span_spec(np.array([[1], [0]])), _span_spec(np.array([[1], [1]]) / math.sqrt(2))]
    L = semigroup.Leaf
    exprs = [semigroup.Product((L(4), L(5))), semigroup.Convex(((0.5, L(4)), (0.5, L(5))))]
    checks = [{"name": "decay-bound", "params": {"target": {"generator": k}, "n_max": 1000}}
              for k in (1, 2, 3)]
    checks += [{"name": "amplitude-omega", "params": {"target": {"generator": k}, "samples": 2000}}
               for k in (1, 2, 3)]
    checks += [{"name": "decay-bound", "params": {"target": {"expr": i}, "n_max": 1000}} for i in (0, 1)]
    return {"space": {"dim": 2, "p": 2}, "generators": gens,
            "expressions": [semigroup.to_json(e) for e in exprs], "checks": checks, "seed": seed}


def moduli_chain(seed, count=8):
    rng = np.random.default_rng(seed)
    bases, _ = planted_subspaces(5, (2, 3, 3), rng)
    exprs = [semigroup.random_element(3, 3, int(s)) for s in rng.integers(0, 2**31, count)]
    checks = [{"name": "modulus-chain", "params": {"target": {"expr": i}, "epsilon": 0.05, "samples": 2000}}
              for i in range(count)]
    checks.append({"name": "composition-bounds",
                   "params": {"operators": [{"generator": 1}, {"generator": 2}], "weights": [0.4, 0.6],
                              "epsilon": 0.05, "samples": 2000}})
    checks += [{"name": "beta-bound", "params": {"target": {"generator": k}, "epsilon": 0.1, "samples": 2000}}
               for k in (1, 2, 3)]
    return {"space": {"dim": 5, "p": 2}, "generators": [_span_spec(B) for B in bases],
            "expressions": [semigroup.to_json(e) for e in exprs], "checks": checks, "seed": seed}


def range_formula(seed, count=8):
    rng = np.random.default_rng(seed)
    bases, _ = planted_subspaces(5, (3, 3, 4), rng)
    exprs = [semigroup.random_element(3, 3, int(s)) for s in rng.integers(0, 2**31, count)]
    checks = [{"name": "range-formula", "params": {"expr": i}} for i in range(count)]
    checks += [{"name": "kernel-formulas", "params": {"operators": [{"generator": a}, {"generator": b}],
                                                      "alpha": 0.4}}
               for a, b in ((1, 2), (2, 3), (1, 3))]
    return {"space": {"dim": 5, "p": 2}, "generators": [_span_spec(B) for B in bases],
            "expressions": [semigroup.to_json(e) for e in exprs], "checks": checks, "seed": seed}


SCENARIOS = {
    "counterexample": counterexample,
    "halperin": halperin,
    "lapidus": lapidus,
    "decay-bounds": decay_bounds,
    "moduli-chain": moduli_chain,
    "range-formula": range_formula,
}


def build_scenario(name: str, seed: int = 0) -> dict:
    """The run config (a JSON-ready dict) of a builtin scenario."""
    return SCENARIOS[name](seed)

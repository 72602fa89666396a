"""Expressions in the convex multiplicative semigroup generated by P_1..P_N.

Generator indices are 1-based. Products are ordered and never reordered:
``Product((a, b))`` evaluates to ``a @ b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError
from .linalg import as_matrix

WEIGHT_SUM_TOL = 1e-12
MIN_WEIGHT = 1e-9


@dataclass(frozen=True)
class Leaf:
    k: int


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Convex:
    terms: tuple  # of (weight, expr)


Expr = Union[Leaf, Product, Convex]


def validate(expr, N: int) -> list[str]:
    """All invariant violations in ``expr``, each prefixed by its path; empty means valid."""
    problems: list[str] = []

    def walk(e, path):
        if isinstance(e, Leaf):
            if not isinstance(e.k, (int, np.integer)) or not 1 <= e.k <= N:
                problems.append(f"{path}: generator index {e.k!r} outside 1..{N}")
        elif isinstance(e, Product):
            if len(e.factors) == 0:
                problems.append(f"{path}: empty product")
            for i, f in enumerate(e.factors):
                walk(f, f"{path}.product[{i}]")
        elif isinstance(e, Convex):
            if len(e.terms) == 0:
                problems.append(f"{path}: empty convex combination")
            total = 0.0
            for i, term in enumerate(e.terms):
                try:
                    w, sub = term
                    w = float(w)
                except (TypeError, ValueError):
                    problems.append(f"{path}.convex[{i}]: term is not a (weight, expr) pair")
                    continue
                if not w > 0:
                    problems.append(f"{path}.convex[{i}]: weight {w} is not positive")
                elif w < MIN_WEIGHT:
                    problems.append(f"{path}.convex[{i}]: weight {w} below {MIN_WEIGHT}")
                total += w
                walk(sub, f"{path}.convex[{i}]")
            if e.terms and abs(total - 1.0) > WEIGHT_SUM_TOL:
                problems.append(f"{path}: weights sum {total:.12g}, expected 1")
        else:
            problems.append(f"{path}: not an expression node ({type(e).__name__})")

    walk(expr, "$")
    return problems


def evaluate(expr, generators) -> np.ndarray:
    gens = [as_matrix(G) for G in generators]
    if not gens:
        raise InputError("no generators")
    n = gens[0].shape[0]
    if any(G.shape != (n, n) for G in gens):
        raise InputError("generators must be square and of equal size")
    problems = validate(expr, len(gens))
    if problems:
        raise InputError("invalid expression: " + "; ".join(problems))

    def ev(e):
        if isinstance(e, Leaf):
            return gens[e.k - 1]
        if isinstance(e, Product):
            out = ev(e.factors[0])
            for f in e.factors[1:]:
                out = out @ ev(f)
            return out
        return sum(float(w) * ev(sub) for w, sub in e.terms)

    return np.array(ev(expr), dtype=np.complex128)


def index_set(expr) -> frozenset:
    """Indices of every generator occurring in the decomposition."""
    if isinstance(expr, Leaf):
        return frozenset([expr.k])
    if isinstance(expr, Product):
        return frozenset().union(*(index_set(f) for f in expr.factors))
    return frozenset().union(*(index_set(sub) for _, sub in expr.terms))


def flatten(expr):
    """Merge nested products into one product and nested convex nodes into one
    convex node. The evaluated matrix is unchanged."""
    if isinstance(expr, Leaf):
        return expr
    if isinstance(expr, Product):
        out = []
        for f in map(flatten, expr.factors):
            out.extend(f.factors if isinstance(f, Product) else [f])
        return out[0] if len(out) == 1 else Product(tuple(out))
    out = []
    for w, sub in expr.terms:
        sub = flatten(sub)
        if isinstance(sub, Convex):
            out.extend((w * v, s) for v, s in sub.terms)
        else:
            out.append((w, sub))
    return Convex(tuple(out))


def random_element(N: int, depth: int, seed: int):
    """Random expression tree, deterministic in ``seed``.

    Node kinds Leaf/Product/Convex are drawn with odds 0.4/0.3/0.3 (always a
    Leaf at depth 1); products have 2-4 factors, convex nodes 2-3 terms with
    Dirichlet(1) weights.
    """
    if N < 1 or depth < 1:
        raise InputError("need N >= 1 and depth >= 1")
    rng = np.random.default_rng(seed)

    def build(d):
        kind = 0 if d == 1 else rng.choice(3, p=[0.4, 0.3, 0.3])
        if kind == 0:
            return Leaf(int(rng.integers(1, N + 1)))
        if kind == 1:
            return Product(tuple(build(d - 1) for _ in range(int(rng.integers(2, 5)))))
        m = int(rng.integers(2, 4))
        w = rng.dirichlet(np.ones(m))
        while w.min() < MIN_WEIGHT:
            w = rng.dirichlet(np.ones(m))
        w[-1] = 1.0 - w[:-1].sum()
        return Convex(tuple((float(wi), build(d - 1)) for wi in w))

    return build(depth)


def to_json(expr):
    if isinstance(expr, Leaf):
        return {"leaf": int(expr.k)}
    if isinstance(expr, Product):
        return {"product": [to_json(f) for f in expr.factors]}
    return {"convex": [[float(w), to_json(sub)] for w, sub in expr.terms]}


def from_json(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InputError(f"expression must be a one-key object, got {obj!r}")
    (key, val), = obj.items()
    try:
        if key == "leaf":
            return Leaf(int(val))
        if key == "product":
            return Product(tuple(from_json(f) for f in val))
        if key == "convex":
            return Convex(tuple((float(w), from_json(sub)) for w, sub in val))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad {key} node: {exc}") from exc
    raise InputError(f"unknown expression node {key!r}")

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from projlab.errors import InputError
from projlab.linalg import exact_norm
from projlab.projections import orthoprojection_onto
from projlab.semigroup import (Convex, Leaf, Product, evaluate, flatten, from_json, index_set,
                               random_element, to_json, validate)
from conftest import INF, cgauss, random_projection

P1 = np.array([[1, 0], [-1, 0]])
P2 = np.array([[0, 1], [0, 1]])


def test_validate_examples():
    assert validate(Leaf(1), 2) == []
    bad = validate(Convex(((0.5, Leaf(1)), (0.4, Leaf(2)))), 2)
    assert len(bad) == 1 and "sum 0.9" in bad[0]
    assert "empty product" in validate(Product(()), 1)[0]
    assert validate(Leaf(3), 2)[0].startswith("$: generator index 3")
    nested = Product((Leaf(1), Convex(((1.0, Leaf(5)),))))
    assert validate(nested, 2) == ["$.product[1].convex[0]: generator index 5 outside 1..2"]
    tiny = Convex(((1e-10, Leaf(1)), (1 - 1e-10, Leaf(2))))
    assert any("below" in v for v in validate(tiny, 2))
    assert any("not positive" in v for v in validate(Convex(((-0.5, Leaf(1)), (1.5, Leaf(2)))), 2))


def test_evaluate_examples():
    np.testing.assert_array_equal(evaluate(Product((Leaf(1), Leaf(2))), [P1, P2]), [[0, 1], [0, -1]])
    P = orthoprojection_onto(np.array([1.0, 0]))
    Q = orthoprojection_onto(np.array([1.0, 1]) / math.sqrt(2))
    np.testing.assert_allclose(evaluate(Convex(((0.5, Leaf(1)), (0.5, Leaf(2)))), [P, Q]),
                               [[0.75, 0.25], [0.25, 0.25]], atol=1e-15)
    np.testing.assert_array_equal(evaluate(Leaf(1), [P1, P2]), P1)
    with pytest.raises(InputError):
        evaluate(Leaf(1), [np.eye(2), np.eye(3)])
    with pytest.raises(InputError):
        evaluate(Leaf(3), [np.eye(2)])


def test_products_keep_order():
    A, B = np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])
    np.testing.assert_array_equal(evaluate(Product((Leaf(1), Leaf(2))), [A, B]), A @ B)
    np.testing.assert_array_equal(evaluate(Product((Leaf(2), Leaf(1))), [A, B]), B @ A)


def test_index_set_examples():
    assert index_set(Product((Leaf(1), Leaf(2), Leaf(1)))) == {1, 2}
    assert index_set(Leaf(3)) == {3}
    assert index_set(Convex(((0.2, Leaf(1)), (0.3, Leaf(2)), (0.5, Leaf(3))))) == {1, 2, 3}


def test_random_element_examples():
    for s in range(20):
        assert isinstance(random_element(4, 1, s), Leaf)
    assert random_element(3, 4, 11) == random_element(3, 4, 11)
    assert validate(random_element(3, 3, 7), 3) == []
    with pytest.raises(InputError):
        random_element(0, 2, 1)


def test_json_round_trip():
    e = Product((Leaf(2), Convex(((0.25, Leaf(1)), (0.75, Product((Leaf(1), Leaf(2))))))))
    assert to_json(e) == {"product": [{"leaf": 2}, {"convex": [[0.25, {"leaf": 1}],
                                                                [0.75, {"product": [{"leaf": 1}, {"leaf": 2}]}]]}]}
    assert from_json(to_json(e)) == e
    with pytest.raises(InputError):
        from_json({"sum": []})


@given(N=st.integers(1, 4), depth=st.integers(1, 4), seed=st.integers(0, 2**31))
def test_random_elements_are_valid(N, depth, seed):
    e = random_element(N, depth, seed)
    assert validate(e, N) == []
    assert index_set(e) <= set(range(1, N + 1)) and index_set(e)
    assert from_json(to_json(e)) == e


@given(N=st.integers(1, 4), depth=st.integers(1, 4), seed=st.integers(0, 2**31))
def test_evaluation_is_contractive_and_flatten_invariant(N, depth, seed):
    rng = np.random.default_rng(seed)
    gens = [random_projection(rng, 4, int(rng.integers(1, 4))) for _ in range(N)]
    e = random_element(N, depth, seed)
    T = evaluate(e, gens)
    assert exact_norm(T, 2) <= 1 + 1e-10
    f = flatten(e)
    assert index_set(f) == index_set(e)
    np.testing.assert_allclose(evaluate(f, gens), T, atol=1e-12)


@given(seed=st.integers(0, 2**31))
def test_counterexample_generators_give_contractions_in_sup_norm(seed):
    e = random_element(2, 3, seed)
    assert exact_norm(evaluate(e, [P1, P2]), INF) <= 1 + 1e-10

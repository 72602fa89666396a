import json
import math

import numpy as np

from projlab.report import FAIL, PASS, VACUOUS, combine, compare, dumps, to_jsonable, vacuous


def test_compare_relations():
    assert compare("a", 1.0, 1.0).verdict == PASS
    assert compare("a", 1.1, 1.0, 0.05).verdict == FAIL
    assert compare("a", 0.96, 1.0, 0.05, ">=").verdict == PASS
    assert compare("a", 1.0 + 1e-13, 1.0, 1e-12, "==").verdict == PASS


def test_combine_semantics():
    p, f, v = compare("p", 0, 1), compare("f", 2, 1), vacuous("v", "why")
    assert combine("c", [p, v]).verdict == PASS
    assert combine("c", [p, f, v]).verdict == FAIL
    assert combine("c", [v, v]).verdict == VACUOUS
    assert not combine("c", [f])
    head = combine("c", [compare("loose", 0, 10), compare("tight", 0.9, 1)])
    assert (head.lhs, head.rhs) == (0.9, 1.0)


def test_json_encoding_is_deterministic():
    obj = {"b": {1, 3, 2}, "a": np.array([1 + 2j, math.inf]), "m": np.eye(2), "x": math.nan,
           "r": compare("r", 1, 2)}
    s = dumps(obj)
    assert s == dumps(obj)
    d = json.loads(s)
    assert d["b"] == [1, 2, 3]
    assert d["a"] == [[1.0, 2.0], ["inf", 0.0]]
    assert d["m"]["rows"] == 2 and d["x"] == "nan"
    assert d["r"]["verdict"] == "pass"
    assert to_jsonable(np.float64(math.inf)) == "inf"

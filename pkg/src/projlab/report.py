"""Check verdicts and deterministic JSON encoding of results."""
from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"


@dataclass
class CheckResult:
    """One inequality or identity check.

    ``lhs``/``rhs``/``slack`` are the measured numbers behind the verdict; their
    meaning (``lhs <= rhs + slack`` or the reverse) is stated in ``relation``.
    """

    name: str
    verdict: str
    lhs: float = math.nan
    rhs: float = math.nan
    slack: float = 0.0
    relation: str = "<="
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def __bool__(self):
        return self.verdict != FAIL


def compare(name, lhs, rhs, slack=0.0, relation="<=", details=None) -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    if relation == "<=":
        ok = lhs <= rhs + slack
    elif relation == ">=":
        ok = lhs >= rhs - slack
    elif relation == "==":
        ok = abs(lhs - rhs) <= slack
    else:
        raise ValueError(relation)
    return CheckResult(name, PASS if ok else FAIL, lhs, rhs, slack, relation, details or {})


def vacuous(name, reason, details=None) -> CheckResult:
    d = {"reason": reason}
    d.update(details or {})
    return CheckResult(name, VACUOUS, details=d)


def combine(name, parts, details=None) -> CheckResult:
    """Fail if any part fails; vacuous only if every part is vacuous."""
    verdicts = [p.verdict for p in parts]
    if FAIL in verdicts:
        v = FAIL
    elif verdicts and all(x == VACUOUS for x in verdicts):
        v = VACUOUS
    else:
        v = PASS
    d = {"parts": parts}
    d.update(details or {})
    res = CheckResult(name, v, details=d)
    tight = [p for p in parts if p.verdict != VACUOUS and p.relation in _MARGIN]
    if tight:
        # headline numbers come from the part closest to failing
        w = min(tight, key=lambda p: _MARGIN[p.relation](p))
        res.lhs, res.rhs, res.slack, res.relation = w.lhs, w.rhs, w.slack, w.relation
    return res


_MARGIN = {
    "<=": lambda p: p.rhs + p.slack - p.lhs,
    ">=": lambda p: p.lhs - p.rhs + p.slack,
    "==": lambda p: p.slack - abs(p.lhs - p.rhs),
}


def _float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_jsonable(obj):
    """Recursively convert results to JSON-safe values.

    Complex scalars become ``[re, im]``, complex vectors lists of those,
    square matrices the ``{"rows", "cols", "entries"}`` interchange format.
    """
    from .linalg import matrix_to_json

    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"

"""Extended integers: plain ints plus the two infinities.

Finite values are always Python ints; the infinities are the float
singletons ``float('inf')`` / ``float('-inf')``, which order correctly
against ints.  Addition of opposite infinities is a hard error rather
than a value, so modelling mistakes surface instead of propagating.
"""

from __future__ import annotations

import math
from typing import Iterable, Union

from .errors import IndeterminateSumError

ExtInt = Union[int, float]

POS_INF: ExtInt = math.inf
NEG_INF: ExtInt = -math.inf


def is_finite(v: ExtInt) -> bool:
    return not isinstance(v, float)


def ext_add(a: ExtInt, b: ExtInt) -> ExtInt:
    if is_finite(a) and is_finite(b):
        return a + b
    if a == POS_INF and b == NEG_INF or a == NEG_INF and b == POS_INF:
        raise IndeterminateSumError("POS_INF + NEG_INF has no value")
    return a if not is_finite(a) else b


def ext_sum(values: Iterable[ExtInt]) -> ExtInt:
    total: ExtInt = 0
    for v in values:
        total = ext_add(total, v)
    return total


def ext_mul(c: int, v: ExtInt) -> ExtInt:
    """Scale by an integer coefficient; 0 * infinity is 0."""
    if c == 0:
        return 0
    if is_finite(v):
        return c * v
    return v if c > 0 else (NEG_INF if v == POS_INF else POS_INF)


def ext_times(a: ExtInt, b: ExtInt) -> ExtInt:
    """General product; zero absorbs even against infinities."""
    if a == 0 or b == 0:
        return 0
    if is_finite(a) and is_finite(b):
        return a * b
    return POS_INF if (a > 0) == (b > 0) else NEG_INF


def ext_compare(op: str, a: ExtInt, b: ExtInt) -> bool:
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == "=":
        return a == b
    raise ValueError(f"unknown comparison operator {op!r}")


def to_json(v: ExtInt):
    if v == POS_INF:
        return "+inf"
    if v == NEG_INF:
        return "-inf"
    return v


def from_json(raw) -> ExtInt:
    if raw == "+inf":
        return POS_INF
    if raw == "-inf":
        return NEG_INF
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ValueError(f"expected integer, '+inf' or '-inf', got {raw!r}")
    return raw

"""Helpers visible to generated kernel code.

Arithmetic follows one rule: integer operands stay integers, any float
operand makes the result a double, and values are cast only when stored.
"""
from __future__ import annotations

import math

from ..errors import IndexOutOfBounds
from ..ndarray import to_f32, trunc_to_int, wrap_int

INF = math.inf
NAN = math.nan


def _wrap(v, bits, signed):
    return wrap_int(v, bits, signed)


def _ftoi(v, bits, signed):
    return wrap_int(trunc_to_int(v), bits, signed)


def _f32(v):
    return to_f32(float(v))


def _idiv(a, b, R):
    if b == 0:
        R.diag.append("integer division by zero (result 0)")
        return 0
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _imod(a, b, R):
    if b == 0:
        R.diag.append("integer modulo by zero (result 0)")
        return 0
    return a - b * _idiv(a, b, R)


def _fdiv(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        a = float(a)
        if a == 0 or a != a:
            return NAN
        return math.copysign(INF, a) * math.copysign(1.0, float(b))


def _fmod(a, b):
    try:
        return math.fmod(a, b)
    except ValueError:
        return NAN


def _pow(a, b):
    try:
        r = math.pow(a, b)
    except OverflowError:
        # sign of an overflowing power follows the base for odd integral exponents
        neg = a < 0 and float(b).is_integer() and int(b) % 2 == 1
        return -INF if neg else INF
    except ValueError:
        if a == 0 and b < 0:
            return INF
        return NAN
    return r


def _math1(fn):
    def wrapped(x):
        try:
            return fn(x)
        except ValueError:
            return NAN
        except OverflowError:
            return INF
    return wrapped


def _log(x):
    if x == 0:
        return -INF
    try:
        return math.log(x)
    except ValueError:
        return NAN


def _floor(x):
    x = float(x)
    if x != x or x in (INF, -INF):
        return x
    return float(math.floor(x))


def _ceil(x):
    x = float(x)
    if x != x or x in (INF, -INF):
        return x
    return float(math.ceil(x))


BUILTIN_IMPL = {
    "sqrt": _math1(math.sqrt),
    "sin": _math1(math.sin),
    "cos": _math1(math.cos),
    "exp": _math1(math.exp),
    "log": _log,
    "fabs": lambda x: math.fabs(x),
    "floor": _floor,
    "ceil": _ceil,
    "pow": _pow,
}


def _st(buf, off, v):
    """Store into a buffer and return the value as stored (after casting)."""
    buf[off] = v
    return buf[off]


def _cst(d, key, v):
    d[key] = v
    return v


def _bc(i, size, param, dim):
    if not 0 <= i < size:
        raise IndexOutOfBounds(f"index {i} out of range for dim {dim!r} of ${param} (size {size})")
    return i


def _isnan(x):
    return x != x


NAMESPACE = {
    "_wrap": _wrap, "_ftoi": _ftoi, "_f32": _f32, "_idiv": _idiv, "_imod": _imod,
    "_fdiv": _fdiv, "_fmod": _fmod, "_pow": _pow, "_st": _st, "_cst": _cst,
    "_bc": _bc, "_isnan": _isnan, "NAN": NAN,
}
for _name, _fn in BUILTIN_IMPL.items():
    NAMESPACE["_b_" + _name] = _fn

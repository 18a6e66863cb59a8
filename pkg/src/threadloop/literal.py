"""Text form of arrays: ``dtype[d0,d1,...]{v v v ...}`` or ``null``.

Values are listed in storage order (dim 0 fastest).  ``BAD`` marks a bad
slot and sets the badflag.
"""
from __future__ import annotations

import math
import re

from .errors import CountMismatch, FormatError
from .ndarray import (Dtype, NdArray, default_badvalue, dtype_from_name, product,
                      to_f32)

_LIT = re.compile(r"^\s*([A-Za-z_]\w*)\s*\[([^\]]*)\]\s*\{([^}]*)\}\s*$")


def _parse_value(tok: str, dtype: Dtype):
    low = tok.lower()
    if dtype.is_float:
        if low in ("nan", "+nan", "-nan"):
            return math.nan
        try:
            return float(tok)
        except ValueError:
            raise FormatError(f"bad {dtype.cname} value {tok!r}") from None
    try:
        v = int(tok, 10)
    except ValueError:
        try:
            f = float(tok)
        except ValueError:
            raise FormatError(f"bad {dtype.cname} value {tok!r}") from None
        if not f.is_integer():
            raise FormatError(f"{dtype.cname} value {tok!r} is not an integer") from None
        v = int(f)
    if not dtype.min <= v <= dtype.max:
        raise FormatError(f"{tok} is out of range for {dtype.cname}")
    return v


def parse_array_literal(text: str) -> NdArray:
    """Parse one array literal; ``null`` gives a null array."""
    if text.strip() == "null":
        return NdArray.null()
    m = _LIT.match(text)
    if not m:
        raise FormatError(f"not an array literal: {text!r}")
    dtype = dtype_from_name(m.group(1))
    dim_text = m.group(2).strip()
    try:
        dims = [int(x) for x in dim_text.split(",")] if dim_text else []
    except ValueError:
        raise FormatError(f"bad dimension list [{dim_text}]") from None
    if any(d < 0 for d in dims):
        raise FormatError(f"negative dimension in [{dim_text}]")
    toks = m.group(3).split()
    n = product(dims)
    if len(toks) != n:
        raise CountMismatch(f"dims {dims} need {n} values, got {len(toks)}")
    vals = []
    anybad = False
    for t in toks:
        if t == "BAD":
            anybad = True
            vals.append(default_badvalue(dtype))
        else:
            vals.append(_parse_value(t, dtype))
    a = NdArray.from_values(dtype, dims, vals)
    a.badflag = anybad
    return a


def format_float(v: float, dtype: Dtype = Dtype.DOUBLE) -> str:
    """Shortest text that reads back to the same value in ``dtype``."""
    if v != v:
        return "nan"
    if v in (math.inf, -math.inf):
        return "inf" if v > 0 else "-inf"
    if v == 0:
        return "-0" if math.copysign(1.0, v) < 0 else "0"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    if dtype is Dtype.FLOAT:
        for prec in range(1, 10):
            s = f"{v:.{prec}g}"
            if to_f32(float(s)) == v:
                return s
    return repr(v)


def format_value(v, dtype: Dtype) -> str:
    return format_float(float(v), dtype) if dtype.is_float else str(int(v))


def format_array(a: NdArray) -> str:
    if a.is_null:
        return "null"
    dims = ",".join(str(d) for d in a.dims)
    vals = a.values()
    parts = []
    for v in vals:
        if a.badflag and a.is_bad_value(v):
            parts.append("BAD")
        else:
            parts.append(format_value(v, a.dtype))
    return f"{a.dtype.cname}[{dims}]{{{' '.join(parts)}}}"

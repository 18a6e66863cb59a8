"""Strided, typed n-dimensional arrays.

Storage is one flat typed buffer per array with dim 0 varying fastest.  An
array addresses its buffer through ``offset`` plus the stride-weighted sum of
its indices (``dimincs``), so affine views can share a parent's buffer.
"""
from __future__ import annotations

import enum
import math
import struct
from array import array
from dataclasses import dataclass
from functools import reduce
from operator import mul

from .errors import IndexOutOfBounds, NullArrayAccess, UnknownDtypeName


class Dtype(enum.Enum):
    """The eight element types, valued by their rank in the promotion ladder."""

    BYTE = 0
    SHORT = 1
    USHORT = 2
    INT = 3
    INDX = 4
    LONGLONG = 5
    FLOAT = 6
    DOUBLE = 7

    @property
    def rank(self) -> int:
        return self.value

    @property
    def cname(self) -> str:
        return _INFO[self][0]

    @property
    def typecode(self) -> str:
        return _INFO[self][1]

    @property
    def bits(self) -> int:
        return _INFO[self][2]

    @property
    def signed(self) -> bool:
        return _INFO[self][3]

    @property
    def is_float(self) -> bool:
        return self in (Dtype.FLOAT, Dtype.DOUBLE)

    @property
    def min(self):
        if self.is_float:
            return -math.inf
        return -(1 << (self.bits - 1)) if self.signed else 0

    @property
    def max(self):
        if self.is_float:
            return math.inf
        return (1 << (self.bits - 1)) - 1 if self.signed else (1 << self.bits) - 1

    def __lt__(self, other):
        if not isinstance(other, Dtype):
            return NotImplemented
        return self.value < other.value

    def __repr__(self):
        return f"Dtype.{self.name}"

    def __str__(self):
        return self.cname


# cname, array typecode, bits, signed
_INFO = {
    Dtype.BYTE: ("byte", "B", 8, False),
    Dtype.SHORT: ("short", "h", 16, True),
    Dtype.USHORT: ("ushort", "H", 16, False),
    Dtype.INT: ("int", "i", 32, True),
    Dtype.INDX: ("indx", "q", 64, True),
    Dtype.LONGLONG: ("longlong", "q", 64, True),
    Dtype.FLOAT: ("float", "f", 32, True),
    Dtype.DOUBLE: ("double", "d", 64, True),
}

_BY_NAME = {info[0]: dt for dt, info in _INFO.items()}

ALL_DTYPES = tuple(Dtype)


def dtype_from_name(name: str) -> Dtype:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise UnknownDtypeName(f"unknown dtype name {name!r}") from None


# --- scalar casts -------------------------------------------------------

_F32 = struct.Struct("f")


def to_f32(v) -> float:
    """Round a number to the nearest single-precision value."""
    try:
        return _F32.unpack(_F32.pack(v))[0]
    except OverflowError:
        return math.copysign(math.inf, v)


def wrap_int(v: int, bits: int, signed: bool) -> int:
    v &= (1 << bits) - 1
    if signed and v >> (bits - 1):
        v -= 1 << bits
    return v


def trunc_to_int(v) -> int:
    # NaN and infinities have no integer image; they map to 0
    if isinstance(v, float):
        if v != v or v in (math.inf, -math.inf):
            return 0
        return int(v)
    return int(v)


def cast_value(dtype: Dtype, v):
    """Cast a Python number to ``dtype`` using machine-style conversion."""
    if dtype is Dtype.DOUBLE:
        return float(v)
    if dtype is Dtype.FLOAT:
        return to_f32(float(v))
    return wrap_int(trunc_to_int(v), dtype.bits, dtype.signed)


def default_badvalue(dtype: Dtype):
    if dtype.is_float:
        return math.nan
    return dtype.min if dtype.signed else dtype.max


# --- flags ----------------------------------------------------------------

class StateFlags(enum.IntFlag):
    ALLOCATED = 1
    PARENTDATACHANGED = 2
    PARENTDIMSCHANGED = 4
    PARENTREPRCHANGED = 8
    DATAFLOW_F = 16
    DATAFLOW_B = 32
    NOMYDIMS = 64
    BADVAL = 128
    INPLACE = 256

    ANYCHANGED = PARENTDATACHANGED | PARENTDIMSCHANGED | PARENTREPRCHANGED
    DATAFLOW_ANY = DATAFLOW_F | DATAFLOW_B


NO_FLAGS = StateFlags(0)


@dataclass
class Counters:
    """Instrumentation used by tests: element copies and kernel executions."""

    elements_copied: int = 0
    kernel_runs: int = 0

    def reset(self):
        self.elements_copied = 0
        self.kernel_runs = 0


counters = Counters()


def product(xs) -> int:
    return reduce(mul, xs, 1)


def fresh_dimincs(dims) -> list[int]:
    incs = []
    inc = 1
    for d in dims:
        incs.append(inc)
        inc *= d
    return incs


# --- the array ------------------------------------------------------------

class NdArray:
    """A typed n-dimensional array.

    ``data`` is an ``array.array`` (or None for a null array).  Element
    ``idx`` lives at ``data[offset + sum(idx[k] * dimincs[k])]``.
    """

    __slots__ = ("dtype", "dims", "dimincs", "offset", "data", "state",
                 "badvalue_override", "trans_parent", "trans_children")

    def __init__(self, dtype: Dtype, dims, data=None, dimincs=None, offset=0,
                 state=NO_FLAGS):
        self.dtype = dtype
        self.dims = list(dims)
        self.dimincs = list(dimincs) if dimincs is not None else fresh_dimincs(self.dims)
        self.offset = offset
        self.data = data
        self.state = StateFlags(state)
        self.badvalue_override = None
        self.trans_parent = None
        self.trans_children = []
        if data is not None:
            self.state |= StateFlags.ALLOCATED

    # constructors

    @classmethod
    def filled(cls, dtype: Dtype, dims, fill=0) -> NdArray:
        if any(d < 0 for d in dims):
            raise ValueError(f"negative dimension in {list(dims)}")
        n = product(dims)
        return cls(dtype, dims, array(dtype.typecode, [cast_value(dtype, fill)]) * n)

    @classmethod
    def null(cls) -> NdArray:
        return cls(Dtype.DOUBLE, [], state=StateFlags.NOMYDIMS)

    @classmethod
    def from_values(cls, dtype: Dtype, dims, values) -> NdArray:
        values = list(values)
        if len(values) != product(dims):
            raise ValueError(f"{len(values)} values for dims {list(dims)}")
        return cls(dtype, dims, array(dtype.typecode, [cast_value(dtype, v) for v in values]))

    @classmethod
    def scalar(cls, dtype: Dtype, value) -> NdArray:
        return cls.from_values(dtype, [], [value])

    # metadata

    @property
    def ndims(self) -> int:
        return len(self.dims)

    @property
    def nvals(self) -> int:
        if self.is_null:
            return 0
        return product(self.dims)

    @property
    def is_null(self) -> bool:
        return bool(self.state & StateFlags.NOMYDIMS)

    @property
    def badflag(self) -> bool:
        return bool(self.state & StateFlags.BADVAL)

    @badflag.setter
    def badflag(self, v: bool):
        if v:
            self.state |= StateFlags.BADVAL
        else:
            self.state &= ~StateFlags.BADVAL

    @property
    def badvalue(self):
        if self.badvalue_override is not None:
            return self.badvalue_override
        return default_badvalue(self.dtype)

    @property
    def anychanged(self) -> bool:
        return bool(self.state & StateFlags.ANYCHANGED)

    @property
    def is_view(self) -> bool:
        t = self.trans_parent
        return t is not None and t.affine is not None

    def has_flag(self, flag: StateFlags) -> bool:
        return bool(self.state & flag)

    def set_inplace(self) -> NdArray:
        self.state |= StateFlags.INPLACE
        return self

    def is_bad_value(self, v) -> bool:
        if self.dtype.is_float and self.badvalue_override is None:
            return v != v
        return v == self.badvalue

    # element access

    def offset_of(self, indices, check: bool = True) -> int:
        if len(indices) != len(self.dims):
            raise IndexOutOfBounds(f"{len(indices)} indices for {len(self.dims)} dims")
        off = 0
        for k, (i, d, inc) in enumerate(zip(indices, self.dims, self.dimincs)):
            if check and not 0 <= i < d:
                raise IndexOutOfBounds(f"index {i} out of range for dim {k} of size {d}")
            off += i * inc
        return off

    def _slot(self, offset: int) -> int:
        if self.data is None:
            raise NullArrayAccess("array has no data")
        slot = self.offset + offset
        if not 0 <= slot < len(self.data) or self.nvals == 0:
            raise IndexOutOfBounds(f"offset {offset} outside the data buffer")
        return slot

    def get_elem(self, offset: int):
        return self.data[self._slot(offset)]

    def set_elem(self, offset: int, v):
        self.data[self._slot(offset)] = cast_value(self.dtype, v)

    def __getitem__(self, indices):
        if not isinstance(indices, tuple):
            indices = (indices,)
        self.physicalize()
        return self.get_elem(self.offset_of(indices))

    def __setitem__(self, indices, v):
        if not isinstance(indices, tuple):
            indices = (indices,)
        self.physicalize()
        self.set_elem(self.offset_of(indices), v)
        if self.trans_parent is not None or self.trans_children:
            from .dataflow import mark_changed
            mark_changed(self)

    def iter_offsets(self):
        """Yield element offsets in storage order (dim 0 fastest)."""
        dims, incs = self.dims, self.dimincs
        if any(d == 0 for d in dims):
            return
        idx = [0] * len(dims)
        off = 0
        while True:
            yield off
            k = 0
            while k < len(dims):
                idx[k] += 1
                off += incs[k]
                if idx[k] < dims[k]:
                    break
                off -= incs[k] * dims[k]
                idx[k] = 0
                k += 1
            else:
                return

    def raw_values(self) -> list:
        """Element values in storage order, without physicalizing."""
        if self.data is None:
            if self.is_null:
                raise NullArrayAccess("null array has no values")
            return []
        data, base = self.data, self.offset
        return [data[base + off] for off in self.iter_offsets()]

    def values(self) -> list:
        self.physicalize()
        return self.raw_values()

    def physicalize(self):
        if self.trans_parent is not None or self.anychanged:
            from .dataflow import make_physical
            make_physical(self)

    def is_dense(self) -> bool:
        return self.offset == 0 and self.dimincs == fresh_dimincs(self.dims) \
            and self.data is not None and len(self.data) == self.nvals

    def copy(self) -> NdArray:
        """A dense, unlinked copy with the same dtype, badflag and badvalue."""
        vals = self.values()
        counters.elements_copied += len(vals)
        out = NdArray(self.dtype, self.dims, array(self.dtype.typecode, vals))
        out.badflag = self.badflag
        out.badvalue_override = self.badvalue_override
        return out

    def __repr__(self):
        from .literal import format_array
        try:
            return f"NdArray({format_array(self)})"
        except Exception:
            return f"NdArray({self.dtype.cname}{self.dims}, state={self.state!r})"


# --- module-level operations -------------------------------------------------

def new_filled(dtype: Dtype, dims, fill=0) -> NdArray:
    return NdArray.filled(dtype, dims, fill)


def null() -> NdArray:
    return NdArray.null()


def offset_of(a: NdArray, indices, check: bool = True) -> int:
    return a.offset_of(indices, check)


def get_elem(a: NdArray, offset: int):
    return a.get_elem(offset)


def set_elem(a: NdArray, offset: int, v):
    a.set_elem(offset, v)


def set_badflag(a: NdArray, v: bool):
    a.badflag = v


def convert_dtype(a: NdArray, t: Dtype) -> NdArray:
    """Dense copy of ``a`` cast to ``t``; bad elements take ``t``'s bad value."""
    if a.is_null:
        raise NullArrayAccess("cannot convert a null array")
    vals = a.values()
    counters.elements_copied += len(vals)
    if a.badflag:
        bad_out = default_badvalue(t)
        vals = [bad_out if a.is_bad_value(v) else cast_value(t, v) for v in vals]
    elif t is a.dtype:
        pass
    else:
        vals = [cast_value(t, v) for v in vals]
    out = NdArray(t, a.dims, array(t.typecode, vals))
    out.badflag = a.badflag
    return out

import math

import pytest
from hypothesis import given, strategies as st

from threadloop.errors import IndexOutOfBounds, NullArrayAccess, UnknownDtypeName
from threadloop.ndarray import (ALL_DTYPES, Dtype, NdArray, StateFlags, cast_value,
                                convert_dtype, counters, dtype_from_name, fresh_dimincs,
                                get_elem, new_filled, null, offset_of, product,
                                set_badflag, set_elem, wrap_int)


def test_new_filled_double_zero():
    a = new_filled(Dtype.DOUBLE, [3], 0)
    assert a.dims == [3]
    assert a.raw_values() == [0.0, 0.0, 0.0]
    assert a.nvals == 3
    assert a.has_flag(StateFlags.ALLOCATED)


def test_new_filled_int_strides():
    a = new_filled(Dtype.INT, [2, 3], 1)
    assert a.dimincs == [1, 2]
    assert a.nvals == 6
    assert set(a.raw_values()) == {1}


def test_new_filled_empty():
    a = new_filled(Dtype.FLOAT, [0], 7)
    assert a.nvals == 0
    assert len(a.data) == 0


def test_negative_dim_rejected():
    with pytest.raises(ValueError):
        new_filled(Dtype.DOUBLE, [2, -1])


def test_null():
    a = null()
    assert a.is_null and a.has_flag(StateFlags.NOMYDIMS)
    assert a.dims == [] and a.data is None
    assert a.nvals == 0
    with pytest.raises(NullArrayAccess):
        get_elem(a, 0)


def test_offset_of():
    a = new_filled(Dtype.DOUBLE, [2, 3])
    assert offset_of(a, [1, 2]) == 5
    assert offset_of(a, [0, 0]) == 0
    with pytest.raises(IndexOutOfBounds):
        offset_of(a, [2, 0])
    assert offset_of(a, [2, 0], check=False) == 2


def test_set_get_roundtrip_and_truncation():
    a = new_filled(Dtype.INT, [4])
    set_elem(a, 2, 123456)
    assert get_elem(a, 2) == 123456
    set_elem(a, 1, 3.7)
    assert get_elem(a, 1) == 3
    set_elem(a, 1, -3.7)
    assert get_elem(a, 1) == -3


def test_set_out_of_range_offset():
    a = new_filled(Dtype.INT, [2])
    with pytest.raises(IndexOutOfBounds):
        set_elem(a, 2, 1)
    with pytest.raises(IndexOutOfBounds):
        get_elem(new_filled(Dtype.INT, [0]), 0)


def test_integer_wrap_on_store():
    a = new_filled(Dtype.BYTE, [1])
    set_elem(a, 0, 300)
    assert get_elem(a, 0) == 44
    s = new_filled(Dtype.SHORT, [1])
    set_elem(s, 0, 32768)
    assert get_elem(s, 0) == -32768
    assert wrap_int(-1, 16, False) == 65535


def test_float_store_rounds_to_single():
    a = new_filled(Dtype.FLOAT, [1])
    set_elem(a, 0, 0.1)
    assert get_elem(a, 0) != 0.1
    assert abs(get_elem(a, 0) - 0.1) < 1e-8


def test_nan_to_int_is_zero():
    assert cast_value(Dtype.INT, math.nan) == 0
    assert cast_value(Dtype.LONGLONG, math.inf) == 0


def test_convert_widening():
    b = NdArray.from_values(Dtype.BYTE, [3], [1, 2, 3])
    d = convert_dtype(b, Dtype.DOUBLE)
    assert d.dtype is Dtype.DOUBLE
    assert d.raw_values() == [1.0, 2.0, 3.0]


def test_convert_same_dtype_equal():
    a = NdArray.from_values(Dtype.SHORT, [2], [5, -5])
    assert convert_dtype(a, Dtype.SHORT).raw_values() == [5, -5]


def test_convert_reencodes_bad():
    a = NdArray.from_values(Dtype.SHORT, [3], [1, -32768, 3])
    set_badflag(a, True)
    d = convert_dtype(a, Dtype.DOUBLE)
    assert d.badflag
    vals = d.raw_values()
    assert vals[0] == 1.0 and math.isnan(vals[1]) and vals[2] == 3.0


def test_convert_counts_copies():
    counters.reset()
    convert_dtype(NdArray.from_values(Dtype.BYTE, [4], [1, 2, 3, 4]), Dtype.DOUBLE)
    assert counters.elements_copied == 4


def test_badflag_is_flag_only():
    a = NdArray.from_values(Dtype.SHORT, [2], [-32768, 1])
    set_badflag(a, True)
    assert a.badflag and a.has_flag(StateFlags.BADVAL)
    set_badflag(a, False)
    assert not a.badflag
    assert a.raw_values() == [-32768, 1]


def test_default_badvalues_and_override():
    assert NdArray.filled(Dtype.SHORT, [1]).badvalue == -32768
    assert NdArray.filled(Dtype.USHORT, [1]).badvalue == 65535
    assert math.isnan(NdArray.filled(Dtype.DOUBLE, [1]).badvalue)
    a = NdArray.filled(Dtype.DOUBLE, [1])
    a.badvalue_override = -999.0
    assert a.is_bad_value(-999.0) and not a.is_bad_value(math.nan)


def test_dtype_names():
    assert [t.cname for t in ALL_DTYPES] == [
        "byte", "short", "ushort", "int", "indx", "longlong", "float", "double"]
    assert [t.rank for t in ALL_DTYPES] == list(range(8))
    assert dtype_from_name("ushort") is Dtype.USHORT
    assert Dtype.INDX.bits == 64 and Dtype.INDX.signed
    with pytest.raises(UnknownDtypeName):
        dtype_from_name("complex")


def test_getitem_setitem():
    a = NdArray.from_values(Dtype.DOUBLE, [2, 3], range(6))
    assert a[1, 2] == 5
    a[0, 1] = 9
    assert a.raw_values()[2] == 9


dims_st = st.lists(st.integers(0, 5), max_size=6)


@given(dims_st)
def test_stride_recurrence(dims):
    a = new_filled(Dtype.INT, dims)
    assert a.nvals == product(dims)
    if dims:
        assert a.dimincs[0] == 1
    for k in range(1, len(dims)):
        assert a.dimincs[k] == a.dimincs[k - 1] * dims[k - 1]
    if 0 in dims:
        assert a.nvals == 0


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_offset_injective(dims):
    a = new_filled(Dtype.BYTE, dims)
    seen = set(a.iter_offsets())
    assert len(seen) == a.nvals
    assert seen == set(range(a.nvals))


def test_offset_of_matches_brute_force():
    dims = [2, 3, 2]
    a = new_filled(Dtype.BYTE, dims)
    offs = set()
    for i in range(2):
        for j in range(3):
            for k in range(2):
                offs.add(offset_of(a, [i, j, k]))
    assert offs == set(range(12))
    assert fresh_dimincs(dims) == [1, 2, 6]


def test_byte_double_byte_identity():
    a = NdArray.from_values(Dtype.BYTE, [256], range(256))
    back = convert_dtype(convert_dtype(a, Dtype.DOUBLE), Dtype.BYTE)
    assert back.raw_values() == list(range(256))

"""Acceptance criteria 1-12, one or more tests per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists
PASS/FAIL per criterion.
"""
import itertools
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from _cases import CALC_CASES, case
from threadloop import connect, make_physical, sever, slice_affine, update, write_values
from threadloop.cli import main
from threadloop.engine import get_op, make_opdef, make_plan, run_op, shape_only
from threadloop.errors import ThreadDimMismatch
from threadloop.kernelc import expand_kernel
from threadloop.literal import format_array, parse_array_literal as lit
from threadloop.ndarray import ALL_DTYPES, Dtype, NdArray, StateFlags, counters
from threadloop.typesys import generic_list, param_dtype, promote, resolve_generic

GOLDEN = Path(__file__).parent / "golden"
LADDER = ["byte", "short", "ushort", "int", "indx", "longlong", "float", "double"]


def outs(r):
    return r if isinstance(r, tuple) else (r,)


# 1 -------------------------------------------------------------------------

def test_criterion_01_linscale_library():
    out = run_op("linscale", [lit("int[3]{1 2 3}"), lit("int[]{2}"), lit("int[3]{4 5 6}")])
    assert out.values() == [6, 9, 12]
    assert run_op("linscale", [[1, 2, 3], 2, [4, 5, 6], None]).values() == [6, 9, 12]


def test_criterion_01_linscale_cli(capsys):
    code = main(["run", "--op", "linscale", "--arg", "a=double[3]{1 2 3}",
                 "--arg", "b=double[]{2}", "--arg", "c=double[3]{4 5 6}"])
    assert code == 0
    assert capsys.readouterr().out == "double[3]{6 9 12}\n"


# 2 -------------------------------------------------------------------------

def test_criterion_02_ftoc_transcript():
    F = lit("double[1]{32}")
    C = connect("FtoC", F)
    make_physical(C)
    assert C.values() == [0.0]
    update(C, lambda v: v + 1)
    make_physical(F)
    assert abs(F.values()[0] - 33.8) <= 1e-9
    update(F, lambda v: v + 1)
    make_physical(C)
    assert abs(C.values()[0] - 1.55555555555555) <= 1e-9


# 3 -------------------------------------------------------------------------

def src_10x20():
    return NdArray.from_values(Dtype.DOUBLE, [10, 20], range(200))


def test_criterion_03_index1d_scalar_dex():
    out = run_op("index1d", [src_10x20(), lit("indx[]{4}")])
    assert out.dims == [1, 20]
    assert out.values() == [4 + 10 * j for j in range(20)]


def test_criterion_03_index1d_vector_dex():
    out = run_op("index1d", [src_10x20(), lit("indx[2]{1 9}")])
    assert out.dims == [2, 20]
    assert out.values()[:4] == [1, 9, 11, 19]


def test_criterion_03_index_mismatch():
    with pytest.raises(ThreadDimMismatch):
        run_op("index", [src_10x20(), lit("indx[2]{1 9}")])
    with pytest.raises(ThreadDimMismatch):
        make_plan(get_op("index"), {"src": shape_only([10, 20]),
                                    "dex": shape_only([2], Dtype.INDX)})


# 4 -------------------------------------------------------------------------

def test_criterion_04_increments_shapes():
    xs = [3.5, -1, 8, 8, 2]
    out = run_op("increments", [xs])
    assert out.dims == [4]
    assert out.values() == [xs[i + 1] - xs[i] for i in range(4)]
    assert run_op("increments", [[1]]).dims == [0]
    assert run_op("increments", [lit("double[0]{}")]).dims == [0]


def test_criterion_04_increments_bad_patterns():
    base = [1, 4, 9, 16]
    for pattern in itertools.product([False, True], repeat=4):
        toks = ["BAD" if b else str(v) for v, b in zip(base, pattern)]
        a = lit(f"short[4]{{{' '.join(toks)}}}")
        a.badflag = True
        out = run_op("increments", [a])
        assert out.dims == [3]
        for i, v in enumerate(out.values()):
            want_bad = pattern[i] or pattern[i + 1]
            assert out.is_bad_value(v) == want_bad, (pattern, i)
            if not want_bad:
                assert v == base[i + 1] - base[i]


# 5 -------------------------------------------------------------------------

short_vals = st.lists(st.one_of(st.integers(-32767, 32767), st.just(-32768)), max_size=16)


@settings(max_examples=200, deadline=None)
@given(short_vals)
def test_criterion_05_countbad(xs):
    a = NdArray.from_values(Dtype.SHORT, [len(xs)], xs)
    assert run_op("countbad", [a]).values() == [0]
    a.badflag = True
    want = sum(1 for x in xs if x == -32768)
    assert run_op("countbad", [a]).values() == [want]


def test_criterion_05_recip_zero():
    out = run_op("recip", [lit("double[1]{0}")])
    assert out.badflag
    assert math.isnan(out.values()[0])
    assert format_array(out) == "double[1]{BAD}"


# 6 -------------------------------------------------------------------------

def broadcast_reference(a, b):
    """Materialize both arguments at the full shape, then add elementwise."""
    nd = max(a.ndims, b.ndims)
    da = a.dims + [1] * (nd - a.ndims)
    db = b.dims + [1] * (nd - b.ndims)
    full = []
    for x, y in zip(da, db):
        if x != y and 1 not in (x, y):
            raise ThreadDimMismatch(f"{x} vs {y}")
        full.append(y if x == 1 else x)

    def expand(arr, dims):
        vals = []
        for idx in itertools.product(*[range(n) for n in reversed(full)]):
            idx = idx[::-1]
            src = [0 if dims[k] == 1 else idx[k] for k in range(len(dims))]
            flat, mul = 0, 1
            for k, i in enumerate(src):
                flat += i * mul
                mul *= dims[k]
            vals.append(arr.raw_values()[flat])
        return vals

    ea, eb = expand(a, da), expand(b, db)
    return full, [x + y for x, y in zip(ea, eb)]


@st.composite
def arg_pairs(draw):
    da = draw(st.lists(st.integers(0, 4), max_size=4))
    db = []
    for k in range(draw(st.integers(0, 4))):
        choice = draw(st.sampled_from(["same", "one", "any"]))
        if choice == "same" and k < len(da):
            db.append(da[k])
        elif choice == "one":
            db.append(1)
        else:
            db.append(draw(st.integers(0, 4)))
    ints = st.integers(-1000, 1000)
    na, nb = math.prod(da), math.prod(db)
    a = NdArray.from_values(Dtype.INT, da, draw(st.lists(ints, min_size=na, max_size=na)))
    b = NdArray.from_values(Dtype.INT, db, draw(st.lists(ints, min_size=nb, max_size=nb)))
    return a, b


@settings(max_examples=500, deadline=None)
@given(arg_pairs())
def test_criterion_06_broadcast_oracle(pair):
    a, b = pair
    try:
        full, want = broadcast_reference(a, b)
    except ThreadDimMismatch:
        with pytest.raises(ThreadDimMismatch):
            run_op("add", [a, b])
        return
    out = run_op("add", [a, b])
    assert out.dims == full
    assert out.values() == want


# 7 -------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(CALC_CASES))
def test_criterion_07_order_independence(name):
    args, others = case(name)
    fwd = outs(run_op(name, args, others))
    args, others = case(name)
    rev = outs(run_op(name, args, others, thread_order="reverse"))
    assert [format_array(x) for x in fwd] == [format_array(x) for x in rev]


def test_criterion_07_covers_corpus():
    from threadloop.engine import Registry
    reg = Registry()
    calc = {n for n in reg.names() if not reg.get(n).defaultflow}
    assert calc <= set(CALC_CASES)


# 8 -------------------------------------------------------------------------

def test_criterion_08_promote_table():
    for a, b in itertools.product(ALL_DTYPES, repeat=2):
        assert promote(a, b).cname == LADDER[max(LADDER.index(a.cname), LADDER.index(b.cname))]


def test_criterion_08_float_plus():
    op = make_opdef("fp", pars="float+ a(); b(m,n); [o]c", code="$c() = $a();")
    sig = op.sig
    g = resolve_generic(sig, {"a": Dtype.FLOAT, "b": Dtype.BYTE})
    assert g is Dtype.BYTE
    assert param_dtype(sig.param("a"), g) is Dtype.FLOAT
    assert param_dtype(sig.param("b"), g) is Dtype.BYTE
    g = resolve_generic(sig, {"a": Dtype.BYTE, "b": Dtype.DOUBLE})
    assert param_dtype(sig.param("a"), g) is Dtype.DOUBLE
    out = run_op(op, [lit("float[]{2.5}"), lit("byte[1,1]{7}")])
    assert out.dtype is Dtype.BYTE and out.values() == [2]
    short_plus = make_opdef("sp", pars="short+ a(); b()", code="$a();").sig.param("a")
    assert param_dtype(short_plus, Dtype.BYTE) is Dtype.SHORT
    assert param_dtype(short_plus, Dtype.FLOAT) is Dtype.FLOAT


def test_criterion_08_generic_list_forces_float():
    gl = generic_list("FD")
    op = get_op("cartND")
    for t in ALL_DTYPES[:6]:
        assert resolve_generic(op.sig, {"vec": t}, gl) is Dtype.FLOAT
        out = run_op(op, [NdArray.from_values(t, [2], [3, 4])])
        assert out.dtype is Dtype.FLOAT and out.values() == [5]


# 9 -------------------------------------------------------------------------

N, MAX_IT = 200, 1000


def mandel_grid():
    vals = []
    for j in range(N):
        for i in range(N):
            vals += [-2 + 4 * i / (N - 1), -2 + 4 * j / (N - 1)]
    return NdArray.from_values(Dtype.DOUBLE, [2, N, N], vals)


def reference_count(cx, cy, max_it):
    c = complex(cx, cy)
    z = c
    i = max_it
    while i and z.real * z.real + z.imag * z.imag < 4:
        z = z * z + c
        i -= 1
    return i


@pytest.fixture(scope="module")
def mandel_run():
    grid = mandel_grid()
    t0 = time.perf_counter()
    out = run_op("pp_mandel", [grid], {"max_it": MAX_IT})
    return grid, out, time.perf_counter() - t0


def test_criterion_09_mandel_speed(mandel_run):
    _, out, elapsed = mandel_run
    assert out.dims == [N, N]
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_criterion_09_mandel_points(mandel_run):
    grid, out, _ = mandel_run
    assert run_op("pp_mandel", [[0, 0]], {"max_it": MAX_IT}).values() == [0]
    g, o = grid.values(), out.values()
    outside = 0
    for k, v in enumerate(o):
        x, y = g[2 * k], g[2 * k + 1]
        if x * x + y * y > 4:
            outside += 1
            assert v == MAX_IT
    assert outside > 0


def test_criterion_09_mandel_zero_bracket(mandel_run):
    grid, out, _ = mandel_run
    g = grid.values()
    ref = sum(1 for k in range(N * N) if reference_count(g[2 * k], g[2 * k + 1], MAX_IT) == 0)
    got = out.values().count(0)
    assert abs(got - ref) <= 0.01 * ref, (got, ref)
    # cardioid: the centre row is mostly zeros between -0.75 and 0.25
    row = out.values()[(N // 2) * N:(N // 2 + 1) * N]
    inside = [row[i] for i in range(N) if -0.7 < -2 + 4 * i / (N - 1) < 0.2]
    assert inside and all(v == 0 for v in inside)


# 10 ------------------------------------------------------------------------

GOLDEN_CASES = [(n, v, t) for n, v in [("linscale", "good"), ("cartND", "good"),
                                       ("recip", "good"), ("recip", "bad"),
                                       ("pp_mandel", "good")]
                for t in (Dtype.DOUBLE, Dtype.FLOAT)]


def render(name, variant, t):
    op = get_op(name)
    return expand_kernel(op.badcode if variant == "bad" else op.code, op.sig, t, variant,
                         name=op.name)


@pytest.mark.parametrize("name, variant, t", GOLDEN_CASES)
def test_criterion_10_goldens(name, variant, t):
    want = (GOLDEN / f"{name}_{variant}_{t.cname}.txt").read_bytes()
    assert render(name, variant, t).encode() == want
    assert render(name, variant, t).encode() == want


def test_criterion_10_goldens_fresh_process():
    code = ("import sys\nfrom threadloop.cli import main\n"
            "sys.exit(main(['expand', '--op', 'pp_mandel', '--type', 'float']))\n")
    env = dict(os.environ, PYTHONHASHSEED="12345")
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, env=env, check=True)
    assert r.stdout == (GOLDEN / "pp_mandel_good_float.txt").read_bytes()


# 11 ------------------------------------------------------------------------

def parent_3x4():
    return NdArray.from_values(Dtype.DOUBLE, [3, 4], [10 * k for k in range(12)])


def test_criterion_11_full_slice_zero_copy():
    P = parent_3x4()
    counters.reset()
    S = slice_affine(P, [(None, None, 1), (None, None, 1)])
    make_physical(S)
    assert S.values() == P.values()
    assert S.data is P.data
    assert counters.elements_copied == 0


def test_criterion_11_strided_oracle():
    dims = [3, 4]
    flat = [10 * k for k in range(12)]
    checked = 0
    for s0, st0, s1, st1 in itertools.product(range(3), (1, 2, -1), range(4), (1, 2, -1)):
        P = NdArray.from_values(Dtype.DOUBLE, dims, flat)
        S = slice_affine(P, [(s0, None, st0), (s1, None, st1)])
        i0 = list(range(s0, 3 if st0 > 0 else -1, st0))
        i1 = list(range(s1, 4 if st1 > 0 else -1, st1))
        assert S.dims == [len(i0), len(i1)]
        want = [flat[a + 3 * b] for b in i1 for a in i0]
        make_physical(S)
        assert S.values() == want
        assert S.offset == s0 + 3 * s1
        assert S.dimincs == [st0, 3 * st1]
        checked += 1
    assert checked == 3 * 3 * 4 * 3


def test_criterion_11_sever():
    P = parent_3x4()
    S = slice_affine(P, "1:3,::2")
    before = S.values()
    sever(S)
    write_values(P, [-1] * 12)
    assert S.values() == before
    assert S.data is not P.data


# 12 ------------------------------------------------------------------------

def scenarios():
    def ftoc():
        F = lit("double[2]{32 212}")
        C = connect("FtoC", F)
        yield C
        update(C, lambda v: v + 1)
        yield F
        update(F, lambda v: v + 1)
        yield C

    def identity():
        P = lit("double[3]{1 2 3}")
        C = connect("identity", P)
        yield C
        write_values(C, [4, 5, 6])
        yield P
        write_values(P, [7, 8, 9])
        yield C

    def shifts():
        for name, k in [("shift", 1), ("shiftz", -2)]:
            P = lit("double[4]{1 2 3 4}")
            C = connect(name, P, {"k": k})
            yield C
            write_values(C, [0, 0, 0, 0])
            yield P
            write_values(P, [9, 9, 9, 9])
            yield C

    def slices():
        P = lit("double[3,4]{0 1 2 3 4 5 6 7 8 9 10 11}")
        S = slice_affine(P, "::-1,1:3")
        yield S
        C = connect("FtoC", S)
        yield C
        write_values(P, list(range(12)))
        yield C
        write_values(C, [0] * 6)
        yield P
        yield S

    return {"ftoc": ftoc, "identity": identity, "shift": shifts, "slice": slices}


@pytest.mark.parametrize("name", sorted(scenarios()))
def test_criterion_12_flag_discipline(name):
    for a in scenarios()[name]():
        make_physical(a)
        assert not a.anychanged
        assert not a.has_flag(StateFlags.PARENTDATACHANGED)
        runs = counters.kernel_runs
        make_physical(a)
        assert counters.kernel_runs == runs

from pathlib import Path

import pytest

from threadloop.engine import Registry, get_op
from threadloop.engine.opdef import KERNEL_KEYS
from threadloop.errors import (KernelSyntaxError, TypeSwitchMissingLetter, UnboundDim,
                               UnknownBuiltin, UnknownCompField, UnknownDim, UnknownParam)
from threadloop.kernelc import expand_kernel, format_kernel, parse_kernel
from threadloop.kernelc.nodes import (Assign, ExprStmt, LoopOver, ParamAccess, ThreadLoop,
                                      TypeSwitch, walk)
from threadloop.ndarray import Dtype
from threadloop.sigparse import parse_signature

GOLDEN = Path(__file__).parent / "golden"


def nodes_of(k, cls):
    return [n for n in walk(k.stmts) if isinstance(n, cls)]


def test_linscale_body():
    sig = parse_signature("a(); b(); c(); [o]o()")
    k = parse_kernel("$o() = $a() * $b() + $c();", sig)
    assert len(k.stmts) == 1
    assert len(nodes_of(k, Assign)) == 1
    assert sorted(p.param for p in nodes_of(k, ParamAccess)) == ["a", "b", "c", "o"]


def test_loop_captures_dim():
    sig = parse_signature("vec(n); [o]len()")
    k = parse_kernel("double acc = 0; loop(n) %{ acc += $vec()*$vec(); %} $len() = acc;", sig)
    loops = nodes_of(k, LoopOver)
    assert [lp.dim for lp in loops] == ["n"]
    vecs = [p for p in nodes_of(k, ParamAccess) if p.param == "vec"]
    assert vecs and all(p.bindings == () for p in vecs)
    assert all(type(p.resolved["n"]).__name__ == "LoopVar" for p in vecs)


def test_unknown_dim():
    with pytest.raises(UnknownDim):
        parse_kernel("$a(n=>2) = 1;", parse_signature("a()"))


def test_dynamic_binding():
    sig = parse_signature("src(n); indx dex(); [o]output()")
    k = parse_kernel("$output() = $src(n => $dex());", sig)
    src = [p for p in nodes_of(k, ParamAccess) if p.param == "src"][0]
    inner = [p for p in walk(dict(src.bindings)["n"]) if isinstance(p, ParamAccess)]
    assert [p.param for p in inner] == ["dex"]


@pytest.mark.parametrize("text, err", [
    ("$b() = 1;", UnknownParam),
    ("$a() = 1;", UnboundDim),
    ("$o() = frobnicate(1);", UnknownBuiltin),
    ("$o() = $COMP(nope);", UnknownCompField),
    ("$o() = (1 + ;", KernelSyntaxError),
])
def test_parse_errors(text, err):
    sig = parse_signature("a(n); [o]o()")
    with pytest.raises(err):
        parse_kernel(text, sig)


def test_comments_stripped():
    sig = parse_signature("a(); [o]o()")
    k1 = parse_kernel("$o() = $a(); // hi\n/* x */ PDL_COMMENT(\"n ) est\")", sig)
    k2 = parse_kernel("$o() = $a();", sig)
    assert format_kernel(k1) == format_kernel(k2)


def test_power_operator_lowers_to_pow():
    sig = parse_signature("a(); [o]o()")
    k = parse_kernel("$o() = $a() ** 2;", sig)
    text = expand_kernel(k, sig, Dtype.DOUBLE)
    assert "pow(P_a[0], 2)" in text


def tswitch_kernel():
    sig = parse_signature("a(); [o]b()")
    return sig, parse_kernel(
        "$b() = ( $TSLFD( short, long, float, double ) ) $a();", sig)


def test_type_switch_float():
    sig, k = tswitch_kernel()
    assert nodes_of(k, TypeSwitch)
    text = expand_kernel(k, sig, Dtype.FLOAT)
    assert "(float)" in text


def test_type_switch_missing_letter():
    sig, k = tswitch_kernel()
    with pytest.raises(TypeSwitchMissingLetter):
        expand_kernel(k, sig, Dtype.BYTE)


def test_generic_replaced():
    sig = parse_signature("a(); [o]b()")
    k = parse_kernel("$GENERIC() t = $a(); $b() = t;", sig)
    out = expand_kernel(k, sig, Dtype.USHORT)
    assert "ushort t" in out and "$GENERIC" not in out


def test_threadloop_single():
    sig = parse_signature("a(); [o]b()")
    k = parse_kernel("threadloop %{ $b() = $a(); %}", sig)
    assert len(nodes_of(k, ThreadLoop)) == 1
    with pytest.raises(KernelSyntaxError):
        parse_kernel("threadloop %{ threadloop %{ $b() = $a(); %} %}", sig)
    with pytest.raises(KernelSyntaxError):
        parse_kernel("threadloop %{ $b() = $a(); %} threadloop %{ $b() = 1; %}", sig)


def test_bounds_wrap_offsets():
    op = get_op("cartND")
    text = expand_kernel(op.code, op.sig, Dtype.DOUBLE, bounds=True)
    assert "P_vec[BCHK(n, SIZE_n) * INC_vec_n]" in text
    assert "BCHK" not in expand_kernel(op.code, op.sig, Dtype.DOUBLE)


def test_good_variant_isbad_constant_false():
    op = get_op("recip")
    good = expand_kernel(op.badcode, op.sig, Dtype.DOUBLE, "good")
    bad = expand_kernel(op.badcode, op.sig, Dtype.DOUBLE, "bad")
    assert "isnan" in bad and "isnan" not in good


GOLDEN_CASES = [("linscale", "good"), ("cartND", "good"), ("recip", "good"),
                ("recip", "bad"), ("pp_mandel", "good")]


@pytest.mark.parametrize("name, variant", GOLDEN_CASES)
@pytest.mark.parametrize("dtype", [Dtype.DOUBLE, Dtype.FLOAT])
def test_golden(name, variant, dtype):
    op = get_op(name)
    k = op.badcode if variant == "bad" else op.code
    want = (GOLDEN / f"{name}_{variant}_{dtype.cname}.txt").read_text()
    got = expand_kernel(k, op.sig, dtype, variant, name=op.name)
    assert got == want
    assert expand_kernel(k, op.sig, dtype, variant, name=op.name) == got


def corpus_kernels():
    reg = Registry()
    for name in reg.names():
        op = reg.get(name)
        for key in KERNEL_KEYS:
            if getattr(op, key) is not None:
                yield name, key


@pytest.mark.parametrize("name, key", list(corpus_kernels()))
def test_format_fixed_point(name, key):
    op = get_op(name)
    k = getattr(op, key)
    once = format_kernel(k)
    again = parse_kernel(once, op.sig, op.otherpar_kinds, k.context, op.comp)
    assert format_kernel(again) == once


@pytest.mark.parametrize("name", sorted(Registry().names()))
def test_expand_every_corpus_type(name):
    op = get_op(name)
    if op.code is None:
        return
    for t in op.generictypes:
        assert expand_kernel(op.code, op.sig, t, "good")
        if op.badcode is not None:
            assert expand_kernel(op.badcode, op.sig, t, "bad")

"""Lowering of elaborated kernels to deterministic loop-nest pseudocode.

The dialect is C-like.  Each parameter ``p`` is a pointer ``P_p`` already
positioned at the current thread tuple; active dims are addressed through
``INC_p_<dim>`` strides and thread dims are swept by ``_t0.._tk`` loops
that advance every pointer by ``TINC_p_<k>``.
"""
from __future__ import annotations

from ..errors import TypeSwitchMissingLetter
from ..sigparse import TYPE_NAMES
from ..typesys import letter_of, letters_match, param_dtype
from .fmt import PREC_ASSIGN, PREC_POSTFIX, PREC_PRIMARY, CPrinter
from .nodes import GenericType, Num, ParamAccess, TypeName, TypeSwitch


def pick_alt(ts: TypeSwitch, generic):
    for letter, alt in zip(ts.letters, ts.alts):
        if letters_match(generic, letter):
            return alt
    raise TypeSwitchMissingLetter(
        f"$T{ts.letters} has no alternative for {generic.cname} ({letter_of(generic)})")


class ExpandPrinter(CPrinter):
    def __init__(self, sig, generic, variant: str, bounds: bool, thread_depth: int = 1):
        super().__init__()
        self.depth_k = thread_depth
        self.sig = sig
        self.generic = generic
        self.bad = variant == "bad"
        self.bounds = bounds

    # types

    def type_text(self, t) -> str:
        if isinstance(t, GenericType):
            return self.generic.cname
        if isinstance(t, TypeName):
            return TYPE_NAMES[t.name].cname
        return self.type_text(pick_alt(t, self.generic))

    def pdtype(self, name):
        return param_dtype(self.sig.param(name), self.generic)

    def size_sym(self, dim: str) -> str:
        return f"SIZE_{self.sig.base_of(dim) or dim}"

    # leaves

    def prec(self, e) -> int:
        if isinstance(e, TypeSwitch):
            alt = pick_alt(e, self.generic)
            return PREC_PRIMARY if isinstance(alt, TypeName) else self.prec(alt)
        return super().prec(e)

    def offset(self, a: ParamAccess) -> str:
        p = self.sig.param(a.param)
        terms = []
        for d in p.dim_names:
            e = a.resolved[d]
            if isinstance(e, Num) and e.value == 0 and not self.bounds:
                continue
            idx = self.expr(e)
            if self.bounds:
                idx = f"BCHK({idx}, {self.size_sym(d)})"
            elif self.prec(e) < PREC_POSTFIX:
                idx = f"({idx})"
            terms.append(f"{idx} * INC_{a.param}_{d}")
        return " + ".join(terms) if terms else "0"

    def elem(self, a: ParamAccess) -> str:
        return f"P_{a.param}[{self.offset(a)}]"

    def x_ParamAccess(self, e):
        return self.elem(e)

    def x_SizeOf(self, e):
        return self.size_sym(e.dim)

    def x_CompRef(self, e):
        return f"COMP_{e.name}"

    def x_Ident(self, e):
        return e.name

    def x_MetaRef(self, e):
        idx = "" if e.index is None else f"[{self.expr(e.index)}]"
        return f"PDL_{e.param}->{e.field}{idx}"

    def x_FlowMeta(self, e):
        idx = "" if e.index is None else f"[{self.expr(e.index)}]"
        return f"{e.which}->{e.field}{idx}"

    def x_TypeSwitch(self, e):
        alt = pick_alt(e, self.generic)
        if isinstance(alt, TypeName):
            return TYPE_NAMES[alt.name].cname
        return self.expr(alt)

    def x_Binary(self, e):
        if e.op == "**":
            return f"pow({self.sub(e.left, PREC_ASSIGN)}, {self.sub(e.right, PREC_ASSIGN)})"
        return super().x_Binary(e)

    def is_bad_text(self, value: str, param: str) -> str:
        if self.pdtype(param).is_float:
            return f"isnan({value})"
        return f"{value} == BAD_{param}"

    def is_good_text(self, value: str, param: str) -> str:
        if self.pdtype(param).is_float:
            return f"!isnan({value})"
        return f"{value} != BAD_{param}"

    def x_IsBad(self, e):
        if not self.bad:
            return "0"
        return self.is_bad_text(self.elem(e.access), e.access.param)

    def x_IsGood(self, e):
        if not self.bad:
            return "1"
        return self.is_good_text(self.elem(e.access), e.access.param)

    def x_IsBadVar(self, e):
        return self.is_bad_text(e.var.name, e.param) if self.bad else "0"

    def x_IsGoodVar(self, e):
        return self.is_good_text(e.var.name, e.param) if self.bad else "1"

    def x_SetBadVar(self, e):
        return f"{e.var.name} = BAD_{e.param}"

    def x_StateIsBad(self, e):
        return f"BADFLAG({e.param})"

    def x_StateIsGood(self, e):
        return f"!BADFLAG({e.param})"

    # statements

    def s_SetBad(self, s):
        self.emit(f"{self.elem(s.access)} = BAD_{s.access.param};")
        if not self.bad:
            self.emit(f"SET_BADFLAG({s.access.param});")

    def s_StateSetBad(self, s):
        self.emit(f"SET_BADFLAG({s.param});")

    def s_StateSetGood(self, s):
        self.emit(f"CLEAR_BADFLAG({s.param});")

    def s_SetNdims(self, s):
        self.emit(f"SETNDIMS({self.expr(s.expr)});")

    def s_SetDims(self, s):
        self.emit("SETDIMS();")

    def s_DoCompDims(self, s):
        pass

    def s_EquivCP(self, s):
        if s.oob is None:
            self.emit(f"EQUIVCP({self.expr(s.pi)}, {self.expr(s.ci)});")
        else:
            self.emit(f"EQUIVCP_TRUNC({self.expr(s.pi)}, {self.expr(s.ci)}, {self.expr(s.oob)});")

    def s_LoopOver(self, s):
        d = s.dim
        self.braced(f"for ({d} = 0; {d} < {self.size_sym(d)}; {d}++)", s.body)

    def s_ThreadLoop(self, s):
        self.thread_nest(s.body.stmts)

    # thread sweep

    def thread_nest(self, body, depth: int | None = None):
        depth = self.depth_k if depth is None else depth
        swept = [p.name for p in self.sig.params if not p.is_temp]
        if depth == 0:
            self.stmts(body)
            return
        self.open_level(depth - 1, body, swept)

    def open_level(self, k: int, body, swept):
        t = f"_t{k}"
        self.emit(f"for ({t} = 0; {t} < T{k}; {t}++) {{")
        self.depth += 1
        if k == 0:
            self.stmts(body)
            for p in swept:
                self.emit(f"P_{p} += TINC_{p}_0;")
        else:
            self.open_level(k - 1, body, swept)
            for p in swept:
                self.emit(f"P_{p} += TINC_{p}_{k} - T{k - 1} * TINC_{p}_{k - 1};")
        self.depth -= 1
        self.emit("}")


def expand_kernel(k, sig, generic, variant: str = "good", bounds: bool = False,
                  thread_depth: int = 1, name: str | None = None) -> str:
    """Loop-nest text for kernel ``k`` specialized to ``generic``.

    Calculation kernels without an explicit ``threadloop`` are wrapped in a
    sweep of ``thread_depth`` nested thread loops.
    """
    if variant not in ("good", "bad"):
        raise ValueError(f"variant must be 'good' or 'bad', not {variant!r}")
    p = ExpandPrinter(sig, generic, variant, bounds, thread_depth)
    title = f"{name}: " if name else ""
    p.emit(f"/* {title}generic={generic.cname} variant={variant} "
           f"bounds={'on' if bounds else 'off'} */")
    for par in sig.params:
        role = "temp" if par.is_temp else ("out" if par.is_output else "in")
        p.emit(f"{p.pdtype(par.name).cname} *P_{par.name};  /* {role} */")
    if k.context != "calc":
        p.stmts(k.stmts)
    elif k.has_threadloop:
        p.stmts(k.stmts)
    else:
        p.thread_nest(k.stmts)
    return p.text()


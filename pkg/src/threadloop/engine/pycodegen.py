"""Compile elaborated kernels to Python functions.

The generated function takes a run context ``R`` (see
:class:`threadloop.engine.execute.KernelRun`) and performs the whole call,
including the thread-tuple sweep.  Specializations are cached per kernel,
generic type, variant, bounds checking and thread depth.
"""
from __future__ import annotations

from ..errors import KernelSyntaxError
from ..kernelc.elaborate import LoopSym, OtherParSym
from ..kernelc.expand import pick_alt
from ..kernelc.nodes import (Assign, Binary, Block, Call, Cast, CompRef,
                             Declare, DoCompDims, Empty, EquivCP, ExprStmt,
                             FlowMeta, For, GenericType, Ident, If, IncDec,
                             IsBad, IsBadVar, IsGood, IsGoodVar, LoopOver,
                             LoopVar, MetaRef, Num, ParamAccess, SetBad,
                             SetBadVar, SetDims, SetNdims, SizeOf, StateIsBad,
                             StateIsGood, StateSetBad, StateSetGood,
                             Subscript, Symbol, Ternary, ThreadLoop, TypeName,
                             TypeSwitch, Unary, While)
from ..ndarray import Dtype
from ..sigparse import TYPE_NAMES
from ..typesys import param_dtype
from .runtime import NAMESPACE

_OTHER_KIND = {"int": "i", "float": "f", "string": "s", "list-of-int": "Li", "list-of-float": "Lf"}


class PyGen:
    def __init__(self, k, sig, generic: Dtype, variant: str, bounds: bool, nthread: int,
                 otherpars=None, comp=None, nan_bad=None):
        self.k = k
        self.sig = sig
        self.generic = generic
        self.bad = variant == "bad"
        self.bounds = bounds
        self.nthread = nthread
        self.otherpars = otherpars or {}
        self.comp = comp or {}
        # params whose bad value is NaN (float dtype, no override)
        self.nan_bad = nan_bad if nan_bad is not None else {
            p.name for p in sig.params if param_dtype(p, generic).is_float}
        self.lines: list[str] = []
        self.ind = 1
        self.tmp = 0

    # --- helpers

    def emit(self, s: str):
        self.lines.append("    " * self.ind + s)

    def fresh(self, base="_w") -> str:
        self.tmp += 1
        return f"{base}{self.tmp}"

    def pdt(self, name) -> Dtype:
        return param_dtype(self.sig.param(name), self.generic)

    def type_dtype(self, t) -> Dtype:
        if isinstance(t, GenericType):
            return self.generic
        if isinstance(t, TypeName):
            return TYPE_NAMES[t.name]
        if isinstance(t, TypeSwitch):
            return self.type_dtype(pick_alt(t, self.generic))
        raise KernelSyntaxError("expected a type")

    def size_var(self, dim) -> str:
        return f"S_{self.sig.base_of(dim) or dim}"

    def comp_kind(self, name) -> str:
        if name in self.comp:
            t = self.comp[name]
            if isinstance(t, str) and t.startswith("list-of-"):
                return _OTHER_KIND[t]
            if isinstance(t, str) and t in _OTHER_KIND:
                return _OTHER_KIND[t]
            return "f" if TYPE_NAMES[t].is_float else "i"
        return _OTHER_KIND.get(self.otherpars.get(name), "i")

    # --- casting

    def cast_to(self, code: str, kind: str, dt: Dtype, for_array: bool) -> str:
        if dt is Dtype.DOUBLE:
            return code if (kind == "f" or for_array) else f"float({code})"
        if dt is Dtype.FLOAT:
            return code if for_array else f"_f32({code})"
        if kind == "f":
            return f"_ftoi({code}, {dt.bits}, {dt.signed})"
        w = self.fresh()
        return f"({w} if {dt.min} <= ({w} := {code}) <= {dt.max} else _wrap({w}, {dt.bits}, {dt.signed}))"

    # --- expressions: return (code, kind)

    def offset(self, a: ParamAccess) -> str:
        p = self.sig.param(a.param)
        terms = [f"o_{a.param}"]
        for d in p.dim_names:
            e = a.resolved[d]
            if isinstance(e, Num) and not self.bounds:
                if e.value != 0:
                    terms.append(f"{int(e.value)} * I_{a.param}_{d}")
                continue
            idx, kind = self.expr(e)
            if kind == "f":
                idx = f"_ftoi({idx}, 64, True)"
            if self.bounds:
                idx = f"_bc({idx}, {self.size_var(d)}, {a.param!r}, {d!r})"
            terms.append(f"({idx}) * I_{a.param}_{d}")
        return " + ".join(terms)

    def elem(self, a: ParamAccess) -> str:
        return f"D_{a.param}[{self.offset(a)}]"

    def kind_of_dt(self, dt: Dtype) -> str:
        return "f" if dt.is_float else "i"

    def expr(self, e):
        m = getattr(self, "x_" + type(e).__name__)
        return m(e)

    def x_Num(self, e):
        return (repr(e.value), "f" if e.is_float else "i")

    def x_Ident(self, e):
        sym = e.sym
        if isinstance(sym, Symbol):
            return (sym.pyname, self.kind_of_dt(self.type_dtype(sym.type)))
        if isinstance(sym, LoopSym):
            return (f"L_{sym.dim}", "i")
        if isinstance(sym, OtherParSym):
            return (f"OP[{sym.name!r}]", _OTHER_KIND.get(self.otherpars.get(sym.name), "i"))
        raise KernelSyntaxError(f"unresolved identifier {e.name!r}")

    def x_LoopVar(self, e):
        return (f"L_{e.dim}", "i")

    def x_ParamAccess(self, e):
        return (self.elem(e), self.kind_of_dt(self.pdt(e.param)))

    def x_SizeOf(self, e):
        return (self.size_var(e.dim), "i")

    def x_CompRef(self, e):
        return (f"COMP[{e.name!r}]", self.comp_kind(e.name))

    def x_Subscript(self, e):
        base, kind = self.expr(e.base)
        idx, _ = self.expr(e.index)
        return (f"{base}[{idx}]", "f" if kind == "Lf" else "i")

    def x_MetaRef(self, e):
        idx = "None" if e.index is None else self.expr(e.index)[0]
        return (f"R.meta({e.param!r}, {e.field!r}, {idx})", "i")

    def x_FlowMeta(self, e):
        idx = "None" if e.index is None else self.expr(e.index)[0]
        return (f"R.flow_meta({e.which!r}, {e.field!r}, {idx})", "i")

    def x_TypeSwitch(self, e):
        alt = pick_alt(e, self.generic)
        if isinstance(alt, TypeName):
            raise KernelSyntaxError("type switch selected a type where a value is needed")
        return self.expr(alt)

    def x_Cast(self, e):
        code, kind = self.expr(e.expr)
        dt = self.type_dtype(e.type)
        if dt is Dtype.DOUBLE:
            return (f"float({code})", "f")
        return (self.cast_to(code, kind, dt, False), self.kind_of_dt(dt))

    def x_Call(self, e):
        args = ", ".join(self.expr(a)[0] for a in e.args)
        return (f"_b_{e.name}({args})", "f")

    def x_Unary(self, e):
        code, kind = self.expr(e.expr)
        if e.op == "!":
            return (f"({code} == 0)", "i")
        return (f"({e.op}{code})", kind)

    def x_Binary(self, e):
        a, ka = self.expr(e.left)
        if e.op in ("&&", "||"):
            b, _ = self.expr(e.right)
            a = a if _is_bool(e.left) else f"({a} != 0)"
            b = b if _is_bool(e.right) else f"({b} != 0)"
            py = "and" if e.op == "&&" else "or"
            return (f"({a} {py} {b})", "i")
        b, kb = self.expr(e.right)
        kind = "f" if "f" in (ka, kb) else "i"
        if e.op == "**":
            return (f"_pow({a}, {b})", "f")
        if e.op == "/":
            return ((f"_fdiv({a}, {b})" if kind == "f" else f"_idiv({a}, {b}, R)"), kind)
        if e.op == "%":
            return ((f"_fmod({a}, {b})" if kind == "f" else f"_imod({a}, {b}, R)"), kind)
        if e.op in ("+", "-", "*"):
            return (f"({a} {e.op} {b})", kind)
        return (f"({a} {e.op} {b})", "i")

    def x_Ternary(self, e):
        c, _ = self.expr(e.cond)
        a, ka = self.expr(e.a)
        b, kb = self.expr(e.b)
        return (f"({a} if {c} else {b})", "f" if "f" in (ka, kb) else "i")

    def target_info(self, t):
        """(read code, store function, dtype-or-kind) for an lvalue."""
        if isinstance(t, Ident):
            sym = t.sym
            dt = self.type_dtype(sym.type)
            return sym.pyname, ("local", sym.pyname), dt
        if isinstance(t, ParamAccess):
            return None, ("elem", t), self.pdt(t.param)
        if isinstance(t, CompRef):
            kind = self.comp_kind(t.name)
            dt = Dtype.DOUBLE if kind == "f" else (Dtype.LONGLONG if kind == "i" else None)
            if t.name in self.comp and self.comp[t.name] in TYPE_NAMES:
                dt = TYPE_NAMES[self.comp[t.name]]
            return f"COMP[{t.name!r}]", ("comp", t.name), dt
        if isinstance(t, SizeOf):
            return None, ("size", t.dim), Dtype.INDX
        if isinstance(t, FlowMeta):
            return None, ("flow", t), Dtype.INDX
        if isinstance(t, Subscript):
            base, _ = self.expr(t.base)
            idx, _ = self.expr(t.index)
            return f"{base}[{idx}]", ("sub", base, idx), None
        raise KernelSyntaxError("not assignable")

    def assign_code(self, target, value_fn, as_expr: bool):
        """Build code storing ``value_fn(read_code)`` into ``target``.

        ``value_fn`` receives the current-value code (for compound ops) and
        returns ``(code, kind)``.  Returns expression code when ``as_expr``,
        otherwise emits statements.
        """
        read, (how, *info), dt = self.target_info(target)
        if how == "local":
            name = info[0]
            code, kind = value_fn(name)
            val = self.cast_to(code, kind, dt, False)
            if as_expr:
                return f"({name} := {val})"
            self.emit(f"{name} = {val}")
            return None
        if how == "elem":
            a = info[0]
            off = self.fresh("_o")
            code, kind = value_fn(f"D_{a.param}[{off}]")
            val = self.cast_to(code, kind, dt, True)
            if as_expr:
                return f"_st(D_{a.param}, ({off} := {self.offset(a)}), {val})"
            self.emit(f"{off} = {self.offset(a)}")
            self.emit(f"D_{a.param}[{off}] = {val}")
            return None
        if how == "comp":
            code, kind = value_fn(read)
            val = code if dt is None else self.cast_to(code, kind, dt, False)
            return self._maybe(f"_cst(COMP, {info[0]!r}, {val})", as_expr)
        if how == "size":
            code, kind = value_fn(None)
            return self._maybe(f"R.size_set({info[0]!r}, {code})", as_expr)
        if how == "flow":
            fm = info[0]
            code, kind = value_fn(None)
            idx = "None" if fm.index is None else self.expr(fm.index)[0]
            return self._maybe(f"R.child_set({fm.field!r}, {idx}, {code})", as_expr)
        if how == "sub":
            base, idx = info
            code, kind = value_fn(read)
            return self._maybe(f"_cst({base}, {idx}, {code})", as_expr)
        raise KernelSyntaxError("not assignable")

    def _maybe(self, code, as_expr):
        if as_expr:
            return code
        self.emit(code)
        return None

    def compound(self, op, rhs, kind):
        def fn(cur):
            if op == "=":
                return self.expr(rhs)
            return self.expr(Binary(op[0], _Raw(cur, kind), rhs))
        return fn

    def x__Raw(self, e):
        return (e.code, e.kind)

    def do_assign(self, e: Assign, as_expr):
        _, _, dt = self.target_info(e.target)
        kind = "f" if (dt is not None and dt.is_float) else "i"
        return self.assign_code(e.target, self.compound(e.op, e.value, kind), as_expr)

    def x_Assign(self, e):
        _, _, dt = self.target_info(e.target)
        return (self.do_assign(e, True), "f" if dt is not None and dt.is_float else "i")

    def do_incdec(self, e: IncDec, as_expr):
        _, _, dt = self.target_info(e.target)
        kind = "f" if dt is not None and dt.is_float else "i"
        op = "+" if e.op == "++" else "-"
        if not as_expr or e.prefix:
            return self.assign_code(e.target, self.compound(op + "=", Num("1", 1, False), kind), as_expr)
        # postfix value: the old value
        old = self.fresh("_v")
        read, (how, *info), _ = self.target_info(e.target)
        if how == "elem":
            a = info[0]
            off = self.fresh("_o")
            store = self.cast_to(f"{old} {op} 1", kind, dt, True)
            return (f"({old} := D_{a.param}[({off} := {self.offset(a)})], "
                    f"_st(D_{a.param}, {off}, {store}))[0]")
        store = self.assign_code(e.target, lambda cur: (f"({old} {op} 1)", kind), True)
        return f"(({old} := {read}), {store})[0]"

    def x_IncDec(self, e):
        _, _, dt = self.target_info(e.target)
        return (self.do_incdec(e, True), "f" if dt is not None and dt.is_float else "i")

    def is_bad_code(self, value, param) -> str:
        if param in self.nan_bad:
            return f"_isnan({value})"
        return f"({value} == BV_{param})"

    def x_IsBad(self, e):
        if not self.bad:
            return ("False", "i")
        return (self.is_bad_code(self.elem(e.access), e.access.param), "i")

    def x_IsGood(self, e):
        if not self.bad:
            return ("True", "i")
        return (f"(not {self.is_bad_code(self.elem(e.access), e.access.param)})", "i")

    def x_IsBadVar(self, e):
        if not self.bad:
            return ("False", "i")
        return (self.is_bad_code(self.expr(e.var)[0], e.param), "i")

    def x_IsGoodVar(self, e):
        if not self.bad:
            return ("True", "i")
        return (f"(not {self.is_bad_code(self.expr(e.var)[0], e.param)})", "i")

    def x_SetBadVar(self, e):
        dt = self.type_dtype(e.var.sym.type)
        kind = "f" if self.pdt(e.param).is_float else "i"
        return (self.assign_code(e.var, lambda cur: (f"BV_{e.param}", kind), True),
                self.kind_of_dt(dt))

    def x_StateIsBad(self, e):
        return (f"R.flag({e.param!r})", "i")

    def x_StateIsGood(self, e):
        return (f"(not R.flag({e.param!r}))", "i")

    # --- statements

    def stmts(self, ss):
        for s in ss:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, Block):
            self.stmts(s.stmts)
        elif isinstance(s, (Empty, DoCompDims)):
            pass
        elif isinstance(s, Declare):
            dt = self.type_dtype(s.type)
            for (name, init), sym in zip(s.decls, s.syms):
                if init is None:
                    self.emit(f"{sym.pyname} = {0.0 if dt.is_float else 0}")
                else:
                    code, kind = self.expr(init)
                    self.emit(f"{sym.pyname} = {self.cast_to(code, kind, dt, False)}")
        elif isinstance(s, Assign):
            self.do_assign(s, False)
        elif isinstance(s, IncDec):
            self.do_incdec(s, False)
        elif isinstance(s, SetBadVar):
            self.emit(self.x_SetBadVar(s)[0])
        elif isinstance(s, ExprStmt):
            self.emit(self.expr(s.expr)[0])
        elif isinstance(s, If):
            self.emit(f"if {self.expr(s.cond)[0]}:")
            self.nested(s.then)
            if s.else_ is not None:
                self.emit("else:")
                self.nested(s.else_)
        elif isinstance(s, While):
            self.emit(f"while {self.expr(s.cond)[0]}:")
            self.nested(s.body)
        elif isinstance(s, For):
            if s.init is not None:
                self.stmt(s.init)
            cond = "True" if s.cond is None else self.expr(s.cond)[0]
            self.emit(f"while {cond}:")
            self.ind += 1
            self.emit("pass")
            self.stmt(s.body)
            if s.step is not None:
                self.expr_stmt(s.step)
            self.ind -= 1
        elif isinstance(s, LoopOver):
            self.emit(f"for L_{s.dim} in range({self.size_var(s.dim)}):")
            self.nested(s.body)
        elif isinstance(s, ThreadLoop):
            self.sweep(s.body.stmts)
        elif isinstance(s, SetBad):
            a = s.access
            self.emit(f"D_{a.param}[{self.offset(a)}] = BV_{a.param}")
            self.emit(f"R.setbad.add({a.param!r})")
        elif isinstance(s, StateSetBad):
            self.emit(f"R.state[{s.param!r}] = True")
        elif isinstance(s, StateSetGood):
            self.emit(f"R.state[{s.param!r}] = False")
        elif isinstance(s, SetNdims):
            self.emit(f"R.setndims({self.expr(s.expr)[0]})")
        elif isinstance(s, SetDims):
            self.emit("R.setdims()")
        elif isinstance(s, EquivCP):
            oob = "0" if s.oob is None else self.expr(s.oob)[0]
            self.emit(f"R.equivcp({self.expr(s.pi)[0]}, {self.expr(s.ci)[0]}, {oob})")
        else:
            raise KernelSyntaxError(f"cannot compile {type(s).__name__}")

    def expr_stmt(self, e):
        if isinstance(e, Assign):
            self.do_assign(e, False)
        elif isinstance(e, IncDec):
            self.do_incdec(e, False)
        else:
            self.emit(self.expr(e)[0])

    def nested(self, s):
        self.ind += 1
        self.emit("pass")
        self.stmt(s)
        self.ind -= 1

    # --- the sweep

    def swept(self):
        return [p.name for p in self.sig.params if not p.is_temp]

    def base_offsets(self):
        for p in self.sig.params:
            self.emit(f"o_{p.name} = B_{p.name}")

    def sweep(self, body):
        n = self.nthread
        if n == 0:
            self.base_offsets()
            self.stmts(body)
            return
        for k in range(n - 1, -1, -1):
            self.emit(f"for _t{k} in ORD[{k}]:")
            self.ind += 1
        for p in self.sig.params:
            if p.is_temp:
                self.emit(f"o_{p.name} = B_{p.name}")
                continue
            terms = " + ".join(f"_t{k} * TI_{p.name}_{k}" for k in range(n))
            self.emit(f"o_{p.name} = B_{p.name} + {terms}")
        self.stmts(body)
        self.ind -= n
        self.base_offsets()

    def prologue(self):
        out = []
        for p in self.sig.params:
            n = p.name
            out.append(f"D_{n} = R.D[{n!r}]")
            out.append(f"B_{n} = R.B[{n!r}]")
            out.append(f"BV_{n} = R.BV[{n!r}]")
            for d in p.dim_names:
                out.append(f"I_{n}_{d} = R.INC[{n!r}][{d!r}]")
            if not p.is_temp:
                for k in range(self.nthread):
                    out.append(f"TI_{n}_{k} = R.TINC[{n!r}][{k}]")
            out.append(f"o_{n} = B_{n}")
        for d in sorted(self.sig.base_dims):
            out.append(f"S_{d} = R.SIZE.get({d!r}, 0)")
        out += ["COMP = R.COMP", "OP = R.OP", "ORD = R.ORDER"]
        return out

    def build(self) -> str:
        k = self.k
        if k.context == "calc":
            if k.has_threadloop:
                self.stmts(k.stmts)
            else:
                self.sweep(k.stmts)
        else:
            self.stmts(k.stmts)
        head = ["def _kernel(R):"] + ["    " + s for s in self.prologue()]
        return "\n".join(head + self.lines + ["    return None"]) + "\n"


class _Raw:
    """An already-generated code fragment used inside compound assignments."""

    def __init__(self, code, kind):
        self.code = code
        self.kind = kind


def _is_bool(e) -> bool:
    return isinstance(e, (Binary,)) and e.op in ("<", ">", "<=", ">=", "==", "!=", "&&", "||") \
        or isinstance(e, (IsBad, IsGood, IsBadVar, IsGoodVar)) \
        or (isinstance(e, Unary) and e.op == "!")


_CACHE: dict = {}


def compile_kernel(k, sig, generic, variant="good", bounds=False, nthread=0,
                   otherpars=None, comp=None, nan_bad=None):
    """Return ``(function, source)`` for one specialization of ``k``."""
    nan_key = None if nan_bad is None else frozenset(nan_bad)
    key = (id(k), id(sig), generic, variant, bounds, nthread, nan_key)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is k and hit[1] is sig:
        return hit[2], hit[3]
    g = PyGen(k, sig, generic, variant, bounds, nthread, otherpars, comp, nan_bad)
    src = g.build()
    ns = dict(NAMESPACE)
    exec(compile(src, f"<kernel {variant} {generic.cname}>", "exec"), ns)
    fn = ns["_kernel"]
    _CACHE[key] = (k, sig, fn, src)
    return fn, src

"""Name resolution, implicit dim binding and per-context checks.

Both the Python code generator and the text expander consume the result, so
dim binding rules exist in exactly one place.
"""
from __future__ import annotations

from ..errors import (ElementAccessInRedoDims, KernelSyntaxError,
                      SizeReadInRedoDims, UnboundDim, UnknownCompField,
                      UnknownDim, UnknownIdentifier, UnknownParam)
from .nodes import (Assign, Binary, Block, Call, Cast, CompRef, Declare,
                    DoCompDims, Empty, EquivCP, ExprStmt, FlowMeta, For,
                    GenericType, Ident, If, IncDec, IsBad, IsBadVar, IsGood,
                    IsGoodVar, KernelAst, LoopOver, LoopVar, MetaRef, Num,
                    ParamAccess, SetBad, SetBadVar, SetDims, SetNdims, SizeOf,
                    StateIsBad, StateIsGood, StateSetBad, StateSetGood,
                    Subscript, Symbol, Ternary, ThreadLoop, TypeName,
                    TypeSwitch, Unary, While, walk)

# calc: Code/BadCode/BackCode; redodimscode: $SIZE assignment hook;
# makecomp / redodims / equivcp: dataflow setup and offset kernels
CONTEXTS = ("calc", "redodimscode", "makecomp", "redodims", "equivcp")

_NO_ELEMENTS = {
    "redodimscode": ElementAccessInRedoDims,
    "redodims": ElementAccessInRedoDims,
    "makecomp": KernelSyntaxError,
    "equivcp": KernelSyntaxError,
}


class OtherParSym:
    """A bare OtherPars name, visible only in MakeComp."""

    def __init__(self, name):
        self.name = name


class LoopSym:
    def __init__(self, dim):
        self.dim = dim


class Elaborator:
    def __init__(self, sig, otherpars, comp, context: str):
        if context not in CONTEXTS:
            raise ValueError(f"unknown kernel context {context!r}")
        self.sig = sig
        self.otherpars = dict(otherpars or {})
        self.comp = dict(comp or {})
        self.ctx = context
        self.scopes: list[dict] = [{}]
        self.loops: list[str] = []
        self.symbols: list[Symbol] = []
        self.pynames: set[str] = set()
        self.threadloops = 0
        self.in_threadloop = False
        self.uses = {"setbad": set(), "statesetbad": set(), "statesetgood": set(),
                     "isbad": False, "writes": set()}
        self.all_dims = sig.dim_names | sig.base_dims

    def run(self, stmts) -> KernelAst:
        for s in stmts:
            self.stmt(s, top=True)
        return KernelAst(tuple(stmts), self.ctx, self.symbols,
                         self.threadloops > 0, self.uses)

    # scopes

    def lookup(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if self.ctx == "makecomp" and name in self.otherpars:
            return OtherParSym(name)
        return None

    def declare(self, name, ty) -> Symbol:
        if name in self.scopes[-1]:
            raise KernelSyntaxError(f"variable {name!r} declared twice in one block")
        py = f"v_{name}"
        k = 1
        while py in self.pynames:
            k += 1
            py = f"v_{name}_{k}"
        self.pynames.add(py)
        sym = Symbol(name, py, ty)
        self.symbols.append(sym)
        self.scopes[-1][name] = sym
        return sym

    def push(self):
        self.scopes.append({})

    def pop(self):
        self.scopes.pop()

    # statements

    def stmt(self, s, top=False):
        if isinstance(s, Block):
            self.push()
            for x in s.stmts:
                self.stmt(x)
            self.pop()
        elif isinstance(s, Empty) or isinstance(s, DoCompDims):
            pass
        elif isinstance(s, Declare):
            self.type_spec(s.type)
            s.syms = []
            for name, init in s.decls:
                if init is not None:
                    self.expr(init)
                s.syms.append(self.declare(name, s.type))
        elif isinstance(s, ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, (Assign, IncDec, SetBadVar)):
            self.expr(s)
        elif isinstance(s, If):
            self.expr(s.cond)
            self.scoped(s.then)
            if s.else_ is not None:
                self.scoped(s.else_)
        elif isinstance(s, For):
            self.push()
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.expr(s.cond)
            if s.step is not None:
                self.expr(s.step)
            self.scoped(s.body)
            self.pop()
        elif isinstance(s, While):
            self.expr(s.cond)
            self.scoped(s.body)
        elif isinstance(s, LoopOver):
            if self.ctx != "calc":
                raise _NO_ELEMENTS[self.ctx]("loop() is unavailable in this context")
            if s.dim not in self.all_dims:
                raise UnknownDim(f"loop over unknown dim {s.dim!r}")
            if s.dim in self.loops:
                raise KernelSyntaxError(f"loop({s.dim}) nested inside loop({s.dim})")
            self.loops.append(s.dim)
            self.scopes.append({s.dim: LoopSym(s.dim)})
            self.stmt(s.body)
            self.scopes.pop()
            self.loops.pop()
        elif isinstance(s, ThreadLoop):
            if self.ctx != "calc":
                raise _NO_ELEMENTS[self.ctx]("threadloop is unavailable in this context")
            if self.in_threadloop:
                raise KernelSyntaxError("threadloop nested inside threadloop")
            if self.threadloops:
                raise KernelSyntaxError("at most one threadloop per kernel")
            if not top:
                raise KernelSyntaxError("threadloop must be a top-level statement")
            self.threadloops += 1
            self.in_threadloop = True
            self.stmt(s.body)
            self.in_threadloop = False
        elif isinstance(s, SetBad):
            self.need_calc("$SETBAD")
            self.access(s.access, write=True)
            self.uses["setbad"].add(s.access.param)
        elif isinstance(s, (StateSetBad, StateSetGood)):
            self.need_calc("$PDLSTATESETBAD")
            key = "statesetbad" if isinstance(s, StateSetBad) else "statesetgood"
            self.uses[key].add(s.param)
        elif isinstance(s, SetNdims):
            self.need(("redodims",), "$SETNDIMS")
            self.expr(s.expr)
        elif isinstance(s, SetDims):
            self.need(("redodims",), "$SETDIMS")
        elif isinstance(s, EquivCP):
            self.need(("equivcp",), "$EquivCPOffs")
            self.expr(s.pi)
            self.expr(s.ci)
            if s.oob is not None:
                self.expr(s.oob)
        else:
            raise KernelSyntaxError(f"unsupported statement {type(s).__name__}")

    def scoped(self, s):
        self.push()
        self.stmt(s)
        self.pop()

    def need(self, ctxs, what):
        if self.ctx not in ctxs:
            raise KernelSyntaxError(f"{what} is not available in {self.ctx} code")

    def need_calc(self, what):
        if self.ctx != "calc":
            raise _NO_ELEMENTS[self.ctx](f"{what} is unavailable in {self.ctx} code")

    def type_spec(self, ty):
        if isinstance(ty, TypeSwitch):
            for a in ty.alts:
                if not isinstance(a, TypeName):
                    raise KernelSyntaxError("type switch used as a type lists a non-type")
        elif not isinstance(ty, (GenericType, TypeName)):
            raise KernelSyntaxError("expected a type")

    # expressions

    def param(self, name):
        p = self.sig.param(name)
        if p is None:
            raise UnknownParam(f"unknown parameter {name!r}")
        return p

    def access(self, a: ParamAccess, write=False):
        if self.ctx != "calc":
            raise _NO_ELEMENTS[self.ctx](f"element access ${a.param}() is unavailable in {self.ctx} code")
        p = self.param(a.param)
        names = p.dim_names
        resolved = {}
        for d, e in a.bindings:
            if d not in names:
                raise UnknownDim(f"${a.param} has no dim {d!r}")
            if d in resolved:
                raise KernelSyntaxError(f"dim {d!r} bound twice in ${a.param}")
            self.expr(e)
            resolved[d] = e
        for d in names:
            if d in resolved:
                continue
            sym = self.lookup(d)
            if isinstance(sym, LoopSym):
                resolved[d] = LoopVar(d)
            else:
                raise UnboundDim(f"dim {d!r} of ${a.param} is not bound and not inside loop({d})")
        a.resolved = resolved
        if write:
            self.uses["writes"].add(a.param)

    def expr(self, e, write=False):
        if isinstance(e, Num):
            return
        if isinstance(e, Ident):
            sym = self.lookup(e.name)
            if sym is None:
                raise UnknownIdentifier(f"unknown identifier {e.name!r}")
            if write and not isinstance(sym, Symbol):
                raise KernelSyntaxError(f"{e.name!r} is not assignable")
            e.sym = sym
        elif isinstance(e, ParamAccess):
            self.access(e, write)
        elif isinstance(e, SizeOf):
            if e.dim not in self.all_dims:
                raise UnknownDim(f"$SIZE of unknown dim {e.dim!r}")
            if self.ctx == "redodimscode" and not write:
                raise SizeReadInRedoDims(f"$SIZE({e.dim}) is write-only in RedoDimsCode")
            if write and self.ctx != "redodimscode":
                raise KernelSyntaxError("$SIZE is assignable only in RedoDimsCode")
        elif isinstance(e, CompRef):
            if e.name not in self.otherpars and e.name not in self.comp:
                raise UnknownCompField(f"unknown comp field {e.name!r}")
            if write and self.ctx != "makecomp":
                raise KernelSyntaxError("$COMP fields are assignable only in MakeComp")
        elif isinstance(e, MetaRef):
            if write:
                raise KernelSyntaxError("$PDL fields are read-only")
            self.param(e.param)
            if e.index is not None:
                self.expr(e.index)
        elif isinstance(e, FlowMeta):
            if self.ctx not in ("redodims", "makecomp", "equivcp"):
                raise KernelSyntaxError(f"${e.which}({e.field}) is only available in dataflow setup code")
            if write and (self.ctx != "redodims" or e.which != "CHILD"
                          or e.field not in ("dims", "dimincs", "datatype")):
                raise KernelSyntaxError(f"${e.which}({e.field}) is not assignable here")
            if e.index is not None:
                self.expr(e.index)
        elif isinstance(e, TypeSwitch):
            for a in e.alts:
                if not isinstance(a, TypeName):
                    self.expr(a)
        elif isinstance(e, Cast):
            self.type_spec(e.type)
            self.expr(e.expr)
        elif isinstance(e, Call):
            for a in e.args:
                self.expr(a)
        elif isinstance(e, Unary):
            self.expr(e.expr)
        elif isinstance(e, Binary):
            self.expr(e.left)
            if e.op in ("&&", "||"):
                self.no_side_effects(e.right, e.op)
            self.expr(e.right)
        elif isinstance(e, Ternary):
            self.expr(e.cond)
            self.no_side_effects(e.a, "?:")
            self.no_side_effects(e.b, "?:")
            self.expr(e.a)
            self.expr(e.b)
        elif isinstance(e, Subscript):
            if not isinstance(e.base, CompRef):
                raise KernelSyntaxError("only $COMP list fields can be subscripted")
            self.expr(e.base, write)
            self.expr(e.index)
        elif isinstance(e, Assign):
            self.expr(e.value)
            if e.op != "=":
                self.expr(e.target)          # compound ops read the target
            self.expr(e.target, write=True)
        elif isinstance(e, IncDec):
            if not isinstance(e.target, (Ident, ParamAccess, CompRef, Subscript)):
                raise KernelSyntaxError(f"operand of {e.op} is not assignable")
            self.expr(e.target)
            self.expr(e.target, write=True)
        elif isinstance(e, (IsBad, IsGood)):
            self.need_calc("$ISBAD")
            self.access(e.access)
            self.uses["isbad"] = True
        elif isinstance(e, (IsBadVar, IsGoodVar, SetBadVar)):
            self.need_calc("$ISBADVAR")
            self.param(e.param)
            self.expr(e.var, write=isinstance(e, SetBadVar))
            if not isinstance(e.var.sym, Symbol):
                raise KernelSyntaxError(f"{e.var.name!r} is not a local variable")
            self.uses["isbad"] = True
        elif isinstance(e, (StateIsBad, StateIsGood)):
            self.need_calc("$PDLSTATEISBAD")
            self.param(e.param)
        elif isinstance(e, (GenericType, TypeName)):
            raise KernelSyntaxError("a type name is not a value")
        else:
            raise KernelSyntaxError(f"unsupported expression {type(e).__name__}")

    def no_side_effects(self, e, where):
        for n in walk(e):
            if isinstance(n, (Assign, IncDec, SetBadVar)):
                raise KernelSyntaxError(f"side effects are not allowed inside {where} operands")


def elaborate(stmts, sig, otherpars=None, comp=None, context="calc") -> KernelAst:
    return Elaborator(sig, otherpars, comp, context).run(stmts)

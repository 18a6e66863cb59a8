"""Canonical source formatting of kernel ASTs.

:class:`CPrinter` holds the precedence-aware statement and expression layout
shared with the loop-nest expander; :class:`SourcePrinter` renders macros
back in their source spelling.
"""
from __future__ import annotations

from .nodes import (Assign, Binary, Block, Call, Cast, CompRef, Declare,
                    DoCompDims, Empty, EquivCP, ExprStmt, FlowMeta, For,
                    GenericType, Ident, If, IncDec, IsBad, IsBadVar, IsGood,
                    IsGoodVar, LoopOver, LoopVar, MetaRef, Num, ParamAccess,
                    SetBad, SetBadVar, SetDims, SetNdims, SizeOf, StateIsBad,
                    StateIsGood, StateSetBad, StateSetGood, Subscript,
                    Ternary, ThreadLoop, TypeName, TypeSwitch, Unary, While)

PREC_ASSIGN = 1
PREC_TERNARY = 2
PREC_UNARY = 9
PREC_POW = 10
PREC_POSTFIX = 11
PREC_PRIMARY = 12

BINARY_PREC = {
    "||": 3, "&&": 4, "==": 5, "!=": 5,
    "<": 6, ">": 6, "<=": 6, ">=": 6,
    "+": 7, "-": 7, "*": 8, "/": 8, "%": 8,
    "**": PREC_POW,
}

INDENT = "    "


class CPrinter:
    """C-like layout; subclasses render leaves and macro statements."""

    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    # --- output helpers

    def emit(self, text: str):
        self.lines.append(INDENT * self.depth + text)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    # --- expressions

    def prec(self, e) -> int:
        if isinstance(e, Assign):
            return PREC_ASSIGN
        if isinstance(e, Ternary):
            return PREC_TERNARY
        if isinstance(e, Binary):
            return BINARY_PREC[e.op]
        if isinstance(e, (Unary, Cast)) or (isinstance(e, IncDec) and e.prefix):
            return PREC_UNARY
        if isinstance(e, (IncDec, Subscript)):
            return PREC_POSTFIX
        return PREC_PRIMARY

    def sub(self, e, min_prec: int) -> str:
        s = self.expr(e)
        return f"({s})" if self.prec(e) < min_prec else s

    def expr(self, e) -> str:
        m = getattr(self, "x_" + type(e).__name__)
        return m(e)

    def x_Num(self, e):
        return e.text

    def x_Ident(self, e):
        return e.name

    def x_LoopVar(self, e):
        return e.dim

    def x_Binary(self, e):
        p = BINARY_PREC[e.op]
        if e.op == "**":
            return f"{self.sub(e.left, PREC_POSTFIX)} ** {self.sub(e.right, PREC_UNARY)}"
        return f"{self.sub(e.left, p)} {e.op} {self.sub(e.right, p + 1)}"

    def x_Unary(self, e):
        inner = self.sub(e.expr, PREC_UNARY)
        if e.op in "+-" and (inner.startswith("-") or inner.startswith("+")):
            inner = f"({inner})"
        return f"{e.op}{inner}"

    def x_Ternary(self, e):
        return (f"{self.sub(e.cond, PREC_TERNARY + 1)} ? {self.sub(e.a, PREC_ASSIGN)}"
                f" : {self.sub(e.b, PREC_TERNARY)}")

    def x_Assign(self, e):
        return f"{self.sub(e.target, PREC_POSTFIX)} {e.op} {self.sub(e.value, PREC_ASSIGN)}"

    def x_IncDec(self, e):
        if e.prefix:
            return f"{e.op}{self.sub(e.target, PREC_UNARY)}"
        return f"{self.sub(e.target, PREC_POSTFIX)}{e.op}"

    def x_Cast(self, e):
        return f"({self.type_text(e.type)}) {self.sub(e.expr, PREC_UNARY)}"

    def x_Call(self, e):
        return f"{e.name}({', '.join(self.sub(a, PREC_ASSIGN) for a in e.args)})"

    def x_Subscript(self, e):
        return f"{self.sub(e.base, PREC_POSTFIX)}[{self.expr(e.index)}]"

    # --- statements

    def stmts(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        m = getattr(self, "s_" + type(s).__name__, None)
        if m is not None:
            m(s)
        else:
            self.emit(self.expr(s) + ";")

    def s_Empty(self, s):
        self.emit(";")

    def s_ExprStmt(self, s):
        self.emit(self.expr(s.expr) + ";")

    def s_Block(self, s):
        self.emit("{")
        self.body(s)
        self.emit("}")

    def body(self, s):
        self.depth += 1
        if isinstance(s, Block):
            self.stmts(s.stmts)
        else:
            self.stmt(s)
        self.depth -= 1

    def decl_text(self, s) -> str:
        parts = []
        for name, init in s.decls:
            parts.append(name if init is None else f"{name} = {self.sub(init, PREC_ASSIGN)}")
        return f"{self.type_text(s.type)} {', '.join(parts)}"

    def s_Declare(self, s):
        self.emit(self.decl_text(s) + ";")

    def braced(self, head: str, body):
        """Emit ``head {`` body ``}``; a non-block body gets braces too."""
        self.emit(head + " {")
        self.body(body)
        self.emit("}")

    def s_If(self, s):
        self.if_chain(s, "if")

    def if_chain(self, s, kw):
        head = f"{kw} ({self.expr(s.cond)})"
        # an else-less inner if would capture our else when reparsed
        dangling = s.else_ is not None and isinstance(s.then, If) and s.then.else_ is None
        if isinstance(s.then, Block) or dangling:
            self.braced(head, s.then)
        else:
            self.emit(head)
            self.body(s.then)
        if s.else_ is None:
            return
        if isinstance(s.else_, If):
            self.if_chain(s.else_, "else if")
        elif isinstance(s.else_, Block):
            self.braced("else", s.else_)
        else:
            self.emit("else")
            self.body(s.else_)

    def for_head(self, s) -> str:
        if s.init is None:
            init = ""
        elif isinstance(s.init, Declare):
            init = self.decl_text(s.init)
        elif isinstance(s.init, ExprStmt):
            init = self.expr(s.init.expr)
        else:
            init = self.expr(s.init)
        cond = "" if s.cond is None else self.expr(s.cond)
        step = "" if s.step is None else self.expr(s.step)
        return f"for ({init}; {cond}; {step})"

    def s_For(self, s):
        self.loop_body(self.for_head(s), s.body)

    def s_While(self, s):
        self.loop_body(f"while ({self.expr(s.cond)})", s.body)

    def loop_body(self, head, body):
        if isinstance(body, Block):
            self.braced(head, body)
        else:
            self.emit(head)
            self.body(body)


class SourcePrinter(CPrinter):
    """Prints kernels in canonical kernel-language syntax."""

    def type_text(self, t) -> str:
        if isinstance(t, GenericType):
            return "$GENERIC()"
        if isinstance(t, TypeName):
            return t.name
        return self.x_TypeSwitch(t)

    def access_text(self, a: ParamAccess) -> str:
        b = ", ".join(f"{d}=>{self.sub(e, PREC_ASSIGN)}" for d, e in a.bindings)
        return f"{a.param}({b})"

    def x_ParamAccess(self, e):
        return "$" + self.access_text(e)

    def x_SizeOf(self, e):
        return f"$SIZE({e.dim})"

    def x_CompRef(self, e):
        return f"$COMP({e.name})"

    def x_MetaRef(self, e):
        s = f"$PDL({e.param})->{e.field}"
        if e.index is not None:
            s += f"({self.expr(e.index)})" if e.call_style else f"[{self.expr(e.index)}]"
        return s

    def x_FlowMeta(self, e):
        idx = "" if e.index is None else f"[{self.expr(e.index)}]"
        return f"${e.which}({e.field}{idx})"

    def x_TypeSwitch(self, e):
        alts = ", ".join(a.name if isinstance(a, TypeName) else self.sub(a, PREC_ASSIGN)
                         for a in e.alts)
        return f"$T{e.letters}({alts})"

    def x_IsBad(self, e):
        return f"$ISBAD({self.access_text(e.access)})"

    def x_IsGood(self, e):
        return f"$ISGOOD({self.access_text(e.access)})"

    def x_IsBadVar(self, e):
        return f"$ISBADVAR({e.var.name}, {e.param})"

    def x_IsGoodVar(self, e):
        return f"$ISGOODVAR({e.var.name}, {e.param})"

    def x_SetBadVar(self, e):
        return f"$SETBADVAR({e.var.name}, {e.param})"

    def x_StateIsBad(self, e):
        return f"$PDLSTATEISBAD({e.param}())"

    def x_StateIsGood(self, e):
        return f"$PDLSTATEISGOOD({e.param}())"

    def s_SetBad(self, s):
        self.emit(f"$SETBAD({self.access_text(s.access)});")

    def s_StateSetBad(self, s):
        self.emit(f"$PDLSTATESETBAD({s.param}());")

    def s_StateSetGood(self, s):
        self.emit(f"$PDLSTATESETGOOD({s.param}());")

    def s_SetNdims(self, s):
        self.emit(f"$SETNDIMS({self.expr(s.expr)});")

    def s_SetDims(self, s):
        self.emit("$SETDIMS();")

    def s_DoCompDims(self, s):
        self.emit("$DOCOMPDIMS();")

    def s_EquivCP(self, s):
        if s.oob is None:
            self.emit(f"$EquivCPOffs({self.expr(s.pi)}, {self.expr(s.ci)});")
        else:
            self.emit(f"$EquivCPTrunc({self.expr(s.pi)}, {self.expr(s.ci)}, {self.expr(s.oob)});")

    def s_LoopOver(self, s):
        self.emit(f"loop({s.dim}) %{{")
        self.body(s.body)
        self.emit("%}")

    def s_ThreadLoop(self, s):
        self.emit("threadloop %{")
        self.body(s.body)
        self.emit("%}")


def format_kernel(k) -> str:
    """Canonical source text for a kernel AST (or a bare statement tuple)."""
    p = SourcePrinter()
    p.stmts(k.stmts if hasattr(k, "stmts") else k)
    return p.text()

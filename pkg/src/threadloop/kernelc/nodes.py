"""Kernel AST node types.

Structural equality ignores source positions and the annotations added by
elaboration, so a reparsed canonical text compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field


def _meta(default=None):
    return field(default=default, compare=False, repr=False)


class Node:
    pass


class Expr(Node):
    pass


class Stmt(Node):
    pass


# --- type specifiers ---------------------------------------------------------

@dataclass(eq=True)
class GenericType(Expr):
    """``$GENERIC()``: the call's generic dtype."""


@dataclass(eq=True)
class TypeName(Expr):
    name: str          # as written; resolved through sigparse.TYPE_NAMES


# --- expressions -------------------------------------------------------------

@dataclass(eq=True)
class Num(Expr):
    text: str
    value: object
    is_float: bool


@dataclass(eq=True)
class Ident(Expr):
    name: str
    sym: object = _meta()      # Symbol, filled by elaboration


@dataclass(eq=True)
class LoopVar(Expr):
    """Implicit binding of a dim to the index of an enclosing loop()."""
    dim: str


@dataclass(eq=True)
class ParamAccess(Expr):
    param: str
    bindings: tuple = ()       # ((dim, Expr), ...) as written
    bare: bool = _meta(False)
    resolved: dict = _meta()   # dim -> Expr for every active dim


@dataclass(eq=True)
class SizeOf(Expr):
    dim: str


@dataclass(eq=True)
class CompRef(Expr):
    name: str


@dataclass(eq=True)
class MetaRef(Expr):
    """``$PDL(p)->field`` with field in ndims, nvals, datatype, dims, dimincs."""
    param: str
    field: str
    index: Expr | None = None
    call_style: bool = _meta(False)    # dims(i) rather than dims[i]


@dataclass(eq=True)
class FlowMeta(Expr):
    """``$PARENT(field)`` / ``$CHILD(field)`` in dataflow setup code."""
    which: str
    field: str
    index: Expr | None = None


@dataclass(eq=True)
class TypeSwitch(Expr):
    letters: str
    alts: tuple


@dataclass(eq=True)
class Cast(Expr):
    type: Expr
    expr: Expr


@dataclass(eq=True)
class Call(Expr):
    name: str
    args: tuple


@dataclass(eq=True)
class Unary(Expr):
    op: str
    expr: Expr


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class Ternary(Expr):
    cond: Expr
    a: Expr
    b: Expr


@dataclass(eq=True)
class Subscript(Expr):
    base: Expr
    index: Expr


@dataclass(eq=True)
class Assign(Expr, Stmt):
    target: Expr
    op: str
    value: Expr


@dataclass(eq=True)
class IncDec(Expr, Stmt):
    target: Expr
    op: str
    prefix: bool


@dataclass(eq=True)
class IsBad(Expr):
    access: ParamAccess


@dataclass(eq=True)
class IsGood(Expr):
    access: ParamAccess


@dataclass(eq=True)
class IsBadVar(Expr):
    var: Ident
    param: str


@dataclass(eq=True)
class IsGoodVar(Expr):
    var: Ident
    param: str


@dataclass(eq=True)
class SetBadVar(Expr, Stmt):
    var: Ident
    param: str


@dataclass(eq=True)
class StateIsBad(Expr):
    param: str


@dataclass(eq=True)
class StateIsGood(Expr):
    param: str


# --- statements --------------------------------------------------------------

@dataclass(eq=True)
class Declare(Stmt):
    type: Expr
    decls: tuple             # ((name, init-or-None), ...)
    syms: list = _meta()     # Symbols, filled by elaboration


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=True)
class Empty(Stmt):
    pass


@dataclass(eq=True)
class Block(Stmt):
    stmts: tuple


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    else_: Stmt | None = None


@dataclass(eq=True)
class For(Stmt):
    init: Stmt | None
    cond: Expr | None
    step: Expr | None
    body: Stmt


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(eq=True)
class LoopOver(Stmt):
    dim: str
    body: Block


@dataclass(eq=True)
class ThreadLoop(Stmt):
    body: Block


@dataclass(eq=True)
class SetBad(Stmt):
    access: ParamAccess


@dataclass(eq=True)
class StateSetBad(Stmt):
    param: str


@dataclass(eq=True)
class StateSetGood(Stmt):
    param: str


@dataclass(eq=True)
class SetNdims(Stmt):
    expr: Expr


@dataclass(eq=True)
class SetDims(Stmt):
    pass


@dataclass(eq=True)
class DoCompDims(Stmt):
    pass


@dataclass(eq=True)
class EquivCP(Stmt):
    pi: Expr
    ci: Expr
    oob: Expr | None = None       # None for $EquivCPOffs


# --- the whole kernel --------------------------------------------------------

@dataclass
class Symbol:
    """A declared local variable after scope resolution."""
    name: str
    pyname: str
    type: Expr        # GenericType, TypeName or TypeSwitch


@dataclass(eq=True)
class KernelAst:
    stmts: tuple
    context: str = _meta("calc")
    symbols: list = _meta()
    has_threadloop: bool = _meta(False)
    uses: dict = _meta()          # summary flags used by the engine


def walk(node):
    """Yield ``node`` and every node below it, depth first."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (list, tuple)):
            stack.extend(reversed(n))
            continue
        if not isinstance(n, Node):
            continue
        yield n
        kids = []
        for name, val in vars(n).items():
            if name in ("sym", "resolved", "syms", "bare", "call_style"):
                continue
            if isinstance(val, Node):
                kids.append(val)
            elif isinstance(val, (list, tuple)):
                kids.append(val)
        stack.extend(reversed(kids))

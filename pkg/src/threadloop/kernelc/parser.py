"""Recursive-descent parser for kernel bodies (syntax only).

Name resolution and context checks live in :mod:`elaborate`; this module
only needs to know which ``$name`` forms are signature parameters.
"""
from __future__ import annotations

import re

from ..errors import KernelSyntaxError, UnknownBuiltin, UnknownParam
from ..sigparse import TYPE_NAMES
from .lexer import Token, tokenize
from .nodes import (Assign, Binary, Block, Call, Cast, CompRef, Declare,
                    DoCompDims, Empty, EquivCP, ExprStmt, FlowMeta, For,
                    GenericType, Ident, If, IncDec, IsBad, IsBadVar, IsGood,
                    IsGoodVar, LoopOver, MetaRef, Num, ParamAccess, SetBad,
                    SetBadVar, SetDims, SetNdims, SizeOf, StateIsBad,
                    StateIsGood, StateSetBad, StateSetGood, Subscript,
                    Ternary, ThreadLoop, TypeName, TypeSwitch, Unary, While)

BUILTINS = frozenset({"sqrt", "pow", "sin", "cos", "log", "exp", "fabs", "floor", "ceil"})
BUILTIN_ARITY = {"pow": 2}

META_FIELDS = frozenset({"ndims", "nvals", "datatype", "dims", "dimincs"})
INDEXED_FIELDS = frozenset({"dims", "dimincs"})

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")
KEYWORDS = frozenset({"if", "else", "for", "while", "loop", "threadloop"})

_TSWITCH = re.compile(r"T([BSULNIQFD]+)$")

# binary precedence, loosest first
_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, text: str, param_names):
        self.toks: list[Token] = tokenize(text)
        self.i = 0
        self.params = set(param_names)

    # token helpers

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind not in ("end", "num") and t.value == value

    def take(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "end":
            self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None, cls=KernelSyntaxError):
        tok = tok or self.peek()
        if cls is KernelSyntaxError:
            return KernelSyntaxError(msg, tok.line, tok.col)
        return cls(f"{msg} (line {tok.line}, column {tok.col})")

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t.value != value or t.kind in ("end", "num"):
            found = "end of kernel" if t.kind == "end" else repr(t.value)
            raise self.error(f"expected {value!r}, found {found}")
        return self.take()

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            found = "end of kernel" if t.kind == "end" else repr(t.value)
            raise self.error(f"expected {what}, found {found}")
        return self.take().value

    # statements

    def parse_program(self) -> tuple:
        stmts = []
        while self.peek().kind != "end":
            stmts.append(self.statement())
        return tuple(stmts)

    def block_until(self, closer_kind: str, closer_val: str) -> Block:
        stmts = []
        while not (self.peek().kind == closer_kind and self.peek().value == closer_val):
            if self.peek().kind == "end":
                raise self.error(f"missing {closer_val!r}")
            stmts.append(self.statement())
        self.take()
        return Block(tuple(stmts))

    def statement(self):
        t = self.peek()
        if t.kind == "op" and t.value == "{":
            self.take()
            return self.block_until("op", "}")
        if t.kind == "op" and t.value == ";":
            self.take()
            return Empty()
        if t.kind == "ident":
            if t.value == "if":
                return self.if_stmt()
            if t.value == "for":
                return self.for_stmt()
            if t.value == "while":
                self.take()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                return While(cond, self.statement())
            if t.value == "loop" and self.at("(", 1):
                return self.loop_stmt()
            if t.value == "threadloop":
                self.take()
                if self.peek().kind != "loopopen":
                    raise self.error("expected '%{' after threadloop")
                self.take()
                return ThreadLoop(self.block_until("loopclose", "%}"))
            if t.value == "else":
                raise self.error("'else' without 'if'")
        if t.kind == "loopopen" or t.kind == "loopclose":
            raise self.error(f"unexpected {t.value!r}")
        decl = self.try_declaration()
        if decl is not None:
            return decl
        if t.kind == "macro":
            s = self.macro_statement()
            if s is not None:
                return s
        e = self.expression()
        self.expect(";")
        if isinstance(e, (Assign, IncDec, SetBadVar)):
            return e
        return ExprStmt(e)

    def if_stmt(self):
        self.take()
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        then = self.statement()
        else_ = None
        if self.at("else") and self.peek().kind == "ident":
            self.take()
            else_ = self.statement()
        return If(cond, then, else_)

    def for_stmt(self):
        self.take()
        self.expect("(")
        init = None
        if self.at(";"):
            self.take()
        else:
            init = self.try_declaration()
            if init is None:
                e = self.expression()
                self.expect(";")
                init = e if isinstance(e, (Assign, IncDec)) else ExprStmt(e)
        cond = None if self.at(";") else self.expression()
        self.expect(";")
        step = None if self.at(")") else self.expression()
        self.expect(")")
        return For(init, cond, step, self.statement())

    def loop_stmt(self):
        self.take()
        self.expect("(")
        dims = [self.ident("dim name")]
        while self.at(","):
            self.take()
            dims.append(self.ident("dim name"))
        self.expect(")")
        if self.peek().kind != "loopopen":
            raise self.error("expected '%{' after loop(...)")
        self.take()
        body = self.block_until("loopclose", "%}")
        for d in reversed(dims[1:]):
            body = Block((LoopOver(d, body),))
        return LoopOver(dims[0], body)

    def try_type_spec(self):
        """Parse a type specifier if one starts here, else return None."""
        t = self.peek()
        if t.kind == "ident" and t.value in TYPE_NAMES:
            self.take()
            return TypeName(t.value)
        if t.kind == "macro" and t.value == "$GENERIC":
            self.take()
            if self.at("(") and self.at(")", 1):
                self.take()
                self.take()
            return GenericType()
        if t.kind == "macro" and _TSWITCH.match(t.value[1:]) and t.value[1:] not in self.params:
            save = self.i
            sw = self.type_switch()
            if all(isinstance(a, TypeName) for a in sw.alts):
                return sw
            self.i = save
        return None

    def try_declaration(self):
        save = self.i
        ty = self.try_type_spec()
        if ty is None:
            return None
        if self.peek().kind != "ident" or self.peek().value in KEYWORDS:
            self.i = save
            return None
        decls = []
        while True:
            name = self.ident("variable name")
            init = None
            if self.at("="):
                self.take()
                init = self.assignment()
            decls.append((name, init))
            if self.at(","):
                self.take()
                continue
            break
        self.expect(";")
        return Declare(ty, tuple(decls))

    def macro_statement(self):
        t = self.peek()
        name = t.value[1:]
        if name == "SETBAD":
            self.take()
            self.expect("(")
            acc = self.access_arg()
            self.expect(")")
            self.expect(";")
            return SetBad(acc)
        if name in ("PDLSTATESETBAD", "PDLSTATESETGOOD"):
            self.take()
            p = self.state_arg()
            self.expect(";")
            return StateSetBad(p) if name == "PDLSTATESETBAD" else StateSetGood(p)
        if name == "SETNDIMS":
            self.take()
            self.expect("(")
            e = self.expression()
            self.expect(")")
            self.expect(";")
            return SetNdims(e)
        if name in ("SETDIMS", "DOCOMPDIMS"):
            self.take()
            self.expect("(")
            self.expect(")")
            self.expect(";")
            return SetDims() if name == "SETDIMS" else DoCompDims()
        if name in ("EquivCPOffs", "EquivCPTrunc"):
            self.take()
            self.expect("(")
            pi = self.assignment()
            self.expect(",")
            ci = self.assignment()
            oob = None
            if name == "EquivCPTrunc":
                self.expect(",")
                oob = self.assignment()
            self.expect(")")
            self.expect(";")
            return EquivCP(pi, ci, oob)
        return None

    # expressions

    def expression(self):
        return self.assignment()

    def assignment(self):
        start = self.peek()
        left = self.ternary()
        t = self.peek()
        if t.kind == "op" and t.value in ASSIGN_OPS:
            if not isinstance(left, (Ident, ParamAccess, CompRef, SizeOf, FlowMeta, Subscript)):
                raise self.error("left side of assignment is not assignable", start)
            self.take()
            return Assign(left, t.value, self.assignment())
        return left

    def ternary(self):
        cond = self.binary(0)
        if self.at("?"):
            self.take()
            a = self.assignment()
            self.expect(":")
            b = self.ternary()
            return Ternary(cond, a, b)
        return cond

    def binary(self, level: int):
        if level == len(_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = _LEVELS[level]
        while self.peek().kind == "op" and self.peek().value in ops:
            op = self.take().value
            left = Binary(op, left, self.binary(level + 1))
        return left

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.value in ("-", "+", "!"):
            self.take()
            return Unary(t.value, self.unary())
        if t.kind == "op" and t.value in ("++", "--"):
            self.take()
            target = self.unary()
            return IncDec(target, t.value, True)
        if t.kind == "op" and t.value == "(":
            save = self.i
            self.take()
            ty = self.try_type_spec()
            if ty is not None and self.at(")"):
                self.take()
                return Cast(ty, self.unary())
            self.i = save
        return self.power()

    def power(self):
        base = self.postfix()
        if self.at("**"):
            self.take()
            return Binary("**", base, self.unary())
        return base

    def postfix(self):
        e = self.primary()
        while True:
            if self.at("["):
                self.take()
                idx = self.expression()
                self.expect("]")
                e = Subscript(e, idx)
            elif self.at("++") or self.at("--"):
                e = IncDec(e, self.take().value, False)
            else:
                return e

    def primary(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            txt = t.value
            if any(c in txt for c in ".eE"):
                return Num(txt, float(txt), True)
            return Num(txt, int(txt), False)
        if t.kind == "ident":
            if t.value in KEYWORDS:
                raise self.error(f"unexpected keyword {t.value!r}")
            self.take()
            if self.at("("):
                if t.value not in BUILTINS:
                    raise self.error(f"unknown builtin function {t.value!r}", t, UnknownBuiltin)
                self.take()
                args = []
                if not self.at(")"):
                    args.append(self.assignment())
                    while self.at(","):
                        self.take()
                        args.append(self.assignment())
                self.expect(")")
                want = BUILTIN_ARITY.get(t.value, 1)
                if len(args) != want:
                    raise self.error(f"{t.value} takes {want} argument(s), got {len(args)}", t)
                return Call(t.value, tuple(args))
            if t.value in TYPE_NAMES:
                raise self.error(f"unexpected type name {t.value!r}", t)
            return Ident(t.value)
        if t.kind == "op" and t.value == "(":
            self.take()
            e = self.expression()
            self.expect(")")
            return e
        if t.kind == "macro":
            return self.macro_expr()
        found = "end of kernel" if t.kind == "end" else repr(t.value)
        raise self.error(f"unexpected {found}")

    def macro_expr(self):
        t = self.peek()
        name = t.value[1:]
        if name in ("PARENT", "CHILD") and self.is_flow_meta():
            return self.flow_meta(name)
        if name in self.params:
            return self.param_access()
        if name == "SIZE":
            self.take()
            self.expect("(")
            d = self.ident("dim name")
            self.expect(")")
            return SizeOf(d)
        if name == "COMP":
            self.take()
            self.expect("(")
            f = self.ident("comp field")
            self.expect(")")
            return CompRef(f)
        if name == "PDL":
            self.take()
            self.expect("(")
            p = self.ident("parameter name")
            self.expect(")")
            self.expect("->")
            ftok = self.peek()
            field = self.ident("field name")
            if field not in META_FIELDS:
                raise self.error(f"unknown PDL field {field!r}", ftok)
            idx = None
            call_style = False
            if field in INDEXED_FIELDS:
                if self.at("("):
                    call_style = True
                    self.take()
                    idx = self.expression()
                    self.expect(")")
                else:
                    self.expect("[")
                    idx = self.expression()
                    self.expect("]")
            return MetaRef(p, field, idx, call_style)
        if name in ("ISBAD", "ISGOOD"):
            self.take()
            self.expect("(")
            acc = self.access_arg()
            self.expect(")")
            return IsBad(acc) if name == "ISBAD" else IsGood(acc)
        if name in ("ISBADVAR", "ISGOODVAR", "SETBADVAR"):
            self.take()
            self.expect("(")
            var = Ident(self.ident("variable name"))
            self.expect(",")
            ptok = self.peek()
            p = self.ident("parameter name")
            if p not in self.params:
                raise self.error(f"unknown parameter {p!r}", ptok, UnknownParam)
            self.expect(")")
            cls = {"ISBADVAR": IsBadVar, "ISGOODVAR": IsGoodVar, "SETBADVAR": SetBadVar}[name]
            return cls(var, p)
        if name in ("PDLSTATEISBAD", "PDLSTATEISGOOD"):
            self.take()
            p = self.state_arg()
            return StateIsBad(p) if name == "PDLSTATEISBAD" else StateIsGood(p)
        if name in ("PARENT", "CHILD"):
            return self.flow_meta(name)
        if name == "GENERIC":
            raise self.error("$GENERIC is only valid as a type")
        if _TSWITCH.match(name):
            return self.type_switch()
        raise self.error(f"unknown parameter or macro {t.value!r}", t, UnknownParam)

    def is_flow_meta(self, k: int = 1) -> bool:
        """Tokens from offset ``k`` look like ``(field)`` or ``(field[``."""
        return self.at("(", k) and self.peek(k + 1).kind == "ident" \
            and self.peek(k + 1).value in META_FIELDS \
            and (self.at(")", k + 2) or self.at("[", k + 2))

    def flow_meta(self, which: str):
        # $PARENT(ndims), $CHILD(dims[i]) ... ; anything else is not metadata
        t = self.take()
        if self.is_flow_meta(0):
            self.take()
            field = self.take().value
            idx = None
            if field in INDEXED_FIELDS:
                self.expect("[")
                idx = self.expression()
                self.expect("]")
            self.expect(")")
            return FlowMeta(which, field, idx)
        raise self.error(f"unknown parameter or macro {t.value!r}", t, UnknownParam)

    def type_switch(self) -> TypeSwitch:
        t = self.take()
        letters = _TSWITCH.match(t.value[1:]).group(1)
        self.expect("(")
        alts = []
        while True:
            nt = self.peek()
            if nt.kind == "ident" and nt.value in TYPE_NAMES and (self.at(",", 1) or self.at(")", 1)):
                self.take()
                alts.append(TypeName(nt.value))
            else:
                alts.append(self.assignment())
            if self.at(","):
                self.take()
                continue
            self.expect(")")
            break
        if len(alts) != len(letters):
            raise self.error(f"{t.value} lists {len(letters)} types but {len(alts)} alternatives", t)
        if len(set(letters)) != len(letters):
            raise self.error(f"{t.value} repeats a type letter", t)
        return TypeSwitch(letters, tuple(alts))

    def bindings(self):
        self.expect("(")
        out = []
        if self.at(")"):
            self.take()
            return ()
        while True:
            d = self.ident("dim name")
            self.expect("=>")
            out.append((d, self.assignment()))
            if self.at(","):
                self.take()
                continue
            self.expect(")")
            return tuple(out)

    def param_access(self) -> ParamAccess:
        t = self.take()
        name = t.value[1:]
        if self.at("("):
            return ParamAccess(name, self.bindings())
        return ParamAccess(name, (), bare=True)

    def access_arg(self) -> ParamAccess:
        """Argument of $ISBAD/$ISGOOD/$SETBAD: ``p(...)``, ``$p(...)`` or ``p``."""
        t = self.peek()
        if t.kind == "macro":
            if t.value[1:] not in self.params:
                raise self.error(f"unknown parameter {t.value!r}", t, UnknownParam)
            return self.param_access()
        name = self.ident("parameter name")
        if name not in self.params:
            raise self.error(f"unknown parameter {name!r}", t, UnknownParam)
        if self.at("("):
            return ParamAccess(name, self.bindings())
        return ParamAccess(name, (), bare=True)

    def state_arg(self) -> str:
        self.expect("(")
        t = self.peek()
        name = t.value[1:] if t.kind == "macro" else self.ident("parameter name")
        if t.kind == "macro":
            self.take()
        if name not in self.params:
            raise self.error(f"unknown parameter {name!r}", t, UnknownParam)
        if self.at("("):
            self.take()
            self.expect(")")
        self.expect(")")
        return name


def parse_statements(text: str, param_names) -> tuple:
    return Parser(text, param_names).parse_program()

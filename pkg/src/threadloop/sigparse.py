"""Operator signature parsing, validation and canonical formatting.

Grammar (whitespace-insensitive)::

    sig   := param (';' param)* [';']
    param := [dtype ['+']] ['[' flag (',' flag)* ']'] name ['(' [dim (',' dim)*] ')']
    dim   := ident ['=' int]
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (AllTemporaries, ConflictingFixedSize, ConflictingFlags,
                     DuplicateParam, SignatureSyntaxError, UnknownFlag,
                     UnknownType)
from .ndarray import Dtype, dtype_from_name

FLAGS = frozenset({"io", "nc", "o", "oca", "t", "phys"})

# Type names accepted in front of a parameter.  'long' and 'PDL_Indx' are
# the C spellings used throughout the kernel corpus.
TYPE_NAMES = {dt.cname: dt for dt in Dtype}
TYPE_NAMES["long"] = Dtype.INT
TYPE_NAMES["PDL_Indx"] = Dtype.INDX

_CONFLICTS = [
    ("t", "o"), ("t", "oca"), ("t", "io"), ("t", "nc"),
    ("o", "oca"), ("io", "oca"),
]

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_]\w*)|(?P<int>\d+)|(?P<punct>[;\[\],()=+]))")


@dataclass(frozen=True)
class DimRef:
    name: str                        # name after square renaming (n0, n1, ...)
    base: str                        # the name as written
    fixed_size: int | None = None
    rename_index: int | None = None


@dataclass
class ParamSpec:
    name: str
    flags: frozenset = frozenset()
    forced_dtype: Dtype | None = None
    plus_flag: bool = False
    active_dims: list = field(default_factory=list)

    @property
    def is_temp(self) -> bool:
        return "t" in self.flags

    @property
    def is_output(self) -> bool:
        return bool(self.flags & {"o", "oca", "io"})

    @property
    def is_input(self) -> bool:
        return not (self.flags & {"o", "oca", "t"})

    @property
    def dim_names(self) -> list[str]:
        return [d.name for d in self.active_dims]

    def dim(self, name: str) -> DimRef | None:
        for d in self.active_dims:
            if d.name == name:
                return d
        return None


@dataclass
class Signature:
    params: list

    def __post_init__(self):
        self._by_name = {p.name: p for p in self.params}

    @property
    def dim_names(self) -> set[str]:
        return {d.name for p in self.params for d in p.active_dims}

    @property
    def base_dims(self) -> set[str]:
        return {d.base for p in self.params for d in p.active_dims}

    def param(self, name: str) -> ParamSpec | None:
        return self._by_name.get(name)

    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def base_of(self, dim: str) -> str | None:
        """Base dim name for a (possibly renamed) dim name."""
        for p in self.params:
            for d in p.active_dims:
                if d.name == dim or d.base == dim:
                    return d.base
        return None

    def __eq__(self, other):
        return isinstance(other, Signature) and self.params == other.params

    def __str__(self):
        return format_signature(self)


def _tokens(text: str):
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = len(text) - len(text[pos:].lstrip())
            raise SignatureSyntaxError(f"unexpected character {text[col]!r}", col)
        kind = m.lastgroup
        yield kind, m.group(kind), m.start(kind)
        pos = m.end()
    yield "end", "", len(text)


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind == "end":
            raise SignatureSyntaxError(f"expected {value!r}, found {v or 'end of text'!r}", pos)

    def ident(self, what: str) -> str:
        kind, v, pos = self.take()
        if kind != "ident":
            raise SignatureSyntaxError(f"expected {what}, found {v or 'end of text'!r}", pos)
        return v

    def parse(self) -> Signature:
        params = []
        while True:
            kind, v, pos = self.peek()
            if kind == "end":
                break
            params.append(self.param())
            kind, v, pos = self.peek()
            if v == ";":
                self.take()
                continue
            if kind != "end":
                raise SignatureSyntaxError(f"expected ';' between parameters, found {v!r}", pos)
        if not params:
            raise SignatureSyntaxError("signature declares no parameters", 0)
        seen = set()
        for p in params:
            if p.name in seen:
                raise DuplicateParam(f"parameter {p.name!r} declared twice")
            seen.add(p.name)
        return Signature(params)

    def param(self) -> ParamSpec:
        forced = None
        plus = False
        kind, v, pos = self.peek()
        # a leading identifier is a type only if another name or '[' follows
        nk, nv, _ = self.peek(1)
        if kind == "ident" and (nk == "ident" or nv in ("[", "+")):
            self.take()
            if v not in TYPE_NAMES:
                raise UnknownType(f"unknown type {v!r} at column {pos}")
            forced = TYPE_NAMES[v]
            if self.peek()[1] == "+":
                self.take()
                plus = True
        flags = set()
        if self.peek()[1] == "[":
            self.take()
            while True:
                f = self.ident("flag")
                if f not in FLAGS:
                    raise UnknownFlag(f"unknown flag {f!r}")
                flags.add(f)
                kind, v, pos = self.take()
                if v == "]":
                    break
                if v != ",":
                    raise SignatureSyntaxError(f"expected ',' or ']' in flag list, found {v!r}", pos)
        for a, b in _CONFLICTS:
            if a in flags and b in flags:
                raise ConflictingFlags(f"flags {a!r} and {b!r} cannot be combined")
        name = self.ident("parameter name")
        dims = []
        if self.peek()[1] == "(":
            self.take()
            if self.peek()[1] == ")":
                self.take()
            else:
                while True:
                    dname = self.ident("dim name")
                    size = None
                    if self.peek()[1] == "=":
                        self.take()
                        kind, v, pos = self.take()
                        if kind != "int":
                            raise SignatureSyntaxError(f"expected a dim size, found {v!r}", pos)
                        size = int(v)
                        if size < 1:
                            raise SignatureSyntaxError(f"dim size must be positive, got {size}", pos)
                    dims.append((dname, size))
                    kind, v, pos = self.take()
                    if v == ")":
                        break
                    if v != ",":
                        raise SignatureSyntaxError(f"expected ',' or ')' in dim list, found {v!r}", pos)
        return ParamSpec(name, frozenset(flags), forced, plus, _rename(dims))


def _rename(dims) -> list[DimRef]:
    counts: dict[str, int] = {}
    for d, _ in dims:
        counts[d] = counts.get(d, 0) + 1
    seen: dict[str, int] = {}
    out = []
    for d, size in dims:
        if counts[d] > 1:
            k = seen.get(d, 0)
            seen[d] = k + 1
            out.append(DimRef(f"{d}{k}", d, size, k))
        else:
            out.append(DimRef(d, d, size, None))
    return out


def parse_signature(text: str) -> Signature:
    return _Parser(text).parse()


def validate_signature(s: Signature) -> None:
    fixed: dict[str, int] = {}
    for p in s.params:
        for d in p.active_dims:
            if d.fixed_size is None:
                continue
            prev = fixed.setdefault(d.base, d.fixed_size)
            if prev != d.fixed_size:
                raise ConflictingFixedSize(
                    f"dim {d.base!r} fixed to both {prev} and {d.fixed_size}")
    if all(p.is_temp for p in s.params):
        raise AllTemporaries("signature has only temporary parameters")


_FLAG_ORDER = ["io", "nc", "o", "oca", "t", "phys"]


def format_param(p: ParamSpec) -> str:
    out = ""
    if p.forced_dtype is not None:
        out += p.forced_dtype.cname + ("+" if p.plus_flag else "") + " "
    if p.flags:
        out += "[" + ",".join(f for f in _FLAG_ORDER if f in p.flags) + "]"
    dims = ",".join(d.base + (f"={d.fixed_size}" if d.fixed_size is not None else "")
                    for d in p.active_dims)
    return f"{out}{p.name}({dims})"


def format_signature(s: Signature) -> str:
    """Canonical text: every parameter gets parentheses, '; ' separators."""
    return "; ".join(format_param(p) for p in s.params)


def dtype_for_type_name(name: str) -> Dtype:
    if name in TYPE_NAMES:
        return TYPE_NAMES[name]
    return dtype_from_name(name)

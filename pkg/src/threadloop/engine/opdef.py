"""Operator definitions: signature, other parameters, kernels and flags."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import KernelValidationError, OtherParError
from ..kernelc import KernelAst, parse_kernel
from ..ndarray import Dtype
from ..sigparse import TYPE_NAMES, Signature, parse_signature, validate_signature
from ..typesys import generic_list

HANDLEBAD = ("forbid", "ignore", "handle")

P2CHILD_SIG = "PARENT(); [oca]CHILD()"

# declared type word -> OtherPars kind
_KIND_WORDS = {
    "int": "int", "long": "int", "short": "int", "byte": "int", "ushort": "int",
    "indx": "int", "longlong": "int", "PDL_Indx": "int",
    "float": "float", "double": "float",
    "string": "string", "char*": "string",
}

_DECL = re.compile(r"^\s*(?P<type>[A-Za-z_]\w*\s*\*?)\s*(?P<list>\[\s*\])?\s*(?P<name>[A-Za-z_]\w*)\s*$")


@dataclass(frozen=True)
class OtherParValue:
    name: str
    kind: str
    value: object


def parse_otherpars(text: str | None) -> list[tuple[str, str]]:
    """Parse ``"int max_it; double[] ws"`` into ``[(name, kind), ...]``."""
    if not text:
        return []
    out = []
    for part in re.split(r"[;,]", text):
        if not part.strip():
            continue
        m = _DECL.match(part)
        if not m:
            raise OtherParError(f"cannot parse OtherPars declaration {part.strip()!r}")
        word = m.group("type").replace(" ", "")
        kind = _KIND_WORDS.get(word)
        if kind is None:
            raise OtherParError(f"unknown OtherPars type {word!r}")
        if m.group("list"):
            if kind == "string":
                raise OtherParError("lists of strings are not supported")
            kind = "list-of-" + kind
        name = m.group("name")
        if any(n == name for n, _ in out):
            raise OtherParError(f"OtherPars name {name!r} declared twice")
        out.append((name, kind))
    return out


def parse_comp(text: str | None) -> dict:
    """Comp declarations share the OtherPars syntax but keep the C type."""
    if not text:
        return {}
    out = {}
    for part in re.split(r"[;,]", text):
        if not part.strip():
            continue
        m = _DECL.match(part)
        if not m:
            raise OtherParError(f"cannot parse Comp declaration {part.strip()!r}")
        word = m.group("type").replace(" ", "")
        if m.group("list"):
            kind = _KIND_WORDS.get(word)
            if kind not in ("int", "float"):
                raise OtherParError(f"unknown Comp list type {word!r}")
            out[m.group("name")] = "list-of-" + kind
        else:
            if word not in TYPE_NAMES:
                raise OtherParError(f"unknown Comp type {word!r}")
            out[m.group("name")] = word
    return out


def coerce_otherpar(name: str, kind: str, value):
    """Check and normalize one OtherPars value against its declared kind."""
    def bad():
        return OtherParError(f"OtherPars {name!r} expects {kind}, got {value!r}")
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise bad()
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad()
        return float(value)
    if kind == "string":
        if not isinstance(value, str):
            raise bad()
        return value
    if kind.startswith("list-of-"):
        if not isinstance(value, (list, tuple)):
            raise bad()
        return [coerce_otherpar(name, kind[8:], v) for v in value]
    raise bad()


def parse_otherpar_text(name: str, kind: str, text: str):
    """Parse a command-line OtherPars value by its declared kind."""
    try:
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
        if kind == "string":
            return text
        elem = kind[8:]
        parts = [t for t in text.split(",") if t.strip()]
        return [parse_otherpar_text(name, elem, t.strip()) for t in parts]
    except ValueError:
        raise OtherParError(f"OtherPars {name!r} expects {kind}, got {text!r}") from None


@dataclass
class OpDef:
    name: str
    sig: Signature
    otherpars: list = field(default_factory=list)        # [(name, kind)]
    generictypes: tuple = tuple(Dtype)
    code: KernelAst | None = None
    badcode: KernelAst | None = None
    handlebad: str = "ignore"
    inplace: tuple | None = None
    redodimscode: KernelAst | None = None
    boundscheck: bool = False
    # dataflow
    defaultflow: bool = False
    p2child: bool = False
    reversible: bool = False
    backcode: KernelAst | None = None
    badbackcode: KernelAst | None = None
    equivcpoffs: KernelAst | None = None
    makecomp: KernelAst | None = None
    comp: dict = field(default_factory=dict)
    redodims: KernelAst | None = None
    affine: bool = False
    nopthread: bool = False
    sources: dict = field(default_factory=dict, repr=False)

    @property
    def otherpar_kinds(self) -> dict:
        return dict(self.otherpars)

    @property
    def is_dataflow(self) -> bool:
        return self.defaultflow

    def inputs(self):
        return [p for p in self.sig.params if p.is_input]

    def outputs(self):
        return [p for p in self.sig.params if p.is_output]

    def kernel(self, key: str):
        return getattr(self, key)


_KERNEL_CONTEXT = {
    "code": "calc", "badcode": "calc", "backcode": "calc", "badbackcode": "calc",
    "equivcpoffs": "equivcp", "makecomp": "makecomp", "redodims": "redodims",
    "redodimscode": "redodimscode",
}

KERNEL_KEYS = tuple(_KERNEL_CONTEXT)


def _parse_handlebad(v) -> str:
    if v is None:
        return "ignore"
    if isinstance(v, bool):
        return "handle" if v else "forbid"
    s = str(v).strip().lower()
    if s in HANDLEBAD:
        return s
    if s in ("1", "true", "yes"):
        return "handle"
    if s in ("0", "false", "no"):
        return "forbid"
    raise KernelValidationError(f"handlebad must be forbid, ignore or handle, not {v!r}")


def make_opdef(name: str, pars: str | None = None, otherpars: str | None = None,
               generictypes=None, handlebad=None, inplace=None, boundscheck=False,
               defaultflow=False, p2child=False, reversible=False, comp=None,
               affine=False, nopthread=False, **kernels) -> OpDef:
    """Build an OpDef from source texts, parsing every kernel in its context."""
    unknown = set(kernels) - set(KERNEL_KEYS)
    if unknown:
        raise KernelValidationError(f"unknown kernel keys {sorted(unknown)}")
    if p2child:
        if pars is not None:
            raise KernelValidationError(f"{name}: p2child ops take no pars")
        pars = P2CHILD_SIG
    if pars is None:
        raise KernelValidationError(f"{name}: no signature (pars) given")
    sig = parse_signature(pars)
    validate_signature(sig)
    ops = parse_otherpars(otherpars)
    compd = parse_comp(comp)
    opkinds = dict(ops)
    gl = generic_list(generictypes) if generictypes is not None else tuple(Dtype)
    parsed = {}
    for key, text in kernels.items():
        if text is None:
            continue
        parsed[key] = parse_kernel(text, sig, opkinds, _KERNEL_CONTEXT[key], compd)
    if isinstance(inplace, str):
        inplace = tuple(x.strip() for x in inplace.split(",")) if "," in inplace else inplace
    if inplace is True or inplace in ("1", "true"):
        ins = [p.name for p in sig.params if p.is_input]
        outs = [p.name for p in sig.params if p.is_output and not p.is_input]
        if len(ins) != 1 or len(outs) != 1:
            raise KernelValidationError(f"{name}: inplace=1 needs exactly one input and one output")
        inplace = (ins[0], outs[0])
    elif inplace in (False, None, "0", "false", ""):
        inplace = None
    else:
        inplace = tuple(inplace)
    return OpDef(
        name=name, sig=sig, otherpars=ops, generictypes=gl,
        code=parsed.get("code"), badcode=parsed.get("badcode"),
        handlebad=_parse_handlebad(handlebad), inplace=inplace,
        redodimscode=parsed.get("redodimscode"), boundscheck=bool(boundscheck),
        defaultflow=bool(defaultflow), p2child=bool(p2child), reversible=bool(reversible),
        backcode=parsed.get("backcode"), badbackcode=parsed.get("badbackcode"),
        equivcpoffs=parsed.get("equivcpoffs"), makecomp=parsed.get("makecomp"),
        comp=compd, redodims=parsed.get("redodims"), affine=bool(affine),
        nopthread=bool(nopthread),
        sources={k: v for k, v in kernels.items() if v is not None},
    )


def validate_opdef(d: OpDef) -> None:
    """Semantic checks performed at registration."""
    sig = d.sig
    if d.handlebad == "handle" and d.badcode is None and d.equivcpoffs is None and not d.affine:
        raise KernelValidationError(f"{d.name}: handlebad=handle requires badcode")
    if d.inplace is not None:
        if len(d.inplace) != 2:
            raise KernelValidationError(f"{d.name}: inplace needs an (input, output) pair")
        a, b = (sig.param(n) for n in d.inplace)
        if a is None or b is None:
            raise KernelValidationError(f"{d.name}: inplace names {d.inplace} are not parameters")
        if not a.is_input:
            raise KernelValidationError(f"{d.name}: inplace source {a.name!r} is not an input")
        if "o" not in b.flags and "oca" not in b.flags:
            raise KernelValidationError(f"{d.name}: inplace target {b.name!r} is not an [o] output")
        if [x.base for x in a.active_dims] != [x.base for x in b.active_dims]:
            raise KernelValidationError(
                f"{d.name}: inplace pair {a.name!r}/{b.name!r} have different active dims")
    if d.defaultflow:
        if sig.param("PARENT") is None or sig.param("CHILD") is None:
            raise KernelValidationError(f"{d.name}: dataflow ops need PARENT and CHILD parameters")
        if not (d.code or d.equivcpoffs or d.affine):
            raise KernelValidationError(f"{d.name}: dataflow op has no forward flow")
        if d.reversible and not (d.backcode or d.equivcpoffs or d.affine):
            raise KernelValidationError(f"{d.name}: reversible op has no back flow")
    else:
        if d.code is None:
            raise KernelValidationError(f"{d.name}: no code")
        for key in ("backcode", "badbackcode", "equivcpoffs", "makecomp", "redodims"):
            if getattr(d, key) is not None:
                raise KernelValidationError(f"{d.name}: {key} needs defaultflow")

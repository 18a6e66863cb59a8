"""Operator registry with the bundled corpus preloaded on first use."""
from __future__ import annotations

from importlib import resources

from ..errors import DuplicateOpName, UnknownOp
from .opdef import OpDef, validate_opdef


class Registry:
    def __init__(self, preload: bool = True):
        self._ops: dict[str, OpDef] = {}
        self._preload = preload
        self._loaded = not preload

    def _ensure(self):
        if not self._loaded:
            self._loaded = True
            for d in load_corpus():
                self.register(d)

    def register(self, d: OpDef, replace: bool = False) -> None:
        self._ensure()
        if d.name in self._ops and not replace:
            raise DuplicateOpName(f"operator {d.name!r} is already registered")
        validate_opdef(d)
        self._ops[d.name] = d

    def get(self, name: str) -> OpDef:
        self._ensure()
        try:
            return self._ops[name]
        except KeyError:
            raise UnknownOp(f"no operator named {name!r}") from None

    def names(self) -> list[str]:
        self._ensure()
        return list(self._ops)

    def __contains__(self, name) -> bool:
        self._ensure()
        return name in self._ops


def corpus_text() -> str:
    return resources.files("threadloop").joinpath("corpus/corpus.ops").read_text()


def load_corpus() -> list[OpDef]:
    from ..opfile import parse_opdef_file
    return parse_opdef_file(corpus_text())


default_registry = Registry()


def register_op(d: OpDef, registry: Registry | None = None) -> None:
    (registry or default_registry).register(d)


def get_op(name: str, registry: Registry | None = None) -> OpDef:
    return (registry or default_registry).get(name)

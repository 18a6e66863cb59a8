"""Kernel language: parsing, elaboration, canonical formatting and expansion."""
from __future__ import annotations

from .elaborate import CONTEXTS, elaborate
from .expand import expand_kernel, pick_alt
from .fmt import format_kernel
from .nodes import KernelAst
from .parser import BUILTINS, parse_statements


def parse_kernel(text: str, sig, otherpars=None, context: str = "calc",
                 comp=None) -> KernelAst:
    """Parse and elaborate a kernel body against ``sig``.

    ``otherpars`` maps OtherPars names to their kinds (any iterable of
    names is accepted too); ``comp`` does the same for Comp declarations.
    """
    stmts = parse_statements(text, sig.names())
    return elaborate(stmts, sig, _as_map(otherpars), _as_map(comp), context)


def _as_map(x):
    if x is None:
        return {}
    if isinstance(x, dict):
        return x
    return {name: None for name in x}


__all__ = ["BUILTINS", "CONTEXTS", "KernelAst", "expand_kernel", "format_kernel",
           "parse_kernel", "pick_alt"]

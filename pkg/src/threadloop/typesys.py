"""Promotion ladder, generic-type resolution and per-type letters."""
from __future__ import annotations

from .errors import EmptyGenericList, UnknownTypeLetter
from .ndarray import ALL_DTYPES, Dtype
from .ndarray import default_badvalue as _default_badvalue

_LETTER = {
    Dtype.BYTE: "B",
    Dtype.SHORT: "S",
    Dtype.USHORT: "U",
    Dtype.INT: "L",
    Dtype.INDX: "N",
    Dtype.LONGLONG: "Q",
    Dtype.FLOAT: "F",
    Dtype.DOUBLE: "D",
}

_FROM_LETTER = {v: k for k, v in _LETTER.items()}
_FROM_LETTER["I"] = Dtype.INDX  # the $T macro spells Indx as I

LETTERS = frozenset(_FROM_LETTER)


def promote(a: Dtype, b: Dtype) -> Dtype:
    return a if a.rank >= b.rank else b


def letter_of(t: Dtype) -> str:
    return _LETTER[t]


def dtype_of_letter(c: str) -> Dtype:
    try:
        return _FROM_LETTER[c]
    except KeyError:
        raise UnknownTypeLetter(f"unknown type letter {c!r}") from None


def letters_match(t: Dtype, c: str) -> bool:
    """True when letter ``c`` names ``t`` (Indx answers to both I and N)."""
    return _FROM_LETTER.get(c) is t


def default_badvalue(t: Dtype):
    return _default_badvalue(t)


def generic_list(letters=None) -> tuple[Dtype, ...]:
    """Normalize a GenericTypes spec (letters or dtypes) to ladder order."""
    if letters is None:
        return ALL_DTYPES
    seen = set()
    for x in letters:
        seen.add(x if isinstance(x, Dtype) else dtype_of_letter(x.strip()))
    if not seen:
        raise EmptyGenericList("generic type list is empty")
    return tuple(sorted(seen, key=lambda d: d.rank))


def pick_from_list(fold: Dtype, gl) -> Dtype:
    """Smallest member of ``gl`` ranked at or above ``fold``, else the largest."""
    gl = sorted(gl, key=lambda d: d.rank)
    if not gl:
        raise EmptyGenericList("generic type list is empty")
    for t in gl:
        if t.rank >= fold.rank:
            return t
    return gl[-1]


def resolve_generic(sig, arg_dtypes: dict, gl=None) -> Dtype:
    """Generic dtype for a call.

    ``arg_dtypes`` maps parameter names to the dtypes of supplied arrays.
    Parameters with a forced dtype do not take part in the fold; names
    missing from the map (autocreated outputs, temporaries) are skipped.
    With nothing to fold, the first member of ``gl`` is used.
    """
    gl = ALL_DTYPES if gl is None else gl
    if not gl:
        raise EmptyGenericList("generic type list is empty")
    fold = None
    for p in sig.params:
        if p.forced_dtype is not None or p.name not in arg_dtypes:
            continue
        t = arg_dtypes[p.name]
        fold = t if fold is None else promote(fold, t)
    if fold is None:
        return sorted(gl, key=lambda d: d.rank)[0]
    return pick_from_list(fold, gl)


def param_dtype(p, generic: Dtype) -> Dtype:
    """The dtype a parameter runs under once ``generic`` is fixed."""
    if p.forced_dtype is None:
        return generic
    if p.plus_flag:
        return promote(p.forced_dtype, generic)
    return p.forced_dtype

"""Reader for opdef files.

Layout::

    # comment
    op linscale
    pars: a(); b(); c(); [o]d()
    code {
        $d() = $a() * $b() + $c();
    }
    end

Scalar keys take the rest of the line; kernel keys are followed by a
brace-fenced body that may span lines.
"""
from __future__ import annotations

import textwrap

from .engine.opdef import KERNEL_KEYS, OpDef, make_opdef
from .errors import OpdefFormatError

SCALAR_KEYS = ("pars", "otherpars", "generictypes", "handlebad", "inplace", "reversible",
               "p2child", "defaultflow", "boundscheck", "comp", "affine", "nopthread")
_ALIASES = {"nopdlthread": "nopthread"}
_BOOL_KEYS = {"reversible", "p2child", "defaultflow", "boundscheck", "affine", "nopthread"}


def _bool(key, v: str, line: int) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise OpdefFormatError(f"line {line}: {key} expects a boolean, got {v!r}")


def _scan_body(text: str, pos: int, line: int) -> tuple[str, int]:
    """Return (body, index after closing brace); ``text[pos]`` is ``{``."""
    depth = 0
    i = pos
    n = len(text)
    while i < n:
        c = text[i]
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise OpdefFormatError(f"line {line}: unterminated comment in kernel body")
            i = j + 2
            continue
        if c in "\"'":
            j = i + 1
            while j < n and text[j] != c:
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise OpdefFormatError(f"line {line}: unterminated string in kernel body")
            i = j + 1
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                body = text[pos + 1:i]
                return textwrap.dedent(body.strip("\n")).rstrip() + "\n", i + 1
        i += 1
    raise OpdefFormatError(f"line {line}: kernel body is missing its closing brace")


def parse_opdef_file(text: str) -> list[OpDef]:
    """Parse every ``op … end`` section of ``text``."""
    defs: list[OpDef] = []
    seen = set()
    cur: dict | None = None
    name = None
    start_line = 0
    pos = 0
    n = len(text)
    while pos < n:
        eol = text.find("\n", pos)
        if eol < 0:
            eol = n
        line_no = text.count("\n", 0, pos) + 1
        raw = text[pos:eol]
        line = raw.strip()
        nxt = eol + 1
        if not line or line.startswith("#"):
            pos = nxt
            continue
        if cur is None:
            parts = line.split()
            if parts[0] != "op" or len(parts) != 2:
                raise OpdefFormatError(f"line {line_no}: expected 'op NAME', got {line!r}")
            name = parts[1]
            if name in seen:
                raise OpdefFormatError(f"line {line_no}: operator {name!r} defined twice")
            cur, start_line = {}, line_no
            pos = nxt
            continue
        if line == "end":
            defs.append(_build(name, cur, start_line))
            seen.add(name)
            cur = None
            pos = nxt
            continue
        word = line.split(None, 1)[0].rstrip(":{")
        key = _ALIASES.get(word.lower(), word.lower())
        if key in KERNEL_KEYS:
            brace = text.find("{", pos, n)
            between = text[pos + raw.index(word) + len(word):brace] if brace >= 0 else ""
            if brace < 0 or between.strip(" \t\n:"):
                raise OpdefFormatError(f"line {line_no}: kernel key {word!r} must be followed by {{ ... }}")
            if key in cur:
                raise OpdefFormatError(f"line {line_no}: {word!r} given twice in op {name!r}")
            body, after = _scan_body(text, brace, line_no)
            cur[key] = body
            rest_end = text.find("\n", after)
            rest_end = n if rest_end < 0 else rest_end
            if text[after:rest_end].strip():
                raise OpdefFormatError(f"line {line_no}: unexpected text after kernel body")
            pos = rest_end + 1
            continue
        if ":" not in line:
            raise OpdefFormatError(f"line {line_no}: expected 'key: value', got {line!r}")
        k, v = line.split(":", 1)
        key = _ALIASES.get(k.strip().lower(), k.strip().lower())
        if key not in SCALAR_KEYS:
            raise OpdefFormatError(f"line {line_no}: unknown key {k.strip()!r}")
        if key in cur:
            raise OpdefFormatError(f"line {line_no}: {key!r} given twice in op {name!r}")
        v = v.strip()
        cur[key] = _bool(key, v, line_no) if key in _BOOL_KEYS else v
        pos = nxt
    if cur is not None:
        raise OpdefFormatError(f"op {name!r} starting at line {start_line} has no 'end'")
    return defs


def _build(name: str, fields: dict, line: int) -> OpDef:
    if "pars" not in fields and not fields.get("p2child"):
        raise OpdefFormatError(f"op {name!r} (line {line}) needs pars: or p2child: true")
    if "pars" in fields and fields.get("p2child"):
        raise OpdefFormatError(f"op {name!r} (line {line}) has both pars: and p2child: true")
    kw = dict(fields)
    if "generictypes" in kw:
        kw["generictypes"] = [t for t in kw["generictypes"].replace(",", " ").split() if t]
    return make_opdef(name, **kw)


def load_opdef_file(path) -> list[OpDef]:
    with open(path, encoding="utf-8") as f:
        return parse_opdef_file(f.read())

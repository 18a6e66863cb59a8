"""Command line: ``threadloop run | expand | plan``.

Exit status is 0 on success, 1 when the operation itself fails and 2 for
usage errors.
"""
from __future__ import annotations

import argparse
import re
import sys

from .engine import (Registry, default_registry, format_plan, make_plan,
                     parse_otherpar_text, run_op, run_redodims, shape_only)
from .errors import (NoBadVariant, PlanError, ThreadloopError,
                     TypeNotInGenericList)
from .kernelc import expand_kernel
from .literal import format_array, parse_array_literal
from .ndarray import dtype_from_name
from .opfile import load_opdef_file


class UsageError(Exception):
    pass


def _registry(path) -> Registry:
    if path is None:
        return default_registry
    reg = Registry(preload=False)
    for d in load_opdef_file(path):
        reg.register(d)
    return reg


def _pairs(items, what: str) -> list[tuple[str, str]]:
    out = []
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"{what} must look like name=VALUE, got {item!r}")
        out.append((name.strip(), value.strip()))
    return out


def cmd_run(ns) -> int:
    reg = _registry(ns.ops)
    op = reg.get(ns.op)
    args = {}
    for name, text in _pairs(ns.arg, "--arg"):
        if name in args:
            raise UsageError(f"--arg {name} given twice")
        args[name] = parse_array_literal(text)
    kinds = op.otherpar_kinds
    others = {}
    for name, text in _pairs(ns.other, "--other"):
        if name not in kinds:
            raise UsageError(f"{op.name} has no OtherPars named {name!r}")
        others[name] = parse_otherpar_text(name, kinds[name], text)
    if op.defaultflow:
        from .dataflow import connect
        if set(args) != {"PARENT"}:
            raise UsageError(f"{op.name} is a dataflow op; pass exactly --arg PARENT=...")
        outs = [connect(op, args["PARENT"], others)]
    else:
        res = run_op(op, args, others, check_bounds=True if ns.check_bounds else None)
        outs = list(res) if isinstance(res, tuple) else [res]
    for a in outs:
        print(format_array(a))
    return 0


def cmd_expand(ns) -> int:
    reg = _registry(ns.ops)
    op = reg.get(ns.op)
    t = dtype_from_name(ns.type)
    if t not in op.generictypes:
        allowed = ", ".join(x.cname for x in op.generictypes)
        raise TypeNotInGenericList(f"{op.name} is not defined for {t.cname} (allowed: {allowed})")
    if ns.bad:
        if op.badcode is None:
            raise NoBadVariant(f"{op.name} has no bad-value code")
        k, variant = op.badcode, "bad"
    else:
        k, variant = op.code, "good"
    if k is None:
        raise NoBadVariant(f"{op.name} has no calculation code to expand")
    sys.stdout.write(expand_kernel(k, op.sig, t, variant, ns.check_bounds, name=op.name))
    return 0


_SHAPE = re.compile(r"^\s*([A-Za-z_]\w*)\s*=\s*(?:([A-Za-z_]\w*)\s*)?\[([^\]]*)\]\s*$")


def parse_shapes(text: str) -> dict:
    """``"a=[2,3];b=float[3]"`` -> shape stand-ins keyed by parameter."""
    out = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        m = _SHAPE.match(part)
        if not m:
            raise UsageError(f"bad shape {part.strip()!r}; expected name=[d0,d1,...]")
        name, tname, dims = m.groups()
        try:
            dl = [int(x) for x in dims.split(",")] if dims.strip() else []
        except ValueError:
            raise UsageError(f"bad dims in {part.strip()!r}") from None
        if any(d < 0 for d in dl):
            raise UsageError(f"negative dim in {part.strip()!r}")
        dt = dtype_from_name(tname) if tname else dtype_from_name("double")
        out[name] = shape_only(dl, dt)
    return out


def cmd_plan(ns) -> int:
    reg = _registry(ns.ops)
    op = reg.get(ns.op)
    shapes = parse_shapes(ns.shapes)
    unknown = set(shapes) - set(op.sig.names())
    if unknown:
        raise UsageError(f"{op.name} has no parameters {sorted(unknown)}")
    sizes = {}
    if op.redodimscode is not None:
        sizes = run_redodims(op, shapes)
    plan = make_plan(op, shapes, sizes)
    print(format_plan(op, plan))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="threadloop",
                                 description="Run, expand and plan threaded array operators.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--ops", metavar="FILE", help="opdef file (default: bundled corpus)")
        p.add_argument("--op", required=True, metavar="NAME")

    p = sub.add_parser("run", help="run an operator and print its outputs")
    common(p)
    p.add_argument("--arg", action="append", metavar="name=LITERAL")
    p.add_argument("--other", action="append", metavar="name=VALUE")
    p.add_argument("--check-bounds", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("expand", help="print the loop-nest expansion of a kernel")
    common(p)
    p.add_argument("--type", required=True, metavar="DTYPE")
    p.add_argument("--bad", action="store_true", help="expand the bad-value variant")
    p.add_argument("--check-bounds", action="store_true")
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("plan", help="show how argument shapes broadcast")
    common(p)
    p.add_argument("--shapes", required=True, metavar='"a=[2,3];b=[3]"')
    p.set_defaults(fn=cmd_plan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return ns.fn(ns)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except PlanError as e:
        rule = f" (rule {e.rule})" if e.rule else ""
        print(f"error{rule}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except ThreadloopError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

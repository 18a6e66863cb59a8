"""Broadcast planning: active-dim binding, thread-dim matching, generic type."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (ActiveDimMismatch, FixedSizeMismatch, MissingInput,
                      NullInput, OutputDimMismatch, ThreadDimMismatch,
                      UnresolvedDim)
from ..ndarray import Dtype, fresh_dimincs, product
from ..typesys import param_dtype, resolve_generic


@dataclass
class ParamLayout:
    """Where one argument's elements live relative to the thread sweep."""
    base: int
    active_incs: dict          # dim name -> stride (0 for padded dims)
    thread_incs: list          # one stride per plan thread dim


@dataclass
class BroadcastPlan:
    generic: Dtype
    dim_sizes: dict                        # base dim name -> size
    thread_dims: list
    layouts: dict = field(default_factory=dict)           # param -> ParamLayout
    param_dtypes: dict = field(default_factory=dict)      # param -> Dtype
    outputs_to_create: dict = field(default_factory=dict)  # param -> dims
    temps: dict = field(default_factory=dict)             # param -> dims

    def full_dims(self, p) -> list:
        """Active dims followed by thread dims for parameter spec ``p``."""
        return [self.dim_sizes[d.base] for d in p.active_dims] + list(self.thread_dims)


class _Shape:
    """Just the dims of an argument; lets cmd_plan work without data."""

    def __init__(self, dims, dtype=Dtype.DOUBLE):
        self.dims = list(dims)
        self.dimincs = fresh_dimincs(self.dims)
        self.offset = 0
        self.dtype = dtype
        self.is_null = False
        self.badflag = False

    @property
    def ndims(self):
        return len(self.dims)

    @property
    def nvals(self):
        return product(self.dims)


def shape_only(dims, dtype=Dtype.DOUBLE):
    return _Shape(dims, dtype)


def layout_for(arr, p, plan: BroadcastPlan) -> ParamLayout:
    """Strides of array ``arr`` (bound to spec ``p``) under ``plan``."""
    na = len(p.active_dims)
    dims = arr.dims
    incs = arr.dimincs
    active = {}
    for i, d in enumerate(p.active_dims):
        active[d.name] = incs[i] if i < len(dims) and dims[i] != 1 else 0
    tinc = []
    for k in range(len(plan.thread_dims)):
        j = na + k
        tinc.append(incs[j] if j < len(dims) and dims[j] != 1 else 0)
    return ParamLayout(arr.offset, active, tinc)


def _is_supplied(a) -> bool:
    return a is not None and not a.is_null


def make_plan(op, args: dict, sizes_override: dict | None = None) -> BroadcastPlan:
    """Resolve dim sizes, thread dims and the generic type for a call.

    ``args`` maps parameter names to arrays (or shape stand-ins); outputs
    may be absent or null.  An argument with fewer dims than its active-dim
    count is padded with size-1 dims.
    """
    sig = op.sig
    sizes: dict[str, int] = {}
    origin: dict[str, str] = {}
    for d, s in (sizes_override or {}).items():
        base = sig.base_of(d) or d
        sizes[base] = s
        origin[base] = "RedoDimsCode"

    inputs = []
    for p in sig.params:
        a = args.get(p.name)
        if p.is_input:
            if a is None:
                raise MissingInput(f"{op.name}: missing input {p.name!r}")
            if a.is_null:
                raise NullInput(f"{op.name}: input {p.name!r} is null")
            inputs.append((p, a))

    def bind(p, a):
        for i, d in enumerate(p.active_dims):
            size = a.dims[i] if i < len(a.dims) else 1
            if d.fixed_size is not None and size != d.fixed_size:
                raise FixedSizeMismatch(
                    f"{op.name}: dim {d.name!r} of {p.name!r} must be {d.fixed_size}, got {size}")
            prev = sizes.get(d.base)
            if prev is None:
                sizes[d.base] = size
                origin[d.base] = p.name
            elif prev != size:
                raise ActiveDimMismatch(
                    f"{op.name}: dim {d.base!r} is {prev} from {origin[d.base]!r} "
                    f"but {size} from {p.name!r}")

    for p, a in inputs:
        bind(p, a)

    # thread dims from inputs only (rules 1-3)
    extra = [(p, list(a.dims[len(p.active_dims):])) for p, a in inputs]
    nthread = max((len(x) for _, x in extra), default=0)
    thread_dims = []
    for k in range(nthread):
        size, who = 1, None
        for p, x in extra:
            s = x[k] if k < len(x) else 1
            if s == 1:
                continue
            if size == 1:
                size, who = s, p.name
            elif s != size:
                raise ThreadDimMismatch(
                    f"rule 3: thread dim {k} is {size} in {who!r} but {s} in {p.name!r}")
        thread_dims.append(size)

    # supplied outputs may bind dims no input mentions
    for p in sig.params:
        a = args.get(p.name)
        if not p.is_input and not p.is_temp and _is_supplied(a):
            for i, d in enumerate(p.active_dims):
                if d.base not in sizes and i < len(a.dims):
                    sizes[d.base] = a.dims[i]
                    origin[d.base] = p.name

    for p in sig.params:
        for d in p.active_dims:
            if d.base not in sizes:
                if d.fixed_size is not None:
                    sizes[d.base] = d.fixed_size
                    origin[d.base] = "signature"
                else:
                    raise UnresolvedDim(f"{op.name}: cannot determine size of dim {d.base!r}")
            elif d.fixed_size is not None and sizes[d.base] != d.fixed_size:
                raise FixedSizeMismatch(
                    f"{op.name}: dim {d.base!r} must be {d.fixed_size}, got {sizes[d.base]}")

    arg_dtypes = {p.name: args[p.name].dtype for p in sig.params
                  if not p.is_temp and _is_supplied(args.get(p.name))}
    generic = resolve_generic(sig, arg_dtypes, op.generictypes)
    plan = BroadcastPlan(generic, sizes, thread_dims)
    for p in sig.params:
        plan.param_dtypes[p.name] = param_dtype(p, generic)
        a = args.get(p.name)
        if p.is_temp:
            plan.temps[p.name] = [sizes[d.base] for d in p.active_dims]
        elif not p.is_input and not _is_supplied(a):
            plan.outputs_to_create[p.name] = plan.full_dims(p)
        elif not p.is_input:
            want = plan.full_dims(p)
            if list(a.dims) != want:
                raise OutputDimMismatch(
                    f"{op.name}: supplied output {p.name!r} has dims {list(a.dims)}, expected {want}")
        if _is_supplied(a):
            plan.layouts[p.name] = layout_for(a, p, plan)
    return plan


def format_plan(op, plan: BroadcastPlan) -> str:
    """Human-readable plan summary used by the command line."""
    lines = [f"generic={plan.generic.cname}"]
    for d in sorted(plan.dim_sizes):
        lines.append(f"dim {d}={plan.dim_sizes[d]}")
    lines.append("thread_dims=[" + ",".join(str(x) for x in plan.thread_dims) + "]")
    for p in op.sig.params:
        lay = plan.layouts.get(p.name)
        if lay is None:
            continue
        act = ",".join(f"{d}:{s}" for d, s in lay.active_incs.items())
        thr = ",".join(str(s) for s in lay.thread_incs)
        lines.append(f"strides {p.name}: active[{act}] thread[{thr}]")
    for p in op.sig.params:
        if p.name in plan.outputs_to_create:
            dims = plan.outputs_to_create[p.name]
            lines.append(f"{p.name}=[" + ",".join(str(x) for x in dims) + "]")
    return "\n".join(lines)

"""Running operators: argument normalization, dispatch and kernel execution."""
from __future__ import annotations

from collections import defaultdict

from ..errors import (BadValuesForbidden, EngineError, IndexOutOfBounds,
                      InplaceShapeMismatch, MissingNcOutput, NegativeAssignedSize,
                      OtherParError, SuppliedOcaParam)
from ..ndarray import (Dtype, NdArray, StateFlags, cast_value, convert_dtype,
                       counters)
from .opdef import OpDef, OtherParValue, coerce_otherpar
from .plan import BroadcastPlan, layout_for, make_plan
from .pycodegen import compile_kernel


class KernelRun:
    """Everything a compiled kernel reads through its ``R`` argument."""

    def __init__(self, otherpars=None, comp=None):
        self.D = defaultdict(lambda: None)
        self.B = defaultdict(int)
        self.BV = defaultdict(lambda: None)
        self.INC = defaultdict(lambda: defaultdict(int))
        self.TINC = {}
        self.SIZE = {}
        self.OP = dict(otherpars or {})
        self.COMP = self.OP if comp is None else comp
        self.ORDER = []
        self.diag: list[str] = []
        self.setbad: set[str] = set()
        self.state: dict[str, bool] = {}
        self.arrays: dict[str, NdArray] = {}
        self.sig = None

    def bind(self, name: str, arr: NdArray, active_incs: dict, thread_incs: list):
        self.arrays[name] = arr
        self.D[name] = arr.data
        self.B[name] = arr.offset
        self.BV[name] = arr.badvalue
        self.INC[name] = active_incs
        self.TINC[name] = thread_incs

    # queries

    def flag(self, p: str) -> bool:
        if p in self.state:
            return self.state[p]
        a = self.arrays.get(p)
        return bool(a is not None and a.badflag)

    def meta(self, p: str, field: str, idx=None):
        a = self.arrays.get(p)
        if a is None:
            raise EngineError(f"no array bound to parameter {p!r}")
        return _meta(a, field, idx, p)

    def flow_meta(self, which, field, idx=None):
        raise EngineError(f"${which} is only available in dataflow kernels")

    # setup-phase hooks

    def size_set(self, dim: str, v):
        v = int(v)
        if v < 0:
            raise NegativeAssignedSize(f"$SIZE({dim}) assigned negative value {v}")
        base = self.sig.base_of(dim) if self.sig is not None else None
        self.SIZE[base or dim] = v
        return v

    def child_set(self, field, idx, v):
        raise EngineError("$CHILD is only writable in RedoDims")

    def setndims(self, n):
        raise EngineError("$SETNDIMS is only available in RedoDims")

    def setdims(self):
        raise EngineError("$SETDIMS is only available in RedoDims")

    def equivcp(self, pi, ci, oob):
        raise EngineError("$EquivCPOffs is only available in EquivCPOffsCode")


def _meta(a: NdArray, field: str, idx, p: str):
    if field == "ndims":
        return a.ndims
    if field == "nvals":
        return a.nvals
    if field == "datatype":
        return a.dtype.value
    seq = a.dims if field == "dims" else a.dimincs
    if idx is None:
        raise EngineError(f"$PDL({p})->{field} needs an index")
    i = int(idx)
    if not 0 <= i < len(seq):
        raise IndexOutOfBounds(f"$PDL({p})->{field}({i}) with ndims {len(seq)}")
    return seq[i]


# --- argument normalization ----------------------------------------------------

def _nested_shape(x) -> list:
    dims = []
    while isinstance(x, (list, tuple)):
        dims.append(len(x))
        if not x:
            break
        x = x[0]
    return dims[::-1]


def _flatten(x, out):
    if isinstance(x, (list, tuple)):
        for v in x:
            _flatten(v, out)
    else:
        out.append(x)
    return out


def to_ndarray(x) -> NdArray | None:
    """Accept NdArrays, None, Python numbers and nested lists.

    Python values become double arrays; for nested lists the innermost
    list is dim 0.
    """
    if x is None or isinstance(x, NdArray):
        return x
    if isinstance(x, bool):
        raise EngineError("booleans are not array values")
    if isinstance(x, (int, float)):
        return NdArray.scalar(Dtype.DOUBLE, x)
    if isinstance(x, (list, tuple)):
        dims = _nested_shape(x)
        vals = _flatten(x, [])
        if len(vals) != _prod(dims):
            raise EngineError("ragged nested list")
        return NdArray.from_values(Dtype.DOUBLE, dims, vals)
    raise EngineError(f"cannot use {type(x).__name__} as an array argument")


def _prod(xs):
    n = 1
    for x in xs:
        n *= x
    return n


def normalize_args(op: OpDef, args) -> dict:
    """Map parameter name -> NdArray or None (temporaries excluded)."""
    names = [p.name for p in op.sig.params if not p.is_temp]
    if args is None:
        args = {}
    if isinstance(args, dict):
        unknown = set(args) - set(names)
        if unknown:
            raise EngineError(f"{op.name}: unknown parameters {sorted(unknown)}")
        return {n: to_ndarray(args.get(n)) for n in names}
    args = list(args)
    if len(args) > len(names):
        raise EngineError(f"{op.name}: {len(args)} arguments for {len(names)} parameters")
    args += [None] * (len(names) - len(args))
    return {n: to_ndarray(a) for n, a in zip(names, args)}


def normalize_otherpars(op: OpDef, otherpars) -> dict:
    decl = op.otherpars
    if otherpars is None:
        otherpars = {}
    if isinstance(otherpars, dict):
        given = dict(otherpars)
    else:
        items = list(otherpars)
        if items and all(isinstance(v, OtherParValue) for v in items):
            given = {}
            for v in items:
                kind = dict(decl).get(v.name)
                if kind is not None and v.kind != kind:
                    raise OtherParError(f"OtherPars {v.name!r} declared {kind}, given {v.kind}")
                given[v.name] = v.value
        else:
            if len(items) > len(decl):
                raise OtherParError(f"{op.name}: {len(items)} OtherPars for {len(decl)} declared")
            given = {name: v for (name, _), v in zip(decl, items)}
    unknown = set(given) - {n for n, _ in decl}
    if unknown:
        raise OtherParError(f"{op.name}: unknown OtherPars {sorted(unknown)}")
    out = {}
    for name, kind in decl:
        if name not in given:
            raise OtherParError(f"{op.name}: missing OtherPars {name!r}")
        out[name] = coerce_otherpar(name, kind, given[name])
    return out


# --- dispatch pieces -----------------------------------------------------------

def choose_code_path(op: OpDef, args: dict) -> str:
    """``"bad"`` iff the op handles bad values and some input has its badflag."""
    anybad = any(a is not None and not a.is_null and a.badflag
                 for p in op.sig.params if p.is_input
                 for a in [args.get(p.name)])
    if anybad and op.handlebad == "forbid":
        raise BadValuesForbidden(f"{op.name} does not accept bad values")
    if anybad and op.handlebad == "handle" and op.badcode is not None:
        return "bad"
    return "good"


def run_redodims(op: OpDef, args: dict, otherpars: dict | None = None) -> dict:
    """Run RedoDimsCode and return the ``$SIZE`` assignments it made."""
    if op.redodimscode is None:
        return {}
    R = KernelRun(otherpars)
    R.sig = op.sig
    for p in op.sig.params:
        a = args.get(p.name)
        if a is not None and not a.is_null:
            R.arrays[p.name] = a
    fn, _ = compile_kernel(op.redodimscode, op.sig, Dtype.DOUBLE, "good", False, 0,
                           op.otherpar_kinds, op.comp)
    fn(R)
    return dict(R.SIZE)


def apply_inplace(op: OpDef, args: dict, plan: BroadcastPlan | None = None):
    """Alias the declared output to its input when the input has INPLACE set.

    Returns the (input, output) names that were linked, or None.
    """
    if op.inplace is None:
        return None
    src, dst = op.inplace
    a = args.get(src)
    if a is None or a.is_null or not a.has_flag(StateFlags.INPLACE):
        return None
    if args.get(dst) is not None and not args[dst].is_null:
        return None
    if plan is not None:
        want = plan.full_dims(op.sig.param(dst))
        if list(a.dims) != want:
            raise InplaceShapeMismatch(
                f"{op.name}: inplace output {dst!r} would have dims {want}, input has {list(a.dims)}")
    args[dst] = a
    return (src, dst)


def _orders(thread_dims, thread_order: str):
    if thread_order not in ("forward", "reverse"):
        raise ValueError(f"thread_order must be 'forward' or 'reverse', not {thread_order!r}")
    if thread_order == "forward":
        return [range(n) for n in thread_dims]
    return [range(n - 1, -1, -1) for n in thread_dims]


def execute_kernel(k, op: OpDef, plan: BroadcastPlan, arrays: dict, otherpars=None,
                   variant="good", bounds=False, thread_order="forward", R=None,
                   comp=None) -> KernelRun:
    """Run kernel ``k`` over already-prepared arrays laid out per ``plan``."""
    R = R if R is not None else KernelRun(otherpars, comp)
    R.sig = op.sig
    R.SIZE = dict(plan.dim_sizes)
    R.ORDER = _orders(plan.thread_dims, thread_order)
    nan_bad = set()
    for p in op.sig.params:
        a = arrays[p.name]
        lay = layout_for(a, p, plan)
        if p.is_temp:
            R.bind(p.name, a, dict(zip(p.dim_names, a.dimincs)), [])
        else:
            R.bind(p.name, a, lay.active_incs, lay.thread_incs)
        if a.dtype.is_float and a.badvalue_override is None:
            nan_bad.add(p.name)
    fn, _ = compile_kernel(k, op.sig, plan.generic, variant, bounds, len(plan.thread_dims),
                           op.otherpar_kinds, op.comp, nan_bad)
    try:
        fn(R)
    except IndexOutOfBounds:
        raise
    except (IndexError, TypeError) as e:
        if isinstance(e, TypeError) and "index" not in str(e):
            raise
        raise IndexOutOfBounds(f"{op.name}: element access outside the array ({e})") from None
    counters.kernel_runs += 1
    return R


def _write_back(orig: NdArray, work: NdArray):
    vals = work.raw_values()
    bad_src = work.badflag
    data, base = orig.data, orig.offset
    for off, v in zip(orig.iter_offsets(), vals):
        if bad_src and work.is_bad_value(v):
            data[base + off] = orig.badvalue
        else:
            data[base + off] = cast_value(orig.dtype, v)
    counters.elements_copied += len(vals)


# --- the entry point -----------------------------------------------------------

def run_op(op, args=None, otherpars=None, *, thread_order: str = "forward",
           check_bounds: bool | None = None, registry=None):
    """Run operator ``op`` (an OpDef or registered name) on ``args``.

    ``args`` is a dict keyed by parameter name or a sequence in signature
    order; outputs may be omitted or None to have them created.  Returns
    the single output array, or a tuple of outputs in signature order.
    """
    if not isinstance(op, OpDef):
        from .registry import get_op
        op = get_op(op, registry)
    if op.defaultflow:
        raise EngineError(f"{op.name} is a dataflow operator; use connect()")
    args = normalize_args(op, args)
    ops = normalize_otherpars(op, otherpars)
    sig = op.sig

    for p in sig.params:
        a = args.get(p.name)
        supplied = a is not None and not a.is_null
        if "oca" in p.flags and supplied:
            raise SuppliedOcaParam(f"{op.name}: [oca] parameter {p.name!r} must not be supplied")
        if "nc" in p.flags and not supplied:
            raise MissingNcOutput(f"{op.name}: [nc] parameter {p.name!r} must be supplied")
        if supplied:
            a.physicalize()

    variant = choose_code_path(op, args)
    sizes = run_redodims(op, args, ops)
    plan = make_plan(op, args, sizes)
    linked = apply_inplace(op, args, plan)

    originals = dict(args)
    work: dict[str, NdArray] = {}
    converted: dict[int, NdArray] = {}
    for p in sig.params:
        a = args.get(p.name)
        want = plan.param_dtypes[p.name]
        if p.is_temp:
            work[p.name] = NdArray.filled(want, plan.temps[p.name])
            continue
        if a is None or a.is_null:
            if linked and p.name == linked[1]:
                continue
            out = NdArray.filled(want, plan.outputs_to_create[p.name])
            work[p.name] = out
            continue
        if a.dtype is not want:
            key = id(a)
            if key not in converted:
                converted[key] = convert_dtype(a, want)
            work[p.name] = converted[key]
        else:
            work[p.name] = a
    if linked:
        work[linked[1]] = work[linked[0]]

    kernel = op.badcode if variant == "bad" else op.code
    bounds = op.boundscheck if check_bounds is None else bool(check_bounds)
    R = execute_kernel(kernel, op, plan, work, ops, variant, bounds, thread_order)

    in_flag = any(args[p.name].badflag for p in sig.params
                  if p.is_input and args.get(p.name) is not None)
    results = []
    touched = []
    for p in sig.params:
        if not p.is_output:
            continue
        w = work[p.name]
        flag = (op.handlebad == "ignore" and in_flag) or p.name in R.setbad
        if p.name in R.state:
            flag = R.state[p.name] or p.name in R.setbad
        orig = originals.get(p.name)
        if linked and p.name == linked[1]:
            orig = originals[linked[0]]
        w.badflag = flag
        if orig is not None and not orig.is_null:
            if orig is not w:
                _write_back(orig, w)
            orig.badflag = flag
            touched.append(orig)
            results.append(orig)
        else:
            results.append(w)
    if linked:
        originals[linked[0]].state &= ~StateFlags.INPLACE
    for a in {id(a): a for a in touched}.values():
        if a.trans_parent is not None or a.trans_children:
            from ..dataflow import mark_changed
            mark_changed(a)
    _last_diagnostics[:] = R.diag
    return results[0] if len(results) == 1 else tuple(results)


_last_diagnostics: list[str] = []


def last_diagnostics() -> list[str]:
    """Diagnostics (such as integer division by zero) from the latest call."""
    return list(_last_diagnostics)

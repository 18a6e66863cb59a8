"""Parent/child links between arrays.

A :class:`Trans` ties a child array to its parent through a dataflow
operator.  Forward flow is lazy: the child is flagged and only recomputed
when read.  Back flow (writes to the child) runs immediately.  Affine
links share the parent's buffer and never run a kernel.
"""
from __future__ import annotations

from array import array

from .engine.execute import (KernelRun, _meta, _write_back, choose_code_path,
                             execute_kernel, normalize_otherpars)
from .engine.opdef import OpDef
from .engine.plan import make_plan
from .engine.pycodegen import compile_kernel
from .errors import (DataflowCycle, EngineError, IndexOutOfBounds, IrreversibleWrite,
                     KernelValidationError, MissingRedoDimsMetadata, NullArrayAccess,
                     SliceOutOfRange, ZeroStep)
from .ndarray import (Dtype, NdArray, StateFlags, cast_value, convert_dtype, counters,
                      fresh_dimincs)

_CHANGED = StateFlags.ANYCHANGED
_FLOW = StateFlags.DATAFLOW_F | StateFlags.DATAFLOW_B


class Trans:
    def __init__(self, op: OpDef, parent: NdArray, child: NdArray, otherpars: dict,
                 comp: dict, affine=None):
        self.op = op
        self.parent = parent
        self.child = child
        self.otherpars = dict(otherpars)
        self.comp = comp
        self.reversible = op.reversible
        self.affine = affine        # (offset, dimincs) into the parent's buffer

    def __repr__(self):
        kind = "affine" if self.affine is not None else "code"
        return f"Trans({self.op.name}, {kind})"


class _FlowRun(KernelRun):
    """Run context for MakeComp / RedoDims / EquivCPOffs kernels."""

    def __init__(self, parent: NdArray, otherpars, comp):
        super().__init__(otherpars, comp)
        self.parent = parent
        self.child_dims: list[int] | None = None
        self.child_dtype: Dtype | None = None
        self.dims_set = False
        self.pairs: list[tuple[int, int, bool]] = []
        self.child = None

    def flow_meta(self, which, field, idx=None):
        if which == "PARENT":
            return _meta(self.parent, field, idx, "PARENT")
        if self.child is not None:
            return _meta(self.child, field, idx, "CHILD")
        dims = self.child_dims or []
        if field == "ndims":
            return len(dims)
        if field == "datatype":
            return (self.child_dtype or self.parent.dtype).value
        if field == "nvals":
            n = 1
            for d in dims:
                n *= d
            return n
        if idx is None or not 0 <= int(idx) < len(dims):
            raise IndexOutOfBounds(f"$CHILD({field}[{idx}]) with ndims {len(dims)}")
        return dims[int(idx)] if field == "dims" else fresh_dimincs(dims)[int(idx)]

    def setndims(self, n):
        n = int(n)
        if n < 0:
            raise EngineError(f"$SETNDIMS({n})")
        self.child_dims = [1] * n

    def child_set(self, field, idx, v):
        if field == "datatype":
            self.child_dtype = Dtype(int(v))
            return v
        if field == "dimincs":
            # the child always gets fresh contiguous storage
            return v
        if field != "dims":
            raise EngineError(f"$CHILD({field}) is not assignable")
        if self.child_dims is None:
            raise MissingRedoDimsMetadata("$CHILD(dims) assigned before $SETNDIMS")
        i = int(idx)
        if not 0 <= i < len(self.child_dims):
            raise IndexOutOfBounds(f"$CHILD(dims[{i}]) with ndims {len(self.child_dims)}")
        if int(v) < 0:
            raise EngineError(f"negative child dim {v}")
        self.child_dims[i] = int(v)
        return v

    def setdims(self):
        if self.child_dims is None:
            raise MissingRedoDimsMetadata("$SETDIMS without $SETNDIMS")
        self.dims_set = True

    def equivcp(self, pi, ci, oob):
        self.pairs.append((int(pi), int(ci), bool(oob)))


def _resolve_op(op, registry=None) -> OpDef:
    if isinstance(op, OpDef):
        return op
    from .engine.registry import get_op
    return get_op(op, registry)


def _ancestors(a: NdArray):
    seen = []
    t = a.trans_parent
    while t is not None:
        seen.append(t.parent)
        t = t.parent.trans_parent
    return seen


def _link(t: Trans):
    t.child.trans_parent = t
    t.parent.trans_children.append(t)
    flags = StateFlags.DATAFLOW_F | (StateFlags.DATAFLOW_B if t.reversible else StateFlags(0))
    t.parent.state |= flags
    t.child.state |= flags


def _run_setup(kernel, op: OpDef, R: _FlowRun, generic: Dtype):
    fn, _ = compile_kernel(kernel, op.sig, generic, "good", False, 0,
                           op.otherpar_kinds, op.comp)
    fn(R)


def connect(op, parent: NdArray, otherpars=None, *, child: NdArray | None = None,
            registry=None) -> NdArray:
    """Create (or attach) the child of ``parent`` under dataflow op ``op``.

    Runs MakeComp then RedoDims; the child's values are computed on first
    read.
    """
    op = _resolve_op(op, registry)
    if not op.defaultflow:
        raise KernelValidationError(f"{op.name} is not a dataflow operator")
    names = set(op.sig.names())
    if names != {"PARENT", "CHILD"}:
        raise KernelValidationError(f"{op.name}: dataflow ops take exactly PARENT and CHILD")
    if parent is None or parent.is_null:
        raise NullArrayAccess("cannot connect a null parent")
    if child is not None:
        if child is parent or child in _ancestors(parent):
            raise DataflowCycle(f"{op.name}: the child would become its own ancestor")
        if child.trans_parent is not None:
            raise DataflowCycle(f"{op.name}: the child already has a parent link")
    ops = normalize_otherpars(op, otherpars)
    if op.affine:
        spec = ops.get("spec", "")
        view = slice_affine(parent, spec, op=op, otherpars=ops)
        if child is not None:
            raise KernelValidationError("affine links always create their own child")
        return view

    generic = make_plan(op, {"PARENT": parent}).generic
    comp = dict(ops)
    R = _FlowRun(parent, ops, comp)
    R.sig = op.sig
    if op.makecomp is not None:
        _run_setup(op.makecomp, op, R, generic)
    if op.redodims is not None:
        _run_setup(op.redodims, op, R, generic)
        if not R.dims_set:
            raise MissingRedoDimsMetadata(f"{op.name}: RedoDims finished without $SETDIMS")
        dims = R.child_dims
        dtype = R.child_dtype or generic
    else:
        dims, dtype = default_redodims(parent, generic)
    if child is None:
        child = NdArray.filled(dtype, dims)
    elif list(child.dims) != list(dims):
        raise EngineError(f"{op.name}: child has dims {child.dims}, expected {dims}")
    t = Trans(op, parent, child, ops, comp)
    _link(t)
    child.state |= StateFlags.PARENTDATACHANGED
    return child


def default_redodims(parent: NdArray, generic: Dtype):
    """Child dims copy the parent's; dtype is the generic type."""
    return list(parent.dims), generic


# --- forward flow --------------------------------------------------------------

def make_physical(a: NdArray) -> None:
    """Bring ``a`` up to date with its ancestors."""
    t = a.trans_parent
    if t is None:
        a.state &= ~_CHANGED
        return
    if t.affine is not None:
        make_physical(t.parent)
        a.badflag = t.parent.badflag
        a.state &= ~_CHANGED
        return
    if not a.anychanged:
        return
    make_physical(t.parent)
    if t.op.equivcpoffs is not None:
        equiv_cp_flow(t, "forward")
    else:
        _code_flow(t, forward=True)
    a.state &= ~_CHANGED


def _code_flow(t: Trans, forward: bool):
    op = t.op
    parent, child = t.parent, t.child
    args = {"PARENT": parent, "CHILD": child}
    plan = make_plan(op, args)
    src = parent if forward else child
    dst = child if forward else parent
    variant = "good"
    if src.badflag:
        if op.handlebad == "forbid":
            variant = choose_code_path(op, {"PARENT": src})
        elif op.handlebad == "handle":
            bad_k = op.badcode if forward else op.badbackcode
            variant = "bad" if bad_k is not None else "good"
    kernel = (op.badcode if variant == "bad" else op.code) if forward else \
        (op.badbackcode if variant == "bad" else op.backcode)
    if kernel is None:
        raise IrreversibleWrite(f"{op.name} has no back flow kernel")
    work = {}
    for name, arr in args.items():
        want = plan.param_dtypes[name]
        work[name] = arr if arr.dtype is want else convert_dtype(arr, want)
    R = execute_kernel(kernel, op, plan, work, t.otherpars, variant, op.boundscheck,
                       comp=t.comp)
    dname = "CHILD" if forward else "PARENT"
    w = work[dname]
    flag = (op.handlebad == "ignore" and src.badflag) or dname in R.setbad
    if dname in R.state:
        flag = R.state[dname] or dname in R.setbad
    if w is not dst:
        w.badflag = flag
        _write_back(dst, w)
    dst.badflag = flag


def equiv_cp_flow(t: Trans, direction: str) -> None:
    """Copy elements between parent and child along the kernel's offset pairs."""
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    op = t.op
    parent, child = t.parent, t.child
    generic = make_plan(op, {"PARENT": parent, "CHILD": child}).generic
    R = _FlowRun(parent, t.otherpars, t.comp)
    R.sig = op.sig
    R.child = child
    _run_setup(op.equivcpoffs, op, R, generic)
    poffs = [parent.offset + o for o in parent.iter_offsets()]
    coffs = [child.offset + o for o in child.iter_offsets()]
    pdata, cdata = parent.data, child.data
    handle = op.handlebad == "handle"

    def slot(offs, i, who):
        if not 0 <= i < len(offs):
            raise IndexOutOfBounds(f"{op.name}: {who} offset {i} outside {len(offs)} elements")
        return offs[i]

    if direction == "forward":
        anybad = False
        for pi, ci, oob in R.pairs:
            c = slot(coffs, ci, "child")
            if oob:
                if handle:
                    cdata[c] = child.badvalue
                    anybad = True
                else:
                    cdata[c] = cast_value(child.dtype, 0)
                continue
            v = pdata[slot(poffs, pi, "parent")]
            if parent.badflag and parent.is_bad_value(v):
                cdata[c] = child.badvalue
            else:
                cdata[c] = cast_value(child.dtype, v)
        child.badflag = parent.badflag or anybad
    else:
        for pi, ci, oob in R.pairs:
            if oob:
                continue
            v = cdata[slot(coffs, ci, "child")]
            p = slot(poffs, pi, "parent")
            if child.badflag and child.is_bad_value(v):
                pdata[p] = parent.badvalue
            else:
                pdata[p] = cast_value(parent.dtype, v)
        if child.badflag:
            parent.badflag = True


# --- writes --------------------------------------------------------------------

def _mark_descendants(a: NdArray, skip: Trans | None = None):
    for t in a.trans_children:
        if t is skip:
            continue
        t.child.state |= StateFlags.PARENTDATACHANGED
        _mark_descendants(t.child)


def mark_changed(a: NdArray, _skip: Trans | None = None) -> None:
    """Record that ``a`` was modified in place and propagate the change.

    Descendants are flagged for lazy recomputation; if ``a`` is itself a
    child, its data flows back into the parent right away.
    """
    _mark_descendants(a, _skip)
    t = a.trans_parent
    if t is None:
        return
    if not t.reversible:
        raise IrreversibleWrite(f"{t.op.name}: writes to the child cannot flow back")
    a.state &= ~_CHANGED
    if t.affine is None:
        if t.op.equivcpoffs is not None:
            equiv_cp_flow(t, "backward")
        else:
            _code_flow(t, forward=False)
    elif a.badflag:
        t.parent.badflag = True
    t.parent.state &= ~_CHANGED
    mark_changed(t.parent, _skip=t)


def write_values(a: NdArray, values) -> None:
    """Overwrite every element of ``a`` (storage order) and propagate."""
    a.physicalize()
    values = list(values)
    if len(values) != a.nvals:
        raise EngineError(f"{len(values)} values for an array of {a.nvals}")
    data, base = a.data, a.offset
    for off, v in zip(a.iter_offsets(), values):
        data[base + off] = cast_value(a.dtype, v)
    if a.trans_parent is not None or a.trans_children:
        mark_changed(a)


def update(a: NdArray, fn) -> None:
    """Apply ``fn`` to each element of ``a`` in place, e.g. ``update(c, lambda v: v + 1)``."""
    write_values(a, [fn(v) for v in a.values()])


# --- affine views --------------------------------------------------------------

def parse_slice_spec(text: str) -> list:
    """``"1:3,:,2"`` -> ``[(1, 3, None), None, 2]``; missing parts are defaults."""
    out = []
    if not text.strip():
        return out
    for part in text.split(","):
        part = part.strip()
        if ":" not in part:
            try:
                out.append(int(part))
            except ValueError:
                raise SliceOutOfRange(f"bad slice entry {part!r}") from None
            continue
        bits = part.split(":")
        if len(bits) > 3:
            raise SliceOutOfRange(f"bad slice entry {part!r}")
        try:
            vals = [int(b) if b.strip() else None for b in bits]
        except ValueError:
            raise SliceOutOfRange(f"bad slice entry {part!r}") from None
        vals += [None] * (3 - len(vals))
        out.append(None if vals == [None, None, None] else tuple(vals))
    return out


def _dim_range(entry, n: int, k: int):
    """(start, count, step) for one slice entry on a dim of size n."""
    start, end, step = entry
    step = 1 if step is None else step
    if step == 0:
        raise ZeroStep(f"zero step in slice of dim {k}")
    if start is None:
        start = 0 if step > 0 else n - 1
    if end is None:
        end = n if step > 0 else -1
    if not -1 <= start <= n or not -1 <= end <= n:
        raise SliceOutOfRange(f"slice {entry} outside dim {k} of size {n}")
    if step > 0:
        count = max(0, -(-(end - start) // step))
    else:
        count = max(0, -(-(start - end) // -step))
    if count and not (0 <= start < n and 0 <= start + (count - 1) * step < n):
        raise SliceOutOfRange(f"slice {entry} outside dim {k} of size {n}")
    return start, count, step


def slice_affine(parent: NdArray, spec, *, op: OpDef | None = None,
                 otherpars=None) -> NdArray:
    """A zero-copy view of ``parent``.

    ``spec`` has one entry per leading dim: ``None`` (whole dim), an int
    (select one index and drop the dim) or ``(start, end, step)`` with
    ``end`` exclusive.  A string such as ``"0:2,1"`` is accepted too.
    """
    if parent.is_null:
        raise NullArrayAccess("cannot slice a null array")
    if isinstance(spec, str):
        spec = parse_slice_spec(spec)
    spec = list(spec)
    if len(spec) > parent.ndims:
        raise SliceOutOfRange(f"{len(spec)} slice entries for {parent.ndims} dims")
    spec += [None] * (parent.ndims - len(spec))
    offset = parent.offset
    dims, incs = [], []
    for k, (entry, n, inc) in enumerate(zip(spec, parent.dims, parent.dimincs)):
        if entry is None:
            dims.append(n)
            incs.append(inc)
        elif isinstance(entry, int):
            if not 0 <= entry < n:
                raise SliceOutOfRange(f"index {entry} outside dim {k} of size {n}")
            offset += entry * inc
        else:
            start, count, step = _dim_range(tuple(entry), n, k)
            if count:
                offset += start * inc
            dims.append(count)
            incs.append(step * inc)
    child = NdArray(parent.dtype, dims, data=parent.data, dimincs=incs, offset=offset)
    child.badvalue_override = parent.badvalue_override
    child.badflag = parent.badflag
    if op is None:
        from .engine.registry import get_op
        op = get_op("slice")
    t = Trans(op, parent, child, otherpars or {}, {}, affine=(offset, list(incs)))
    _link(t)
    return child


def sever(a: NdArray) -> None:
    """Cut ``a`` loose from its parent, keeping its current values."""
    t = a.trans_parent
    if t is None:
        return
    make_physical(a)
    if t.affine is not None:
        vals = a.raw_values()
        counters.elements_copied += len(vals)
        a.data = array(a.dtype.typecode, vals)
        a.dimincs = fresh_dimincs(a.dims)
        a.offset = 0
    t.parent.trans_children.remove(t)
    if not t.parent.trans_children and t.parent.trans_parent is None:
        t.parent.state &= ~_FLOW
    a.trans_parent = None
    if not a.trans_children:
        a.state &= ~_FLOW
    a.state &= ~_CHANGED

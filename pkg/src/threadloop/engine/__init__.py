"""Operator registry, broadcast planning and kernel execution."""
from .execute import (KernelRun, apply_inplace, choose_code_path, execute_kernel,
                      last_diagnostics, normalize_args, normalize_otherpars,
                      run_op, run_redodims, to_ndarray)
from .opdef import (OpDef, OtherParValue, make_opdef, parse_otherpar_text,
                    validate_opdef)
from .plan import BroadcastPlan, format_plan, make_plan, shape_only
from .registry import Registry, default_registry, get_op, register_op

__all__ = [
    "BroadcastPlan", "KernelRun", "OpDef", "OtherParValue", "Registry",
    "apply_inplace", "choose_code_path", "default_registry", "execute_kernel",
    "format_plan", "get_op", "last_diagnostics", "make_opdef", "make_plan",
    "normalize_args", "normalize_otherpars", "parse_otherpar_text",
    "register_op", "run_op", "run_redodims", "shape_only", "to_ndarray",
    "validate_opdef",
]

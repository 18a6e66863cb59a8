"""Threaded n-dimensional array operators.

Operators are declared with a signature and a small C-like kernel; the
engine broadcasts them over extra dimensions, picks a working type,
handles bad values and can link arrays through dataflow.
"""
from .dataflow import (Trans, connect, make_physical, mark_changed, sever,
                       slice_affine, update, write_values)
from .engine import (OpDef, OtherParValue, Registry, get_op, make_opdef,
                     make_plan, register_op, run_op)
from .errors import ThreadloopError
from .literal import format_array, parse_array_literal
from .ndarray import Dtype, NdArray, StateFlags, counters
from .opfile import load_opdef_file, parse_opdef_file
from .sigparse import format_signature, parse_signature
from .typesys import promote, resolve_generic

__all__ = [
    "Dtype", "NdArray", "OpDef", "OtherParValue", "Registry", "StateFlags",
    "ThreadloopError", "Trans", "connect", "counters", "format_array",
    "format_signature", "get_op", "load_opdef_file", "make_opdef", "make_plan",
    "make_physical", "mark_changed", "parse_array_literal", "parse_opdef_file",
    "parse_signature", "promote", "register_op", "resolve_generic", "run_op",
    "sever", "slice_affine", "update", "write_values",
]

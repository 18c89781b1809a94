"""Symmetric Featherweight Multi-Java: symmetric, encapsulated multi-methods on a Featherweight Java core."""

from .core import (
    OBJECT,
    Cast,
    ClassDecl,
    ClassTable,
    ClassTableError,
    ConstructorDecl,
    FieldAccess,
    Invoke,
    MethodBranch,
    New,
    SFMJError,
    Span,
    Var,
    bind_class_table,
    is_value,
    pointwise_meet,
)
from .dispatch import DispatchError, Mode, fj_lookup, lookup, lookup1, resolve, select
from .evaluator import StuckCast, Value, evaluate, step, substitute
from .parser import ParseError, parse_expr, parse_program, pretty
from .typecheck import Diagnostic, ProgramRejected, check_program, type_expr

__version__ = "0.1.0"

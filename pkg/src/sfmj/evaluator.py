"""Small-step call-by-value reduction.

Reduction is deterministic: congruence rules always pick the leftmost
non-value subterm, computation rules fire only on fully evaluated redexes.
Finding the redex is iterative so long reduction sequences that grow the
term do not hit Python's recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from .core import (
    Cast,
    ClassTable,
    Expr,
    FieldAccess,
    Invoke,
    MethodBranch,
    New,
    SFMJError,
    Var,
    is_value,
    subexprs,
)
from .dispatch import DispatchError, Mode, Selector, resolve

COMPUTATION_RULES = ("R-Field", "R-Invk", "R-Cast")
CONGRUENCE_RULES = ("RC-Field", "RC-Invk", "RC-New-Arg", "RC-Cast")
RULES = COMPUTATION_RULES + CONGRUENCE_RULES

DEFAULT_FUEL = 100_000


class EvalError(SFMJError):
    """``InternalDispatchFailure``, ``FieldIndexFailure``, ``FreeVariableEscape``..."""


@dataclass(frozen=True)
class Value:
    expr: New


@dataclass(frozen=True)
class StuckCast:
    expr: Cast  # (D) new C(...) with C not a subtype of D


NormalForm = Union[Value, StuckCast]


@dataclass(frozen=True)
class Stepped:
    expr: Expr
    rule: str  # outermost rule of the derivation
    axiom: str  # computation rule at the redex
    branch: MethodBranch | None = None  # set when axiom is R-Invk
    arg_count: int | None = None


@dataclass(frozen=True)
class Normal:
    form: NormalForm


StepResult = Union[Stepped, Normal]


@dataclass(frozen=True)
class FuelExhausted:
    fuel: int


@dataclass
class Trace:
    start: Expr
    steps: list[Stepped] = field(default_factory=list)
    fuel: int = DEFAULT_FUEL
    outcome: NormalForm | FuelExhausted | None = None

    @property
    def final(self) -> Expr:
        return self.steps[-1].expr if self.steps else self.start

    def exprs(self) -> list[Expr]:
        return [self.start, *(s.expr for s in self.steps)]


def substitute(body: Expr, params: Sequence[str], args: Sequence[Expr]) -> Expr:
    """Simultaneous substitution of ``args`` for ``params`` in ``body``.

    Method bodies bind nothing, so no renaming is ever needed.
    """
    if len(params) != len(args):
        raise EvalError("LengthMismatch", f"{len(params)} parameters but {len(args)} arguments")
    mapping = dict(zip(params, args))

    def go(e: Expr) -> Expr:
        if isinstance(e, Var):
            if e.name not in mapping:
                raise EvalError("FreeVariableEscape", f"variable {e.name} is not a parameter", e.span)
            return mapping[e.name]
        if isinstance(e, FieldAccess):
            return FieldAccess(go(e.obj), e.name, e.span)
        if isinstance(e, Invoke):
            return Invoke(e.method, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, New):
            return New(e.cls, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, Cast):
            return Cast(e.cls, go(e.expr), e.span)
        raise TypeError(f"not an expression: {e!r}")

    return go(body)


_CONGRUENCE = {FieldAccess: "RC-Field", Invoke: "RC-Invk", New: "RC-New-Arg", Cast: "RC-Cast"}


def _first_non_value(args: Sequence[Expr]) -> int | None:
    for i, a in enumerate(args):
        if not is_value(a):
            return i
    return None


def _plug(node: Expr, index: int, child: Expr) -> Expr:
    if isinstance(node, FieldAccess):
        return FieldAccess(child, node.name, node.span)
    if isinstance(node, Cast):
        return Cast(node.cls, child, node.span)
    args = list(node.args)
    args[index] = child
    if isinstance(node, Invoke):
        return Invoke(node.method, tuple(args), node.span)
    return New(node.cls, tuple(args), node.span)


def step(
    ct: ClassTable,
    e: Expr,
    mode: Mode = Mode.SFMJ,
    selector: Selector | None = None,
) -> StepResult:
    """Perform one reduction step on the closed expression ``e``."""
    if is_value(e):
        return Normal(Value(e))

    # descend to the redex, remembering the way back up
    path: list[tuple[Expr, int]] = []
    node = e
    while True:
        if isinstance(node, Var):
            raise EvalError("FreeVariableEscape", f"free variable {node.name} during evaluation", node.span)
        if isinstance(node, (FieldAccess, Cast)):
            inner = node.obj if isinstance(node, FieldAccess) else node.expr
            if not is_value(inner):
                path.append((node, 0))
                node = inner
                continue
            break
        i = _first_non_value(node.args)
        if i is None:
            break  # Invoke with value arguments; New cannot get here
        path.append((node, i))
        node = node.args[i]

    branch = None
    arg_count = None
    if isinstance(node, FieldAccess):
        obj = node.obj
        names = [f for _, f in ct.fields(obj.cls)]
        if node.name not in names or len(names) != len(obj.args):
            raise EvalError("FieldIndexFailure", f"cannot project {node.name} from new {obj.cls}(...)", node.span)
        reduced: Expr = obj.args[names.index(node.name)]
        axiom = "R-Field"
    elif isinstance(node, Cast):
        if not ct.is_subtype(node.expr.cls, node.cls):
            return Normal(StuckCast(node))
        reduced = node.expr
        axiom = "R-Cast"
    else:
        classes = [a.cls for a in node.args]
        try:
            branch = resolve(ct, node.method, classes, mode, selector)
        except DispatchError as exc:
            raise EvalError("InternalDispatchFailure", f"{node.method}: {exc.message}", node.span) from exc
        arg_count = len(node.args)
        reduced = substitute(branch.body, branch.param_names, node.args)
        axiom = "R-Invk"

    for parent, i in reversed(path):
        reduced = _plug(parent, i, reduced)
    rule = _CONGRUENCE[type(path[0][0])] if path else axiom
    return Stepped(reduced, rule, axiom, branch, arg_count)


def evaluate(
    ct: ClassTable,
    e: Expr,
    fuel: int = DEFAULT_FUEL,
    mode: Mode = Mode.SFMJ,
    selector: Selector | None = None,
) -> Trace:
    """Reduce ``e`` until it is normal or ``fuel`` steps have been taken."""
    if fuel < 1:
        raise ValueError("fuel must be positive")
    trace = Trace(e, fuel=fuel)
    cur = e
    while True:
        r = step(ct, cur, mode, selector)
        if isinstance(r, Normal):
            trace.outcome = r.form
            return trace
        if len(trace.steps) == fuel:
            trace.outcome = FuelExhausted(fuel)
            return trace
        trace.steps.append(r)
        cur = r.expr


def free_vars(e: Expr) -> set[str]:
    return {n.name for n in subexprs(e) if isinstance(n, Var)}

"""Expression, method, class and program typing.

Program acceptance runs in a fixed order: class and method typing, then the
global well-formedness check over every overloaded method, then typing of the
main expression. Well-formedness needs the whole class table; there is no
per-class approximation of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Mapping, Sequence

from .core import (
    Cast,
    ClassTable,
    Expr,
    FieldAccess,
    Invoke,
    MethodBranch,
    New,
    SFMJError,
    Span,
    Var,
    is_value,
    pointwise_meet,
    subexprs,
)
from .dispatch import DispatchError, fj_lookup, lookup, select

TypeEnv = Mapping[str, str]


class TypeCheckError(SFMJError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    rule: str
    message: str
    span: Span | None = None
    file: str | None = None
    data: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def to_json(self) -> dict[str, Any]:
        return {
            "severity": self.severity,
            "rule": self.rule,
            "message": self.message,
            "file": self.file,
            "line": self.span.line if self.span else None,
            "col": self.span.col if self.span else None,
        }

    def __str__(self) -> str:
        where = self.file or "<input>"
        if self.span:
            where += f":{self.span}"
        return f"{where}: {self.severity}[{self.rule}]: {self.message}"


class ProgramRejected(SFMJError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        first = next((d for d in self.diagnostics if d.is_error), self.diagnostics[0])
        super().__init__(first.rule, f"program rejected with {len(self.errors)} error(s); first: {first.message}", first.span)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]


# -- expressions -----------------------------------------------------------


def type_expr(ct: ClassTable, env: TypeEnv, e: Expr, warnings: list[Diagnostic] | None = None) -> str:
    """Static type of ``e`` under ``env``.

    Stupid casts (between unrelated classes) are typed at their target and
    reported by appending a warning to ``warnings`` when given.
    """
    if isinstance(e, Var):
        if e.name not in env:
            raise TypeCheckError("UnboundVariable", f"variable {e.name} is not bound", e.span)
        return env[e.name]

    if isinstance(e, FieldAccess):
        c0 = type_expr(ct, env, e.obj, warnings)
        for t, f in ct.fields(c0):
            if f == e.name:
                return t
        raise TypeCheckError("UnknownField", f"class {c0} has no field {e.name}", e.span)

    if isinstance(e, Invoke):
        arg_types = [type_expr(ct, env, a, warnings) for a in e.args]
        branches = lookup(ct, e.method, arg_types)
        if not branches:
            raise TypeCheckError(
                "NoApplicableMethod", f"no branch of {e.method} applies to ({', '.join(arg_types)})", e.span
            )
        try:
            b = select(ct, branches)
        except DispatchError as exc:
            raise TypeCheckError("StaticAmbiguity", exc.message, e.span) from exc
        assert ct.subtypes(arg_types, b.param_types)
        return b.ret

    if isinstance(e, New):
        # values are shared between reducts; each one is checked once per table
        if e.__dict__.get("_typed_in") is ct:
            return e.cls
        if not ct.is_bound(e.cls):
            raise TypeCheckError("UnknownClass", f"class {e.cls} is not defined", e.span)
        flds = ct.fields(e.cls)
        if len(flds) != len(e.args):
            raise TypeCheckError(
                "ArityMismatch", f"new {e.cls} takes {len(flds)} argument(s), got {len(e.args)}", e.span
            )
        for (ft, fname), a in zip(flds, e.args):
            at = type_expr(ct, env, a, warnings)
            if not ct.is_subtype(at, ft):
                raise TypeCheckError(
                    "ArgumentNotSubtype", f"argument for {e.cls}.{fname} has type {at}, expected {ft}", e.span
                )
        if is_value(e):
            object.__setattr__(e, "_typed_in", ct)
        return e.cls

    if isinstance(e, Cast):
        if not ct.is_bound(e.cls):
            raise TypeCheckError("UnknownClass", f"class {e.cls} is not defined", e.span)
        d = type_expr(ct, env, e.expr, warnings)
        if not ct.is_subtype(d, e.cls) and not ct.is_subtype(e.cls, d) and warnings is not None:
            warnings.append(
                Diagnostic("warning", "StupidCast", f"cast from {d} to unrelated class {e.cls}", e.span)
            )
        return e.cls

    raise TypeError(f"not an expression: {e!r}")


def cast_rule(ct: ClassTable, source: str, target: str) -> str:
    """Which of the three cast typing rules applies."""
    if ct.is_subtype(source, target):
        return "T-UCast"
    if ct.is_subtype(target, source):
        return "T-DCast"
    return "T-SCast"


# -- methods and classes ----------------------------------------------------


def check_method(ct: ClassTable, owner: str, b: MethodBranch) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    env = {x: t for t, x in b.params}
    try:
        body_type = type_expr(ct, env, b.body, out)
    except TypeCheckError as exc:
        out.append(Diagnostic("error", "BodyTypeError", f"in {b.label()}: {exc.kind}: {exc.message}", exc.span or b.span))
    else:
        if not ct.is_subtype(body_type, b.ret):
            out.append(
                Diagnostic(
                    "error", "ReturnTypeNotSubtype",
                    f"{b.label()} body has type {body_type}, not a subtype of declared {b.ret}", b.span,
                )
            )
    if owner not in b.param_types:
        out.append(
            Diagnostic(
                "error", "OwnerNotAParameterType",
                f"{b.signature()} is declared in {owner}, which is not one of its parameter types", b.span,
            )
        )
    return out


def check_class(ct: ClassTable, c: str) -> list[Diagnostic]:
    decl = ct.decls[c]
    out: list[Diagnostic] = []
    inherited = ct.fields(decl.parent)
    k = decl.ctor
    expected = inherited + decl.fields
    if k.params != expected or k.super_args != tuple(f for _, f in inherited):
        shape = ", ".join(f"{t} {f}" for t, f in expected)
        out.append(
            Diagnostic("error", "MalformedConstructor", f"constructor of {c} must have parameters ({shape})", k.span or decl.span)
        )
    for b in decl.methods:
        out.extend(check_method(ct, c, b))
    return out


# -- overloaded methods -------------------------------------------------------


@dataclass(frozen=True)
class OverloadedSet:
    name: str
    branches: tuple[MethodBranch, ...]
    closure: bool = True

    def __contains__(self, b: object) -> bool:
        return b in self.branches

    def __len__(self) -> int:
        return len(self.branches)


def _related(ct: ClassTable, b1: MethodBranch, b2: MethodBranch, peers: Sequence[MethodBranch]) -> bool:
    if b1.arity != b2.arity:
        return False
    p1, p2 = b1.param_types, b2.param_types
    if pointwise_meet(ct, p1, p2) is not None:
        return True
    return any(
        d.arity == b1.arity and ct.subtypes(p1, d.param_types) and ct.subtypes(p2, d.param_types)
        for d in peers
    )


def overloaded_sets(ct: ClassTable) -> list[OverloadedSet]:
    """Partition every declared branch into overloaded methods.

    Two same-named branches belong together when some branch generalizes
    both or when both can apply to one argument tuple; sets are the
    connected components of that relation.
    """
    by_name: dict[str, list[MethodBranch]] = {}
    for b in ct.branches():
        by_name.setdefault(b.name, []).append(b)

    sets = []
    for name, bs in by_name.items():
        parent = list(range(len(bs)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in combinations(range(len(bs)), 2):
            if find(i) != find(j) and _related(ct, bs[i], bs[j], bs):
                parent[find(j)] = find(i)
        groups: dict[int, list[MethodBranch]] = {}
        for i, b in enumerate(bs):
            groups.setdefault(find(i), []).append(b)
        sets.extend(OverloadedSet(name, tuple(g)) for g in groups.values())
    return sets


def overloaded_set(ct: ClassTable, b: MethodBranch) -> OverloadedSet:
    for s in overloaded_sets(ct):
        if b in s:
            return s
    raise SFMJError("UnknownBranch", f"{b.label()} is not declared in the class table", b.span)


def check_wellformed(ct: ClassTable, s: OverloadedSet) -> list[Diagnostic]:
    """Pairwise ambiguity and return-type constraints over one overloaded set."""
    out: list[Diagnostic] = []
    sigs = {b.param_types for b in s.branches}
    reported_meets: set[tuple[str, ...]] = set()
    for b1, b2 in combinations(s.branches, 2):
        p1, p2 = b1.param_types, b2.param_types
        if len(p1) != len(p2):
            out.append(
                Diagnostic("error", "ArityClash", f"{b1.label()} and {b2.label()} overload {s.name} with different arities", b2.span)
            )
            continue
        if p1 == p2:
            out.append(
                Diagnostic(
                    "error", "DuplicateSignature",
                    f"{b1.label()} and {b2.label()} have identical parameter types", b2.span,
                    data={"witnesses": (b1, b2)},
                )
            )
            continue
        meet = pointwise_meet(ct, p1, p2)
        if meet is not None and meet not in sigs and meet not in reported_meets:
            reported_meets.add(meet)
            out.append(
                Diagnostic(
                    "error", "MissingMeetBranch",
                    f"{b1.label()} and {b2.label()} are ambiguous for arguments ({', '.join(meet)}); "
                    f"add a branch {s.name}({', '.join(meet)})",
                    b2.span,
                    data={"meet": meet, "witnesses": (b1, b2)},
                )
            )
        for lo, hi in ((b1, b2), (b2, b1)):
            if ct.subtypes(lo.param_types, hi.param_types) and not ct.is_subtype(lo.ret, hi.ret):
                out.append(
                    Diagnostic(
                        "error", "CovariantReturnViolation",
                        f"{lo.label()} specializes {hi.label()} but returns {lo.ret}, not a subtype of {hi.ret}",
                        lo.span,
                        data={"witnesses": (lo, hi)},
                    )
                )
    return out


def wellformedness_diagnostics(ct: ClassTable) -> list[Diagnostic]:
    out = []
    for s in overloaded_sets(ct):
        out.extend(check_wellformed(ct, s))
    return out


# -- programs -------------------------------------------------------------------


@dataclass(frozen=True)
class TypedProgram:
    table: ClassTable
    main: Expr
    main_type: str
    warnings: tuple[Diagnostic, ...] = ()


def check_program(ct: ClassTable, main: Expr, strict: bool = False, file: str | None = None) -> TypedProgram:
    """Accept ``(ct, main)`` or raise :class:`ProgramRejected` with every diagnostic.

    ``strict`` turns stupid-cast warnings into errors.
    """
    diags: list[Diagnostic] = []
    for c in ct.names():
        diags.extend(check_class(ct, c))
    diags.extend(wellformedness_diagnostics(ct))

    if not any(d.is_error for d in diags):
        try:
            main_type = type_expr(ct, {}, main, diags)
        except TypeCheckError as exc:
            diags.append(Diagnostic("error", exc.kind, exc.message, exc.span))

    if strict:
        diags = [
            Diagnostic("error", d.rule, d.message, d.span, d.file, data=d.data) if d.rule == "StupidCast" else d
            for d in diags
        ]
    if file is not None:
        diags = [Diagnostic(d.severity, d.rule, d.message, d.span, file, data=d.data) for d in diags]
    if any(d.is_error for d in diags):
        raise ProgramRejected(diags)
    return TypedProgram(ct, main, main_type, tuple(diags))


def fj_call_site_diagnostics(ct: ClassTable, main: Expr, file: str | None = None) -> list[Diagnostic]:
    """Call sites that single-dispatch lookup cannot resolve.

    Only meaningful after :func:`check_program` accepted the program, so the
    static argument types at every call site are known to exist.
    """
    sites: list[tuple[Mapping[str, str], Expr, str]] = []
    for b in ct.branches():
        sites.append(({x: t for t, x in b.params}, b.body, b.label()))
    sites.append(({}, main, "main expression"))

    out = []
    for env, e, where in sites:
        for node in subexprs(e):
            if not isinstance(node, Invoke):
                continue
            arg_types = [type_expr(ct, env, a) for a in node.args]
            if not fj_lookup(ct, node.method, arg_types):
                out.append(
                    Diagnostic(
                        "error", "NoApplicableMethod",
                        f"FJ dispatch finds no branch of {node.method} through the class chain of "
                        f"{arg_types[0]} (first argument of the call in {where})",
                        node.span,
                        file,
                    )
                )
    return out

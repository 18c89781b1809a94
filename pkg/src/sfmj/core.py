"""AST nodes, class tables and nominal subtyping.

Everything here is immutable once built. Structural equality of AST nodes
ignores source spans, so a reparsed program compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Union

OBJECT = "Object"


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class SFMJError(Exception):
    """Base for every error raised by this package.

    ``kind`` is a stable machine-readable category (``"CycleInExtends"``,
    ``"NoApplicableMethod"``...); the message is for humans only.
    """

    def __init__(self, kind: str, message: str, span: Span | None = None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.span = span


class ClassTableError(SFMJError):
    pass


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FieldAccess:
    obj: Expr
    name: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Invoke:
    method: str
    args: tuple[Expr, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class New:
    cls: str
    args: tuple[Expr, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cast:
    cls: str
    expr: Expr
    span: Span | None = field(default=None, compare=False, repr=False)


Expr = Union[Var, FieldAccess, Invoke, New, Cast]


def is_value(e: Expr) -> bool:
    if not isinstance(e, New):
        return False
    cached = e.__dict__.get("_is_value")
    if cached is None:
        # iterative: generated terms can nest deeply
        cached = True
        stack = list(e.args)
        while stack:
            node = stack.pop()
            if not isinstance(node, New):
                cached = False
                break
            known = node.__dict__.get("_is_value")
            if known is None:
                stack.extend(node.args)
            elif not known:
                cached = False
                break
        object.__setattr__(e, "_is_value", cached)
    return cached


def subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over ``e`` and all of its subexpressions."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, FieldAccess):
            stack.append(node.obj)
        elif isinstance(node, Cast):
            stack.append(node.expr)
        elif isinstance(node, (Invoke, New)):
            stack.extend(reversed(node.args))


def class_names_in(e: Expr) -> Iterator[str]:
    for node in subexprs(e):
        if isinstance(node, (New, Cast)):
            yield node.cls


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class MethodBranch:
    owner: str
    name: str
    params: tuple[tuple[str, str], ...]  # (type, variable)
    ret: str
    body: Expr
    span: Span | None = field(default=None, compare=False, repr=False)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.params)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(x for _, x in self.params)

    @property
    def arity(self) -> int:
        return len(self.params)

    def signature(self) -> str:
        return f"{self.name}({','.join(self.param_types)})"

    def label(self) -> str:
        return f"{self.owner}.{self.signature()}"


@dataclass(frozen=True)
class ConstructorDecl:
    name: str
    params: tuple[tuple[str, str], ...]
    super_args: tuple[str, ...]
    inits: tuple[tuple[str, str], ...]  # this.<field> = <param>
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ClassDecl:
    name: str
    parent: str
    fields: tuple[tuple[str, str], ...]  # (type, name)
    ctor: ConstructorDecl
    methods: tuple[MethodBranch, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)


def stylized_class(
    name: str,
    parent: str,
    inherited: Sequence[tuple[str, str]],
    own: Sequence[tuple[str, str]],
    methods: Sequence[MethodBranch] = (),
) -> ClassDecl:
    """Build a declaration whose constructor has the canonical FJ shape."""
    ctor = ConstructorDecl(
        name,
        tuple(inherited) + tuple(own),
        tuple(f for _, f in inherited),
        tuple((f, f) for _, f in own),
    )
    return ClassDecl(name, parent, tuple(own), ctor, tuple(methods))


# -- class table -------------------------------------------------------------


class ClassTable:
    """Validated, immutable map from class name to declaration.

    Build instances with :func:`bind_class_table`; the constructor assumes
    the invariants already hold.
    """

    def __init__(self, decls: Mapping[str, ClassDecl]):
        self.decls: Mapping[str, ClassDecl] = MappingProxyType(dict(decls))
        self._chains: dict[str, tuple[str, ...]] = {OBJECT: (OBJECT,)}
        for name in self.decls:
            chain = [name]
            while chain[-1] != OBJECT:
                chain.append(self.decls[chain[-1]].parent)
            self._chains[name] = tuple(chain)
        self._ancestors = {c: frozenset(ch) for c, ch in self._chains.items()}
        self._fields: dict[str, tuple[tuple[str, str], ...]] = {}

    def __repr__(self) -> str:
        return f"ClassTable({list(self.decls)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ClassTable) and dict(self.decls) == dict(other.decls)

    def __hash__(self) -> int:
        return hash(tuple(self.decls.values()))

    def names(self) -> list[str]:
        """Bound class names in declaration order, without Object."""
        return list(self.decls)

    def universe(self) -> list[str]:
        return [OBJECT, *self.decls]

    def is_bound(self, c: str) -> bool:
        return c == OBJECT or c in self.decls

    def _require(self, c: str) -> None:
        if not self.is_bound(c):
            raise ClassTableError("UnknownClass", f"class {c!r} is not defined")

    def parent(self, c: str) -> str | None:
        self._require(c)
        return None if c == OBJECT else self.decls[c].parent

    def chain(self, c: str) -> tuple[str, ...]:
        """``c`` followed by its superclasses, ending at Object."""
        self._require(c)
        return self._chains[c]

    def is_subtype(self, c: str, d: str) -> bool:
        anc = self._ancestors.get(c)
        if anc is None or d not in self._ancestors:
            self._require(c)
            self._require(d)
        return d in anc

    def subtypes(self, cs: Sequence[str], ds: Sequence[str]) -> bool:
        """Pointwise subtyping of two class sequences of equal length."""
        return len(cs) == len(ds) and all(self.is_subtype(c, d) for c, d in zip(cs, ds))

    def fields(self, c: str) -> tuple[tuple[str, str], ...]:
        self._require(c)
        if c == OBJECT:
            return ()
        cached = self._fields.get(c)
        if cached is None:
            decl = self.decls[c]
            cached = self.fields(decl.parent) + decl.fields
            self._fields[c] = cached
        return cached

    def branches(self) -> Iterator[MethodBranch]:
        """Every declared branch, in declaration order."""
        for decl in self.decls.values():
            yield from decl.methods

    def methods_in(self, c: str) -> tuple[MethodBranch, ...]:
        self._require(c)
        return () if c == OBJECT else self.decls[c].methods

    def with_methods(self, extra: Mapping[str, Sequence[MethodBranch]]) -> ClassTable:
        """Return a rebound table with branches appended to the named classes."""
        decls = []
        for decl in self.decls.values():
            more = tuple(extra.get(decl.name, ()))
            decls.append(ClassDecl(decl.name, decl.parent, decl.fields, decl.ctor, decl.methods + more, decl.span))
        return bind_class_table(decls)

    def without(self, *names: str) -> ClassTable:
        return bind_class_table([d for n, d in self.decls.items() if n not in names])


def pointwise_meet(ct: ClassTable, cs: Sequence[str], ds: Sequence[str]) -> tuple[str, ...] | None:
    """Greatest common lower bound of two class sequences, if one exists.

    With single inheritance two classes only have a common lower bound when
    one is a subclass of the other, so the meet is taken position by position.
    """
    if len(cs) != len(ds):
        raise SFMJError("LengthMismatch", f"cannot meet sequences of length {len(cs)} and {len(ds)}")
    out = []
    for c, d in zip(cs, ds):
        if ct.is_subtype(c, d):
            out.append(c)
        elif ct.is_subtype(d, c):
            out.append(d)
        else:
            return None
    return tuple(out)


def bind_class_table(decls: Iterable[ClassDecl]) -> ClassTable:
    """Validate declarations and build a :class:`ClassTable`.

    Raises :class:`ClassTableError` on the first violated invariant. Checks
    run in a fixed order (names, extends graph, references, fields, local
    member shape) so later checks can rely on earlier ones.
    """
    decls = list(decls)
    table: dict[str, ClassDecl] = {}
    for d in decls:
        if d.name == OBJECT:
            raise ClassTableError("ReservedName", "class Object is built in and cannot be redefined", d.span)
        if d.name in table:
            raise ClassTableError("DuplicateClass", f"class {d.name} is declared twice", d.span)
        table[d.name] = d

    def bound(c: str) -> bool:
        return c == OBJECT or c in table

    for d in decls:
        if not bound(d.parent):
            raise ClassTableError("UnknownClassReference", f"{d.name} extends unknown class {d.parent}", d.span)

    for d in decls:
        seen = {d.name}
        cur = d.parent
        while cur != OBJECT:
            if cur in seen:
                raise ClassTableError("CycleInExtends", f"class {d.name} is part of an inheritance cycle", d.span)
            seen.add(cur)
            cur = table[cur].parent

    for d in decls:
        refs = [t for t, _ in d.fields]
        refs += [t for t, _ in d.ctor.params]
        for b in d.methods:
            refs += [*b.param_types, b.ret, *class_names_in(b.body)]
        for r in refs:
            if not bound(r):
                raise ClassTableError("UnknownClassReference", f"{d.name} mentions unknown class {r}", d.span)

    inherited: dict[str, set[str]] = {OBJECT: set()}

    def all_field_names(c: str) -> set[str]:
        if c not in inherited:
            names = set(all_field_names(table[c].parent))
            names.update(f for _, f in table[c].fields)
            inherited[c] = names
        return inherited[c]

    for d in decls:
        above = all_field_names(d.parent)
        own: set[str] = set()
        for _, f in d.fields:
            if f in own:
                raise ClassTableError("FieldShadowing", f"field {f} declared twice in {d.name}", d.span)
            if f in above:
                raise ClassTableError("FieldShadowing", f"field {f} in {d.name} shadows an inherited field", d.span)
            own.add(f)

    for d in decls:
        _check_local_shape(d)

    return ClassTable(table)


def _check_local_shape(d: ClassDecl) -> None:
    k = d.ctor
    bad = ClassTableError
    if k.name != d.name:
        raise bad("MalformedConstructor", f"constructor {k.name} does not match class {d.name}", k.span or d.span)
    pnames = [x for _, x in k.params]
    if len(set(pnames)) != len(pnames):
        raise bad("MalformedConstructor", f"duplicate constructor parameter in {d.name}", k.span or d.span)
    own = [f for _, f in d.fields]
    if [f for f, _ in k.inits] != own or any(f != x for f, x in k.inits):
        raise bad("MalformedConstructor", f"{d.name} constructor must assign this.f = f for each declared field in order", k.span or d.span)
    if list(k.super_args) + own != pnames:
        raise bad("MalformedConstructor", f"{d.name} constructor parameters must be the super arguments followed by the declared fields", k.span or d.span)

    sigs: set[tuple[str, tuple[str, ...]]] = set()
    for b in d.methods:
        if b.owner != d.name:
            raise bad("MalformedMethod", f"branch {b.label()} is listed in class {d.name}", b.span)
        if not b.params:
            raise bad("MalformedMethod", f"method {b.name} in {d.name} has no parameters", b.span)
        if len(set(b.param_names)) != len(b.params):
            raise bad("DuplicateVariable", f"method {b.name} in {d.name} repeats a parameter name", b.span)
        key = (b.name, b.param_types)
        if key in sigs:
            raise bad("DuplicateMethod", f"{d.name} declares {b.signature()} twice", b.span)
        sigs.add(key)

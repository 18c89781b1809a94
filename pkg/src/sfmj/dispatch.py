"""Method lookup and branch selection.

Two strategies share one entry point, :func:`resolve`:

* ``Mode.SFMJ`` walks the superclass chain of *every* argument class and
  keeps all applicable branches, then picks the unique most specific one.
* ``Mode.FJ`` only walks the first argument's chain and stops at the first
  class declaring the method, as single-dispatch Java would.
"""

from __future__ import annotations

from enum import Enum
from typing import Callable, Sequence

from .core import OBJECT, ClassTable, MethodBranch, SFMJError

Selector = Callable[[Sequence[MethodBranch]], MethodBranch]


class Mode(str, Enum):
    SFMJ = "sfmj"
    FJ = "fj"


class DispatchError(SFMJError):
    """``EmptyBranchSet`` or ``AmbiguousDispatch``."""

    def __init__(self, kind: str, message: str, candidates: Sequence[MethodBranch] = ()):
        super().__init__(kind, message)
        self.candidates = tuple(candidates)


def applicable(ct: ClassTable, b: MethodBranch, args: Sequence[str]) -> bool:
    return ct.subtypes(args, b.param_types)


def lookup1(ct: ClassTable, m: str, args: Sequence[str], c: str) -> list[MethodBranch]:
    """Applicable branches named ``m`` declared in ``c`` or its superclasses.

    Unlike single-dispatch lookup the walk does not stop at the first hit:
    every generality level up to Object is collected, most derived first.
    """
    found = []
    for cls in ct.chain(c):
        if cls == OBJECT:
            break
        for b in ct.methods_in(cls):
            if b.name == m and applicable(ct, b, args):
                found.append(b)
    return found


def lookup(ct: ClassTable, m: str, args: Sequence[str]) -> list[MethodBranch]:
    """All branches of ``m`` applicable to argument classes ``args``.

    Concatenates :func:`lookup1` over each argument position. A branch
    reachable through several positions is kept once, at its first position.
    """
    out: list[MethodBranch] = []
    seen: set[MethodBranch] = set()
    for c in args:
        for b in lookup1(ct, m, args, c):
            if b not in seen:
                seen.add(b)
                out.append(b)
    return out


def select(ct: ClassTable, branches: Sequence[MethodBranch]) -> MethodBranch:
    """The branch whose parameter types are pointwise below every other's."""
    if not branches:
        raise DispatchError("EmptyBranchSet", "no applicable branch")
    minimal = [
        b for b in branches
        if all(ct.subtypes(b.param_types, o.param_types) for o in branches)
    ]
    if len(minimal) != 1:
        names = ", ".join(b.label() for b in branches)
        raise DispatchError("AmbiguousDispatch", f"no unique most specific branch among {names}", branches)
    return minimal[0]


def fj_lookup(ct: ClassTable, m: str, args: Sequence[str]) -> list[MethodBranch]:
    """Single-dispatch lookup through the first argument's class chain.

    The walk stops at the first class that declares any branch named ``m``;
    that class contributes its first applicable branch, or nothing.
    """
    if not args:
        raise SFMJError("LengthMismatch", "FJ lookup needs at least one argument")
    for cls in ct.chain(args[0]):
        if cls == OBJECT:
            break
        named = [b for b in ct.methods_in(cls) if b.name == m]
        if named:
            return [b for b in named if applicable(ct, b, args)][:1]
    return []


def fj_select(ct: ClassTable, branches: Sequence[MethodBranch]) -> MethodBranch:
    if not branches:
        raise DispatchError("EmptyBranchSet", "no applicable branch")
    return branches[0]


def resolve(
    ct: ClassTable,
    m: str,
    args: Sequence[str],
    mode: Mode = Mode.SFMJ,
    selector: Selector | None = None,
) -> MethodBranch:
    """``select(lookup(m, args))`` under the given strategy.

    ``selector`` replaces the selection step; it exists for mutation tests.
    """
    bs = fj_lookup(ct, m, args) if mode == Mode.FJ else lookup(ct, m, args)
    if not bs:
        raise DispatchError("EmptyBranchSet", f"no branch of {m} applies to ({', '.join(args)})")
    if selector is not None:
        return selector(bs)
    return fj_select(ct, bs) if mode == Mode.FJ else select(ct, bs)

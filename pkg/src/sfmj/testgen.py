"""Random programs, brute-force oracles and executable soundness properties.

The oracles here deliberately avoid :mod:`sfmj.dispatch` and the subtype
methods of :class:`~sfmj.core.ClassTable`: they rebuild the inheritance
relation from the raw declarations and compute applicable branch sets by
scanning every class, so they can cross-check the real implementation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .core import (
    OBJECT,
    Cast,
    ClassDecl,
    ClassTable,
    Expr,
    FieldAccess,
    Invoke,
    MethodBranch,
    New,
    SFMJError,
    Var,
    bind_class_table,
    stylized_class,
)
from .dispatch import DispatchError, Mode, Selector, lookup, select
from .evaluator import EvalError, FuelExhausted, StuckCast, Trace, Value, evaluate
from .typecheck import (
    ProgramRejected,
    TypeCheckError,
    check_program,
    type_expr,
    wellformedness_diagnostics,
)


class GenerationExhausted(SFMJError):
    def __init__(self, message: str):
        super().__init__("GenerationExhausted", message)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_classes: int = 6
    max_fields_per_class: int = 2
    max_branches: int = 8
    max_arity: int = 3
    max_expr_depth: int = 4
    allow_downcasts: bool = False
    meet_bias: float = 0.3  # share of specializations generated as incomparable pairs
    owner_policy: str = "any"  # "any" | "first": which parameter class owns a branch
    single_branch: bool = False  # one branch per method name
    max_method_names: int = 3

    def __post_init__(self) -> None:
        limits = {
            "max_classes": (0, 12),
            "max_fields_per_class": (0, 3),
            "max_branches": (0, 10),
            "max_arity": (1, 3),
            "max_expr_depth": (1, 6),
            "max_method_names": (1, 9),
        }
        for name, (lo, hi) in limits.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
        if self.owner_policy not in ("any", "first"):
            raise ValueError(f"unknown owner_policy {self.owner_policy!r}")


# -- generation -------------------------------------------------------------


def _method_index(name: str) -> int:
    return int(name[1:])


class _ExprGen:
    def __init__(
        self,
        rng: random.Random,
        ct: ClassTable,
        cfg: GenConfig,
        env: Mapping[str, str],
        callable_names: set[str],
    ):
        self.rng = rng
        self.ct = ct
        self.cfg = cfg
        self.env = dict(env)
        self.branches = [b for b in ct.branches() if b.name in callable_names]
        self.universe = ct.universe()

    def below(self, target: str) -> list[str]:
        return [c for c in self.universe if self.ct.is_subtype(c, target)]

    def minimal(self, target: str, _building: frozenset[str] = frozenset()) -> Expr:
        vars_ = [x for x, t in self.env.items() if self.ct.is_subtype(t, target)]
        if vars_:
            return Var(self.rng.choice(vars_))
        # generated tables order field types before their class; hand-written ones may not
        if target in _building:
            raise GenerationExhausted(f"class {target} cannot be constructed without an existing instance")
        inner = _building | {target}
        return New(target, tuple(self.minimal(t, inner) for t, _ in self.ct.fields(target)))

    def gen(self, target: str, depth: int) -> Expr:
        e = self._attempt(target, depth)
        try:
            t = type_expr(self.ct, self.env, e)
        except TypeCheckError:
            return self.minimal(target)
        return e if self.ct.is_subtype(t, target) else self.minimal(target)

    def _attempt(self, target: str, depth: int) -> Expr:
        rng, ct = self.rng, self.ct
        if depth <= 0:
            return self.minimal(target)
        options = ["new", "new"]
        if any(ct.is_subtype(t, target) for t in self.env.values()):
            options += ["var"] * 4
        if any(ct.is_subtype(b.ret, target) for b in self.branches):
            options += ["invoke"] * 3
        options += ["field", "upcast"]
        if self.cfg.allow_downcasts:
            options += ["downcast"] * 2
        kind = rng.choice(options)

        if kind == "var":
            return Var(rng.choice([x for x, t in self.env.items() if ct.is_subtype(t, target)]))
        if kind == "new":
            c = rng.choice(self.below(target))
            return New(c, tuple(self.gen(t, depth - 1) for t, _ in ct.fields(c)))
        if kind == "invoke":
            b = rng.choice([b for b in self.branches if ct.is_subtype(b.ret, target)])
            return Invoke(b.name, tuple(self.gen(t, depth - 1) for t in b.param_types))
        if kind == "field":
            cands = [
                (c, f) for c in ct.names() for t, f in ct.decls[c].fields if ct.is_subtype(t, target)
            ]
            if not cands:
                return self.minimal(target)
            c, f = rng.choice(cands)
            return FieldAccess(self.gen(c, depth - 1), f)
        if kind == "upcast":
            c = rng.choice(self.below(target))
            return Cast(c, self.gen(c, depth - 1))
        # downcast: static type of the operand is a strict superclass
        c = rng.choice(self.below(target))
        supers = ct.chain(c)[1:]
        if not supers:
            return self.minimal(target)
        return Cast(c, self.gen(rng.choice(supers), depth - 1))


def gen_expr(
    cfg: GenConfig,
    ct: ClassTable,
    target: str,
    env: Mapping[str, str] | None = None,
    rng: random.Random | None = None,
    callable_names: set[str] | None = None,
) -> Expr:
    """An expression whose static type is a subtype of ``target``."""
    if not ct.is_bound(target):
        raise GenerationExhausted(f"no expression of unknown class {target}")
    rng = rng or random.Random(cfg.seed)
    names = {b.name for b in ct.branches()} if callable_names is None else callable_names
    g = _ExprGen(rng, ct, cfg, env or {}, names)
    return g.gen(target, cfg.max_expr_depth)


@dataclass
class _Sig:
    name: str
    params: tuple[str, ...]
    owner: str
    ret: str


class _TableGen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng

    def classes(self) -> tuple[list[str], dict[str, str], dict[str, list[tuple[str, str]]]]:
        cfg, rng = self.cfg, self.rng
        n = 0 if cfg.max_classes == 0 else rng.randint(max(1, cfg.max_classes // 2), cfg.max_classes)
        names = [f"C{k}" for k in range(n)]
        parents: dict[str, str] = {}
        own: dict[str, list[tuple[str, str]]] = {}
        counter = itertools.count()
        for k, c in enumerate(names):
            parents[c] = rng.choice([OBJECT, *names[:k]])
            own[c] = [
                (rng.choice([OBJECT, *names[:k]]), f"f{next(counter)}")
                for _ in range(rng.randint(0, cfg.max_fields_per_class))
            ]
        return names, parents, own

    def signatures(self, names: list[str], parents: dict[str, str]) -> list[_Sig]:
        cfg, rng = self.cfg, self.rng
        if not names or cfg.max_branches == 0:
            return []
        universe = [OBJECT, *names]
        children: dict[str, list[str]] = {c: [] for c in universe}
        for c, p in parents.items():
            children[p].append(c)

        def strict_subs(c: str) -> list[str]:
            out, stack = [], list(children[c])
            while stack:
                s = stack.pop()
                out.append(s)
                stack.extend(children[s])
            return out

        def owner_for(params: tuple[str, ...]) -> str | None:
            if cfg.owner_policy == "first":
                return params[0] if params[0] != OBJECT else None
            users = [p for p in params if p != OBJECT]
            return rng.choice(users) if users else None

        sigs: list[_Sig] = []
        seen: set[tuple[str, tuple[str, ...]]] = set()

        def add(name: str, params: tuple[str, ...], ret: str) -> bool:
            owner = owner_for(params)
            if owner is None or (name, params) in seen:
                return False
            seen.add((name, params))
            sigs.append(_Sig(name, params, owner, ret))
            return True

        def fresh(name: str, arity: int) -> None:
            params = [rng.choice(names) if rng.random() < 0.8 else OBJECT for _ in range(arity)]
            if cfg.owner_policy == "first" or all(p == OBJECT for p in params):
                params[0] = rng.choice(names)
            add(name, tuple(params), rng.choice(universe))

        def special_ret(base: _Sig) -> str:
            if rng.random() < 0.85:
                return rng.choice([base.ret, *strict_subs(base.ret)])
            return rng.choice(universe)

        method_names = [f"m{i}" for i in range(rng.randint(1, cfg.max_method_names))]
        arity = {m: rng.randint(1, cfg.max_arity) for m in method_names}
        budget = rng.randint(len(method_names), max(len(method_names), cfg.max_branches))
        for m in method_names:
            fresh(m, arity[m])
        if cfg.single_branch:
            return sigs

        for _ in range(4 * cfg.max_branches):
            if len(sigs) >= budget:
                break
            roll = rng.random()
            if roll < 0.15:
                m = rng.choice(method_names)
                fresh(m, arity[m] if rng.random() < 0.8 else rng.randint(1, cfg.max_arity))
                continue
            base = rng.choice(sigs)
            spots = [i for i, p in enumerate(base.params) if strict_subs(p)]
            if not spots:
                continue
            if roll < 0.15 + cfg.meet_bias and len(spots) >= 2 and len(sigs) + 2 <= budget:
                i, j = rng.sample(spots, 2)
                for pos in (i, j):
                    ps = list(base.params)
                    ps[pos] = rng.choice(strict_subs(ps[pos]))
                    add(base.name, tuple(ps), special_ret(base))
                continue
            ps = list(base.params)
            for pos in rng.sample(spots, rng.randint(1, len(spots))):
                ps[pos] = rng.choice(strict_subs(ps[pos]))
            add(base.name, tuple(ps), special_ret(base))
        return sigs


def _assemble(
    names: list[str],
    parents: dict[str, str],
    own: dict[str, list[tuple[str, str]]],
    branches: Sequence[MethodBranch],
) -> ClassTable:
    decls: list[ClassDecl] = []
    all_fields: dict[str, list[tuple[str, str]]] = {OBJECT: []}
    for c in names:
        inherited = all_fields[parents[c]]
        all_fields[c] = inherited + own[c]
        mine = [b for b in branches if b.owner == c]
        decls.append(stylized_class(c, parents[c], inherited, own[c], mine))
    return bind_class_table(decls)


def _body_depth(cfg: GenConfig) -> int:
    # bodies are copied at every call; deep ones make terms grow exponentially
    return max(1, cfg.max_expr_depth // 2)


def _param_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def _with_bodies(ct_skel: ClassTable, sigs: Sequence[_Sig], cfg: GenConfig, rng: random.Random) -> list[MethodBranch]:
    out = []
    for s in sigs:
        params = tuple(zip(s.params, _param_names(len(s.params))))
        callable_names = {b.name for b in ct_skel.branches() if _method_index(b.name) < _method_index(s.name)}
        g = _ExprGen(rng, ct_skel, cfg, dict((x, t) for t, x in params), callable_names)
        body = g.gen(s.ret, _body_depth(cfg))
        out.append(MethodBranch(s.owner, s.name, params, s.ret, body))
    return out


def _skeleton(sigs: Sequence[_Sig]) -> list[MethodBranch]:
    # bodies are irrelevant while generating call sites; only signatures are consulted
    return [
        MethodBranch(s.owner, s.name, tuple(zip(s.params, _param_names(len(s.params)))), s.ret, Var("x0"))
        for s in sigs
    ]


def gen_table(cfg: GenConfig) -> ClassTable:
    """A valid random class table; not necessarily well-formed."""
    rng = random.Random(cfg.seed)
    tg = _TableGen(cfg, rng)
    names, parents, own = tg.classes()
    sigs = tg.signatures(names, parents)
    skel = _assemble(names, parents, own, _skeleton(sigs))
    return _assemble(names, parents, own, _with_bodies(skel, sigs, cfg, rng))


def _repair(ct: ClassTable, cfg: GenConfig, rng: random.Random, rounds: int = 8) -> ClassTable | None:
    """Add branches for missing meets until the table is well-formed, if possible."""
    for _ in range(rounds):
        diags = wellformedness_diagnostics(ct)
        if not diags:
            return ct
        if any(d.rule != "MissingMeetBranch" for d in diags):
            return None
        d = diags[0]
        meet: tuple[str, ...] = d.data["meet"]
        name = d.data["witnesses"][0].name
        peers = [b for b in ct.branches() if b.name == name and b.arity == len(meet)]
        uppers = [b.ret for b in peers if ct.subtypes(meet, b.param_types)]
        lowest = [r for r in uppers if all(ct.is_subtype(r, u) for u in uppers)]
        if not lowest:
            return None
        ret = lowest[0]
        if any(ct.subtypes(b.param_types, meet) and not ct.is_subtype(b.ret, ret) for b in peers):
            return None
        if cfg.owner_policy == "first":
            owner = meet[0] if meet[0] != OBJECT else None
        else:
            owner = rng.choice([c for c in meet if c != OBJECT])
        if owner is None:
            return None
        params = tuple(zip(meet, _param_names(len(meet))))
        callable_names = {b.name for b in ct.branches() if _method_index(b.name) < _method_index(name)}
        g = _ExprGen(rng, ct, cfg, {x: t for t, x in params}, callable_names)
        body = g.gen(ret, _body_depth(cfg))
        ct = ct.with_methods({owner: [MethodBranch(owner, name, params, ret, body)]})
    return ct if not wellformedness_diagnostics(ct) else None


def _sub_seed(seed: int, attempt: int) -> int:
    return seed if attempt == 0 else seed * 7919 + 1_000_003 * attempt


def gen_program(cfg: GenConfig) -> tuple[ClassTable, Expr]:
    """A random table and a closed main expression (neither necessarily checked)."""
    ct = gen_table(cfg)
    rng = random.Random(cfg.seed ^ 0x5F3759DF)
    target = rng.choice(ct.universe())
    return ct, gen_expr(cfg, ct, target, rng=rng)


def gen_wellformed_program(cfg: GenConfig, attempts: int = 200) -> tuple[ClassTable, Expr]:
    """A program accepted by :func:`check_program`, deterministic in ``cfg.seed``.

    Ill-formed tables are first repaired by adding branches for missing
    meets; tables that cannot be repaired are regenerated from a derived seed.
    """
    for attempt in range(attempts):
        sub = replace(cfg, seed=_sub_seed(cfg.seed, attempt))
        ct = gen_table(sub)
        rng = random.Random(sub.seed ^ 0x2545F491)
        fixed = _repair(ct, sub, rng)
        if fixed is None:
            continue
        target = rng.choice(fixed.universe())
        main = _main_expr(sub, fixed, target, rng)
        try:
            check_program(fixed, main)
        except ProgramRejected:
            continue
        return fixed, main
    raise GenerationExhausted(f"no well-formed program for seed {cfg.seed} in {attempts} attempts")


def _main_expr(cfg: GenConfig, ct: ClassTable, target: str, rng: random.Random) -> Expr:
    # prefer a top-level call so that most programs exercise dispatch
    branches = list(ct.branches())
    if branches and rng.random() < 0.7:
        b = rng.choice(branches)
        g = _ExprGen(rng, ct, cfg, {}, {x.name for x in branches})
        e = Invoke(b.name, tuple(g.gen(t, cfg.max_expr_depth - 1) for t in b.param_types))
        try:
            type_expr(ct, {}, e)
            return e
        except TypeCheckError:
            pass
    return gen_expr(cfg, ct, target, rng=rng)


# -- oracles -----------------------------------------------------------------


@dataclass(frozen=True)
class ConflictReport:
    method: str
    witness_args: tuple[str, ...]
    candidates: tuple[MethodBranch, ...]


class _RawHierarchy:
    """Subtyping recomputed from raw ``extends`` clauses."""

    def __init__(self, decls: Mapping[str, ClassDecl]):
        self.universe = [OBJECT, *decls]
        self.up: dict[str, set[str]] = {}
        for c in self.universe:
            seen = {c}
            cur = c
            while cur != OBJECT:
                cur = decls[cur].parent
                seen.add(cur)
            self.up[c] = seen
        self.branches = [b for d in decls.values() for b in d.methods]

    def sub(self, cs: Sequence[str], ds: Sequence[str]) -> bool:
        return len(cs) == len(ds) and all(d in self.up[c] for c, d in zip(cs, ds))


def oracle_ambiguity(ct: ClassTable) -> list[ConflictReport]:
    """Every (method, argument tuple) without a unique most specific branch."""
    raw = _RawHierarchy(ct.decls)
    by_name: dict[str, list[MethodBranch]] = {}
    for b in raw.branches:
        by_name.setdefault(b.name, []).append(b)
    reports = []
    for name, bs in by_name.items():
        for arity in sorted({b.arity for b in bs}):
            same = [b for b in bs if b.arity == arity]
            for args in itertools.product(raw.universe, repeat=arity):
                app = [b for b in same if raw.sub(args, b.param_types)]
                if not app:
                    continue
                least = [b for b in app if all(raw.sub(b.param_types, o.param_types) for o in app)]
                if len(least) != 1:
                    reports.append(ConflictReport(name, args, tuple(app)))
    return reports


def oracle_covariance(ct: ClassTable) -> list[tuple[MethodBranch, MethodBranch]]:
    """Pairs (lo, hi) where lo specializes hi but does not narrow its return type."""
    raw = _RawHierarchy(ct.decls)
    bad = []
    for lo in raw.branches:
        for hi in raw.branches:
            if lo is hi or lo.name != hi.name:
                continue
            if raw.sub(lo.param_types, hi.param_types) and hi.ret not in raw.up[lo.ret]:
                bad.append((lo, hi))
    return bad


def oracle_wellformed(ct: ClassTable) -> bool:
    return not oracle_ambiguity(ct) and not oracle_covariance(ct)


# -- properties ----------------------------------------------------------------


@dataclass
class Verdict:
    ok: bool
    violation: str | None = None
    outcome: str | None = None  # "value" | "stuck" | "fuel"
    steps: int = 0
    checked: int = 0
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def _outcome_name(trace: Trace) -> str:
    o = trace.outcome
    if isinstance(o, Value):
        return "value"
    if isinstance(o, StuckCast):
        return "stuck"
    assert isinstance(o, FuelExhausted)
    return "fuel"


def prop_subject_reduction(
    ct: ClassTable,
    e: Expr,
    fuel: int = 1000,
    mode: Mode = Mode.SFMJ,
    selector: Selector | None = None,
) -> Verdict:
    """Each reduct types at a subtype of its predecessor's type."""
    try:
        trace = evaluate(ct, e, fuel, mode, selector)
    except EvalError as exc:
        return Verdict(False, f"{exc.kind}: {exc.message}")
    prev = type_expr(ct, {}, e, [])
    for i, s in enumerate(trace.steps, 1):
        try:
            cur = type_expr(ct, {}, s.expr, [])
        except TypeCheckError as exc:
            return Verdict(False, f"step {i} ({s.rule}) is ill-typed: {exc.kind}: {exc.message}", steps=i)
        if not ct.is_subtype(cur, prev):
            return Verdict(False, f"step {i} ({s.rule}) has type {cur}, not a subtype of {prev}", steps=i)
        prev = cur
    return Verdict(True, outcome=_outcome_name(trace), steps=len(trace.steps))


def prop_progress(ct: ClassTable, e: Expr, fuel: int = 1000, mode: Mode = Mode.SFMJ) -> Verdict:
    """Evaluation ends in a value of the right type, a failed downcast, or runs out of fuel."""
    static = type_expr(ct, {}, e, [])
    try:
        trace = evaluate(ct, e, fuel, mode)
    except EvalError as exc:
        return Verdict(False, f"{exc.kind}: {exc.message}")
    for i, s in enumerate(trace.steps, 1):
        if s.axiom == "R-Invk" and (s.branch is None or s.branch.arity != s.arg_count):
            return Verdict(False, f"step {i}: R-Invk with mismatched arity", steps=i)
    outcome = _outcome_name(trace)
    if outcome == "value":
        vt = type_expr(ct, {}, trace.final)
        if not ct.is_subtype(vt, static):
            return Verdict(False, f"value of type {vt} is not a subtype of {static}", outcome, len(trace.steps))
    return Verdict(True, outcome=outcome, steps=len(trace.steps))


def prop_specificity(ct: ClassTable) -> Verdict:
    """More specific argument classes select a more specific branch."""
    universe = ct.universe()
    subs = {c: [d for d in universe if ct.is_subtype(d, c)] for c in universe}
    arities: dict[str, set[int]] = {}
    for b in ct.branches():
        arities.setdefault(b.name, set()).add(b.arity)
    checked = 0
    for name, ns in arities.items():
        for n in sorted(ns):
            chosen: dict[tuple[str, ...], MethodBranch | None] = {}
            for args in itertools.product(universe, repeat=n):
                bs = lookup(ct, name, args)
                if not bs:
                    chosen[args] = None
                    continue
                try:
                    chosen[args] = select(ct, bs)
                except DispatchError as exc:
                    return Verdict(False, f"{name}{args}: {exc.message}", checked=checked)
            for cs, b in chosen.items():
                if b is None:
                    continue
                for ds in itertools.product(*(subs[c] for c in cs)):
                    checked += 1
                    e = chosen[ds]
                    if e is None:
                        return Verdict(False, f"{name}{ds} has no branch although {name}{cs} does", checked=checked)
                    if not ct.subtypes(e.param_types, b.param_types) or not ct.is_subtype(e.ret, b.ret):
                        return Verdict(
                            False,
                            f"{name}{ds} selects {e.label()} which does not refine {b.label()} chosen for {cs}",
                            checked=checked,
                        )
    return Verdict(True, checked=checked)


def least_specific_selector(ct: ClassTable) -> Selector:
    """A deliberately wrong selector that picks the most general branch."""

    def pick(bs: Sequence[MethodBranch]) -> MethodBranch:
        for b in bs:
            if all(ct.subtypes(o.param_types, b.param_types) for o in bs):
                return b
        return bs[-1]

    return pick

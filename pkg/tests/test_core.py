import itertools

import pytest

from sfmj.core import (
    OBJECT,
    ClassTableError,
    ConstructorDecl,
    ClassDecl,
    MethodBranch,
    New,
    Var,
    bind_class_table,
    is_value,
    pointwise_meet,
    stylized_class,
)
from sfmj.testgen import GenConfig, gen_table

from conftest import load


def cls(name, parent=OBJECT, inherited=(), own=(), methods=()):
    return stylized_class(name, parent, list(inherited), list(own), list(methods))


def test_two_class_table():
    ct = bind_class_table([cls("A"), cls("A1", "A")])
    assert ct.names() == ["A", "A1"]
    assert ct.universe()[0] == OBJECT


def test_empty_table():
    ct = bind_class_table([])
    assert ct.names() == []
    assert ct.is_subtype(OBJECT, OBJECT)
    assert ct.fields(OBJECT) == ()


@pytest.mark.parametrize(
    "decls, kind",
    [
        ([cls("A", "A")], "CycleInExtends"),
        ([cls("A", "B"), cls("B", "A")], "CycleInExtends"),
        ([cls("A"), cls("A")], "DuplicateClass"),
        ([cls("Object")], "ReservedName"),
        ([cls("A", "Nope")], "UnknownClassReference"),
        ([cls("A", own=[("Ghost", "g")])], "UnknownClassReference"),
        ([cls("A", own=[(OBJECT, "f")]), cls("B", "A", inherited=[(OBJECT, "f")], own=[(OBJECT, "f")])], "FieldShadowing"),
    ],
)
def test_binding_errors(decls, kind):
    with pytest.raises(ClassTableError) as info:
        bind_class_table(decls)
    assert info.value.kind == kind


def test_malformed_constructor_shape():
    bad = ClassDecl("A", OBJECT, ((OBJECT, "f"),), ConstructorDecl("A", ((OBJECT, "f"),), (), ()), ())
    with pytest.raises(ClassTableError) as info:
        bind_class_table([bad])
    assert info.value.kind == "MalformedConstructor"


def test_duplicate_method_and_variable():
    m = MethodBranch("A", "m", (("A", "x"),), OBJECT, Var("x"))
    with pytest.raises(ClassTableError) as info:
        bind_class_table([cls("A", methods=[m, m])])
    assert info.value.kind == "DuplicateMethod"
    twice = MethodBranch("A", "m", (("A", "x"), ("A", "x")), OBJECT, Var("x"))
    with pytest.raises(ClassTableError) as info:
        bind_class_table([cls("A", methods=[twice])])
    assert info.value.kind == "DuplicateVariable"


def test_subtyping_on_ct1(ct1):
    assert ct1.is_subtype("A1", "A")
    assert ct1.is_subtype("A", "A")
    assert not ct1.is_subtype("A1", "B")
    assert not ct1.is_subtype("A", "A1")


def test_unknown_class_in_subtype(ct1):
    with pytest.raises(ClassTableError):
        ct1.is_subtype("Nope", "A")


def test_fields_pair_and_triple():
    _, ct = load("pairs")
    assert ct.fields("Pair") == (("A", "fst"), ("B", "snd"))
    assert ct.fields("Triple") == (("A", "fst"), ("B", "snd"), ("C", "thd"))
    assert ct.fields(OBJECT) == ()


def test_pointwise_meet(ct1):
    assert pointwise_meet(ct1, ["A1", "B"], ["A", "B1"]) == ("A1", "B1")
    assert pointwise_meet(ct1, ["A", "B"], ["A", "B"]) == ("A", "B")
    assert pointwise_meet(ct1, ["A1", "B"], ["B1", "A"]) is None


def test_pointwise_meet_length_mismatch(ct1):
    with pytest.raises(Exception) as info:
        pointwise_meet(ct1, ["A"], ["A", "B"])
    assert getattr(info.value, "kind", None) == "LengthMismatch"


def test_is_value():
    assert is_value(New("A", (New(OBJECT, ()),)))
    assert not is_value(New("A", (Var("x"),)))


@pytest.mark.parametrize("seed", range(40))
def test_subtype_is_a_partial_order(seed):
    ct = gen_table(GenConfig(seed=seed, max_classes=12))
    u = ct.universe()
    for c in u:
        assert ct.is_subtype(c, c)
        assert ct.is_subtype(c, OBJECT)
    for a, b, c in itertools.product(u, repeat=3):
        if ct.is_subtype(a, b) and ct.is_subtype(b, c):
            assert ct.is_subtype(a, c)
    for a, b in itertools.product(u, repeat=2):
        if a != b:
            assert not (ct.is_subtype(a, b) and ct.is_subtype(b, a))


@pytest.mark.parametrize("seed", range(40))
def test_fields_extend_parent(seed):
    ct = gen_table(GenConfig(seed=seed, max_classes=12, max_fields_per_class=3))
    for c in ct.names():
        parent = ct.fields(ct.parent(c))
        assert ct.fields(c)[: len(parent)] == parent

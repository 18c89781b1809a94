import itertools

import pytest

from sfmj.dispatch import DispatchError, Mode, fj_lookup, fj_select, lookup, lookup1, resolve, select
from sfmj.testgen import GenConfig, gen_table, gen_wellformed_program

from conftest import load


def labels(bs):
    return {b.label() for b in bs}


def branch(ct, label):
    (b,) = [b for b in ct.branches() if b.label() == label]
    return b


def test_lookup_examples(ct1):
    assert labels(lookup(ct1, "m", ["A1", "B1"])) == {"A.m(A,B)", "A1.m(A1,B)", "B1.m(A,B1)"}
    assert labels(lookup(ct1, "m", ["A", "B"])) == {"A.m(A,B)"}
    assert lookup(ct1, "m", ["Object"]) == []


def test_lookup_has_no_duplicates(ct1):
    found = lookup(ct1, "m", ["A1", "B1"])
    assert len(found) == len(set(map(id, found)))


def test_lookup1_examples(ct1):
    assert labels(lookup1(ct1, "m", ["A1", "B1"], "A1")) == {"A1.m(A1,B)", "A.m(A,B)"}
    assert labels(lookup1(ct1, "m", ["A", "B"], "A1")) == {"A.m(A,B)"}
    assert lookup1(ct1, "m", ["A1", "B1"], "Object") == []


def test_select_examples(ct1):
    a, a1, b1 = (branch(ct1, x) for x in ("A.m(A,B)", "A1.m(A1,B)", "B1.m(A,B1)"))
    assert select(ct1, [a]) is a
    assert select(ct1, [a, a1]) is a1
    with pytest.raises(DispatchError) as info:
        select(ct1, [a1, b1, a])
    assert info.value.kind == "AmbiguousDispatch"
    with pytest.raises(DispatchError) as info:
        select(ct1, [])
    assert info.value.kind == "EmptyBranchSet"


def test_fj_lookup_examples(ct2):
    assert labels(fj_lookup(ct2, "transaction", ["CharityShop", "Item", "Customer"])) == {
        "CharityShop.transaction(CharityShop,Item,Customer)"
    }
    assert fj_lookup(ct2, "transaction", ["Shop", "Item", "Customer"]) == []
    assert fj_lookup(ct2, "transaction", ["Object", "Object"]) == []


def test_fj_select_takes_head(ct1):
    a = branch(ct1, "A.m(A,B)")
    assert fj_select(ct1, [a]) is a


def test_resolve_modes(ct2):
    args = ["CharityShop", "Item", "Customer"]
    assert resolve(ct2, "transaction", args).owner == "CharityShop"
    assert resolve(ct2, "transaction", args, Mode.FJ).owner == "CharityShop"
    assert resolve(ct2, "transaction", ["Shop", "Item", "Customer"]).owner == "Item"
    with pytest.raises(DispatchError) as info:
        resolve(ct2, "transaction", ["Shop", "Item", "Customer"], Mode.FJ)
    assert info.value.kind == "EmptyBranchSet"


def test_meet_branch_wins():
    _, ct = load("ct1_meet")
    assert resolve(ct, "m", ["A1", "B1"]).param_types == ("A1", "B1")


@pytest.mark.parametrize("seed", range(30))
def test_lookup_is_monotone(seed):
    ct = gen_table(GenConfig(seed=seed, max_classes=5, max_arity=2))
    u = ct.universe()
    for name in {b.name for b in ct.branches()}:
        for n in {b.arity for b in ct.branches() if b.name == name}:
            for cs in itertools.product(u, repeat=n):
                base = set(map(id, lookup(ct, name, cs)))
                for ds in itertools.product(u, repeat=n):
                    if ct.subtypes(ds, cs):
                        assert base <= set(map(id, lookup(ct, name, ds)))


@pytest.mark.parametrize("seed", range(30))
def test_select_unique_on_wellformed_tables(seed):
    ct, _ = gen_wellformed_program(GenConfig(seed=seed, max_classes=5))
    for name in {b.name for b in ct.branches()}:
        for n in {b.arity for b in ct.branches() if b.name == name}:
            for args in itertools.product(ct.universe(), repeat=n):
                bs = lookup(ct, name, args)
                if bs:
                    select(ct, bs)

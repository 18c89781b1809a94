"""Every fixture under corpus/ against its .expected.json sidecar."""

import pytest

from sfmj.evaluator import FuelExhausted, StuckCast, Value, evaluate
from sfmj.parser import pretty
from sfmj.testgen import oracle_wellformed, prop_progress, prop_subject_reduction
from sfmj.typecheck import ProgramRejected, check_program

from conftest import expected, fixture_names, load

FUEL = 500


@pytest.mark.parametrize("name", fixture_names())
def test_fixture(name):
    want = expected(name)
    prog, ct = load(name)
    if want["check"] == "rejected":
        with pytest.raises(ProgramRejected) as info:
            check_program(ct, prog.main)
        assert want["rule"] in {d.rule for d in info.value.errors}
        assert not oracle_wellformed(ct)
        return
    typed = check_program(ct, prog.main)
    assert typed.main_type == want["type"]
    trace = evaluate(ct, prog.main, FUEL)
    kind = {Value: "value", StuckCast: "stuck", FuelExhausted: "fuel"}[type(trace.outcome)]
    assert kind == want["outcome"]
    if kind != "fuel":
        assert pretty(trace.outcome.expr) == want["value"]


@pytest.mark.parametrize("name", [n for n in fixture_names() if expected(n)["check"] == "ok"])
def test_fixture_properties(name):
    prog, ct = load(name)
    assert prop_subject_reduction(ct, prog.main, FUEL)
    assert prop_progress(ct, prog.main, FUEL)
    assert oracle_wellformed(ct)

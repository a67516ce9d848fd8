import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from relaxmap.cli import expectations
from relaxmap.enumerate import behaviors, enumerate_executions, included, outcome_allowed
from relaxmap.errors import BudgetExceeded
from relaxmap.litmus import parse, parse_file
from relaxmap.models import ModelId, check
from relaxmap.randprog import random_program


def test_corpus_expectations(corpus_dir):
    n = 0
    for f in sorted(corpus_dir.glob("*.lit")):
        p = parse_file(f)
        for model, want in expectations(f):
            got = outcome_allowed(p, ModelId.parse(model))
            assert got == (want == "allowed"), (f.name, model)
            n += 1
    assert n >= 25


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sc_matches_interleavings_with_branches(seed):
    p = random_program(random.Random(seed), "X86", max_events=6)
    assert behaviors(p, ModelId.SC) == oracles.sc_simulate(p)
    assert behaviors(p, ModelId.X86) == oracles.tso_simulate(p)


def test_cas_failure_branch():
    p = parse("arch x86\nthread P0 { a = rmw(X, 1, 2) }")
    (b,) = behaviors(p, ModelId.X86)
    assert b.reg_map() == {("P0", "a"): 0} and b.mem_map() == {"X": 0}


def test_fetch_add():
    p = parse("arch x86\nthread P0 { a = rmw(X, 2) }\nthread P1 { b = rmw(X, 3) }")
    assert {b.mem_map()["X"] for b in behaviors(p, ModelId.SC)} == {5}


def test_budget_is_a_hard_error():
    p = parse("arch armv8\nthread P0 { X = 1; a = Y }\nthread P1 { Y = 1; b = X }")
    with pytest.raises(BudgetExceeded):
        behaviors(p, ModelId.ARMV8, max_candidates=2)


def test_strict_mode_distinguishes_coherence():
    p = parse("arch x86\nthread P0 { X = 1 }\nthread P1 { X = 1 }")
    loose = behaviors(p, ModelId.SC)
    strict = behaviors(p, ModelId.SC, strict=True)
    assert len(loose) == 1 and len(strict) == 2
    assert all(b.co for b in strict)


def test_enumerated_executions_are_consistent():
    p = parse("arch armv8\nthread P0 { X = 1; a = Y }\nthread P1 { Y = 1; b = X }")
    xs = list(enumerate_executions(p, ModelId.ARMV8))
    assert xs and all(check(ModelId.ARMV8, x) for x in xs)


def test_included_reports_witness():
    a = behaviors(parse("arch x86\nthread P0 { X = 1 }"), ModelId.SC)
    b = behaviors(parse("arch x86\nthread P0 { X = 2 }"), ModelId.SC)
    ok, w = included(a, b)
    assert not ok and w in a

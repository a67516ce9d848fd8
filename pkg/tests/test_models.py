import random

from hypothesis import assume, given, settings, strategies as st

import oracles
from relaxmap.enumerate import behaviors, candidate_executions
from relaxmap.errors import BudgetExceeded
from relaxmap.exec import execution_from_text
from relaxmap.litmus import parse
from relaxmap.models import (ModelId, armv7_ppo, axioms, check, check_sc, check_x86a,
                             solve_mo, witness_valid)
from relaxmap.randprog import random_program

from test_exec import SB


def test_sb_execution():
    x = execution_from_text(SB)
    v = check_sc(x)
    assert not v and v.axiom is not None
    assert solve_mo(x) is not None and check_x86a(x)
    assert check(ModelId.ARMV8, x) and check(ModelId.ARMV7, x)


def test_witness_names_a_real_violation():
    x = execution_from_text(SB)
    v = check_sc(x)
    rel = {name: (kind, r) for name, kind, r in axioms(ModelId.SC, x)}
    kind, r = rel[v.axiom]
    assert witness_valid(kind, r, v.witness)


def test_model_parse_and_rank():
    assert ModelId.parse("armv7-mca") is ModelId.ARMV7MCA
    assert ModelId.SC.stronger_than(ModelId.X86)
    assert ModelId.ARMV8.stronger_than(ModelId.ARMV7MCA)
    assert not ModelId.X86.stronger_than(ModelId.X86A)


def _safe(p, m):
    try:
        return behaviors(p, m)
    except BudgetExceeded:
        assume(False)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arm_hierarchy(seed):
    p = random_program(random.Random(seed), "ARMV7", max_events=6)
    sets = [_safe(p, m) for m in (ModelId.SC, ModelId.ARMV8, ModelId.ARMV7MCA, ModelId.ARMV7)]
    for stronger, weaker in zip(sets, sets[1:]):
        assert stronger <= weaker


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sc_within_x86(seed):
    p = random_program(random.Random(seed), "X86", max_events=6)
    sc, x86 = _safe(p, ModelId.SC), _safe(p, ModelId.X86)
    assert sc <= x86 == _safe(p, ModelId.X86A)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_ppo_against_path_oracle(seed):
    rng = random.Random(seed)
    p = random_program(rng, "ARMV7", max_events=7)
    for k, (x, _) in enumerate(candidate_executions(p, ModelId.ARMV7)):
        assert set(armv7_ppo(x).pairs()) == oracles.ppo_paths_oracle(x)
        if k > 5:
            break


def test_mp_with_barriers():
    p = parse("""arch armv8
thread P0 { X = 1; dmbst; Y = 1 }
thread P1 { a = Y; dmbld; b = X }
exists (P1:a=1 /\\ P1:b=0)""")
    assert not behaviors(p, ModelId.ARMV8).satisfying(p.outcome)
    weak = parse("""arch armv8
thread P0 { X = 1; Y = 1 }
thread P1 { a = Y; b = X }
exists (P1:a=1 /\\ P1:b=0)""")
    assert behaviors(weak, ModelId.ARMV8).satisfying(weak.outcome)

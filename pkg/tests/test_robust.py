import json

import pytest

from relaxmap import robust
from relaxmap.enumerate import behaviors
from relaxmap.errors import UnsupportedPair
from relaxmap.litmus import parse, parse_file
from relaxmap.models import ModelId

SC_X86 = robust.RobustPair(ModelId.SC, ModelId.X86)


def test_pair_normalisation_and_support():
    assert SC_X86.k == ModelId.X86A
    with pytest.raises(UnsupportedPair):
        robust.RobustPair(ModelId.ARMV7, ModelId.SC)


def test_sb_reports(corpus_dir):
    assert robust.check_robust(parse_file(corpus_dir / "sb_mfence.lit"), SC_X86).robust
    rep = robust.check_robust(parse_file(corpus_dir / "sb.lit"), SC_X86)
    assert not rep.robust and len(rep.offending) == 2
    doc = json.loads(rep.to_json())
    assert doc["robust"] is False and doc["offending"][0]["thread"] == 0


def test_enforce_inserts_mfence_before_load(corpus_dir):
    p = parse_file(corpus_dir / "sb.lit")
    q, rep = robust.enforce_robust(p, SC_X86)
    assert [str(i) for i in q.threads[0].body] == ["X = 1", "mfence", "r1 = Y"]
    assert robust.check_robust(q, SC_X86).robust
    assert behaviors(q, ModelId.X86A) == behaviors(q, ModelId.SC)


def test_failed_cas_is_not_a_barrier():
    p = parse("""arch x86
thread P0 { X = 1; a = rmw(Z, 1, 2); b = Y }
thread P1 { Y = 1; c = rmw(Z, 1, 2); d = X }""")
    assert not robust.check_robust(p, SC_X86).robust
    assert not robust.semantic_robust_oracle(p, SC_X86)
    fa = parse("""arch x86
thread P0 { X = 1; a = rmw(Z, 1); b = Y }
thread P1 { Y = 1; c = rmw(Z, 1); d = X }""")
    assert robust.check_robust(fa, SC_X86).robust


def test_armv8_acquire_release():
    pair = robust.RobustPair(ModelId.SC, ModelId.ARMV8)
    p = parse("""arch armv8
thread P0 { X = 1 @rel; a = Y @acq }
thread P1 { Y = 1 @rel; b = X @acq }""")
    assert robust.check_robust(p, pair).robust
    assert robust.semantic_robust_oracle(p, pair)


def test_armv8_enforcement_uses_dmbld_after_loads():
    pair = robust.RobustPair(ModelId.SC, ModelId.ARMV8)
    p = parse("""arch armv8
thread P0 { a = X; Y = 1 }
thread P1 { b = Y; X = 1 }""")
    q, rep = robust.enforce_robust(p, pair)
    assert [str(i) for i in q.threads[0].body] == ["a = X", "dmbld", "Y = 1"]
    assert robust.semantic_robust_oracle(q, pair)


def test_ppo_only_program_not_robust(corpus_dir):
    p = parse_file(corpus_dir / "ppo_cycle_v7.lit")
    assert not robust.check_robust(p, robust.RobustPair(ModelId.SC, ModelId.ARMV7)).robust


def test_x86a_against_armv8_ignores_store_load():
    pair = robust.RobustPair(ModelId.X86A, ModelId.ARMV8)
    p = parse("""arch armv8
thread P0 { X = 1; dmbst; a = Y }
thread P1 { Y = 1; dmbst; b = X }""")
    assert robust.check_robust(p, pair).robust


def test_static_false_positive_is_allowed(corpus_dir):
    p = parse_file(corpus_dir / "iriw_addr.lit")
    pair = robust.RobustPair(ModelId.SC, ModelId.ARMV8)
    assert not robust.check_robust(p, pair).robust
    assert robust.semantic_robust_oracle(p, pair)


def test_wrong_arch():
    with pytest.raises(UnsupportedPair):
        robust.check_robust(parse("arch armv8\nthread P0 { a = X }"), SC_X86)

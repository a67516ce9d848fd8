import random

import pytest
from hypothesis import given, settings, strategies as st

from relaxmap.errors import ArchMismatch, LitmusSyntaxError, LoopDetected, UnresolvedLabel
from relaxmap.enumerate import behaviors
from relaxmap.litmus import (BinOp, Const, Loc, Reg, derive_deps, emit, eval_expr, mayalias,
                             mustalias, parse, parse_file, thread_cfg)
from relaxmap.models import ModelId
from relaxmap.randprog import random_program

DEP_PROG = """arch armv8
thread P0 { a = X; Y[a] = 1; Z = a; if a == 1 goto L; W = 1; L: b = V; if b == b goto M; M: isb; c = U }
"""


def test_corpus_roundtrip(corpus_dir):
    for f in corpus_dir.glob("*.lit"):
        p = parse_file(f)
        assert parse(emit(p)) == p, f.name


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["X86", "ARMV8", "ARMV7"]), st.booleans())
def test_random_roundtrip(seed, arch, c11):
    p = random_program(random.Random(seed), arch, c11=c11)
    assert parse(emit(p)) == p


def test_flavors_and_annotations():
    p = parse("arch armv8\nthread P0 { r = X @acq; Y = 1 @rel @@sc; s = rmw(Z, 0, 1) @acq }")
    a, b, c = p.threads[0].body
    assert (a.flavor, b.flavor, b.c11, c.flavor) == ("acq", "rel", "sc", "acq")


def test_exists_clause():
    p = parse("arch x86\nthread P0 { r = X }\nexists (P0:r=1 /\\ X=0)")
    assert p.outcome.holds({("P0", "r"): 1}, {"X": 0})
    assert not p.outcome.holds({("P0", "r"): 0}, {"X": 0})


def test_syntax_error_has_position():
    with pytest.raises(LitmusSyntaxError) as e:
        parse("arch x86\nthread P0 { r = = X }")
    assert e.value.line == 2


def test_arch_legality():
    with pytest.raises(ArchMismatch):
        parse("arch armv8\nthread P0 { mfence }")
    with pytest.raises(ArchMismatch):
        parse("arch x86\nthread P0 { X = 1 @rel }")


def test_unresolved_label():
    with pytest.raises(UnresolvedLabel):
        parse("arch x86\nthread P0 { r = X; if r == 1 goto Nowhere }")


def test_backward_branch_is_rejected_by_enumeration():
    p = parse("arch x86\nthread P0 { L: r = X; if r == 0 goto L }")
    with pytest.raises(LoopDetected):
        behaviors(p, ModelId.SC)


def test_dependencies():
    d = derive_deps(parse(DEP_PROG))
    assert d.addr[0] == {(0, 1)}
    assert d.data[0] == {(0, 2)}
    assert (0, 4) in d.ctrl[0]
    # isb after the always-taken branch on b orders c = U after both loads
    assert d.ctrl_isb[0] == {(0, 10), (6, 10)}


def test_cfg_edges():
    cfg = thread_cfg(parse(DEP_PROG).threads[0])
    assert (3, 5) in cfg.edges and (3, 4) in cfg.edges
    assert cfg.succ(3) == [4, 5]


def test_aliasing():
    x0, xa = Loc("X", Const(0)), Loc("X", Reg("a"))
    assert mayalias(x0, xa) and not mustalias(x0, xa)
    assert mustalias(Loc("X", BinOp("*", Reg("a"), Const(0))), x0)
    assert not mayalias(Loc("X"), Loc("Y"))


def test_eval_expr():
    e = BinOp("+", BinOp("*", Reg("a"), Const(3)), Const(1))
    assert eval_expr(e, {"a": 2}) == 7
    assert eval_expr(BinOp("==", Reg("a"), Reg("a")), {"a": 5}) == 1

import pytest

from relaxmap import fenceopt
from relaxmap.errors import NodeNotInCfg, NotAFence
from relaxmap.fenceopt import (block, eliminate_fences, fdelete, fweaken, get_nfs, mpairs, opath,
                               reach, reachwo)
from relaxmap.litmus import parse, thread_cfg
from relaxmap.mapping import get_scheme, map_program


def cfg_of(src):
    return thread_cfg(parse(src).threads[0])


def body(p):
    return [str(i) for i in p.threads[0].body]


BRANCHY = "arch armv8\nthread P0 { a = X; if a == 1 goto L; dmbfull; L: b = Y }"


def test_reachability():
    cfg = cfg_of(BRANCHY)
    assert reach(cfg, 0, 4)
    assert reachwo(cfg, 0, 4, {2})            # the branch skips the fence
    assert opath(cfg, 0, 2, 4)
    assert not reach(cfg, 4, 0)
    with pytest.raises(NodeNotInCfg):
        reach(cfg, 0, 99)


def test_block_removes_nodes():
    cfg = block(cfg_of(BRANCHY), {1})
    assert 1 not in cfg.vertices and not reach(cfg, 0, 4)


def test_nfs_keeps_a_covering_fence():
    cfg = cfg_of("arch armv8\nthread P0 { X = 1; dmbfull; dmbfull; a = Y }")
    pairs = mpairs(cfg, {"W"}, {"R"}).diffloc()
    keep = get_nfs(cfg, pairs, {1, 2})
    assert len(keep) == 1


def test_fdelete_and_fweaken():
    cfg = cfg_of("arch armv8\nthread P0 { X = 1; dmbfull; a = Y }")
    assert [str(i) for i in fdelete(cfg, {1}).to_thread().body] == ["X = 1", "a = Y"]
    assert [str(i) for i in fweaken(cfg, {1}).to_thread().body] == ["X = 1", "dmbld", "dmbst",
                                                                     "a = Y"]
    with pytest.raises(NotAFence):
        fdelete(cfg, {0})


def test_x86_chain():
    v8 = map_program(parse("arch x86\nthread P0 { r = X; mfence; Y = 1 }"), get_scheme("x86", "armv8"))
    out, led = eliminate_fences(v8, "x86")
    assert body(out) == ["r = X", "dmbld", "Y = 1"]
    assert led.deleted


def test_armv7_duplicate_dmb():
    v7 = map_program(parse("arch armv8\nthread P0 { r = X; Y = 1 @rel; Z = 1 }"),
                     get_scheme("armv8", "armv7"))
    assert body(v7).count("dmb") == 3
    out, led = eliminate_fences(v7)
    assert body(out).count("dmb") == 2 and len(led.deleted) == 1


def test_x86_mfence_after_rmw():
    out, _ = eliminate_fences(parse("arch x86\nthread P0 { a = rmw(X, 1); mfence; b = Y }"))
    assert body(out) == ["a = rmw(X, 1)", "b = Y"]


def test_x86_mfence_after_cas_is_kept():
    # a failed CAS is only a read, so the store before it stays unordered without the fence
    src = "arch x86\nthread P0 { Z = 1; a = rmw(X, 0, 1); mfence; b = Y }"
    out, _ = eliminate_fences(parse(src))
    assert "mfence" in body(out)


def test_x86_store_store_fence_goes():
    out, _ = eliminate_fences(parse("arch x86\nthread P0 { X = 1; mfence; Y = 2 }"))
    assert body(out) == ["X = 1", "Y = 2"]


def test_release_neighbour_keeps_fence():
    src = "arch armv8\nthread P0 { X = 1; dmbfull; Y = 1 @rel }"
    out, led = eliminate_fences(parse(src), "x86")
    assert "dmbfull" in body(out)


def test_ledger_text():
    p = parse("arch x86\nthread P0 { X = 1; mfence; a = Y; mfence; Z = 1 }")
    _, led = eliminate_fences(p)
    text = fenceopt.ledger_text(p, led)
    assert "kept" in text and "deleted" in text

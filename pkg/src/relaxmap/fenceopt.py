"""Redundant fence elimination and weakening over per-thread control-flow graphs."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from . import litmus as L
from .errors import NodeNotInCfg, NotAFence
from .litmus import FENCE, LOAD, RMW, STORE, Cfg, Program, mustalias, thread_cfg

FenceSet = frozenset

# ---------------------------------------------------------------- node classes

ARM8_W = frozenset({"W", "L", "U"})
ARM8_R = frozenset({"R", "A", "U"})


def node_class(cfg: Cfg, n: int) -> Optional[str]:
    """R/A/W/L/U for accesses, the fence kind for fences, None otherwise."""
    ins = cfg.instrs[n]
    if ins.kind == LOAD:
        return "A" if ins.flavor == "acq" else "R"
    if ins.kind == STORE:
        return "L" if ins.flavor == "rel" else "W"
    if ins.kind == RMW:
        return "U"
    if ins.kind == FENCE:
        return ins.flavor
    return None


def never_fails(cfg: Cfg, n: int) -> bool:
    """An rmw that always writes (fetch-add); a CAS may fail and then only reads."""
    ins = cfg.instrs[n]
    return ins.kind == RMW and len(ins.args) == 1


def fence_nodes(cfg: Cfg, *kinds: str) -> FenceSet:
    return frozenset(n for n in cfg.vertices
                     if cfg.instrs[n].kind == FENCE and cfg.instrs[n].flavor in kinds)


# ---------------------------------------------------------------- reachability

def _succ_map(cfg: Cfg) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {v: [] for v in cfg.vertices}
    for a, b in cfg.edges:
        succ[a].append(b)
    return succ


def _reach(succ: dict[int, list[int]], i: int, j: int) -> bool:
    if i not in succ or j not in succ:
        return False
    seen: set[int] = set()
    stack = list(succ[i])
    while stack:
        n = stack.pop()
        if n == j:
            return True
        if n not in seen:
            seen.add(n)
            stack.extend(succ[n])
    return False


def _check(cfg: Cfg, *nodes: int) -> None:
    for n in nodes:
        if n not in cfg.instrs or n not in cfg.vertices:
            raise NodeNotInCfg(f"node {n} is not in the graph")


def block(cfg: Cfg, F: Iterable[int]) -> Cfg:
    """Remove the nodes F together with every incident edge (paths through F are cut)."""
    F = frozenset(F)
    return Cfg(tuple(v for v in cfg.vertices if v not in F),
               frozenset((a, b) for a, b in cfg.edges if a not in F and b not in F),
               cfg.entry if cfg.entry not in F else None,
               {k: v for k, v in cfg.instrs.items() if k not in F}, cfg.tid, cfg.name)


def reach(cfg: Cfg, i: int, j: int) -> bool:
    """A path of one or more edges from i to j."""
    _check(cfg, i, j)
    return _reach(_succ_map(cfg), i, j)


def opath(cfg: Cfg, i: int, f: int, j: int) -> bool:
    _check(cfg, i, f, j)
    succ = _succ_map(cfg)
    return _reach(succ, i, f) and _reach(succ, f, j)


def reachwo(cfg: Cfg, i: int, j: int, F: Iterable[int]) -> bool:
    """A path from i to j that avoids every node of F."""
    _check(cfg, i, j)
    F = frozenset(F) - {i, j}
    return _reach(_succ_map(block(cfg, F)), i, j)


# ---------------------------------------------------------------- access pairs

@dataclass(frozen=True, order=True)
class AccessPair:
    i: int
    j: int
    alias: str            # 'must' | 'may' | 'no'


class AccessPairSet(tuple):
    """An ordered, duplicate-free collection of AccessPair."""

    def __new__(cls, pairs: Iterable[AccessPair] = ()):
        return super().__new__(cls, sorted(set(pairs)))

    def diffloc(self) -> "AccessPairSet":
        return AccessPairSet(p for p in self if p.alias != "must")

    def sameloc(self) -> "AccessPairSet":
        return AccessPairSet(p for p in self if p.alias == "must")

    def __or__(self, other) -> "AccessPairSet":
        return AccessPairSet(tuple(self) + tuple(other))

    def as_tuples(self) -> list[tuple[int, int]]:
        return [(p.i, p.j) for p in self]


def alias_verdict(cfg: Cfg, i: int, j: int) -> str:
    a, b = cfg.instrs[i].loc, cfg.instrs[j].loc
    if a is None or b is None:
        return "no"
    if mustalias(a, b):
        return "must"
    return "may" if L.mayalias(a, b) else "no"


def mpairs(cfg: Cfg, a: Iterable[str] | Callable, b: Iterable[str] | Callable) -> AccessPairSet:
    """All (i, j) with i of class a, j of class b and a path from i to j."""
    pa = a if callable(a) else (lambda c, s=frozenset(a): c in s)
    pb = b if callable(b) else (lambda c, s=frozenset(b): c in s)
    succ = _succ_map(cfg)
    cls = {n: node_class(cfg, n) for n in cfg.vertices}
    out = []
    for i in cfg.vertices:
        if cls[i] is None or not pa(cls[i]):
            continue
        for j in cfg.vertices:
            if cls[j] is not None and pb(cls[j]) and _reach(succ, i, j):
                out.append(AccessPair(i, j, alias_verdict(cfg, i, j)))
    return AccessPairSet(out)


# ---------------------------------------------------------------- fence sets

def get_nfs(cfg: Cfg, pairs: Iterable, F: Iterable[int], seed: Iterable[int] = (),
            cover: Optional[dict] = None) -> FenceSet:
    """Non-eliminable fences: seed plus every f in F that is the only fence on some pair's path.

    Fences are visited in ascending node id; once a fence is kept it blocks
    the paths considered for the fences after it. ``cover`` (if given)
    receives the pair that justified keeping each fence.
    """
    kept = set(seed)
    plist = [(p.i, p.j) if isinstance(p, AccessPair) else tuple(p) for p in pairs]
    for f in sorted(F):
        if f in kept:
            continue
        g = block(cfg, kept)
        succ = _succ_map(g)
        for i, j in plist:
            if _reach(succ, i, f) and _reach(succ, f, j):
                kept.add(f)
                if cover is not None:
                    cover[f] = (i, j)
                break
    return frozenset(kept)


def _check_fences(cfg: Cfg, F: Iterable[int]) -> frozenset:
    F = frozenset(F)
    for f in F:
        if f not in cfg.instrs:
            raise NodeNotInCfg(f"node {f} is not in the graph")
        if cfg.instrs[f].kind != FENCE:
            raise NotAFence(f"node {f} ({cfg.instrs[f]}) is not a fence")
    return F


def fdelete(cfg: Cfg, F: Iterable[int]) -> Cfg:
    """Splice the fences F out, linking their predecessors to their successors."""
    F = _check_fences(cfg, F)
    if not F:
        return cfg
    edges = set(cfg.edges)
    for f in sorted(F):
        preds = {a for a, b in edges if b == f}
        succs = {b for a, b in edges if a == f}
        edges = {(a, b) for a, b in edges if f not in (a, b)}
        edges |= {(a, b) for a in preds for b in succs if a != f and b != f}
    vertices = tuple(v for v in cfg.vertices if v not in F)
    entry = cfg.entry
    if entry in F:
        entry = vertices[0] if vertices else None
    return Cfg(vertices, frozenset(edges), entry,
               {k: v for k, v in cfg.instrs.items() if k not in F}, cfg.tid, cfg.name)


def fweaken(cfg: Cfg, F: Iterable[int]) -> Cfg:
    """Replace each DMBFULL in F by a DMBLD node followed by a DMBST node."""
    F = _check_fences(cfg, F)
    for f in F:
        if cfg.instrs[f].flavor != "dmbfull":
            raise NotAFence(f"node {f} is not a dmbfull")
    for f in sorted(F):
        a = cfg.fresh_id()
        b = a + 1
        instrs = dict(cfg.instrs)
        del instrs[f]
        instrs[a] = L.fence("dmbld")
        instrs[b] = L.fence("dmbst")
        edges = {(x, y) for x, y in cfg.edges if f not in (x, y)}
        edges |= {(x, a) for x, y in cfg.edges if y == f}
        edges |= {(b, y) for x, y in cfg.edges if x == f}
        edges.add((a, b))
        vertices: list[int] = []
        for v in cfg.vertices:
            vertices.extend((a, b) if v == f else (v,))
        entry = a if cfg.entry == f else cfg.entry
        cfg = Cfg(tuple(vertices), frozenset(edges), entry, instrs, cfg.tid, cfg.name)
    return cfg


# ---------------------------------------------------------------- passes

@dataclass
class FenceLedger:
    kept: list[tuple[int, str, Optional[tuple[int, int]]]] = field(default_factory=list)
    deleted: list[tuple[int, str]] = field(default_factory=list)
    weakened: list[int] = field(default_factory=list)

    def merge(self, other: "FenceLedger") -> None:
        self.kept += other.kept
        self.deleted += other.deleted
        self.weakened += other.weakened


def _record_deleted(led: Optional[FenceLedger], cfg: Cfg, F: Iterable[int]) -> None:
    if led is not None:
        led.deleted += [(f, cfg.instrs[f].flavor) for f in sorted(F)]


def _record_kept(led: Optional[FenceLedger], cfg: Cfg, F: Iterable[int], cover: dict) -> None:
    if led is not None:
        led.kept += [(f, cfg.instrs[f].flavor, cover.get(f)) for f in sorted(F)]


def x86_felim(cfg: Cfg, ledger: Optional[FenceLedger] = None) -> Cfg:
    F = fence_nodes(cfg, "mfence")
    U = frozenset(n for n in cfg.vertices if never_fails(cfg, n))
    # a CAS later in the pair may fail and act as a plain read
    cas = AccessPairSet(x for x in mpairs(cfg, {"W", "L"}, {"U"}) if not never_fails(cfg, x.j))
    SL = (mpairs(cfg, {"W", "L"}, {"R", "A"}) | cas).diffloc()
    cover: dict = {}
    keep = get_nfs(cfg, SL, F, U, cover) & F
    _record_kept(ledger, cfg, keep, cover)
    _record_deleted(ledger, cfg, F - keep)
    return fdelete(cfg, F - keep)


def _flavored_neighbours(cfg: Cfg, F: Iterable[int]) -> frozenset:
    """Fences with a release store or acquire load as an immediate neighbour."""
    out = set()
    for f in F:
        for a, b in cfg.edges:
            other = b if a == f else a if b == f else None
            if other is not None and node_class(cfg, other) in ("L", "A"):
                out.add(f)
    return frozenset(out)


def armv8_felim(cfg: Cfg, provenance: str = "armv7",
                ledger: Optional[FenceLedger] = None) -> Cfg:
    if provenance not in ("x86", "armv7"):
        raise ValueError("provenance must be 'x86' or 'armv7'")
    F = fence_nodes(cfg, "dmbfull")
    SL = mpairs(cfg, ARM8_W, ARM8_R).diffloc()
    cover: dict = {}
    nelim = get_nfs(cfg, SL, F, _flavored_neighbours(cfg, F), cover)
    _record_kept(ledger, cfg, nelim, cover)
    if provenance == "x86":
        _record_deleted(ledger, cfg, F - nelim)
        g1 = fdelete(cfg, F - nelim)
    else:
        if ledger is not None:
            ledger.weakened += sorted(F - nelim)
        g1 = fweaken(cfg, F - nelim)

    FS = fence_nodes(g1, "dmbst")
    SS = mpairs(g1, ARM8_W, ARM8_W).diffloc()
    cover = {}
    FF = get_nfs(g1, SS, FS, nelim | _flavored_neighbours(g1, FS), cover) & FS
    _record_kept(ledger, g1, FF, cover)
    _record_deleted(ledger, g1, FS - FF)
    g2 = fdelete(g1, FS - FF)

    FL = fence_nodes(g2, "dmbld")
    pairs = mpairs(g2, ARM8_R, ARM8_R).diffloc() | mpairs(g2, ARM8_R, ARM8_W).diffloc()
    cover = {}
    FF2 = get_nfs(g2, pairs, FL, nelim | _flavored_neighbours(g2, FL), cover) & FL
    _record_kept(ledger, g2, FF2, cover)
    _record_deleted(ledger, g2, FL - FF2)
    return fdelete(g2, FL - FF2)


def armv7_felim(cfg: Cfg, ledger: Optional[FenceLedger] = None) -> Cfg:
    F = fence_nodes(cfg, "dmb")
    M = mpairs(cfg, {"R", "W", "U"}, {"R", "W", "U"})
    cover: dict = {}
    keep = get_nfs(cfg, M, F, (), cover)
    _record_kept(ledger, cfg, keep, cover)
    _record_deleted(ledger, cfg, F - keep)
    return fdelete(cfg, F - keep)


def eliminate_fences(p: Program, provenance: Optional[str] = None) -> tuple[Program, FenceLedger]:
    """Run the pass for p's architecture on every thread.

    ARMv8 programs take a provenance.  ``"x86"`` is only valid for output of
    the plain x86 scheme, where every load is followed by dmbld and every
    store preceded by dmbst: it deletes full fences outright.  ``"armv7"``
    (the default) weakens them instead and is valid for any program.
    """
    ledger = FenceLedger()
    threads = []
    for tid, t in enumerate(p.threads):
        cfg = thread_cfg(t, tid)
        led = FenceLedger()
        if p.arch == "X86":
            out = x86_felim(cfg, led)
        elif p.arch == "ARMV8":
            out = armv8_felim(cfg, provenance or "armv7", led)
        elif p.arch in ("ARMV7", "ARMV7MCA"):
            out = armv7_felim(cfg, led)
        else:
            out = cfg
        led.kept = [(tid, *k) for k in led.kept]
        led.deleted = [(tid, *d) for d in led.deleted]
        led.weakened = [(tid, w) for w in led.weakened]
        ledger.merge(led)
        threads.append(out.to_thread())
    return p.with_threads(threads), ledger


def ledger_text(p: Program, ledger: FenceLedger) -> str:
    lines = []
    for tid, f, kind, cov in ledger.kept:
        why = f" covers ({cov[0]},{cov[1]})" if cov else " seeded"
        lines.append(f"kept     {p.threads[tid].name} node {f} {kind}{why}")
    for tid, f in ledger.weakened:
        lines.append(f"weakened {p.threads[tid].name} node {f} dmbfull -> dmbld;dmbst")
    for tid, f, kind in ledger.deleted:
        lines.append(f"deleted  {p.threads[tid].name} node {f} {kind}")
    return "\n".join(lines) + ("\n" if lines else "")

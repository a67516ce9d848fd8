"""Static robustness analysis (is every K-execution also M-consistent?) and fence insertion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import litmus as L
from .enumerate import behaviors, enumerate_executions
from .errors import UnsupportedPair
from .fenceopt import never_fails, node_class, reachwo
from .litmus import Cfg, Program, Thread, mayalias, mustalias, thread_cfg
from .models import ModelId, check

ROBUST_PAIRS = (
    (ModelId.SC, ModelId.X86A), (ModelId.SC, ModelId.ARMV8), (ModelId.X86A, ModelId.ARMV8),
    (ModelId.SC, ModelId.ARMV7), (ModelId.X86A, ModelId.ARMV7), (ModelId.ARMV8, ModelId.ARMV7),
    (ModelId.ARMV7MCA, ModelId.ARMV7),
)

_K_ARCH = {ModelId.X86A: ("X86",), ModelId.X86: ("X86",), ModelId.ARMV8: ("ARMV8",),
           ModelId.ARMV7: ("ARMV7", "ARMV7MCA")}


@dataclass(frozen=True)
class RobustPair:
    m: ModelId
    k: ModelId

    def __post_init__(self):
        m, k = ModelId.parse(self.m), ModelId.parse(self.k)
        if k == ModelId.X86:
            k = ModelId.X86A
        if m == ModelId.X86:
            m = ModelId.X86A
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "k", k)
        if (m, k) not in ROBUST_PAIRS:
            raise UnsupportedPair(f"robustness of {m.value} against {k.value} is not supported")

    def __str__(self) -> str:
        return f"{self.m.value}-robust against {self.k.value}"


@dataclass(frozen=True, order=True)
class SitePair:
    tid: int
    i: int
    j: int


@dataclass
class RobustReport:
    robust: bool
    pair: RobustPair
    offending: list[tuple[int, int, int, str]] = field(default_factory=list)
    inserted: list[tuple[int, int, str]] = field(default_factory=list)
    program: Optional[Program] = None

    def to_text(self, p: Optional[Program] = None) -> str:
        lines = [f"{self.pair}: {'robust' if self.robust else 'NOT robust'}"]
        for tid, i, j, why in self.offending:
            name = p.threads[tid].name if p else f"T{tid}"
            desc = ""
            if p:
                body = p.threads[tid].body
                desc = f"  [{body[i]}] -> [{body[j]}]"
            lines.append(f"  unordered {name} ({i},{j}) {why}{desc}")
        for tid, node, kind in self.inserted:
            name = p.threads[tid].name if p else f"T{tid}"
            lines.append(f"  inserted {kind} in {name} at {node}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "m": self.pair.m.value, "k": self.pair.k.value, "robust": self.robust,
            "offending": [{"thread": t, "i": i, "j": j, "reason": r} for t, i, j, r in self.offending],
            "inserted": [{"thread": t, "node": n, "fence": k} for t, n, k in self.inserted],
        }, sort_keys=True)


# ---------------------------------------------------------------- access pairs

def _roles(cfg: Cfg, n: int) -> tuple[str, ...]:
    """Access roles of a node; an rmw is both a read and a write."""
    c = node_class(cfg, n)
    if c == "U":
        return ("R", "W")
    if c in ("R", "A"):
        return ("R",)
    if c in ("W", "L"):
        return ("W",)
    return ()


def access_pairs(p: Program, only_reads: bool = False) -> list[SitePair]:
    """Every (i, j) access pair of each thread function with a control path i→j."""
    out = []
    for tid, t in enumerate(p.threads):
        cfg = thread_cfg(t, tid)
        nodes = [n for n in cfg.vertices if _roles(cfg, n)]
        if only_reads:
            nodes = [n for n in nodes if node_class(cfg, n) in ("R", "A")]
        succ: dict[int, list[int]] = {v: [] for v in cfg.vertices}
        for a, b in cfg.edges:
            succ[a].append(b)
        for i in nodes:
            seen: set[int] = set()
            stack = list(succ[i])
            while stack:
                v = stack.pop()
                if v in seen:
                    continue
                seen.add(v)
                stack.extend(succ[v])
            out.extend(SitePair(tid, i, j) for j in nodes if j in seen)
    return sorted(out)


def _loc(p: Program, tid: int, n: int) -> L.Loc:
    return p.threads[tid].body[n].loc


def oncyc(p: Program, pairs: Iterable[SitePair]) -> list[SitePair]:
    """Pairs (a,b) for which other pairs (p,q), (r,s) exist with mayalias(b,p), mayalias(a,s)."""
    pairs = list(pairs)
    out = []
    for ab in pairs:
        la, lb = _loc(p, ab.tid, ab.i), _loc(p, ab.tid, ab.j)
        others = [x for x in pairs if x != ab]
        has_p = any(mayalias(lb, _loc(p, x.tid, x.i)) for x in others)
        has_s = any(mayalias(la, _loc(p, x.tid, x.j)) for x in others)
        if has_p and has_s:
            out.append(ab)
    return out


# ---------------------------------------------------------------- ordering conditions

def _nodes(cfg: Cfg, *classes: str) -> frozenset:
    return frozenset(n for n in cfg.vertices if node_class(cfg, n) in classes)


def _fences(cfg: Cfg, *kinds: str) -> frozenset:
    return frozenset(n for n in cfg.vertices
                     if cfg.instrs[n].kind == L.FENCE and cfg.instrs[n].flavor in kinds)


def _armv8_ordered(cfg: Cfg, i: int, j: int, ri: str, rj: str) -> bool:
    """The syntactic ARMv8 ordering cases for one role assignment of i and j."""
    ci, cj = node_class(cfg, i), node_class(cfg, j)
    FF = _fences(cfg, "dmbfull")
    FL = _fences(cfg, "dmbld")
    FS = _fences(cfg, "dmbst")
    rels = _nodes(cfg, "L")
    acqs = _nodes(cfg, "A")
    # acquires that can only be reached from i through a release
    ra = frozenset(a for a in acqs if a != i and not reachwo(cfg, i, a, rels))
    B = FF | ra
    srels = frozenset(n for n in rels if n != j and mustalias(cfg.instrs[n].loc, cfg.instrs[j].loc))
    if cj == "L" or ci == "A" or (ci == "L" and cj == "A"):
        return True
    if ri == "W" and rj == "R":
        return not reachwo(cfg, i, j, B)
    if ri == "R" and rj == "R":
        return not reachwo(cfg, i, j, B | FL)
    if ri == "R" and rj == "W":
        return not reachwo(cfg, i, j, B | FL | srels)
    return not reachwo(cfg, i, j, B | FS | srels)


def _plain_w(c: str) -> bool:
    return c in ("W", "L")


def _plain_r(c: str) -> bool:
    return c in ("R", "A")


def ordered(p: Program, sp: SitePair, pair: RobustPair) -> Optional[str]:
    """None when the pair is ordered under the (M,K) condition, else a short reason."""
    cfg = thread_cfg(p.threads[sp.tid], sp.tid)
    i, j = sp.i, sp.j
    li, lj = cfg.instrs[i].loc, cfg.instrs[j].loc
    if mustalias(li, lj):
        return None
    ci, cj = node_class(cfg, i), node_class(cfg, j)
    ri_all, rj_all = _roles(cfg, i), _roles(cfg, j)
    m, k = pair.m, pair.k
    awr = _plain_w(ci) and _plain_r(cj)        # non-rmw store then non-rmw load
    reasons = []
    for ri in ri_all:
        for rj in rj_all:
            if k == ModelId.X86A:
                # an rmw in the W role succeeded, so it is locked; a CAS in the R role may
                # have failed and then orders nothing
                if ri == "R" or rj == "W" or ci == "U" or never_fails(cfg, j):
                    continue
                barrier = _fences(cfg, "mfence") | frozenset(
                    n for n in cfg.vertices if never_fails(cfg, n))
                if reachwo(cfg, i, j, barrier):
                    reasons.append("store-load without mfence or rmw")
            elif k == ModelId.ARMV8:
                if m == ModelId.X86A and awr and not (ci == "L" and cj == "A"):
                    continue
                if not _armv8_ordered(cfg, i, j, ri, rj):
                    reasons.append(f"{ri}{rj} pair not ordered by fence, release or acquire")
            else:
                if m == ModelId.X86A and awr:
                    continue
                if m == ModelId.ARMV8 and ri == "W":
                    continue
                if m == ModelId.ARMV7MCA and not (ri == "R" and rj == "R"):
                    continue
                if reachwo(cfg, i, j, _fences(cfg, "dmb", "dmbfull", "dmbld", "dmbst")):
                    reasons.append(f"{ri}{rj} pair without dmb")
    return reasons[0] if reasons else None


def _check_arch(p: Program, pair: RobustPair) -> None:
    if p.arch not in _K_ARCH[pair.k]:
        raise UnsupportedPair(f"a {p.arch} program cannot be analysed against {pair.k.value}")


def check_robust(p: Program, pair: RobustPair) -> RobustReport:
    _check_arch(p, pair)
    pairs = access_pairs(p, only_reads=pair.m == ModelId.ARMV7MCA)
    offending = []
    for sp in oncyc(p, pairs):
        why = ordered(p, sp, pair)
        if why is not None:
            offending.append((sp.tid, sp.i, sp.j, why))
    return RobustReport(not offending, pair, offending)


def enforce_robust(p: Program, pair: RobustPair) -> tuple[Program, RobustReport]:
    """Insert fences for every offending pair; returns the new program and the report."""
    rep = check_robust(p, pair)
    if rep.robust:
        rep.program = p
        return p, rep
    inserts: dict[int, list[tuple[int, str, bool]]] = {}   # tid -> (node, kind, before?)
    seen: set[tuple[int, int]] = set()
    for tid, a, b, _ in rep.offending:
        body = p.threads[tid].body
        if pair.k == ModelId.X86A:
            if (tid, b) in seen:
                continue
            seen.add((tid, b))
            inserts.setdefault(tid, []).append((b, "mfence", True))
        elif pair.k == ModelId.ARMV8:
            if (tid, a) in seen:
                continue
            seen.add((tid, a))
            ins = body[a]
            kind = "dmbld" if ins.kind == L.LOAD else "dmbfull"
            inserts.setdefault(tid, []).append((a, kind, False))
        else:
            if (tid, a) in seen:
                continue
            seen.add((tid, a))
            inserts.setdefault(tid, []).append((a, "dmb", False))
    threads = []
    for tid, t in enumerate(p.threads):
        body = list(t.body)
        for node, kind, before in sorted(inserts.get(tid, []), reverse=True):
            body.insert(node if before else node + 1, L.fence(kind))
            rep.inserted.append((tid, node, kind))
        threads.append(Thread(t.name, tuple(body)))
    rep.inserted.sort()
    out = p.with_threads(threads)
    rep.program = out
    return out, rep


def replicate(p: Program, copies: int = 1) -> Program:
    """Instantiate each thread function ``copies`` times."""
    if copies == 1:
        return p
    threads = [Thread(f"{t.name}_{c}", t.body) for t in p.threads for c in range(copies)]
    return p.with_threads(threads)


def semantic_robust_oracle(p: Program, pair: RobustPair, copies: int = 1,
                           mode: str = "executions", **kw) -> bool:
    """Ground truth by enumeration.

    ``mode='executions'`` asks whether every K-consistent execution is
    M-consistent; ``mode='behaviors'`` compares the two behavior sets.
    """
    q = replicate(p, copies)
    if mode == "behaviors":
        return behaviors(q, pair.k, **kw) == behaviors(q, pair.m, **kw)
    for x in enumerate_executions(q, pair.k, all_mo=False, **kw):
        if not check(pair.m, x):
            return False
    return True

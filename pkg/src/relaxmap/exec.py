"""Execution graphs and model-independent derived relations."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .relalg import EventClass, Relation, bits, mask_of

INIT_TID = -1
FULL_FENCES = ("mfence", "dmb", "dmbfull")


@dataclass(frozen=True)
class Event:
    id: int
    tid: int
    op: str                       # 'R' | 'W' | 'U' | 'F'
    loc: Optional[str] = None
    rval: Optional[int] = None
    wval: Optional[int] = None
    flavor: str = "plain"         # 'plain' | 'acq' | 'rel' for accesses, fence kind for F
    excl: bool = False            # half of an exclusive (rmw) pair
    node: Optional[int] = None    # instruction node that produced the event
    c11: Optional[str] = None

    @property
    def is_init(self) -> bool:
        return self.tid == INIT_TID

    @property
    def is_read(self) -> bool:
        return self.op in ("R", "U")

    @property
    def is_write(self) -> bool:
        return self.op in ("W", "U")

    def __str__(self) -> str:
        if self.op == "F":
            return f"F.{self.flavor}"
        fl = "" if self.flavor == "plain" else f".{self.flavor}"
        ex = "*" if self.excl else ""
        if self.op == "R":
            return f"R{fl}{ex}({self.loc},{self.rval})"
        if self.op == "W":
            return f"W{fl}{ex}({self.loc},{self.wval})"
        return f"U{fl}({self.loc},{self.rval},{self.wval})"


@dataclass(frozen=True)
class Deps:
    """Event-level dependency relations.

    ``addr_isb`` relates a load to events that follow an ISB placed after one
    of the load's address-dependent accesses (addr;po;[isb];po).
    """
    addr: Relation
    data: Relation
    ctrl: Relation
    ctrl_isb: Relation
    addr_isb: Relation

    @classmethod
    def empty(cls, n: int) -> "Deps":
        e = Relation.empty(n)
        return cls(e, e, e, e, e)


class Execution:
    """An execution graph ⟨E, po, rf, co, mo⟩ plus rmw pairing and dependencies."""

    def __init__(self, events: list[Event], po: Relation, rf: Relation, co: Relation,
                 mo: Optional[Relation] = None, rmw: Optional[Relation] = None,
                 deps: Optional[Deps] = None):
        self.events = events
        self.n = len(events)
        self.po = po
        self.rf = rf
        self.co = co
        self.mo = mo
        self.rmw = rmw if rmw is not None else Relation.empty(self.n)
        self.deps = deps if deps is not None else Deps.empty(self.n)

    # ------------------------------------------------------------ event classes
    def _mask(self, pred) -> EventClass:
        m = 0
        for e in self.events:
            if pred(e):
                m |= 1 << e.id
        return m

    @cached_property
    def R(self) -> EventClass:
        return self._mask(lambda e: e.op == "R")

    @cached_property
    def W(self) -> EventClass:
        return self._mask(lambda e: e.op == "W")

    @cached_property
    def U(self) -> EventClass:
        return self._mask(lambda e: e.op == "U")

    @cached_property
    def F(self) -> EventClass:
        return self._mask(lambda e: e.op == "F")

    @cached_property
    def reads(self) -> EventClass:
        return self.R | self.U

    @cached_property
    def writes(self) -> EventClass:
        return self.W | self.U

    @cached_property
    def init(self) -> EventClass:
        return self._mask(lambda e: e.is_init)

    @cached_property
    def A(self) -> EventClass:
        return self._mask(lambda e: e.op == "R" and e.flavor == "acq")

    @cached_property
    def L(self) -> EventClass:
        return self._mask(lambda e: e.op == "W" and e.flavor == "rel")

    @cached_property
    def F_full(self) -> EventClass:
        return self._mask(lambda e: e.op == "F" and e.flavor in FULL_FENCES)

    @cached_property
    def F_ld(self) -> EventClass:
        return self._mask(lambda e: e.op == "F" and e.flavor == "dmbld")

    @cached_property
    def F_st(self) -> EventClass:
        return self._mask(lambda e: e.op == "F" and e.flavor == "dmbst")

    @cached_property
    def rmw_dom(self) -> EventClass:
        return self.rmw.domain()

    @cached_property
    def rmw_cod(self) -> EventClass:
        return self.rmw.codomain()

    def loc_of(self, i: int) -> Optional[str]:
        return self.events[i].loc

    # ------------------------------------------------------------ derived relations
    @cached_property
    def same_thread(self) -> Relation:
        rows = []
        for e in self.events:
            if e.is_init:
                rows.append(0)
            else:
                rows.append(self._mask(lambda f, t=e.tid: f.tid == t))
        return Relation(self.n, rows)

    @cached_property
    def same_loc(self) -> Relation:
        by_loc: dict[str, int] = {}
        for e in self.events:
            if e.loc is not None:
                by_loc[e.loc] = by_loc.get(e.loc, 0) | (1 << e.id)
        return Relation(self.n, [by_loc.get(e.loc, 0) if e.loc is not None else 0
                                 for e in self.events])

    @cached_property
    def fr(self) -> Relation:
        return derive_fr(self)

    @cached_property
    def poloc(self) -> Relation:
        return self.po & self.same_loc

    def internal(self, r: Relation) -> Relation:
        return r & self.same_thread

    def external(self, r: Relation) -> Relation:
        return r - self.same_thread

    @cached_property
    def rfi(self) -> Relation:
        return self.internal(self.rf)

    @cached_property
    def rfe(self) -> Relation:
        return self.external(self.rf)

    @cached_property
    def coi(self) -> Relation:
        return self.internal(self.co)

    @cached_property
    def coe(self) -> Relation:
        return self.external(self.co)

    @cached_property
    def fri(self) -> Relation:
        return self.internal(self.fr)

    @cached_property
    def fre(self) -> Relation:
        return self.external(self.fr)

    @cached_property
    def eco(self) -> Relation:
        return derive_eco(self)

    def __repr__(self) -> str:
        return f"Execution({len(self.events)} events)"

    def to_text(self) -> str:
        return execution_to_text(self)


def derive_fr(x: Execution) -> Relation:
    fr = x.rf.inverse().seq(x.co)
    return fr - Relation.identity(x.n)


def derive_eco(x: Execution) -> Relation:
    return ((x.rf | x.co | x.fr).plus()) & x.same_loc


def split_internal_external(r: Relation, x: Execution) -> tuple[Relation, Relation]:
    return x.internal(r), x.external(r)


# ---------------------------------------------------------------- conversion

def split_updates(x: Execution) -> Execution:
    """Replace each U event by an exclusive R;W pair linked by rmw."""
    if not x.U:
        return x
    new_ids: dict[int, tuple[int, int]] = {}
    events: list[Event] = []
    for e in x.events:
        if e.op == "U":
            r = len(events)
            events.append(Event(r, e.tid, "R", e.loc, e.rval, None, e.flavor, True, e.node, e.c11))
            w = len(events)
            events.append(Event(w, e.tid, "W", e.loc, None, e.wval, e.flavor, True, e.node, e.c11))
            new_ids[e.id] = (r, w)
        else:
            i = len(events)
            events.append(Event(i, e.tid, e.op, e.loc, e.rval, e.wval, e.flavor, e.excl, e.node, e.c11))
            new_ids[e.id] = (i, i)
    n = len(events)

    def remap(rel: Relation, src_part: int, dst_part: int) -> Relation:
        pairs = [(new_ids[a][src_part], new_ids[b][dst_part]) for a, b in rel.pairs()]
        return Relation.from_pairs(n, pairs)

    po_pairs = set()
    for a, b in x.po.pairs():
        for pa in set(new_ids[a]):
            for pb in set(new_ids[b]):
                po_pairs.add((pa, pb))
    for r, w in new_ids.values():
        if r != w:
            po_pairs.add((r, w))
    po = Relation.from_pairs(n, po_pairs)
    # writes are the second half of a pair, reads the first
    rf = remap(x.rf, 1, 0)
    co = remap(x.co, 1, 1)
    rmw = Relation.from_pairs(n, [v for v in new_ids.values() if v[0] != v[1]])

    def remap_dep(rel: Relation) -> Relation:
        pairs = set()
        for a, b in rel.pairs():
            for pb in set(new_ids[b]):
                pairs.add((new_ids[a][0], pb))
        return Relation.from_pairs(n, pairs)

    d = x.deps
    deps = Deps(remap_dep(d.addr), remap_dep(d.data), remap_dep(d.ctrl),
                remap_dep(d.ctrl_isb), remap_dep(d.addr_isb))
    return Execution(events, po, rf, co, None, rmw, deps)


# ---------------------------------------------------------------- text form

def execution_to_text(x: Execution) -> str:
    lines = []
    for e in x.events:
        tid = "init" if e.is_init else str(e.tid)
        vals = []
        if e.rval is not None:
            vals.append(f"r={e.rval}")
        if e.wval is not None:
            vals.append(f"w={e.wval}")
        extra = [e.flavor]
        if e.excl:
            extra.append("excl")
        lines.append(" ".join(["event", str(e.id), tid, e.op, e.loc or "-", *vals, *extra]))
    for name in ("po", "rf", "co", "mo", "rmw"):
        rel = getattr(x, name)
        if rel is None:
            continue
        if name == "po":
            rel = _po_reduce(rel)
        for a, b in rel.pairs():
            lines.append(f"{name} {a} {b}")
    return "\n".join(lines) + "\n"


def _po_reduce(po: Relation) -> Relation:
    """Immediate-successor edges of po (po minus po;po)."""
    return po - po.seq(po)


def execution_from_text(text: str) -> Execution:
    events: list[Event] = []
    pairs: dict[str, list[tuple[int, int]]] = {k: [] for k in ("po", "rf", "co", "mo", "rmw")}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "event":
            eid, tid, op, loc = int(parts[1]), parts[2], parts[3], parts[4]
            rval = wval = None
            flavor, excl = "plain", False
            for tok in parts[5:]:
                if tok.startswith("r="):
                    rval = int(tok[2:])
                elif tok.startswith("w="):
                    wval = int(tok[2:])
                elif tok == "excl":
                    excl = True
                else:
                    flavor = tok
            events.append(Event(eid, INIT_TID if tid == "init" else int(tid), op,
                                None if loc == "-" else loc, rval, wval, flavor, excl))
        else:
            pairs[parts[0]].append((int(parts[1]), int(parts[2])))
    n = len(events)
    po = Relation.from_pairs(n, pairs["po"]).plus()
    mo = Relation.from_pairs(n, pairs["mo"]) if pairs["mo"] else None
    return Execution(events, po, Relation.from_pairs(n, pairs["rf"]),
                     Relation.from_pairs(n, pairs["co"]), mo,
                     Relation.from_pairs(n, pairs["rmw"]))


__all__ = [
    "Event", "Execution", "Deps", "INIT_TID", "derive_fr", "derive_eco",
    "split_internal_external", "split_updates", "execution_to_text",
    "execution_from_text", "mask_of", "bits",
]

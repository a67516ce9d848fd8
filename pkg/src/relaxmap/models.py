"""Axiomatic consistency predicates for SC, x86, x86A, ARMv7, ARMv7-mca and ARMv8."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

from .errors import MissingMo
from .exec import Deps, Execution, split_updates
from .relalg import Relation, bits, restrict, union


class ModelId(str, Enum):
    SC = "SC"
    X86 = "X86"
    X86A = "X86A"
    ARMV8 = "ARMV8"
    ARMV7MCA = "ARMV7MCA"
    ARMV7 = "ARMV7"

    @classmethod
    def parse(cls, name: str) -> "ModelId":
        key = name.strip().upper().replace("-", "").replace("_", "")
        return cls(key)

    @property
    def rank(self) -> int:
        return STRENGTH[self]

    def stronger_than(self, other: "ModelId") -> bool:
        return self.rank < other.rank


# x86 and x86A are equivalent and share a rank
STRENGTH = {ModelId.SC: 0, ModelId.X86: 1, ModelId.X86A: 1, ModelId.ARMV8: 2,
            ModelId.ARMV7MCA: 3, ModelId.ARMV7: 4}

ARCH_MODEL = {"X86": ModelId.X86A, "ARMV8": ModelId.ARMV8, "ARMV7": ModelId.ARMV7,
              "ARMV7MCA": ModelId.ARMV7MCA, "SCREF": ModelId.SC}


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    axiom: Optional[str] = None
    witness: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.consistent


OK = Verdict(True)

# An axiom is (name, kind, relation) where kind is one of
# 'acyclic', 'irreflexive' or 'empty'.
Axiom = tuple[str, str, Relation]


def _holds(kind: str, rel: Relation) -> bool:
    if kind == "acyclic":
        return rel.is_acyclic()
    if kind == "irreflexive":
        return rel.is_irreflexive()
    return not rel


def _witness(kind: str, rel: Relation) -> tuple[int, ...]:
    if kind == "acyclic":
        return tuple(rel.find_cycle())
    if kind == "irreflexive":
        return next((i,) for i, r in enumerate(rel.rows) if (r >> i) & 1)
    return rel.pairs()[0]


def witness_valid(kind: str, rel: Relation, witness: tuple[int, ...]) -> bool:
    """Re-check that a witness really violates an axiom of the given kind."""
    if kind == "empty":
        return len(witness) == 2 and tuple(witness) in rel
    if kind == "irreflexive":
        return len(witness) == 1 and (witness[0], witness[0]) in rel
    k = len(witness)
    return k > 0 and all((witness[i], witness[(i + 1) % k]) in rel for i in range(k))


def _judge(axioms: Iterator[Axiom]) -> Verdict:
    for name, kind, rel in axioms:
        if not _holds(kind, rel):
            return Verdict(False, name, _witness(kind, rel))
    return OK


def _atomicity(x: Execution) -> Relation:
    return x.rmw & x.fre.seq(x.coe)


def _sc_per_loc(x: Execution) -> Relation:
    return union(x.n, x.poloc, x.rf, x.fr, x.co)


# ---------------------------------------------------------------- SC

def sc_axioms(x: Execution) -> Iterator[Axiom]:
    yield "sc", "acyclic", union(x.n, x.po, x.rf, x.fr, x.co)
    yield "atomicity", "empty", _atomicity(x)


def check_sc(x: Execution) -> Verdict:
    return _judge(sc_axioms(x))


# ---------------------------------------------------------------- x86 (direct)

def _mo_total(x: Execution) -> bool:
    dom = x.writes | x.F_full
    mo = x.mo
    for i in bits(dom):
        if (mo.rows[i] >> i) & 1:
            return False
        for j in bits(dom & ~((1 << (i + 1)) - 1)):
            if ((mo.rows[i] >> j) & 1) == ((mo.rows[j] >> i) & 1):
                return False
    return True


def x86_axioms(x: Execution) -> Iterator[Axiom]:
    if x.mo is None or not _mo_total(x):
        raise MissingMo("x86 checking needs a total mo over W, U and F")
    xhb = (x.po | x.rf).plus()
    fr, mo = x.fr, x.mo
    yield "irrHB", "irreflexive", xhb
    yield "irrMOHB", "irreflexive", mo.seq(xhb)
    yield "irrFRHB", "irreflexive", fr.seq(xhb)
    yield "irrFRMO", "irreflexive", fr.seq(mo)
    frmo = fr.seq(mo)
    yield "irrFMRP", "irreflexive", frmo.seq(x.rfe).seq(x.po)
    yield "irrUF", "irreflexive", restrict((1 << x.n) - 1, frmo, x.U | x.F_full).seq(x.po)


def check_x86(x: Execution) -> Verdict:
    return _judge(x86_axioms(x))


def x86_required_mo(x: Execution) -> Relation:
    """Edges every x86-consistent mo for (rf, co) must contain.

    Each x86 axiom mentions mo at most once, so each forbids single mo
    edges; in a total order a forbidden (a, b) forces (b, a).  A consistent
    mo therefore exists iff this relation is acyclic (and irrHB/irrFRHB hold).
    """
    n = x.n
    dom = x.writes | x.F_full
    xhb = (x.po | x.rf).plus()
    fr = x.fr
    forced = xhb                                 # irrMOHB
    forced = forced | fr                         # irrFRMO: not mo(b, a) when fr(a, b)
    forced = forced | x.rfe.seq(x.po).seq(fr)    # irrFMRP
    forced = forced | restrict(x.U | x.F_full, x.po.seq(fr), (1 << n) - 1)  # irrUF
    init_first = Relation.cross(n, x.init, dom & ~x.init)
    req = restrict(dom, forced, dom) | x.co | init_first
    return req - Relation.identity(n)


def solve_mo(x: Execution) -> Optional[Relation]:
    """Return some mo making x x86-consistent, or None when none exists."""
    req = x86_required_mo(x)
    if not req.is_acyclic():
        return None
    dom = x.writes | x.F_full
    # deterministic topological order: repeatedly take the smallest source
    order: list[int] = []
    remaining = dom
    while remaining:
        for i in bits(remaining):
            preds = 0
            for j in bits(remaining):
                if (req.rows[j] >> i) & 1:
                    preds = 1
                    break
            if not preds:
                order.append(i)
                remaining &= ~(1 << i)
                break
    rows = [0] * x.n
    seen = 0
    for i in reversed(order):
        rows[i] = seen
        seen |= 1 << i
    return Relation(x.n, rows)


def linear_extensions(req: Relation, dom: int) -> Iterator[Relation]:
    """All strict total orders over dom that contain req (restricted to dom)."""
    n = req.n
    rows_req = req.rows
    order: list[int] = []

    def rec(remaining: int):
        if not remaining:
            rows = [0] * n
            seen = 0
            for i in reversed(order):
                rows[i] = seen
                seen |= 1 << i
            yield Relation(n, rows)
            return
        for i in bits(remaining):
            if any((rows_req[j] >> i) & 1 for j in bits(remaining) if j != i):
                continue
            order.append(i)
            yield from rec(remaining & ~(1 << i))
            order.pop()

    yield from rec(dom)


# ---------------------------------------------------------------- x86A

def x86a_axioms(x: Execution) -> Iterator[Axiom]:
    if x.U:
        x = split_updates(x)
    n = x.n
    yield "sc-per-loc", "acyclic", _sc_per_loc(x)
    yield "atomicity", "empty", _atomicity(x)
    # partial fences (dmbld/dmbst in ARMv8 programs) order nothing here and must
    # not bridge a store-load pair through po
    keep = ((1 << n) - 1) & ~(x.F & ~x.F_full)
    po = restrict(keep, x.po, keep)
    awr = restrict(x.W & ~x.rmw_cod, po, x.R & ~x.rmw_dom)
    barrier = x.rmw_dom | x.rmw_cod | x.F_full
    fence = restrict((1 << n) - 1, po, barrier).seq(po)
    yield "GHB", "acyclic", union(n, po - awr, fence, x.rfe, x.co, x.fr)


def check_x86a(x: Execution) -> Verdict:
    return _judge(x86a_axioms(x))


# ---------------------------------------------------------------- ARMv7

def armv7_ppo_parts(x: Execution, deps: Optional[Deps] = None) -> dict[str, Relation]:
    """Least fixpoint of the ii/ic/ci/cc rules; returns all four plus ppo."""
    d = deps or x.deps
    n = x.n
    po = x.po
    rdw = x.fre.seq(x.rfe) & po
    detour = x.coe.seq(x.rfe) & po
    ii0 = union(n, d.addr, d.data, rdw, x.rfi)
    ic0 = Relation.empty(n)
    ci0 = d.ctrl_isb | detour
    cc0 = union(n, d.data, d.ctrl, d.addr, d.addr.seq(po))
    ii, ic, ci, cc = ii0, ic0, ci0, cc0
    while True:
        ii2 = union(n, ii0, ci, ic.seq(ci), ii.seq(ii))
        ic2 = union(n, ic0, ii, cc, ic.seq(cc), ii.seq(ic))
        ci2 = union(n, ci0, ci.seq(ii), ci.seq(ci))
        cc2 = union(n, cc0, ci, ci.seq(ic), cc.seq(cc))
        if (ii2, ic2, ci2, cc2) == (ii, ic, ci, cc):
            break
        ii, ic, ci, cc = ii2, ic2, ci2, cc2
    ppo = restrict(x.R, ii, x.R) | restrict(x.R, ic, x.W)
    return {"ii": ii, "ic": ic, "ci": ci, "cc": cc, "ppo": ppo}


def armv7_ppo(x: Execution, deps: Optional[Deps] = None) -> Relation:
    return armv7_ppo_parts(x, deps)["ppo"]


def _armv7_core(x: Execution, deps: Optional[Deps]) -> tuple[Relation, Relation, Relation]:
    n = x.n
    ppo = armv7_ppo(x, deps)
    mem = x.R | x.W
    dmb = x.F
    fence = restrict(mem, restrict((1 << n) - 1, x.po, dmb).seq(x.po), mem)
    ahb = union(n, ppo, fence, x.rfe)
    ahb_star = ahb.star()
    rfe_opt = x.rfe.opt()
    fence_ahb = fence.seq(ahb_star)
    prop1 = restrict(x.W, rfe_opt.seq(fence_ahb), x.W)
    prop2 = (x.coe | x.fre).opt().seq(rfe_opt).seq(fence_ahb.opt()).seq(fence_ahb)
    return ppo, ahb, prop1 | prop2


def armv7_axioms(x: Execution, deps: Optional[Deps] = None, mca: bool = False,
                 wo_variant: str = "main") -> Iterator[Axiom]:
    if x.U:
        x = split_updates(x)
    yield "sc-per-loc", "acyclic", _sc_per_loc(x)
    yield "atomicity", "empty", _atomicity(x)
    ppo, ahb, prop = _armv7_core(x, deps)
    yield "no-thin-air", "acyclic", ahb
    yield "observation", "irreflexive", x.fre.seq(prop).seq(ahb.star())
    yield "propagation", "acyclic", x.co | prop
    if mca:
        yield "mca", "acyclic", armv7_wo(x, ppo, wo_variant)


def armv7_wo(x: Execution, ppo: Relation, variant: str = "main") -> Relation:
    if variant == "main":
        return x.rfe.seq(ppo).seq(x.fre)
    if variant == "draft":
        return (x.rfe.seq(ppo).seq(x.rfe.inverse()) - Relation.identity(x.n)).seq(x.co)
    raise ValueError(f"unknown wo variant {variant!r}")


def check_armv7(x: Execution, deps: Optional[Deps] = None) -> Verdict:
    return _judge(armv7_axioms(x, deps))


def check_armv7mca(x: Execution, deps: Optional[Deps] = None, wo_variant: str = "main") -> Verdict:
    return _judge(armv7_axioms(x, deps, mca=True, wo_variant=wo_variant))


# ---------------------------------------------------------------- ARMv8

def armv8_base(x: Execution, deps: Optional[Deps] = None) -> Relation:
    """obs ∪ dob ∪ aob ∪ bob (ob is its transitive closure)."""
    d = deps or x.deps
    n = x.n
    every = (1 << n) - 1
    po = x.po
    R, W = x.R, x.W
    obs = union(n, x.rfe, x.fre, x.coe)
    dob = union(
        n,
        d.addr,
        d.data,
        d.ctrl.cod_restrict(W),
        (d.ctrl_isb | d.addr_isb).cod_restrict(R),
        d.addr.seq(po).cod_restrict(W),
        (d.ctrl | d.data).seq(x.coi),
        (d.addr | d.data).seq(x.rfi),
    )
    aob = x.rmw | restrict(x.rmw_cod, x.rfi, x.A)
    via_full = restrict(every, po, x.F_full).seq(po)
    via_ld = restrict(R, po, x.F_ld).seq(po)
    via_st = restrict(W, restrict(every, po, x.F_st).seq(po), W)
    po_l = po.cod_restrict(x.L)
    bob = union(
        n,
        via_full,
        restrict(x.L, po, x.A),
        via_ld,
        po.dom_restrict(x.A),
        via_st,
        po_l,
        po_l.seq(x.coi),
    )
    return union(n, obs, dob, aob, bob)


def armv8_ob(x: Execution, deps: Optional[Deps] = None) -> Relation:
    if x.U:
        x = split_updates(x)
    return armv8_base(x, deps).plus()


def armv8_axioms(x: Execution, deps: Optional[Deps] = None) -> Iterator[Axiom]:
    if x.U:
        x = split_updates(x)
    yield "internal", "acyclic", _sc_per_loc(x)
    yield "atomic", "empty", _atomicity(x)
    yield "external", "acyclic", armv8_base(x, deps)


def check_armv8(x: Execution, deps: Optional[Deps] = None) -> Verdict:
    return _judge(armv8_axioms(x, deps))


# ---------------------------------------------------------------- dispatch

def axioms(m: ModelId, x: Execution) -> list[Axiom]:
    """All axioms of model m evaluated on x (used to re-validate witnesses)."""
    m = ModelId(m)
    if m == ModelId.SC:
        return list(sc_axioms(x))
    if m == ModelId.X86:
        return list(x86_axioms(x))
    if m == ModelId.X86A:
        return list(x86a_axioms(x))
    if m == ModelId.ARMV7:
        return list(armv7_axioms(x))
    if m == ModelId.ARMV7MCA:
        return list(armv7_axioms(x, mca=True))
    return list(armv8_axioms(x))


def check(m: ModelId, x: Execution) -> Verdict:
    m = ModelId(m)
    if m == ModelId.SC:
        return check_sc(x)
    if m == ModelId.X86:
        return check_x86(x)
    if m == ModelId.X86A:
        return check_x86a(x)
    if m == ModelId.ARMV7:
        return check_armv7(x)
    if m == ModelId.ARMV7MCA:
        return check_armv7mca(x)
    return check_armv8(x)

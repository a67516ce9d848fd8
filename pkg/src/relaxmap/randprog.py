"""Random loop-free litmus programs, used for property checks and table validation."""
from __future__ import annotations

import random
from dataclasses import replace
from typing import Optional

from . import litmus as L
from .litmus import (BRANCH, LABEL, BinOp, Const, Instruction, Loc, Program, Reg, Thread,
                     validate)

_FENCES = {"X86": ["mfence"], "ARMV8": ["dmbfull", "dmbld", "dmbst"],
           "ARMV7": ["dmb"], "ARMV7MCA": ["dmb"], "SCREF": []}


def _events(ins: Instruction, arm: bool) -> int:
    if ins.kind == L.RMW:
        return 2 if arm else 1
    return 1 if L.produces_event(ins) else 0


class _Gen:
    def __init__(self, rng: random.Random, arch: str, locs: list[str], c11: bool = False):
        self.rng, self.arch, self.locs, self.c11 = rng, arch, locs, c11
        self.arm = arch.startswith("ARM")
        self.counter = 0

    def reg(self) -> str:
        self.counter += 1
        return f"r{self.counter}"

    def annot(self) -> Optional[str]:
        return self.rng.choice(["na", "rlx", "acq", "rel", "sc"]) if self.c11 else None

    def loc(self, regs: list[str]) -> Loc:
        base = self.rng.choice(self.locs)
        if regs and self.rng.random() < 0.2:
            # address dependency that always resolves to index 0
            return Loc(base, BinOp("*", Reg(self.rng.choice(regs)), Const(0)))
        # always indexed, so dependent and independent accesses name the same cell
        return Loc(base, Const(0))

    def instr(self, regs: list[str], tid: int) -> Instruction:
        rng = self.rng
        roll = rng.random()
        flavors = self.arch == "ARMV8"
        if roll < 0.35:
            r = self.reg()
            fl = "acq" if flavors and rng.random() < 0.25 else "plain"
            return L.load(r, self.loc(regs), fl, self.annot())
        if roll < 0.75:
            if regs and rng.random() < 0.25:
                val = BinOp("+", Reg(rng.choice(regs)), Const(tid + 1))
            else:
                val = Const(rng.choice([1, 2]) if rng.random() < 0.3 else tid + 1)
            fl = "rel" if flavors and rng.random() < 0.25 else "plain"
            return L.store(self.loc(regs), val, fl, self.annot())
        if roll < 0.88 and _FENCES[self.arch]:
            return L.fence(rng.choice(_FENCES[self.arch]))
        r = self.reg()
        fl = rng.choice(["plain", "plain", "acq", "rel"]) if flavors else "plain"
        if rng.random() < 0.5:
            args = (Const(0), Const(tid + 1))
        else:
            args = (Const(1),)
        return Instruction(L.RMW, reg=r, loc=self.loc([]), args=args,
                           flavor=fl, c11=self.annot())


def _race_free_na(rng: random.Random, bodies: list[list[Instruction]]) -> list[list[Instruction]]:
    """Keep @@na only on locations a single thread touches; C11 assumes na accesses never race."""
    users: dict[str, set[int]] = {}
    for tid, body in enumerate(bodies):
        for ins in body:
            if ins.loc is not None:
                users.setdefault(ins.loc.base, set()).add(tid)
    out = []
    for body in bodies:
        new = []
        for ins in body:
            if ins.c11 == "na" and len(users[ins.loc.base]) > 1:
                ins = replace(ins, c11=rng.choice(["rlx", "acq", "rel", "sc"]))
            new.append(ins)
        out.append(new)
    return out


def random_program(rng: random.Random, arch: str = "ARMV8", max_events: int = 8,
                   threads: tuple[int, int] = (2, 3), locs: Optional[list[str]] = None,
                   c11: bool = False, branches: bool = True) -> Program:
    """A random loop-free program with at most ``max_events`` memory/fence events."""
    arch = arch.upper()
    g = _Gen(rng, arch, locs or ["X", "Y"], c11)
    nthreads = rng.randint(*threads)
    budget = max_events
    bodies: list[list[Instruction]] = [[] for _ in range(nthreads)]
    regs: list[list[str]] = [[] for _ in range(nthreads)]
    # every thread gets at least one access, the rest is spread randomly
    order = list(range(nthreads))
    while budget > 0:
        tid = order.pop(0) if order else rng.randrange(nthreads)
        ins = g.instr(regs[tid], tid)
        cost = _events(ins, g.arm)
        if cost > budget:
            if order or all(bodies):
                break
            continue
        budget -= cost
        bodies[tid].append(ins)
        if ins.reg:
            regs[tid].append(ins.reg)
        if not order and rng.random() < 0.15:
            break
    if branches:
        for tid, body in enumerate(bodies):
            if regs[tid] and len(body) >= 2 and rng.random() < 0.2:
                # forward branch skipping the last instruction
                r = rng.choice(regs[tid])
                pos = next(i for i, ins in enumerate(body) if ins.reg == r) + 1
                if pos < len(body):
                    body.insert(pos, Instruction(BRANCH, value=BinOp("==", Reg(r), Const(1)),
                                                 label="Lend"))
                    body.append(Instruction(LABEL, label="Lend"))
            loads = [i for i, ins in enumerate(body) if ins.kind == L.LOAD]
            if g.arm and loads and rng.random() < 0.2:
                # control dependency through an always-taken branch, then isb
                pos = rng.choice(loads)
                r = Reg(body[pos].reg)
                body[pos + 1:pos + 1] = [Instruction(BRANCH, value=BinOp("==", r, r), label="Lisb"),
                                         Instruction(LABEL, label="Lisb"), L.fence("isb")]
    if c11:
        bodies = _race_free_na(rng, bodies)
    p = Program(arch, {}, tuple(Thread(f"P{i}", tuple(b)) for i, b in enumerate(bodies)), None)
    init = {loc: 0 for loc in L.static_locations(p)}
    p = Program(arch, dict(sorted(init.items())), p.threads, None)
    validate(p)
    return p


def _class_instr(rng: random.Random, cls: str, loc: str, reg: str,
                 deps: list[str]) -> Instruction:
    """An instruction of class ``cls``, with optional address/data deps on ``deps``."""
    idx = Const(0)
    if deps and rng.random() < 0.5:
        idx = BinOp("*", Reg(rng.choice(deps)), Const(0))
    if cls in ("R", "A"):
        return L.load(reg, Loc(loc, idx), "acq" if cls == "A" else "plain")
    if cls in ("W", "L"):
        val = Const(1)
        if deps and rng.random() < 0.4:
            val = BinOp("+", Reg(rng.choice(deps)), Const(1))
        return L.store(Loc(loc, idx), val, "rel" if cls == "L" else "plain")
    return L.fence(cls.lower())


def reorder_context(rng: random.Random, a: str, b: str, max_events: int = 8):
    """An ARMv8 program whose thread 0 holds an adjacent a·b pair, plus the Reorder site.

    Thread 0 gets up to two non-rmw instructions before the pair (whose
    registers the pair may depend on) and maybe one after; one or two other
    threads fill the remaining event budget.
    """
    from .mapping import Transform
    locs = ["X", "Y", "Z"]
    g = _Gen(rng, "ARMV8", locs)
    la, lb = rng.sample(locs, 2)
    pre: list[Instruction] = []
    regs: list[str] = []
    for _ in range(rng.randint(0, 2)):
        ins = g.instr(regs, 0)
        if ins.kind != L.RMW:
            pre.append(ins)
            if ins.reg:
                regs.append(ins.reg)
    post = [g.instr(regs, 0)] if rng.random() < 0.5 else []
    body0 = pre + [_class_instr(rng, a, la, "s1", regs),
                   _class_instr(rng, b, lb, "s2", regs)] + post
    budget = max_events - sum(_events(i, True) for i in body0)
    others: list[list[Instruction]] = [[] for _ in range(rng.randint(1, 2))]
    oregs: list[list[str]] = [[] for _ in others]
    for k in range(12):
        if budget <= 0:
            break
        tid = k % len(others)
        ins = g.instr(oregs[tid], tid + 1)
        if _events(ins, True) > budget:
            continue
        others[tid].append(ins)
        if ins.reg:
            oregs[tid].append(ins.reg)
        budget -= _events(ins, True)
    threads = [Thread("P0", tuple(body0))] + [Thread(f"P{i + 1}", tuple(o))
                                               for i, o in enumerate(others) if o]
    p = Program("ARMV8", {}, tuple(threads), None)
    p = Program("ARMV8", {loc: 0 for loc in L.static_locations(p)}, p.threads, None)
    validate(p)
    return p, Transform("Reorder", (0, len(pre)))

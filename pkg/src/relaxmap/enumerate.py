"""Exhaustive enumeration of consistent executions and behavior sets."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import BudgetExceeded, LoopDetected
from .exec import INIT_TID, Deps, Event, Execution
from .litmus import (BRANCH, FENCE, LABEL, LOAD, REGOP, RMW, STORE, Program, Thread,
                     cfg_has_cycle, eval_expr, expr_regs, thread_cfg)
from .models import (ModelId, check, check_x86, linear_extensions, solve_mo,
                     x86_required_mo)
from .relalg import Relation, bits

DEFAULT_MAX_CANDIDATES = 10 ** 7
DEFAULT_PATHS_LIMIT = 10 ** 5
ARM_MODELS = (ModelId.ARMV7, ModelId.ARMV7MCA, ModelId.ARMV8)


# ---------------------------------------------------------------- behaviors

@dataclass(frozen=True, order=True)
class Behavior:
    """Final register values and final memory.

    ``regs`` holds ((thread, register), value) in thread order; ``mem``
    holds (location, value) for every init location plus any other location
    whose final value is non-zero (untouched cells read as 0).  ``co`` is
    only filled in strict mode.
    """
    regs: tuple = ()
    mem: tuple = ()
    co: tuple = ()

    def reg_map(self) -> dict:
        return dict(self.regs)

    def mem_map(self) -> dict:
        return dict(self.mem)

    def satisfies(self, cond) -> bool:
        return cond.holds(self.reg_map(), self.mem_map())

    def __str__(self) -> str:
        left = " ".join(f"{t}:{r}={v}" for (t, r), v in self.regs)
        right = " ".join(f"{loc}={v}" for loc, v in self.mem)
        s = f"{left} | {right}".strip()
        if self.co:
            s += " || " + " ".join(f"{loc}:" + ",".join(f"{t}:{v}" for t, v in seq)
                                   for loc, seq in self.co)
        return s

    def to_json(self) -> dict:
        d = {"regs": {f"{t}:{r}": v for (t, r), v in self.regs},
             "mem": {loc: v for loc, v in self.mem}}
        if self.co:
            d["co"] = {loc: [[t, v] for t, v in seq] for loc, seq in self.co}
        return d


class BehaviorSet(frozenset):
    """Duplicate-free set of behaviors with a canonical (sorted) rendering."""

    def sorted(self) -> list[Behavior]:
        return sorted(self, key=str)

    def to_text(self) -> str:
        return "".join(f"{b}\n" for b in self.sorted())

    def to_json(self) -> str:
        return json.dumps([b.to_json() for b in self.sorted()], sort_keys=True, indent=2)

    def satisfying(self, cond) -> list[Behavior]:
        return [b for b in self.sorted() if b.satisfies(cond)]


def included(sub: Iterable[Behavior], sup: Iterable[Behavior]) -> tuple[bool, Optional[Behavior]]:
    sup = set(sup)
    for b in sorted(sub, key=str):
        if b not in sup:
            return False, b
    return True, None


# ---------------------------------------------------------------- control paths

@dataclass(frozen=True)
class ControlPath:
    nodes: tuple[int, ...]
    # (branch node, condition, taken?) along the path
    constraints: tuple = ()


def check_loop_free(p: Program) -> None:
    for tid, t in enumerate(p.threads):
        if cfg_has_cycle(thread_cfg(t, tid)):
            raise LoopDetected(tid)


def control_paths(p: Program, limit: int = DEFAULT_PATHS_LIMIT) -> list[list[ControlPath]]:
    check_loop_free(p)
    out = []
    for t in p.threads:
        labels = {ins.label: i for i, ins in enumerate(t.body) if ins.kind == LABEL}
        paths: list[ControlPath] = []

        def walk(i: int, nodes: tuple, cons: tuple):
            if i >= len(t.body):
                paths.append(ControlPath(nodes, cons))
                if len(paths) > limit:
                    raise BudgetExceeded(limit, "paths")
                return
            ins = t.body[i]
            if ins.kind == BRANCH:
                target = labels[ins.label]
                if target == i + 1:
                    walk(i + 1, nodes + (i,), cons)
                else:
                    walk(target, nodes + (i,), cons + ((i, ins.value, True),))
                    walk(i + 1, nodes + (i,), cons + ((i, ins.value, False),))
            else:
                walk(i + 1, nodes + (i,), cons)

        walk(0, (), ())
        out.append(paths)
    return out


# ---------------------------------------------------------------- per-thread traces

@dataclass
class Trace:
    """One thread's straight-line run under guessed read values.

    Events are tuples (op, loc, rval, wval, flavor, excl, node, c11); all
    index pairs are local to the trace.
    """
    events: list
    rmw: list
    addr: list
    data: list
    ctrl: list
    ctrl_isb: list
    addr_isb: list
    regs: tuple


def _thread_traces(t: Thread, domains: dict[str, frozenset], split_rmw: bool, arm: bool,
                   init: dict[str, int], writes_out: Optional[dict] = None) -> list[Trace]:
    body = t.body
    labels = {ins.label: i for i, ins in enumerate(body) if ins.kind == LABEL}
    reg_names = t.registers()
    traces: list[Trace] = []

    def domain(loc: str) -> frozenset:
        base = loc.split("[", 1)[0]
        return domains.get(base, frozenset({0})) | {init.get(loc, 0)}

    def src_of(regs, src) -> int:
        m = 0
        for r in regs:
            m |= src.get(r, 0)
        return m

    def run(pc, env, src, evs, rmw, deps, ctrl_m, isb_ctrl, addr_seen, isb_addr):
        # deps = (addr, data, ctrl, ctrl_isb, addr_isb) lists
        while pc < len(body):
            ins = body[pc]
            k = ins.kind
            if k == LABEL:
                pc += 1
            elif k == REGOP:
                env = dict(env)
                env[ins.reg] = eval_expr(ins.value, env)
                src = dict(src)
                src[ins.reg] = src_of(expr_regs(ins.value), src)
                pc += 1
            elif k == BRANCH:
                ctrl_m |= src_of(expr_regs(ins.value), src)
                pc = labels[ins.label] if eval_expr(ins.value, env) else pc + 1
            elif k == FENCE:
                if ins.flavor == "isb":
                    isb_ctrl, isb_addr = ctrl_m, addr_seen
                else:
                    evs, deps = _emit(evs, deps, ("F", None, None, None, ins.flavor, False, pc, None),
                                      ctrl_m, isb_ctrl, isb_addr, 0, 0)
                pc += 1
            elif k == STORE:
                loc = ins.loc.concrete(env)
                am = src_of(ins.loc.regs(), src)
                dm = src_of(expr_regs(ins.value), src)
                val = eval_expr(ins.value, env)
                if writes_out is not None:
                    writes_out.setdefault(ins.loc.base, set()).add(val)
                evs, deps = _emit(evs, deps, ("W", loc, None, val, ins.flavor, False, pc, ins.c11),
                                  ctrl_m, isb_ctrl, isb_addr, am, dm)
                addr_seen |= am
                pc += 1
            elif k == LOAD:
                loc = ins.loc.concrete(env)
                am = src_of(ins.loc.regs(), src)
                for v in sorted(domain(loc)):
                    k_r = len(evs)
                    evs2, deps2 = _emit(evs, deps, ("R", loc, v, None, ins.flavor, False, pc, ins.c11),
                                        ctrl_m, isb_ctrl, isb_addr, am, 0)
                    env2 = dict(env)
                    env2[ins.reg] = v
                    src2 = dict(src)
                    src2[ins.reg] = 1 << k_r
                    run(pc + 1, env2, src2, evs2, rmw, deps2, ctrl_m, isb_ctrl, addr_seen | am, isb_addr)
                return
            else:  # RMW
                loc = ins.loc.concrete(env)
                am = src_of(ins.loc.regs(), src)
                arg_regs = set()
                for a in ins.args:
                    arg_regs |= expr_regs(a)
                dm = src_of(arg_regs, src)
                args = [eval_expr(a, env) for a in ins.args]
                for v in sorted(domain(loc)):
                    if ins.is_cas:
                        ok, new = v == args[0], args[1]
                    else:
                        ok, new = True, v + args[0]
                    if ok and writes_out is not None:
                        writes_out.setdefault(ins.loc.base, set()).add(new)
                    evs2, deps2, rmw2 = evs, deps, rmw
                    c2 = ctrl_m
                    if arm and ins.flavor == "rel":
                        evs2, deps2 = _emit(evs2, deps2, ("F", None, None, None, "dmbfull", False, pc, None),
                                            c2, isb_ctrl, isb_addr, 0, 0)
                    k_r = len(evs2)
                    if not ok:
                        evs2, deps2 = _emit(evs2, deps2, ("R", loc, v, None, "plain", split_rmw, pc, ins.c11),
                                            c2, isb_ctrl, isb_addr, am, 0)
                        if arm:
                            c2 |= 1 << k_r
                    elif not split_rmw:
                        evs2, deps2 = _emit(evs2, deps2, ("U", loc, v, new, "plain", False, pc, ins.c11),
                                            c2, isb_ctrl, isb_addr, am, dm)
                    else:
                        evs2, deps2 = _emit(evs2, deps2, ("R", loc, v, None, "plain", True, pc, ins.c11),
                                            c2, isb_ctrl, isb_addr, am, 0)
                        if arm:
                            # the exclusive pair is a compare-and-branch loop: later events
                            # depend on the exclusive load by control
                            c2 |= 1 << k_r
                            if not ins.is_cas:
                                dm |= 1 << k_r
                        evs2, deps2 = _emit(evs2, deps2, ("W", loc, None, new, "plain", True, pc, ins.c11),
                                            c2, isb_ctrl, isb_addr, am, dm)
                        rmw2 = rmw + [(k_r, k_r + 1)]
                    if arm and ins.flavor in ("acq", "rel"):
                        kind = "dmbld" if ins.flavor == "acq" else "dmbfull"
                        evs2, deps2 = _emit(evs2, deps2, ("F", None, None, None, kind, False, pc, None),
                                            c2, isb_ctrl, isb_addr, 0, 0)
                    env2 = dict(env)
                    env2[ins.reg] = v
                    src2 = dict(src)
                    src2[ins.reg] = 1 << k_r
                    run(pc + 1, env2, src2, evs2, rmw2, deps2, c2, isb_ctrl, addr_seen | am, isb_addr)
                return
        traces.append(Trace(evs, rmw, *deps, tuple(env.get(r, 0) for r in reg_names)))

    run(0, {}, {}, [], [], ([], [], [], [], []), 0, 0, 0, 0)
    return traces


def _emit(evs, deps, ev, ctrl_m, isb_ctrl, isb_addr, addr_m, data_m):
    k = len(evs)
    addr, data, ctrl, ctrl_isb, addr_isb = deps
    if addr_m:
        addr = addr + [(s, k) for s in bits(addr_m)]
    if data_m:
        data = data + [(s, k) for s in bits(data_m)]
    if ctrl_m:
        ctrl = ctrl + [(s, k) for s in bits(ctrl_m)]
    if isb_ctrl:
        ctrl_isb = ctrl_isb + [(s, k) for s in bits(isb_ctrl)]
    if isb_addr:
        addr_isb = addr_isb + [(s, k) for s in bits(isb_addr)]
    return evs + [ev], (addr, data, ctrl, ctrl_isb, addr_isb)


def value_domains(p: Program, split_rmw: bool = True, arm: bool = False) -> dict[str, frozenset]:
    """Over-approximate the values each location base may hold.

    Iterates write-value discovery; a value produced through a chain of k
    reads appears after k rounds, so (#loads + 1) rounds are enough.
    """
    domains: dict[str, set] = {}
    for loc, v in p.init.items():
        domains.setdefault(loc.split("[", 1)[0], {0}).add(v)
    n_loads = sum(1 for t in p.threads for i in t.body if i.kind in (LOAD, RMW))
    for _ in range(n_loads + 1):
        frozen = {b: frozenset(vs) for b, vs in domains.items()}
        writes: dict[str, set] = {}
        for t in p.threads:
            _thread_traces(t, frozen, split_rmw, arm, p.init, writes)
        changed = False
        for b, vs in writes.items():
            cur = domains.setdefault(b, {0})
            if not vs <= cur:
                cur |= vs
                changed = True
        if not changed:
            break
    return {b: frozenset(vs) for b, vs in domains.items()}


def _read_write_summary(tr: Trace) -> tuple[list, frozenset]:
    """(reads as (loc, rval, latest prior own write value or None), writes as (loc, wval))."""
    last: dict[str, int] = {}
    reads = []
    writes = set()
    for op, loc, rv, wv, *_ in tr.events:
        if op in ("R", "U"):
            reads.append((loc, rv, last.get(loc)))
        if op in ("W", "U"):
            last[loc] = wv
            writes.add((loc, wv))
    return reads, frozenset(writes)


def _feasible(summaries: list, init: dict[str, int]) -> bool:
    """Cheap necessary condition: every guessed read value has some possible source."""
    for k, (reads, _) in enumerate(summaries):
        for loc, rv, prior in reads:
            if prior is None:
                if init.get(loc, 0) == rv:
                    continue
            elif prior == rv:
                continue
            if not any((loc, rv) in w for j, (_, w) in enumerate(summaries) if j != k):
                return False
    return True


# ---------------------------------------------------------------- candidates

class _Skeleton:
    """Everything about a candidate execution except rf/co/mo."""

    def __init__(self, p: Program, combo: tuple[Trace, ...]):
        locs = set()
        for tr in combo:
            for ev in tr.events:
                if ev[1] is not None:
                    locs.add(ev[1])
        locs = sorted(locs)
        events: list[Event] = []
        for loc in locs:
            events.append(Event(len(events), INIT_TID, "W", loc, None, p.init.get(loc, 0)))
        self.n_init = len(events)
        offsets = []
        for tid, tr in enumerate(combo):
            offsets.append(len(events))
            for ev in tr.events:
                op, loc, rv, wv, fl, ex, node, c11 = ev
                events.append(Event(len(events), tid, op, loc, rv, wv, fl, ex, node, c11))
        n = len(events)
        self.n = n
        self.events = events
        self.offsets = offsets
        self.combo = combo
        self.locs = locs

        po = [0] * n
        st = [0] * n
        for tid, tr in enumerate(combo):
            base = offsets[tid]
            k = len(tr.events)
            tmask = ((1 << k) - 1) << base
            for i in range(k):
                st[base + i] = tmask
                po[base + i] = tmask & ~((1 << (base + i + 1)) - 1)
        self.po = Relation(n, po)
        self.same_thread = Relation(n, st)

        def lift(pairs_per_thread):
            rows = [0] * n
            for tid, pairs in enumerate(pairs_per_thread):
                b = offsets[tid]
                for a, c in pairs:
                    rows[b + a] |= 1 << (b + c)
            return Relation(n, rows)

        self.rmw = lift([tr.rmw for tr in combo])
        self.deps = Deps(lift([tr.addr for tr in combo]), lift([tr.data for tr in combo]),
                         lift([tr.ctrl for tr in combo]), lift([tr.ctrl_isb for tr in combo]),
                         lift([tr.addr_isb for tr in combo]))
        masks = {k: 0 for k in ("R", "W", "U", "F", "init", "A", "L", "F_full", "F_ld", "F_st")}
        by_loc: dict[str, int] = {}
        for e in events:
            bit = 1 << e.id
            masks[e.op] |= bit
            if e.is_init:
                masks["init"] |= bit
            if e.op == "R" and e.flavor == "acq":
                masks["A"] |= bit
            if e.op == "W" and e.flavor == "rel":
                masks["L"] |= bit
            if e.op == "F":
                if e.flavor in ("mfence", "dmb", "dmbfull"):
                    masks["F_full"] |= bit
                elif e.flavor == "dmbld":
                    masks["F_ld"] |= bit
                elif e.flavor == "dmbst":
                    masks["F_st"] |= bit
            if e.loc is not None:
                by_loc[e.loc] = by_loc.get(e.loc, 0) | bit
        masks["reads"] = masks["R"] | masks["U"]
        masks["writes"] = masks["W"] | masks["U"]
        masks["rmw_dom"] = self.rmw.domain()
        masks["rmw_cod"] = self.rmw.codomain()
        self.same_loc = Relation(n, [by_loc.get(e.loc, 0) if e.loc is not None else 0 for e in events])
        self.shared = dict(masks)
        self.shared["same_thread"] = self.same_thread
        self.shared["same_loc"] = self.same_loc
        self.shared["poloc"] = self.po & self.same_loc

    def rf_candidates(self) -> Optional[list[list[int]]]:
        """Per read event (in id order), the admissible rf sources."""
        events = self.events
        out = []
        for e in events:
            if not e.is_read:
                continue
            prior = None
            if not e.is_init:
                for f in reversed(events[self.offsets[e.tid]:e.id]):
                    if f.is_write and f.loc == e.loc:
                        prior = f.id
                        break
            cands = []
            for w in events:
                if not w.is_write or w.loc != e.loc or w.wval != e.rval or w.id == e.id:
                    continue
                if w.is_init:
                    if prior is None:
                        cands.append(w.id)
                elif w.tid == e.tid:
                    if w.id == prior:
                        cands.append(w.id)
                else:
                    cands.append(w.id)
            if not cands:
                return None
            out.append((e.id, cands))
        return out

    def co_choices(self) -> list[list[tuple[int, ...]]]:
        """Per location, the co orders (init first) respecting same-thread po."""
        per_loc = []
        for loc in self.locs:
            ws = [e for e in self.events if e.is_write and e.loc == loc and not e.is_init]
            init = next(e.id for e in self.events if e.is_init and e.loc == loc)
            orders = []
            for perm in itertools.permutations(ws):
                ok = True
                last_pos: dict[int, int] = {}
                for e in perm:
                    if e.tid in last_pos and last_pos[e.tid] > e.id:
                        ok = False
                        break
                    last_pos[e.tid] = e.id
                if ok:
                    orders.append((init,) + tuple(e.id for e in perm))
            per_loc.append(orders)
        return per_loc

    def make(self, rf_rows: list[int], co_rows: list[int], mo: Optional[Relation] = None) -> Execution:
        x = Execution.__new__(Execution)
        x.events = self.events
        x.n = self.n
        x.po = self.po
        x.rf = Relation(self.n, rf_rows)
        x.co = Relation(self.n, co_rows)
        x.mo = mo
        x.rmw = self.rmw
        x.deps = self.deps
        x.__dict__.update(self.shared)
        return x

    def behavior(self, p: Program, x: Execution, strict: bool = False) -> Behavior:
        regs = []
        for tid, tr in enumerate(self.combo):
            t = p.threads[tid]
            for name, val in zip(t.registers(), tr.regs):
                regs.append(((t.name, name), val))
        final: dict[str, int] = {}
        co_seq = []
        co = x.co
        for loc in self.locs:
            ws = [e for e in self.events if e.is_write and e.loc == loc]
            top = next(e for e in ws if not (co.rows[e.id] & self.same_loc.rows[e.id] & ~(1 << e.id)))
            final[loc] = top.wval
            if strict:
                ordered = sorted(ws, key=lambda e: -len([w for w in ws if (co.rows[e.id] >> w.id) & 1]))
                co_seq.append((loc, tuple(("init" if e.is_init else p.threads[e.tid].name, e.wval)
                                          for e in ordered)))
        mem = {loc: v for loc, v in p.init.items()}
        for loc, v in final.items():
            if loc in p.init or v != 0:
                mem[loc] = v
        return Behavior(tuple(regs), tuple(sorted(mem.items())), tuple(co_seq))


def _co_rows(n: int, orders: tuple) -> list[int]:
    rows = [0] * n
    for order in orders:
        for i, a in enumerate(order):
            for b in order[i + 1:]:
                rows[a] |= 1 << b
    return rows


def _candidates(p: Program, m: ModelId, max_candidates: int, all_mo: bool = True,
                paths_limit: int = DEFAULT_PATHS_LIMIT) -> Iterator[tuple[_Skeleton, Execution]]:
    """Yield (skeleton, execution) for every m-consistent candidate."""
    m = ModelId(m)
    check_loop_free(p)
    split_rmw = m != ModelId.X86
    arm = m in ARM_MODELS
    domains = value_domains(p, split_rmw, arm)
    per_thread = [_thread_traces(t, domains, split_rmw, arm, p.init) for t in p.threads]
    total_paths = 1
    for ts in per_thread:
        total_paths *= max(1, len(ts))
    if total_paths > paths_limit:
        raise BudgetExceeded(paths_limit, "thread-trace combinations")
    count = 0
    summaries = [[_read_write_summary(tr) for tr in ts] for ts in per_thread]
    for idx in itertools.product(*(range(len(ts)) for ts in per_thread)):
        if not _feasible([summaries[t][i] for t, i in enumerate(idx)], p.init):
            continue
        combo = tuple(per_thread[t][i] for t, i in enumerate(idx))
        sk = _Skeleton(p, combo)
        rf_c = sk.rf_candidates()
        if rf_c is None:
            continue
        co_c = sk.co_choices()
        reads = [r for r, _ in rf_c]
        for srcs in itertools.product(*(c for _, c in rf_c)):
            rf_rows = [0] * sk.n
            for r, w in zip(reads, srcs):
                rf_rows[w] |= 1 << r
            for orders in itertools.product(*co_c):
                count += 1
                if count > max_candidates:
                    raise BudgetExceeded(max_candidates)
                co_rows = _co_rows(sk.n, orders)
                x = sk.make(rf_rows, co_rows)
                if m != ModelId.X86:
                    if check(m, x):
                        yield sk, x
                    continue
                if all_mo:
                    req = x86_required_mo(x)
                    for mo in linear_extensions(req, x.writes | x.F_full):
                        count += 1
                        if count > max_candidates:
                            raise BudgetExceeded(max_candidates)
                        y = sk.make(rf_rows, co_rows, mo)
                        if check_x86(y):
                            yield sk, y
                else:
                    mo = solve_mo(x)
                    if mo is None:
                        continue
                    y = sk.make(rf_rows, co_rows, mo)
                    if check_x86(y):
                        yield sk, y


def enumerate_executions(p: Program, m: ModelId, max_candidates: int = DEFAULT_MAX_CANDIDATES,
                         all_mo: bool = True) -> Iterator[Execution]:
    """Stream every m-consistent execution of a loop-free program.

    Under X86 each consistent mo is yielded separately unless ``all_mo`` is
    False, in which case one witness mo per (rf, co) candidate is produced.
    """
    for _, x in _candidates(p, m, max_candidates, all_mo):
        yield x


def behaviors(p: Program, m: ModelId, max_candidates: int = DEFAULT_MAX_CANDIDATES,
              strict: bool = False, paths_limit: int = DEFAULT_PATHS_LIMIT) -> BehaviorSet:
    out = set()
    for sk, x in _candidates(p, m, max_candidates, all_mo=False, paths_limit=paths_limit):
        out.add(sk.behavior(p, x, strict))
    return BehaviorSet(out)


def executions_with_behaviors(p: Program, m: ModelId, max_candidates: int = DEFAULT_MAX_CANDIDATES,
                              all_mo: bool = False) -> Iterator[tuple[Execution, Behavior]]:
    for sk, x in _candidates(p, m, max_candidates, all_mo):
        yield x, sk.behavior(p, x)


def candidate_executions(p: Program, m: ModelId = ModelId.ARMV8,
                         max_candidates: int = DEFAULT_MAX_CANDIDATES) -> Iterator[tuple[Execution, Behavior]]:
    """Every well-formed candidate (no consistency filter), with its behavior.

    ``m`` only selects the event shape (U events for X86, exclusive pairs
    otherwise, ARM-specific rmw expansion for ARM models).
    """
    m = ModelId(m)
    check_loop_free(p)
    split_rmw = m != ModelId.X86
    arm = m in ARM_MODELS
    domains = value_domains(p, split_rmw, arm)
    per_thread = [_thread_traces(t, domains, split_rmw, arm, p.init) for t in p.threads]
    count = 0
    summaries = [[_read_write_summary(tr) for tr in ts] for ts in per_thread]
    for idx in itertools.product(*(range(len(ts)) for ts in per_thread)):
        if not _feasible([summaries[t][i] for t, i in enumerate(idx)], p.init):
            continue
        combo = tuple(per_thread[t][i] for t, i in enumerate(idx))
        sk = _Skeleton(p, combo)
        rf_c = sk.rf_candidates()
        if rf_c is None:
            continue
        co_c = sk.co_choices()
        reads = [r for r, _ in rf_c]
        for srcs in itertools.product(*(c for _, c in rf_c)):
            rf_rows = [0] * sk.n
            for r, w in zip(reads, srcs):
                rf_rows[w] |= 1 << r
            for orders in itertools.product(*co_c):
                count += 1
                if count > max_candidates:
                    raise BudgetExceeded(max_candidates)
                x = sk.make(rf_rows, _co_rows(sk.n, orders))
                yield x, sk.behavior(p, x)


def outcome_allowed(p: Program, m: ModelId, **kw) -> bool:
    if p.outcome is None:
        raise ValueError("program has no exists clause")
    return any(b.satisfies(p.outcome) for b in behaviors(p, m, **kw))

"""Independent reference implementations used only by the test suite.

None of these share code with the axiomatic checkers: the simulators run
programs operationally, and the relation oracles work on plain Python sets.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from relaxmap.enumerate import Behavior, BehaviorSet
from relaxmap.litmus import (BRANCH, FENCE, LABEL, LOAD, REGOP, RMW, STORE, Program,
                             eval_expr)


# ---------------------------------------------------------------- operational simulators

def _behavior(p: Program, regs_per_thread, mem) -> Behavior:
    regs = []
    for t, env in zip(p.threads, regs_per_thread):
        for r in t.registers():
            regs.append(((t.name, r), dict(env).get(r, 0)))
    final = dict(p.init)
    for loc, v in mem:
        if loc in p.init or v != 0:
            final[loc] = v
    return Behavior(tuple(regs), tuple(sorted(final.items())), ())


def _labels(t):
    return {ins.label: i for i, ins in enumerate(t.body) if ins.kind == LABEL}


def _rmw_new(ins, env, old):
    args = [eval_expr(a, env) for a in ins.args]
    if len(args) == 2:
        return args[1] if old == args[0] else None
    return old + args[0]


def _local_step(ins, env, pc, labels):
    """Advance over non-memory instructions. Returns (env, pc) or None for memory ops."""
    if ins.kind == LABEL:
        return env, pc + 1
    if ins.kind == REGOP:
        d = dict(env)
        d[ins.reg] = eval_expr(ins.value, d)
        return tuple(sorted(d.items())), pc + 1
    if ins.kind == BRANCH:
        return env, (labels[ins.label] if eval_expr(ins.value, dict(env)) else pc + 1)
    return None


def sc_simulate(p: Program) -> BehaviorSet:
    """All final states of all interleavings, one instruction at a time."""
    threads = p.threads
    labels = [_labels(t) for t in threads]
    out = set()
    seen = set()
    init_state = (tuple(0 for _ in threads), tuple(() for _ in threads),
                  tuple(sorted(p.init.items())))
    stack = [init_state]
    while stack:
        st = stack.pop()
        if st in seen:
            continue
        seen.add(st)
        pcs, envs, mem = st
        done = True
        for tid, t in enumerate(threads):
            pc = pcs[tid]
            if pc >= len(t.body):
                continue
            done = False
            ins = t.body[pc]
            env = envs[tid]
            d = dict(env)
            m = dict(mem)
            local = _local_step(ins, env, pc, labels[tid])
            if local is not None:
                new_env, new_pc = local
            elif ins.kind == FENCE:
                new_env, new_pc = env, pc + 1
            else:
                loc = ins.loc.concrete(d)
                if ins.kind == STORE:
                    m[loc] = eval_expr(ins.value, d)
                elif ins.kind == LOAD:
                    d[ins.reg] = m.get(loc, 0)
                else:
                    old = m.get(loc, 0)
                    new = _rmw_new(ins, d, old)
                    if new is not None:
                        m[loc] = new
                    d[ins.reg] = old
                new_env, new_pc = tuple(sorted(d.items())), pc + 1
            stack.append((pcs[:tid] + (new_pc,) + pcs[tid + 1:],
                          envs[:tid] + (new_env,) + envs[tid + 1:],
                          tuple(sorted(m.items()))))
        if done:
            out.add(_behavior(p, [dict(e) for e in envs], mem))
    return BehaviorSet(out)


def tso_simulate(p: Program) -> BehaviorSet:
    """x86-TSO as an abstract machine: per-thread FIFO store buffers over one memory.

    Stores enter the buffer; loads read the newest buffered store to the same
    location, else memory; mfence and a locked rmw that writes need an empty buffer; the
    oldest buffered store may drain to memory at any time.  A CAS whose
    comparison fails behaves as a plain load.
    """
    threads = p.threads
    labels = [_labels(t) for t in threads]
    out = set()
    seen = set()
    init_state = (tuple(0 for _ in threads), tuple(() for _ in threads),
                  tuple(() for _ in threads), tuple(sorted(p.init.items())))
    stack = [init_state]
    while stack:
        st = stack.pop()
        if st in seen:
            continue
        seen.add(st)
        pcs, envs, bufs, mem = st
        finished = True
        for tid, t in enumerate(threads):
            buf = bufs[tid]
            if buf:
                finished = False
                (loc, val), rest = buf[0], buf[1:]
                m = dict(mem)
                m[loc] = val
                stack.append((pcs, envs, bufs[:tid] + (rest,) + bufs[tid + 1:],
                              tuple(sorted(m.items()))))
            pc = pcs[tid]
            if pc >= len(t.body):
                continue
            finished = False
            ins = t.body[pc]
            env = envs[tid]
            d = dict(env)
            new_buf, new_mem = buf, mem
            local = _local_step(ins, env, pc, labels[tid])
            if local is not None:
                new_env, new_pc = local
            elif ins.kind == FENCE:
                if buf:
                    continue
                new_env, new_pc = env, pc + 1
            else:
                loc = ins.loc.concrete(d)
                if ins.kind == STORE:
                    new_buf = buf + ((loc, eval_expr(ins.value, d)),)
                elif ins.kind == LOAD:
                    hits = [v for l, v in buf if l == loc]
                    d[ins.reg] = hits[-1] if hits else dict(mem).get(loc, 0)
                else:
                    hits = [v for l, v in buf if l == loc]
                    old = hits[-1] if hits else dict(mem).get(loc, 0)
                    new = _rmw_new(ins, d, old)
                    if new is None:
                        # a failed CAS is an ordinary load
                        d[ins.reg] = old
                    else:
                        if buf:
                            continue
                        m = dict(mem)
                        m[loc] = new
                        d[ins.reg] = old
                        new_mem = tuple(sorted(m.items()))
                new_env, new_pc = tuple(sorted(d.items())), pc + 1
            stack.append((pcs[:tid] + (new_pc,) + pcs[tid + 1:],
                          envs[:tid] + (new_env,) + envs[tid + 1:],
                          bufs[:tid] + (new_buf,) + bufs[tid + 1:], new_mem))
        if finished:
            out.add(_behavior(p, [dict(e) for e in envs], mem))
    return BehaviorSet(out)


# ---------------------------------------------------------------- set-based relation oracles

def pairs_of(rel) -> set:
    return set(rel.pairs())


def compose(a: set, b: set) -> set:
    return {(x, z) for (x, y) in a for (y2, z) in b if y == y2}


def closure(a: set) -> set:
    out = set(a)
    while True:
        nxt = out | compose(out, out)
        if nxt == out:
            return out
        out = nxt


def acyclic(a: set) -> bool:
    return not any(x == y for x, y in closure(a))


def ppo_oracle(x) -> set:
    """ARMv7 preserved program order by naive saturation over Python sets.

    Base relations are rebuilt from the raw events; each of the four rules is
    applied as a set comprehension until nothing changes.
    """
    ev = x.events
    n = len(ev)
    po = pairs_of(x.po)
    rf = pairs_of(x.rf)
    co = pairs_of(x.co)

    def same_thread(a, b):
        return not ev[a].is_init and not ev[b].is_init and ev[a].tid == ev[b].tid

    fr = {(r, w2) for (w, r) in rf for (w1, w2) in co if w1 == w and r != w2}
    rfe = {(a, b) for a, b in rf if not same_thread(a, b)}
    rfi = rf - rfe
    fre = {(a, b) for a, b in fr if not same_thread(a, b)}
    coe = {(a, b) for a, b in co if not same_thread(a, b)}
    rdw = compose(fre, rfe) & po
    detour = compose(coe, rfe) & po
    d = x.deps
    addr, data, ctrl, cisb = (pairs_of(d.addr), pairs_of(d.data), pairs_of(d.ctrl),
                              pairs_of(d.ctrl_isb))
    ii = addr | data | rdw | rfi
    ic: set = set()
    ci = cisb | detour
    cc = data | ctrl | addr | compose(addr, po)
    while True:
        ii2 = ii | ci | compose(ic, ci) | compose(ii, ii)
        ic2 = ic | ii | cc | compose(ic, cc) | compose(ii, ic)
        ci2 = ci | compose(ci, ii) | compose(ci, ci)
        cc2 = cc | ci | compose(ci, ic) | compose(cc, cc)
        if (ii2, ic2, ci2, cc2) == (ii, ic, ci, cc):
            break
        ii, ic, ci, cc = ii2, ic2, ci2, cc2
    reads = {e.id for e in ev if e.op == "R"}
    writes = {e.id for e in ev if e.op == "W"}
    return ({(a, b) for a, b in ii if a in reads and b in reads}
            | {(a, b) for a, b in ic if a in reads and b in writes})


def ppo_paths_oracle(x) -> set:
    """The same relation by path search over a labelled graph.

    An xy-edge from a to b exists iff some path of base edges composes, under
    the grammar of the four rules, to type xy. States are (node, type) and we
    search all paths, tracking the composed type; composition follows the
    rules read as a finite automaton over the alphabet {ii, ic, ci, cc}.
    """
    ev = x.events
    po = pairs_of(x.po)
    rf = pairs_of(x.rf)
    co = pairs_of(x.co)

    def same_thread(a, b):
        return not ev[a].is_init and not ev[b].is_init and ev[a].tid == ev[b].tid

    fr = {(r, w2) for (w, r) in rf for (w1, w2) in co if w1 == w and r != w2}
    rfe = {(a, b) for a, b in rf if not same_thread(a, b)}
    fre = {(a, b) for a, b in fr if not same_thread(a, b)}
    coe = {(a, b) for a, b in co if not same_thread(a, b)}
    d = x.deps
    addr, data, ctrl, cisb = (pairs_of(d.addr), pairs_of(d.data), pairs_of(d.ctrl),
                              pairs_of(d.ctrl_isb))
    base = {
        "ii": addr | data | (compose(fre, rfe) & po) | (rf - rfe),
        "ci": cisb | (compose(coe, rfe) & po),
        "cc": data | ctrl | addr | compose(addr, po),
        "ic": set(),
    }
    # subsumption: ci ⊆ ii, ci ⊆ cc, ii ⊆ ic, cc ⊆ ic
    up = {"ci": {"ci", "ii", "cc", "ic"}, "ii": {"ii", "ic"}, "cc": {"cc", "ic"}, "ic": {"ic"}}
    # products allowed by the rules
    prod = {("ic", "ci"): "ii", ("ii", "ii"): "ii", ("ic", "cc"): "ic", ("ii", "ic"): "ic",
            ("ci", "ii"): "ci", ("ci", "ci"): "ci", ("ci", "ic"): "cc", ("cc", "cc"): "cc"}
    types = {}
    for t, rel in base.items():
        for e in rel:
            types.setdefault(e, set()).update(up[t])
    changed = True
    while changed:
        changed = False
        items = list(types.items())
        for (a, b), t1 in items:
            for (b2, c), t2 in items:
                if b != b2:
                    continue
                for x1 in list(t1):
                    for x2 in list(t2):
                        r = prod.get((x1, x2))
                        if r is None:
                            continue
                        cur = types.setdefault((a, c), set())
                        if not up[r] <= cur:
                            cur |= up[r]
                            changed = True
    reads = {e.id for e in ev if e.op == "R"}
    writes = {e.id for e in ev if e.op == "W"}
    return ({(a, b) for (a, b), t in types.items() if "ii" in t and a in reads and b in reads}
            | {(a, b) for (a, b), t in types.items() if "ic" in t and a in reads and b in writes})

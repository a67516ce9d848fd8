"""The exhaustive small x86 corpus: two threads, up to three instructions each.

Each instruction is one of seven variants over locations X and Y: a store of
the thread's own value, a load, mfence, or a CAS from 0 to the thread's value.
Programs related by swapping the threads or swapping X and Y have the same
behaviors up to renaming, so by default only one representative per orbit is
kept.
"""
from __future__ import annotations

import itertools

from relaxmap import litmus as L
from relaxmap.litmus import RMW, Const, Instruction, Loc, Program, Thread

VARIANTS = ("stX", "stY", "ldX", "ldY", "mf", "casX", "casY")
_LOC_SWAP = {"stX": "stY", "stY": "stX", "ldX": "ldY", "ldY": "ldX", "mf": "mf",
             "casX": "casY", "casY": "casX"}


def thread_shapes(max_len: int = 3):
    for n in range(max_len + 1):
        yield from itertools.product(VARIANTS, repeat=n)


def _canonical(t0, t1) -> bool:
    sw0 = tuple(_LOC_SWAP[v] for v in t0)
    sw1 = tuple(_LOC_SWAP[v] for v in t1)
    me = (t0, t1)
    return me <= min((t1, t0), (sw0, sw1), (sw1, sw0))


def shapes(reduced: bool = True, max_len: int = 3):
    all_threads = list(thread_shapes(max_len))
    for t0 in all_threads:
        for t1 in all_threads:
            if not reduced or _canonical(t0, t1):
                yield t0, t1


def _instr(v: str, tid: int, k: int) -> Instruction:
    if v == "mf":
        return L.fence("mfence")
    loc = Loc(v[-1], None)
    if v.startswith("st"):
        return L.store(loc, Const(tid + 1), "plain")
    reg = f"r{k}"
    if v.startswith("ld"):
        return L.load(reg, loc, "plain")
    return Instruction(RMW, reg=reg, loc=loc, args=(Const(0), Const(tid + 1)), flavor="plain")


def build(shape) -> Program:
    threads = tuple(Thread(f"P{tid}", tuple(_instr(v, tid, k) for k, v in enumerate(body)))
                    for tid, body in enumerate(shape))
    return Program("X86", {"X": 0, "Y": 0}, threads, None)


def corpus(reduced: bool = True):
    for shape in shapes(reduced):
        yield shape, build(shape)

"""Random search for programs showing that an unsafe reordering adds behaviors.

Writes one .lit file per unsafe table cell that lacks a witness. Run from
the repository root:  python3 tests/tools/find_witnesses.py [--seed N]
"""
from __future__ import annotations

import argparse
import random
from pathlib import Path

from relaxmap.errors import BudgetExceeded
from relaxmap.litmus import emit
from relaxmap.mapping import CLASSES, apply_transform, grows, reorder_cell
from relaxmap.randprog import reorder_context

OUT = Path(__file__).resolve().parents[2] / "src" / "relaxmap" / "data" / "witnesses"


def search(a, b, rng, tries=20000):
    best = None
    for _ in range(tries):
        p, t = reorder_context(rng, a, b)
        try:
            q = apply_transform(p, t, enforce_safety=False)
        except Exception:
            continue
        try:
            w = grows(p, q)
        except BudgetExceeded:
            continue
        if w is not None:
            size = sum(len(th.body) for th in p.threads)
            if best is None or size < best[0]:
                best = (size, p, t, w)
            if size <= 6:
                break
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    OUT.mkdir(parents=True, exist_ok=True)
    for a in CLASSES:
        for b in CLASSES:
            if reorder_cell(a, b) is not False:
                continue
            path = OUT / f"reorder_{a.lower()}_{b.lower()}.lit"
            if path.exists() and not args.force:
                continue
            found = search(a, b, rng)
            if found is None:
                print(f"{a}·{b}: no witness found")
                continue
            _, p, t, w = found
            header = (f"# search-derived witness: reordering {a}·{b} adds a behavior\n"
                      f"#! cell {a} {b}\n#! transform {t.kind} {t.site[0]} {t.site[1]}\n"
                      f"#! growth {w}\n")
            path.write_text(header + emit(p))
            print(f"{a}·{b}: {w}")


if __name__ == "__main__":
    main()

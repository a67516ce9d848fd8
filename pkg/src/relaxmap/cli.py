"""Command-line entry point. Every subcommand is a thin adapter over the library."""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import fenceopt, mapping, robust
from .enumerate import DEFAULT_MAX_CANDIDATES, DEFAULT_PATHS_LIMIT, behaviors
from .errors import RelaxMapError
from .litmus import emit, parse_file
from .models import ModelId

EXIT_OK = 0
EXIT_FINDING = 2          # forbidden outcome, unsound mapping, non-robust program
EXIT_ENFORCED = 3
EXIT_USAGE = 64
EXIT_DATA = 65            # unreadable input, parse errors, exceeded budgets
CORPUS_ENV = "RELAXMAP_CORPUS"

_EXPECT_RE = re.compile(r"^#!\s*expect\s+(\S+)\s+(allowed|forbidden)\s*$")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _budget(sp) -> None:
    sp.add_argument("--max-candidates", type=int, default=DEFAULT_MAX_CANDIDATES)
    sp.add_argument("--paths-limit", type=int, default=DEFAULT_PATHS_LIMIT)


def _model(name: str) -> ModelId:
    try:
        return ModelId.parse(name)
    except (KeyError, ValueError):
        raise _UsageError(f"unknown model {name!r}")


def _out(args, text: str, doc) -> None:
    if args.json:
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="relaxmap", description="Weak memory model litmus analyses.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("behaviors", help="enumerate final-state behaviors")
    sp.add_argument("--model", required=True)
    sp.add_argument("--strict", action="store_true", help="also compare coherence orders")
    _budget(sp)

    sp = sub.add_parser("check", help="is the exists-clause outcome allowed")
    sp.add_argument("--model", required=True)
    _budget(sp)

    for name in ("map", "verify-mapping"):
        sp = sub.add_parser(name)
        sp.add_argument("--from", dest="src", required=True)
        sp.add_argument("--to", dest="dst", required=True)
        sp.add_argument("--c11", action="store_true")
        sp.add_argument("--scheme", default=None, help="variant name, e.g. broken-ldr")
        sp.add_argument("--table", default=None, help="extra scheme table file")
        if name == "verify-mapping":
            sp.add_argument("--strict", action="store_true")
            _budget(sp)

    sp = sub.add_parser("fence-elim")
    sp.add_argument("--arch", default=None)
    sp.add_argument("--provenance", choices=("x86", "armv7"), default=None)

    sp = sub.add_parser("robust")
    sp.add_argument("--m", required=True)
    sp.add_argument("--k", required=True)
    sp.add_argument("--enforce", action="store_true")

    sp = sub.add_parser("corpus")
    sp.add_argument("action", choices=("run",))
    sp.add_argument("root", nargs="?", default=None)
    sp.add_argument("--jobs", type=int, default=None)
    _budget(sp)

    for name, p in sub.choices.items():
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if name != "corpus":
            p.add_argument("file")
    return ap


def _scheme(args) -> mapping.MappingScheme:
    if args.table:
        extra = mapping.load_schemes(Path(args.table).read_text(), mapping.SCHEMES)
        mapping.SCHEMES.update(extra)
    try:
        return mapping.get_scheme(args.src, args.dst, args.c11, args.scheme)
    except KeyError as e:
        raise _UsageError(str(e.args[0]))


def cmd_behaviors(args) -> int:
    m = _model(args.model)
    p = parse_file(args.file)
    bs = behaviors(p, m, args.max_candidates, args.strict, args.paths_limit)
    _out(args, bs.to_text(), {"model": m.value,
                              "behaviors": [b.to_json() for b in bs.sorted()]})
    return EXIT_OK


def cmd_check(args) -> int:
    m = _model(args.model)
    p = parse_file(args.file)
    if p.outcome is None:
        raise _UsageError("the program has no exists clause")
    bs = behaviors(p, m, args.max_candidates, paths_limit=args.paths_limit)
    hits = bs.satisfying(p.outcome)
    verdict = "allowed" if hits else "forbidden"
    text = f"{m.value}: {verdict}\n" + "".join(f"  {b}\n" for b in hits)
    _out(args, text, {"model": m.value, "verdict": verdict,
                      "witnesses": [b.to_json() for b in hits]})
    return EXIT_OK if hits else EXIT_FINDING


def cmd_map(args) -> int:
    p = parse_file(args.file)
    q = mapping.map_program(p, _scheme(args))
    _out(args, emit(q), {"scheme": _scheme(args).name, "program": emit(q)})
    return EXIT_OK


def cmd_verify(args) -> int:
    p = parse_file(args.file)
    s = _scheme(args)
    v = mapping.verify_mapping(p, s, strict=args.strict, max_candidates=args.max_candidates,
                               paths_limit=args.paths_limit)
    text = f"{s.name}: {'sound' if v.sound else 'unsound'}\n"
    if not v.sound:
        text += f"  target-only behavior: {v.witness}\n"
    _out(args, text, {"scheme": s.name, "sound": v.sound,
                      "witness": v.witness.to_json() if v.witness else None})
    return EXIT_OK if v.sound else EXIT_FINDING


def cmd_fence_elim(args) -> int:
    p = parse_file(args.file)
    if args.arch and args.arch.upper().replace("-", "") != p.arch:
        raise _UsageError(f"--arch {args.arch} does not match the program's arch {p.arch.lower()}")
    q, led = fenceopt.eliminate_fences(p, args.provenance)
    ledger = fenceopt.ledger_text(p, led)
    _out(args, emit(q) + ledger, {
        "program": emit(q),
        "kept": [{"thread": t, "node": f, "fence": k, "covers": list(c) if c else None}
                 for t, f, k, c in led.kept],
        "deleted": [{"thread": t, "node": f, "fence": k} for t, f, k in led.deleted],
        "weakened": [{"thread": t, "node": f} for t, f in led.weakened],
    })
    return EXIT_OK


def cmd_robust(args) -> int:
    pair = robust.RobustPair(_model(args.m), _model(args.k))
    p = parse_file(args.file)
    if args.enforce:
        q, rep = robust.enforce_robust(p, pair)
        text = rep.to_text(p) + ("" if rep.robust else emit(q))
        doc = json.loads(rep.to_json())
        doc["program"] = emit(q)
        _out(args, text, doc)
        return EXIT_OK if rep.robust else EXIT_ENFORCED
    rep = robust.check_robust(p, pair)
    _out(args, rep.to_text(p), json.loads(rep.to_json()))
    return EXIT_OK if rep.robust else EXIT_FINDING


def expectations(path: Path) -> list[tuple[str, str]]:
    out = []
    for line in path.read_text().splitlines():
        m = _EXPECT_RE.match(line.strip())
        if m:
            out.append((m.group(1), m.group(2)))
    return out


def _run_file(job: tuple[str, int, int]) -> list[dict]:
    path, maxc, paths = job
    rows = []
    try:
        p = parse_file(path)
    except RelaxMapError as e:
        return [{"file": path, "model": "-", "expected": "-", "got": f"error: {e}", "ok": False}]
    for model, want in expectations(Path(path)):
        try:
            bs = behaviors(p, ModelId.parse(model), maxc, paths_limit=paths)
            got = "allowed" if bs.satisfying(p.outcome) else "forbidden"
        except (RelaxMapError, KeyError, ValueError) as e:
            got = f"error: {e}"
        rows.append({"file": path, "model": model, "expected": want, "got": got, "ok": got == want})
    return rows


def cmd_corpus(args) -> int:
    root = args.root or os.environ.get(CORPUS_ENV)
    if not root:
        raise _UsageError(f"give a corpus directory or set {CORPUS_ENV}")
    files = sorted(str(f) for f in Path(root).glob("*.lit"))
    if not files:
        raise _UsageError(f"no .lit files under {root}")
    jobs = [(f, args.max_candidates, args.paths_limit) for f in files]
    workers = args.jobs or os.cpu_count() or 1
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_file, jobs))
    else:
        results = [_run_file(j) for j in jobs]
    rows = [r for rs in results for r in rs]
    width = max(len(Path(r["file"]).name) for r in rows) if rows else 4
    lines = [f"{'file':{width}}  {'model':9} {'expected':9} {'got':9} status"]
    for r in rows:
        lines.append(f"{Path(r['file']).name:{width}}  {r['model']:9} {r['expected']:9} "
                     f"{r['got']:9} {'ok' if r['ok'] else 'FAIL'}")
    passed = sum(r["ok"] for r in rows)
    lines.append(f"{passed}/{len(rows)} expectations met")
    _out(args, "\n".join(lines) + "\n", {"results": rows, "passed": passed, "total": len(rows)})
    return EXIT_OK if passed == len(rows) else 1


COMMANDS = {"behaviors": cmd_behaviors, "check": cmd_check, "map": cmd_map,
            "verify-mapping": cmd_verify, "fence-elim": cmd_fence_elim, "robust": cmd_robust,
            "corpus": cmd_corpus}


def run(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.cmd](args)
    except _UsageError as e:
        sys.stderr.write(f"relaxmap: usage error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        sys.stderr.write(f"relaxmap: {e}\n")
        return EXIT_DATA
    except RelaxMapError as e:
        sys.stderr.write(f"relaxmap: {type(e).__name__}: {e}\n")
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

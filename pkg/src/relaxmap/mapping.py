"""Instruction mapping schemes between architectures and ARMv8 peephole transforms."""
from __future__ import annotations

import random
import re
from importlib import resources
from pathlib import Path
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from . import litmus as L
from .enumerate import BehaviorSet, behaviors, included
from .errors import (BudgetExceeded, MissingC11Annotation, PatternMismatch, RelaxMapError,
                     UnmappableInstruction)
from .litmus import (BRANCH, FENCE, LABEL, LOAD, REGOP, RMW, STORE, BinOp, Instruction,
                     Program, Reg, Thread, expr_regs, mayalias, mustalias)
from .models import ARCH_MODEL, ModelId

# ---------------------------------------------------------------- schemes

_ACCESS_TOKENS = {
    "load": (LOAD, "plain"), "load.acq": (LOAD, "acq"),
    "store": (STORE, "plain"), "store.rel": (STORE, "rel"),
    "rmw": (RMW, "plain"), "rmw.acq": (RMW, "acq"), "rmw.rel": (RMW, "rel"),
}
_FENCE_TOKENS = set(L.FENCE_KINDS)
_C11_AT = ("rlx", "acq", "rel", "sc")


@dataclass(frozen=True)
class Rule:
    lhs: str                  # access or fence token
    qual: Optional[str]       # None, 'na' or 'at'
    rhs: tuple[str, ...]

    def matches(self, ins: Instruction) -> bool:
        if ins.kind == FENCE:
            return self.lhs == ins.flavor and self.qual is None
        kind, flavor = _ACCESS_TOKENS.get(self.lhs, (None, None))
        if kind != ins.kind or flavor != ins.flavor:
            return False
        if self.qual == "na":
            return ins.c11 == "na"
        if self.qual == "at":
            return ins.c11 in _C11_AT
        return True


@dataclass(frozen=True)
class MappingScheme:
    name: str
    from_arch: str
    to_arch: str
    c11: bool = False
    rules: tuple[Rule, ...] = ()
    variant: Optional[str] = None

    def rule_for(self, ins: Instruction) -> Rule:
        for r in self.rules:
            if r.matches(ins):
                return r
        if self.c11 and ins.is_access and ins.c11 is None:
            raise MissingC11Annotation(f"scheme {self.name} needs a C11 annotation on '{ins}'")
        raise UnmappableInstruction(f"scheme {self.name} has no rule for '{ins}'")

    def to_text(self) -> str:
        lines = [f"scheme {self.name}", f"from {self.from_arch.lower()}",
                 f"to {self.to_arch.lower()}"]
        if self.c11:
            lines.append("c11")
        if self.variant:
            lines.append(f"variant {self.variant}")
        for r in self.rules:
            q = f"@@{r.qual}" if r.qual else ""
            lines.append(f"  {r.lhs}{q} => {' ; '.join(r.rhs) if r.rhs else 'skip'}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def _parse_rule(line: str, lineno: int) -> list[Rule]:
    if "=>" not in line:
        raise RelaxMapError(f"scheme table line {lineno}: expected 'lhs => rhs'")
    lhs, rhs = line.split("=>", 1)
    rhs_toks = tuple(t.strip() for t in rhs.split(";") if t.strip())
    if rhs_toks == ("skip",):
        rhs_toks = ()
    for t in rhs_toks:
        if t not in _ACCESS_TOKENS and t not in _FENCE_TOKENS and t != "cbisb":
            raise RelaxMapError(f"scheme table line {lineno}: unknown output token {t!r}")
    rules = []
    for alt in lhs.split("|"):
        alt = alt.strip()
        qual = None
        if "@@" in alt:
            alt, qual = alt.split("@@", 1)
            if qual not in ("na", "at"):
                raise RelaxMapError(f"scheme table line {lineno}: qualifier must be @@na or @@at")
        if alt not in _ACCESS_TOKENS and alt not in _FENCE_TOKENS:
            raise RelaxMapError(f"scheme table line {lineno}: unknown pattern {alt!r}")
        rules.append(Rule(alt, qual, rhs_toks))
    return rules


def load_schemes(text: str, known: Optional[dict] = None) -> dict[str, MappingScheme]:
    """Parse a declarative scheme table (format documented in the README)."""
    known = dict(known or {})
    out: dict[str, MappingScheme] = {}
    cur: Optional[dict] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "scheme":
            if cur is not None:
                raise RelaxMapError(f"scheme table line {lineno}: missing 'end'")
            cur = {"name": words[1], "rules": [], "c11": False, "variant": None}
            if len(words) == 4 and words[2] == "extends":
                base = out.get(words[3]) or known.get(words[3])
                if base is None:
                    raise RelaxMapError(f"scheme table line {lineno}: unknown base {words[3]!r}")
                cur.update(from_arch=base.from_arch, to_arch=base.to_arch, c11=base.c11,
                           base_rules=list(base.rules))
        elif cur is None:
            raise RelaxMapError(f"scheme table line {lineno}: rule outside a scheme block")
        elif words[0] == "from":
            cur["from_arch"] = words[1].upper()
        elif words[0] == "to":
            cur["to_arch"] = words[1].upper()
        elif words[0] == "c11":
            cur["c11"] = True
        elif words[0] == "variant":
            cur["variant"] = words[1]
        elif words[0] == "end":
            rules = cur["rules"]
            # overrides replace every base rule with the same pattern
            if "base_rules" in cur:
                overridden = {(r.lhs, r.qual) for r in rules}
                rules = rules + [r for r in cur["base_rules"] if (r.lhs, r.qual) not in overridden]
            s = MappingScheme(cur["name"], cur["from_arch"], cur["to_arch"], cur["c11"],
                              tuple(rules), cur["variant"])
            out[s.name] = s
            known[s.name] = s
            cur = None
        else:
            cur["rules"].extend(_parse_rule(line, lineno))
    if cur is not None:
        raise RelaxMapError("scheme table: missing final 'end'")
    return out


BUILTIN_TABLE = """
scheme x86-armv8
from x86
to armv8
  load   => load ; dmbld
  store  => dmbst ; store
  rmw    => dmbfull ; rmw ; dmbfull
  mfence => dmbfull
end

scheme c11-x86-armv8
from x86
to armv8
c11
  load@@na  => load
  load@@at  => load ; dmbld
  store@@na => store
  store@@at => dmbfull ; store
  rmw@@na | rmw@@at => dmbfull ; rmw ; dmbfull
  mfence => dmbfull
end

scheme armv8-x86
from armv8
to x86
  load | load.acq => load
  store          => store
  store.rel      => store ; mfence
  rmw | rmw.acq  => rmw
  rmw.rel        => mfence ; rmw ; mfence
  dmbfull        => mfence
  dmbld | dmbst | isb => skip
end

scheme armv7-armv8
from armv7
to armv8
  load  => load
  store => store
  rmw   => rmw
  dmb   => dmbfull
  isb   => isb
end

scheme armv7mca-armv8 extends armv7-armv8
from armv7mca
end

scheme armv8-armv7
from armv8
to armv7
  load      => load ; dmb
  load.acq  => load ; dmb
  store     => store
  store.rel => dmb ; store ; dmb
  rmw       => rmw ; dmb
  rmw.acq   => rmw ; dmb
  rmw.rel   => dmb ; rmw ; dmb
  dmbfull | dmbld | dmbst => dmb
  isb       => isb
end

scheme armv8-armv7mca extends armv8-armv7
to armv7mca
end

scheme c11-armv8-armv7 extends armv8-armv7
c11
  load@@na => load
  load@@at => load ; dmb
end

scheme c11-armv8-armv7mca extends c11-armv8-armv7
to armv7mca
end

# deliberately broken variants, kept to demonstrate why each fence is needed
scheme x86-armv8:no-leading extends x86-armv8
variant no-leading
  rmw => rmw ; dmbfull
end

scheme x86-armv8:no-trailing extends x86-armv8
variant no-trailing
  rmw => dmbfull ; rmw
end

scheme armv8-x86:broken-stlr extends armv8-x86
variant broken-stlr
  store.rel => store
end

scheme armv8-armv7:broken-ldr extends armv8-armv7
variant broken-ldr
  load => load
end

scheme armv8-armv7mca:broken-ldr extends armv8-armv7mca
variant broken-ldr
  load => load
end

scheme armv8-armv7:broken-cbisb extends armv8-armv7
variant broken-cbisb
  load => load ; cbisb
end

scheme armv8-armv7mca:broken-cbisb extends armv8-armv7mca
variant broken-cbisb
  load => load ; cbisb
end
"""

SCHEMES: dict[str, MappingScheme] = load_schemes(BUILTIN_TABLE)

# the six correct schemes (ARMv7-mca targets/sources are twins of the ARMv7 ones)
SHIPPED = ("x86-armv8", "c11-x86-armv8", "armv8-x86", "armv7-armv8", "armv8-armv7",
           "c11-armv8-armv7")
SHIPPED_TWINS = ("armv7mca-armv8", "armv8-armv7mca", "c11-armv8-armv7mca")


def get_scheme(from_arch: str, to_arch: str, c11: bool = False,
               variant: Optional[str] = None) -> MappingScheme:
    f, t = from_arch.upper().replace("-", ""), to_arch.upper().replace("-", "")
    for s in SCHEMES.values():
        if s.from_arch == f and s.to_arch == t and s.c11 == c11 and s.variant == variant:
            return s
    raise KeyError(f"no scheme from {from_arch} to {to_arch}"
                   + (" (c11)" if c11 else "") + (f" variant {variant}" if variant else ""))


def scheme_model(arch: str) -> ModelId:
    return ARCH_MODEL[arch]


# ---------------------------------------------------------------- map_program

def _emit_token(tok: str, src: Instruction, labels: set, counter: list) -> list[Instruction]:
    if tok in _FENCE_TOKENS:
        return [L.fence(tok)]
    if tok == "cbisb":
        if src.kind not in (LOAD, RMW):
            raise UnmappableInstruction(f"cbisb needs a preceding load, got '{src}'")
        while True:
            name = f"LC{counter[0]}"
            counter[0] += 1
            if name not in labels:
                break
        labels.add(name)
        r = Reg(src.reg)
        return [Instruction(BRANCH, value=BinOp("==", r, r), label=name),
                Instruction(LABEL, label=name), L.fence("isb")]
    kind, flavor = _ACCESS_TOKENS[tok]
    if kind != src.kind:
        raise UnmappableInstruction(f"cannot turn '{src}' into a {tok}")
    return [replace(src, flavor=flavor)]


def map_program(p: Program, s: MappingScheme) -> Program:
    if p.arch != s.from_arch:
        raise UnmappableInstruction(f"scheme {s.name} maps {s.from_arch} programs, got {p.arch}")
    threads = []
    for t in p.threads:
        labels = {i.label for i in t.body if i.kind == LABEL}
        counter = [0]
        body: list[Instruction] = []
        for ins in t.body:
            if ins.kind in (BRANCH, LABEL, REGOP):
                body.append(ins)
                continue
            if s.c11 and ins.is_access and ins.c11 is None:
                raise MissingC11Annotation(f"scheme {s.name} needs a C11 annotation on '{ins}'")
            rule = s.rule_for(ins)
            for tok in rule.rhs:
                body.extend(_emit_token(tok, ins, labels, counter))
        threads.append(Thread(t.name, tuple(body)))
    out = Program(s.to_arch, dict(p.init), tuple(threads), p.outcome)
    L.validate(out)
    return out


@dataclass(frozen=True)
class MappingVerdict:
    sound: bool
    witness: Optional[object] = None
    source: Optional[BehaviorSet] = None
    target: Optional[BehaviorSet] = None

    def __bool__(self) -> bool:
        return self.sound


def verify_mapping(p: Program, s: MappingScheme, strict: bool = False,
                   source_model: Optional[ModelId] = None, target_model: Optional[ModelId] = None,
                   **kw) -> MappingVerdict:
    q = map_program(p, s)
    src = behaviors(p, source_model or scheme_model(s.from_arch), strict=strict, **kw)
    tgt = behaviors(q, target_model or scheme_model(s.to_arch), strict=strict, **kw)
    ok, wit = included(tgt, src)
    return MappingVerdict(ok, wit, src, tgt)


def collapse_adjacent_fences(p: Program, kind: str = "dmb") -> Program:
    """Drop a fence that immediately follows an identical fence."""
    threads = []
    for t in p.threads:
        body: list[Instruction] = []
        for ins in t.body:
            if (ins.kind == FENCE and ins.flavor == kind and body
                    and body[-1].kind == FENCE and body[-1].flavor == kind):
                continue
            body.append(ins)
        threads.append(Thread(t.name, tuple(body)))
    return p.with_threads(threads)


# ---------------------------------------------------------------- peephole transforms

CLASSES = ("W", "R", "L", "A", "DMBFULL", "DMBLD", "DMBST")

# rows are a, columns b, cell says whether a·b ⇝ b·a is safe; None marks "="
_TABLE = {
    "W":       (False, True,  False, True,  False, True,  False),
    "R":       (False, True,  False, True,  False, False, True),
    "L":       (False, True,  False, False, False, True,  False),
    "A":       (False, False, False, False, True,  True,  True),
    "DMBFULL": (False, False, True,  False, None,  True,  True),
    "DMBLD":   (False, False, True,  False, True,  None,  True),
    "DMBST":   (False, True,  True,  True,  True,  True,  None),
}


def reorder_cell(a: str, b: str) -> Optional[bool]:
    """The printed table cell: True (yes), False (no) or None ("=")."""
    return _TABLE[a][CLASSES.index(b)]


def reorder_safe(a: str, b: str) -> bool:
    cell = reorder_cell(a, b)
    return True if cell is None else cell


def iclass(ins: Instruction) -> Optional[str]:
    if ins.kind == LOAD:
        return "A" if ins.flavor == "acq" else "R"
    if ins.kind == STORE:
        return "L" if ins.flavor == "rel" else "W"
    if ins.kind == FENCE and ins.flavor in ("dmbfull", "dmbld", "dmbst"):
        return ins.flavor.upper()
    return None


TRANSFORM_KINDS = ("Reorder", "ElimRAR", "ElimRAA", "ElimAAA", "StrengthenRtoA",
                   "StrengthenWtoL", "StrengthenFence", "ElimOW", "ElimRAW")
# unsound by design; only used to reproduce counterexamples
UNSAFE_KINDS = ("ElimOW", "ElimRAW")


@dataclass(frozen=True)
class Transform:
    kind: str
    site: tuple[int, int]        # (thread id, first node id)


def _written(ins: Instruction) -> set[str]:
    return {ins.reg} if ins.kind in (LOAD, RMW, REGOP) else set()


def _read(ins: Instruction) -> set[str]:
    regs = set()
    if ins.loc is not None:
        regs |= ins.loc.regs()
    regs |= expr_regs(ins.value)
    for a in ins.args:
        regs |= expr_regs(a)
    return regs


def _independent(a: Instruction, b: Instruction) -> bool:
    wa, wb = _written(a), _written(b)
    return not (wa & _read(b) or wb & _read(a) or wa & wb)


def apply_transform(p: Program, t: Transform, enforce_safety: bool = True) -> Program:
    if t.kind not in TRANSFORM_KINDS:
        raise PatternMismatch(f"unknown transform {t.kind}")
    if t.kind in UNSAFE_KINDS and enforce_safety:
        raise PatternMismatch(f"{t.kind} is unsound; pass enforce_safety=False to apply it")
    tid, i = t.site
    if not 0 <= tid < len(p.threads):
        raise PatternMismatch(f"no thread {tid}")
    body = list(p.threads[tid].body)
    if not 0 <= i < len(body):
        raise PatternMismatch(f"no node {i} in thread {tid}")
    a = body[i]
    b = body[i + 1] if i + 1 < len(body) else None
    pair_kinds = ("Reorder", "ElimRAR", "ElimRAA", "ElimAAA", "ElimOW", "ElimRAW")
    if t.kind in pair_kinds and b is None:
        raise PatternMismatch("transform needs two adjacent instructions")

    if t.kind == "Reorder":
        ca, cb = iclass(a), iclass(b)
        if ca is None or cb is None:
            raise PatternMismatch(f"cannot reorder '{a}' and '{b}'")
        if a.loc is not None and b.loc is not None and mayalias(a.loc, b.loc):
            raise PatternMismatch("reordered accesses must be to different locations")
        if not _independent(a, b):
            raise PatternMismatch("reordered instructions must be register independent")
        if enforce_safety and not reorder_safe(ca, cb):
            raise PatternMismatch(f"reordering {ca}·{cb} is unsafe")
        body[i], body[i + 1] = b, a
    elif t.kind in ("ElimRAR", "ElimRAA", "ElimAAA"):
        want = {"ElimRAR": ("plain", "plain"), "ElimRAA": ("acq", "plain"),
                "ElimAAA": ("acq", "acq")}[t.kind]
        if not (a.kind == LOAD and b.kind == LOAD and (a.flavor, b.flavor) == want
                and mustalias(a.loc, b.loc) and a.reg not in a.loc.regs()):
            raise PatternMismatch(f"{t.kind} needs two adjacent same-location loads")
        body[i + 1] = Instruction(REGOP, reg=b.reg, value=Reg(a.reg))
    elif t.kind == "StrengthenRtoA":
        if not (a.kind == LOAD and a.flavor == "plain"):
            raise PatternMismatch("R-A needs a plain load")
        body[i] = replace(a, flavor="acq")
    elif t.kind == "StrengthenWtoL":
        if not (a.kind == STORE and a.flavor == "plain"):
            raise PatternMismatch("W-L needs a plain store")
        body[i] = replace(a, flavor="rel")
    elif t.kind == "StrengthenFence":
        if not (a.kind == FENCE and a.flavor in ("dmbld", "dmbst")):
            raise PatternMismatch("fence strengthening needs a dmbld or dmbst")
        body[i] = L.fence("dmbfull")
    elif t.kind == "ElimOW":
        if not (a.kind == STORE and b.kind == STORE and mustalias(a.loc, b.loc)):
            raise PatternMismatch("OW needs two adjacent same-location stores")
        del body[i]
    else:  # ElimRAW
        if not (a.kind == STORE and b.kind == LOAD and mustalias(a.loc, b.loc)):
            raise PatternMismatch("RAW needs a store followed by a same-location load")
        body[i + 1] = Instruction(REGOP, reg=b.reg, value=a.value)
    threads = list(p.threads)
    threads[tid] = Thread(threads[tid].name, tuple(body))
    return p.with_threads(threads)


@dataclass
class CellResult:
    a: str
    b: str
    cell: Optional[bool]
    programs: int = 0
    growth: int = 0
    skipped: int = 0                   # contexts over the enumeration budget
    witness: Optional[str] = None      # witness name for "no" cells
    witness_growth: Optional[str] = None
    ok: bool = True


@dataclass
class TransformReport:
    cells: list[CellResult] = field(default_factory=list)
    asymmetries: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def to_text(self) -> str:
        lines = []
        for c in self.cells:
            mark = "=" if c.cell is None else ("yes" if c.cell else "no")
            status = "ok" if c.ok else "FAIL"
            extra = (f"witness {c.witness}: {c.witness_growth}" if c.cell is False
                     else f"{c.programs} contexts, {c.growth} with growth")
            lines.append(f"{c.a:8} {c.b:8} {mark:4} {status:4} {extra}")
        for a, b in self.asymmetries:
            lines.append(f"asymmetric cells: ({a},{b}) vs ({b},{a})")
        return "\n".join(lines) + "\n"


def table_asymmetries() -> list[tuple[str, str]]:
    out = []
    for i, a in enumerate(CLASSES):
        for b in CLASSES[i + 1:]:
            if reorder_cell(a, b) != reorder_cell(b, a):
                out.append((a, b))
    return out


def grows(before: Program, after: Program, m: ModelId = ModelId.ARMV8) -> Optional[object]:
    """A behavior of `after` missing from `before`, or None."""
    ok, wit = included(behaviors(after, m), behaviors(before, m))
    return None if ok else wit


_CELL_RE = re.compile(r"^#!\s*cell\s+(\S+)\s+(\S+)\s*$", re.M)
_SITE_RE = re.compile(r"^#!\s*transform\s+(\S+)\s+(\d+)\s+(\d+)\s*$", re.M)


def load_witnesses(directory=None) -> dict:
    """Read the bundled (or given) witness programs for the unsafe reorder cells."""
    from .litmus import parse
    if directory is None:
        root = resources.files("relaxmap") / "data" / "witnesses"
        files = [f for f in root.iterdir() if f.name.endswith(".lit")]
    else:
        files = sorted(Path(directory).glob("*.lit"))
    out = {}
    for f in sorted(files, key=lambda f: f.name):
        text = f.read_text()
        cell, site = _CELL_RE.search(text), _SITE_RE.search(text)
        if not cell or not site:
            continue
        t = Transform(site.group(1), (int(site.group(2)), int(site.group(3))))
        out[(cell.group(1), cell.group(2))] = (f.name, parse(text), t)
    return out


def validate_transform_table(witnesses: Optional[dict] = None, contexts: int = 100, seed: int = 0,
                             model: ModelId = ModelId.ARMV8, context_factory=None) -> TransformReport:
    """Check every cell of the reorder table.

    ``witnesses`` maps (a, b) to (name, Program, Transform) for "no" cells.
    Safe cells are exercised on ``contexts`` random programs built by
    ``context_factory(rng, a, b)`` which returns (Program, Transform).
    """
    from .randprog import reorder_context
    if witnesses is None:
        witnesses = load_witnesses()
    factory = context_factory or reorder_context
    rng = random.Random(seed)
    report = TransformReport(asymmetries=table_asymmetries())
    for a in CLASSES:
        for b in CLASSES:
            cell = reorder_cell(a, b)
            res = CellResult(a, b, cell)
            if cell is False:
                entry = witnesses.get((a, b))
                if entry is None:
                    res.ok = False
                else:
                    name, prog, tr = entry
                    after = apply_transform(prog, tr, enforce_safety=False)
                    g = grows(prog, after, model)
                    res.witness = name
                    res.witness_growth = str(g) if g is not None else None
                    res.ok = g is not None
            elif cell is True:
                while res.programs < contexts:
                    prog, tr = factory(rng, a, b)
                    after = apply_transform(prog, tr)
                    try:
                        g = grows(prog, after, model)
                    except BudgetExceeded:
                        res.skipped += 1
                        continue
                    res.programs += 1
                    if g is not None:
                        res.growth += 1
                res.ok = res.growth == 0
            report.cells.append(res)
    return report

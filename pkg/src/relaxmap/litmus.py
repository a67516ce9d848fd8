"""Litmus-test language: AST, parser, printer, dependencies and per-thread CFGs."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import ArchMismatch, LitmusSyntaxError, UnresolvedLabel

ARCHES = ("X86", "ARMV7", "ARMV7MCA", "ARMV8", "SCREF")
FENCE_KINDS = ("mfence", "dmb", "dmbfull", "dmbld", "dmbst", "isb")
C11_ANNOTATIONS = ("na", "rlx", "acq", "rel", "sc")

LOAD, STORE, RMW, FENCE, BRANCH, LABEL, REGOP = (
    "load", "store", "rmw", "fence", "branch", "label", "regop")
ACCESS_KINDS = (LOAD, STORE, RMW)

_LEGAL_FENCES = {
    "X86": {"mfence"},
    "ARMV7": {"dmb", "isb"},
    "ARMV7MCA": {"dmb", "isb"},
    "ARMV8": {"dmbfull", "dmbld", "dmbst", "isb"},
    "SCREF": set(),
}


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Reg, BinOp]

_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
}
_PREC = {"==": 1, "!=": 1, "<": 1, "<=": 1, ">": 1, ">=": 1, "+": 2, "-": 2, "*": 3}


def eval_expr(e: Expr, env: dict[str, int]) -> int:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Reg):
        return env.get(e.name, 0)
    return _OPS[e.op](eval_expr(e.left, env), eval_expr(e.right, env))


def expr_regs(e: Optional[Expr]) -> set[str]:
    if e is None or isinstance(e, Const):
        return set()
    if isinstance(e, Reg):
        return {e.name}
    return expr_regs(e.left) | expr_regs(e.right)


def fold(e: Expr) -> Expr:
    """Constant folding, including the absorbing rule e*0 = 0."""
    if not isinstance(e, BinOp):
        return e
    left, right = fold(e.left), fold(e.right)
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(_OPS[e.op](left.value, right.value))
    if e.op == "*" and (left == Const(0) or right == Const(0)):
        return Const(0)
    return BinOp(e.op, left, right)


def show_expr(e: Expr, parent: int = 0) -> str:
    if isinstance(e, Const):
        return str(e.value) if e.value >= 0 or parent == 0 else f"({e.value})"
    if isinstance(e, Reg):
        return e.name
    p = _PREC[e.op]
    # left-associative: the right operand needs parens at equal precedence
    s = f"{show_expr(e.left, p)} {e.op} {show_expr(e.right, p + 1)}"
    return f"({s})" if p < parent else s


@dataclass(frozen=True)
class Loc:
    base: str
    index: Optional[Expr] = None

    def concrete(self, env: dict[str, int]) -> str:
        if self.index is None:
            return self.base
        return f"{self.base}[{eval_expr(self.index, env)}]"

    def regs(self) -> set[str]:
        return expr_regs(self.index)

    def __str__(self) -> str:
        return self.base if self.index is None else f"{self.base}[{show_expr(self.index)}]"


def mayalias(a: Loc, b: Loc) -> bool:
    return a.base == b.base


def mustalias(a: Loc, b: Loc) -> bool:
    if a.base != b.base:
        return False
    if a.index is None or b.index is None:
        return a.index is None and b.index is None
    fa, fb = fold(a.index), fold(b.index)
    # register-indexed locations may change between accesses, so only
    # register-free indices are trusted to denote the same cell
    return fa == fb and not expr_regs(fa)


# ---------------------------------------------------------------- instructions

@dataclass(frozen=True)
class Instruction:
    kind: str
    reg: Optional[str] = None
    loc: Optional[Loc] = None
    value: Optional[Expr] = None
    args: tuple = ()
    flavor: str = "plain"
    c11: Optional[str] = None
    label: Optional[str] = None

    @property
    def is_access(self) -> bool:
        return self.kind in ACCESS_KINDS

    @property
    def is_cas(self) -> bool:
        return self.kind == RMW and len(self.args) == 2

    def __str__(self) -> str:
        return show_instr(self)


def load(reg: str, loc: Loc, flavor: str = "plain", c11: Optional[str] = None) -> Instruction:
    return Instruction(LOAD, reg=reg, loc=loc, flavor=flavor, c11=c11)


def store(loc: Loc, value: Expr, flavor: str = "plain", c11: Optional[str] = None) -> Instruction:
    return Instruction(STORE, loc=loc, value=value, flavor=flavor, c11=c11)


def fence(kind: str) -> Instruction:
    return Instruction(FENCE, flavor=kind)


def show_instr(ins: Instruction) -> str:
    suffix = ""
    if ins.flavor in ("acq", "rel"):
        suffix += f" @{ins.flavor}"
    if ins.c11:
        suffix += f" @@{ins.c11}"
    k = ins.kind
    if k == LOAD:
        return f"{ins.reg} = {ins.loc}{suffix}"
    if k == STORE:
        return f"{ins.loc} = {show_expr(ins.value)}{suffix}"
    if k == RMW:
        args = ", ".join(show_expr(a) for a in ins.args)
        return f"{ins.reg} = rmw({ins.loc}, {args}){suffix}"
    if k == FENCE:
        return ins.flavor
    if k == BRANCH:
        return f"if {show_expr(ins.value)} goto {ins.label}"
    if k == LABEL:
        return f"{ins.label}:"
    return f"{ins.reg} = {show_expr(ins.value)}"


# ---------------------------------------------------------------- outcome predicates

@dataclass(frozen=True)
class Cond:
    op: str                     # 'and' | 'or' | 'not' | 'reg' | 'mem' | 'true'
    parts: tuple = ()
    thread: Optional[str] = None
    name: Optional[str] = None  # register or location
    value: int = 0

    def holds(self, regs: dict[tuple[str, str], int], mem: dict[str, int]) -> bool:
        if self.op == "and":
            return all(p.holds(regs, mem) for p in self.parts)
        if self.op == "or":
            return any(p.holds(regs, mem) for p in self.parts)
        if self.op == "not":
            return not self.parts[0].holds(regs, mem)
        if self.op == "reg":
            return regs.get((self.thread, self.name), 0) == self.value
        if self.op == "mem":
            return mem.get(self.name, 0) == self.value
        return True

    def __str__(self) -> str:
        if self.op == "and":
            return " /\\ ".join(_show_cond_part(p, "and") for p in self.parts)
        if self.op == "or":
            return " \\/ ".join(_show_cond_part(p, "or") for p in self.parts)
        if self.op == "not":
            return f"~{_show_cond_part(self.parts[0], 'not')}"
        if self.op == "reg":
            return f"{self.thread}:{self.name}={self.value}"
        if self.op == "mem":
            return f"{self.name}={self.value}"
        return "true"


def _show_cond_part(c: Cond, ctx: str) -> str:
    if c.op in ("reg", "mem", "true", "not") or (ctx == "or" and c.op == "and"):
        return str(c)
    return f"({c})"


# ---------------------------------------------------------------- program

@dataclass(frozen=True)
class Thread:
    name: str
    body: tuple[Instruction, ...]

    def registers(self) -> list[str]:
        regs = []
        for ins in self.body:
            if ins.kind in (LOAD, RMW, REGOP) and ins.reg not in regs:
                regs.append(ins.reg)
        return sorted(regs)


@dataclass(frozen=True)
class Program:
    arch: str
    init: dict = field(default_factory=dict)
    threads: tuple[Thread, ...] = ()
    outcome: Optional[Cond] = None

    def __hash__(self) -> int:
        return hash((self.arch, tuple(sorted(self.init.items())), self.threads, self.outcome))

    def with_threads(self, threads: Iterable[Thread], arch: Optional[str] = None) -> "Program":
        return Program(arch or self.arch, dict(self.init), tuple(threads), self.outcome)


def check_legal(ins: Instruction, arch: str) -> None:
    if ins.kind == FENCE:
        if ins.flavor not in _LEGAL_FENCES[arch]:
            raise ArchMismatch(ins.flavor, arch)
    elif ins.kind in ACCESS_KINDS and ins.flavor != "plain":
        ok = arch == "ARMV8" and (
            (ins.kind == LOAD and ins.flavor == "acq")
            or (ins.kind == STORE and ins.flavor == "rel")
            or (ins.kind == RMW and ins.flavor in ("acq", "rel")))
        if not ok:
            raise ArchMismatch(show_instr(ins), arch)


def validate(p: Program) -> None:
    """Check arch legality and branch targets."""
    if p.arch not in ARCHES:
        raise ArchMismatch(f"arch {p.arch}", p.arch)
    for t in p.threads:
        labels = {i.label for i in t.body if i.kind == LABEL}
        for ins in t.body:
            check_legal(ins, p.arch)
            if ins.kind == BRANCH and ins.label not in labels:
                raise UnresolvedLabel(ins.label)


def static_locations(p: Program) -> list[str]:
    """Locations nameable without running the program (unindexed or constant index)."""
    out = set(p.init)
    for t in p.threads:
        for ins in t.body:
            if ins.loc is not None:
                idx = None if ins.loc.index is None else fold(ins.loc.index)
                if idx is None:
                    out.add(ins.loc.base)
                elif isinstance(idx, Const):
                    out.add(f"{ins.loc.base}[{idx.value}]")
    return sorted(out)


# ---------------------------------------------------------------- tokenizer / parser

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<sym>/\\|\\/|@@|==|!=|<=|>=|[{}()\[\];,=<>+\-*:@~])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LitmusSyntaxError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _is_loc_name(s: str) -> bool:
    return s[0].isupper()


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        t = tok or self.tok
        raise LitmusSyntaxError(t.line, t.col, msg)

    def next(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("sym", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind not in ("sym", "ident"):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> _Tok:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.error(f"expected integer, found {self.tok.text or 'end of input'!r}")
        v = int(self.next().text)
        return -v if neg else v

    # program
    def program(self) -> Program:
        self.expect("arch")
        at = self.tok
        arch = self.ident().text.upper()
        if arch not in ARCHES:
            self.error(f"unknown arch {at.text!r}", at)
        init: dict[str, int] = {}
        threads: list[Thread] = []
        outcome = None
        while self.tok.kind != "eof":
            if self.accept("init"):
                while self.tok.kind == "ident" and self.tok.text not in ("thread", "exists", "init"):
                    name = self.location_name()
                    self.expect("=")
                    init[name] = self.integer()
            elif self.accept("thread"):
                threads.append(self.thread())
            elif self.accept("exists"):
                self.expect("(")
                outcome = self.cond()
                self.expect(")")
            else:
                self.error(f"unexpected {self.tok.text!r}")
        names = [t.name for t in threads]
        if len(set(names)) != len(names):
            self.error("duplicate thread name")
        prog = Program(arch, init, tuple(threads), outcome)
        for loc in static_locations(prog):
            init.setdefault(loc, 0)
        prog = Program(arch, dict(sorted(init.items())), tuple(threads), outcome)
        validate(prog)
        return prog

    def location_name(self) -> str:
        t = self.ident()
        if not _is_loc_name(t.text):
            self.error(f"location names start with an uppercase letter: {t.text!r}", t)
        if self.accept("["):
            idx = self.integer()
            self.expect("]")
            return f"{t.text}[{idx}]"
        return t.text

    def thread(self) -> Thread:
        name = self.ident().text
        self.expect("{")
        body: list[Instruction] = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("unterminated thread body")
            if self.accept(";"):
                continue
            if self.tok.kind == "ident" and self.peek().text == ":" and self.peek().kind == "sym":
                body.append(Instruction(LABEL, label=self.next().text))
                self.next()
                continue
            body.append(self.statement())
            if self.tok.text not in (";", "}"):
                self.error(f"expected ';' after statement, found {self.tok.text!r}")
        labels = [i.label for i in body if i.kind == LABEL]
        if len(set(labels)) != len(labels):
            self.error(f"duplicate label in thread {name}")
        return Thread(name, tuple(body))

    def suffixes(self) -> tuple[str, Optional[str]]:
        flavor, c11 = "plain", None
        while self.tok.text in ("@", "@@"):
            sym = self.next().text
            t = self.ident()
            if sym == "@":
                if t.text not in ("acq", "rel"):
                    self.error(f"unknown flavor @{t.text}", t)
                flavor = t.text
            else:
                if t.text not in C11_ANNOTATIONS:
                    self.error(f"unknown C11 annotation @@{t.text}", t)
                c11 = t.text
        return flavor, c11

    def loc_expr(self) -> Loc:
        t = self.ident()
        if not _is_loc_name(t.text):
            self.error(f"expected a location, found {t.text!r}", t)
        if self.accept("["):
            e = self.expr()
            self.expect("]")
            return Loc(t.text, e)
        return Loc(t.text)

    def statement(self) -> Instruction:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected statement, found {t.text!r}")
        low = t.text.lower()
        if t.text == "if":
            self.next()
            cond = self.expr()
            self.expect("goto")
            return Instruction(BRANCH, value=cond, label=self.ident().text)
        if low in FENCE_KINDS and self.peek().text not in ("=", "["):
            self.next()
            return fence(low)
        if _is_loc_name(t.text):
            loc = self.loc_expr()
            self.expect("=")
            e = self.expr()
            flavor, c11 = self.suffixes()
            return store(loc, e, flavor, c11)
        reg = self.next().text
        self.expect("=")
        if self.tok.text == "rmw" and self.peek().text == "(":
            self.next()
            self.next()
            loc = self.loc_expr()
            args = []
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            if len(args) not in (1, 2):
                self.error("rmw takes (loc, e) or (loc, expected, new)", t)
            flavor, c11 = self.suffixes()
            return Instruction(RMW, reg=reg, loc=loc, args=tuple(args), flavor=flavor, c11=c11)
        if self.tok.kind == "ident" and _is_loc_name(self.tok.text):
            loc = self.loc_expr()
            flavor, c11 = self.suffixes()
            return load(reg, loc, flavor, c11)
        return Instruction(REGOP, reg=reg, value=self.expr())

    # expressions
    def expr(self, min_prec: int = 1) -> Expr:
        left = self.unary()
        while self.tok.kind == "sym" and self.tok.text in _PREC and _PREC[self.tok.text] >= min_prec:
            op = self.next().text
            right = self.expr(_PREC[op] + 1)
            left = BinOp(op, left, right)
        return left

    def unary(self) -> Expr:
        t = self.tok
        if self.accept("-"):
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return BinOp("-", Const(0), inner)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "int":
            return Const(int(self.next().text))
        if t.kind == "ident":
            if _is_loc_name(t.text):
                self.error(f"memory location {t.text!r} cannot appear inside an expression", t)
            return Reg(self.next().text)
        self.error(f"expected expression, found {t.text or 'end of input'!r}")

    # outcome conditions
    def cond(self) -> Cond:
        parts = [self.cond_and()]
        while self.accept("\\/"):
            parts.append(self.cond_and())
        return parts[0] if len(parts) == 1 else Cond("or", tuple(parts))

    def cond_and(self) -> Cond:
        parts = [self.cond_atom()]
        while self.accept("/\\"):
            parts.append(self.cond_atom())
        return parts[0] if len(parts) == 1 else Cond("and", tuple(parts))

    def cond_atom(self) -> Cond:
        if self.accept("~"):
            return Cond("not", (self.cond_atom(),))
        if self.accept("("):
            c = self.cond()
            self.expect(")")
            return c
        if self.tok.text == "true":
            self.next()
            return Cond("true")
        if self.tok.kind == "ident" and self.peek().text == ":":
            th = self.next().text
            self.next()
            reg = self.ident().text
            self.expect("=")
            return Cond("reg", thread=th, name=reg, value=self.integer())
        name = self.location_name()
        self.expect("=")
        return Cond("mem", name=name, value=self.integer())


def parse(text: str) -> Program:
    return _Parser(text).program()


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def emit(p: Program) -> str:
    lines = [f"arch {p.arch.lower()}"]
    if p.init:
        lines.append("init " + " ".join(f"{k}={v}" for k, v in p.init.items()))
    for t in p.threads:
        lines.append(f"thread {t.name} {{")
        for ins in t.body:
            lines.append(f"  {show_instr(ins)}" + ("" if ins.kind == LABEL else ";"))
        lines.append("}")
    if p.outcome is not None:
        lines.append(f"exists ({p.outcome})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- CFG

@dataclass(frozen=True)
class Cfg:
    """Control-flow graph of one thread.

    ``order`` is the layout order of the nodes, used to turn the graph back
    into straight-line code; ``instrs`` maps node ids to instructions.
    """
    vertices: tuple[int, ...]
    edges: frozenset
    entry: Optional[int]
    instrs: dict
    tid: int = 0
    name: str = "P0"

    @property
    def order(self) -> tuple[int, ...]:
        return self.vertices

    def succ(self, n: int) -> list[int]:
        return sorted(b for a, b in self.edges if a == n)

    def pred(self, n: int) -> list[int]:
        return sorted(a for a, b in self.edges if b == n)

    def kind(self, n: int) -> str:
        return self.instrs[n].kind

    def to_thread(self) -> Thread:
        return Thread(self.name, tuple(self.instrs[n] for n in self.vertices))

    def fresh_id(self) -> int:
        return max(self.instrs, default=-1) + 1


def build_cfg(p: Program, tid: int) -> Cfg:
    if not 0 <= tid < len(p.threads):
        raise IndexError(f"thread id {tid} out of range")
    t = p.threads[tid]
    return thread_cfg(t, tid)


def thread_cfg(t: Thread, tid: int = 0) -> Cfg:
    body = t.body
    labels = {ins.label: i for i, ins in enumerate(body) if ins.kind == LABEL}
    edges = set()
    for i, ins in enumerate(body):
        if i + 1 < len(body):
            edges.add((i, i + 1))
        if ins.kind == BRANCH:
            if ins.label not in labels:
                raise UnresolvedLabel(ins.label)
            edges.add((i, labels[ins.label]))
    return Cfg(tuple(range(len(body))), frozenset(edges), 0 if body else None,
               dict(enumerate(body)), tid, t.name)


def cfg_has_cycle(cfg: Cfg) -> bool:
    succ: dict[int, list[int]] = {v: [] for v in cfg.vertices}
    for a, b in cfg.edges:
        succ[a].append(b)
    color = dict.fromkeys(cfg.vertices, 0)
    for root in cfg.vertices:
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            n, it = stack[-1]
            m = next(it, None)
            if m is None:
                color[n] = 2
                stack.pop()
            elif color[m] == 1:
                return True
            elif color[m] == 0:
                color[m] = 1
                stack.append((m, iter(succ[m])))
    return False


# ---------------------------------------------------------------- dependencies

@dataclass(frozen=True)
class DepInfo:
    """Per-thread dependency pairs over instruction node ids."""
    addr: tuple[frozenset, ...]
    data: tuple[frozenset, ...]
    ctrl: tuple[frozenset, ...]
    ctrl_isb: tuple[frozenset, ...]


def produces_event(ins: Instruction) -> bool:
    return ins.is_access or (ins.kind == FENCE and ins.flavor != "isb")


def _reachable_from(cfg: Cfg, start: int, blocked: frozenset = frozenset()) -> set[int]:
    """Nodes reachable from start by one or more edges, never entering blocked nodes."""
    succ: dict[int, list[int]] = {}
    for a, b in cfg.edges:
        succ.setdefault(a, []).append(b)
    seen: set[int] = set()
    stack = [start]
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m not in seen and m not in blocked:
                seen.add(m)
                stack.append(m)
    return seen


def _thread_deps(t: Thread) -> tuple[set, set, set, set]:
    cfg = thread_cfg(t)
    body = t.body
    n = len(body)
    pred: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in cfg.edges:
        pred[b].append(a)
    # reaching sources: state[i] = reg -> frozenset(load nodes) at entry of i
    state_in: list[dict[str, frozenset]] = [dict() for _ in range(n)]
    state_out: list[dict[str, frozenset]] = [dict() for _ in range(n)]

    def transfer(i: int, st: dict) -> dict:
        ins = body[i]
        if ins.kind in (LOAD, RMW):
            st = dict(st)
            st[ins.reg] = frozenset([i])
        elif ins.kind == REGOP:
            st = dict(st)
            src = frozenset()
            for r in expr_regs(ins.value):
                src |= st.get(r, frozenset())
            st[ins.reg] = src
        return st

    changed = True
    while changed:
        changed = False
        for i in range(n):
            merged: dict[str, frozenset] = {}
            for p_ in pred[i]:
                for r, s in state_out[p_].items():
                    merged[r] = merged.get(r, frozenset()) | s
            out = transfer(i, merged)
            if merged != state_in[i] or out != state_out[i]:
                state_in[i], state_out[i] = merged, out
                changed = True

    def sources(i: int, regs: set[str]) -> frozenset:
        src = frozenset()
        for r in regs:
            src |= state_in[i].get(r, frozenset())
        return src

    addr, data, ctrl, ctrl_isb = set(), set(), set(), set()
    isbs = frozenset(i for i, ins in enumerate(body) if ins.kind == FENCE and ins.flavor == "isb")
    for j, ins in enumerate(body):
        if ins.is_access:
            for s in sources(j, ins.loc.regs()):
                addr.add((s, j))
        if ins.kind == STORE:
            for s in sources(j, expr_regs(ins.value)):
                data.add((s, j))
        if ins.kind == RMW:
            regs: set[str] = set()
            for a in ins.args:
                regs |= expr_regs(a)
            for s in sources(j, regs):
                data.add((s, j))
        if ins.kind == BRANCH:
            srcs = sources(j, expr_regs(ins.value))
            if not srcs:
                continue
            after = _reachable_from(cfg, j)
            unshielded = _reachable_from(cfg, j, isbs)
            for k in after:
                if produces_event(body[k]):
                    for s in srcs:
                        ctrl.add((s, k))
                        if k not in unshielded:
                            ctrl_isb.add((s, k))
    return addr, data, ctrl, ctrl_isb


def derive_deps(p: Program) -> DepInfo:
    per = [_thread_deps(t) for t in p.threads]
    return DepInfo(*(tuple(frozenset(x[k]) for x in per) for k in range(4)))

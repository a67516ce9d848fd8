"""Finite binary relations over event ids, stored as bitset rows.

Row ``i`` of a relation is an int whose bit ``j`` is set iff ``(i, j)`` is in
the relation.  Event classes (sets of events such as R, W or F) are plain int
bitmasks over the same universe.
"""
from __future__ import annotations

from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import FenceHasNoLocation, UniverseMismatch

EventClass = int


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> EventClass:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


class Relation:
    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: Sequence[int]):
        self.n = n
        self.rows = tuple(rows)

    # constructors
    @classmethod
    def empty(cls, n: int) -> "Relation":
        return cls(n, (0,) * n)

    @classmethod
    def identity(cls, n: int, on: Optional[EventClass] = None) -> "Relation":
        full = (1 << n) - 1 if on is None else on
        return cls(n, [(1 << i) if (full >> i) & 1 else 0 for i in range(n)])

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Relation":
        rows = [0] * n
        for a, b in pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise UniverseMismatch(f"pair ({a},{b}) outside universe of size {n}")
            rows[a] |= 1 << b
        return cls(n, rows)

    @classmethod
    def cross(cls, n: int, a: EventClass, b: EventClass) -> "Relation":
        return cls(n, [b if (a >> i) & 1 else 0 for i in range(n)])

    # basic queries
    def __contains__(self, pair: tuple[int, int]) -> bool:
        a, b = pair
        return bool((self.rows[a] >> b) & 1)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.rows) for j in bits(row)]

    def __iter__(self):
        return iter(self.pairs())

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def __bool__(self) -> bool:
        return any(self.rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, Relation) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Relation({self.n}, {self.pairs()})"

    def domain(self) -> EventClass:
        m = 0
        for i, r in enumerate(self.rows):
            if r:
                m |= 1 << i
        return m

    def codomain(self) -> EventClass:
        m = 0
        for r in self.rows:
            m |= r
        return m

    def successors(self, i: int) -> EventClass:
        return self.rows[i]

    # algebra
    def _check(self, other: "Relation") -> None:
        if self.n != other.n:
            raise UniverseMismatch(f"universe sizes differ: {self.n} vs {other.n}")

    def __or__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.n, [a | b for a, b in zip(self.rows, other.rows)])

    def __and__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.n, [a & b for a, b in zip(self.rows, other.rows)])

    def __sub__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.n, [a & ~b for a, b in zip(self.rows, other.rows)])

    def seq(self, other: "Relation") -> "Relation":
        self._check(other)
        srows = other.rows
        out = []
        for row in self.rows:
            acc = 0
            while row:
                low = row & -row
                acc |= srows[low.bit_length() - 1]
                row ^= low
            out.append(acc)
        return Relation(self.n, out)

    __matmul__ = seq

    def inverse(self) -> "Relation":
        out = [0] * self.n
        for i, row in enumerate(self.rows):
            bit = 1 << i
            for j in bits(row):
                out[j] |= bit
        return Relation(self.n, out)

    def plus(self) -> "Relation":
        rows = list(self.rows)
        n = self.n
        for k in range(n):
            bk = 1 << k
            rk = rows[k]
            if not rk:
                continue
            for i in range(n):
                if rows[i] & bk:
                    rows[i] |= rk
        return Relation(n, rows)

    def star(self) -> "Relation":
        return self.plus().opt()

    def opt(self) -> "Relation":
        return Relation(self.n, [r | (1 << i) for i, r in enumerate(self.rows)])

    def dom_restrict(self, a: EventClass) -> "Relation":
        return Relation(self.n, [r if (a >> i) & 1 else 0 for i, r in enumerate(self.rows)])

    def cod_restrict(self, b: EventClass) -> "Relation":
        return Relation(self.n, [r & b for r in self.rows])

    # properties
    def is_irreflexive(self) -> bool:
        return not any((r >> i) & 1 for i, r in enumerate(self.rows))

    def is_acyclic(self) -> bool:
        # peel off sinks until nothing is left or no sink remains
        remaining = (1 << self.n) - 1
        rows = self.rows
        changed = True
        while remaining and changed:
            changed = False
            for i in bits(remaining):
                if not rows[i] & remaining:
                    remaining &= ~(1 << i)
                    changed = True
        return remaining == 0

    def find_cycle(self) -> Optional[list[int]]:
        """Return ids [e0, ..., ek] with edges e0->e1->...->ek->e0, or None."""
        rows = self.rows
        for i, r in enumerate(rows):
            if (r >> i) & 1:
                return [i]
        color = [0] * self.n
        parent = [-1] * self.n
        for root in range(self.n):
            if color[root]:
                continue
            stack = [(root, iter(bits(rows[root])))]
            color[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = 2
                    stack.pop()
                    continue
                if color[nxt] == 1:
                    cyc = [node]
                    while cyc[-1] != nxt:
                        cyc.append(parent[cyc[-1]])
                    cyc.reverse()
                    return cyc
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(bits(rows[nxt]))))
        return None


def compose(r: Relation, s: Relation) -> Relation:
    return r.seq(s)


def seq(*rels: Relation) -> Relation:
    out = rels[0]
    for r in rels[1:]:
        out = out.seq(r)
    return out


def union(n: int, *rels: Relation) -> Relation:
    rows = [0] * n
    for r in rels:
        if r.n != n:
            raise UniverseMismatch(f"universe sizes differ: {n} vs {r.n}")
        for i, row in enumerate(r.rows):
            rows[i] |= row
    return Relation(n, rows)


def tclosure(r: Relation) -> Relation:
    return r.plus()


def rtclosure(r: Relation) -> Relation:
    return r.star()


def refl(r: Relation) -> Relation:
    return r.opt()


def inverse(r: Relation) -> Relation:
    return r.inverse()


def restrict(a: EventClass, r: Relation, b: EventClass) -> Relation:
    """[a];r;[b]."""
    return Relation(r.n, [row & b if (a >> i) & 1 else 0 for i, row in enumerate(r.rows)])


def is_acyclic(r: Relation) -> bool:
    return r.is_acyclic()


def is_irreflexive(r: Relation) -> bool:
    return r.is_irreflexive()


def _loc_filter(r: Relation, loc_of: Callable[[int], object] | Sequence, same: bool) -> Relation:
    get = loc_of if callable(loc_of) else loc_of.__getitem__
    out = []
    for i, row in enumerate(r.rows):
        if not row:
            out.append(0)
            continue
        li = get(i)
        if li is None:
            raise FenceHasNoLocation(f"event {i} has no location")
        keep = 0
        for j in bits(row):
            lj = get(j)
            if lj is None:
                raise FenceHasNoLocation(f"event {j} has no location")
            if (li == lj) == same:
                keep |= 1 << j
        out.append(keep)
    return Relation(r.n, out)


def sameloc(r: Relation, loc_of) -> Relation:
    return _loc_filter(r, loc_of, True)


def diffloc(r: Relation, loc_of) -> Relation:
    return _loc_filter(r, loc_of, False)

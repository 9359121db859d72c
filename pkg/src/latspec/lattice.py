"""Finite lattices as dense operation tables.

Elements are the indices ``0..n-1``; ``names`` maps them back to the labels
used in catalog and run files. The order is never stored separately, it is
read off the meet table (``a <= b`` iff ``a ^ b == a``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CyclicCovers, NotALattice, RedundantCover, UnknownName

MAX_TABLE_SIZE = 255  # meet/join tables are uint8


@dataclass(frozen=True)
class CoverGraph:
    """Raw lattice description: element names plus covering pairs (lower, upper)."""

    name: str
    elements: tuple[str, ...]
    covers: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "covers", tuple(tuple(c) for c in self.covers))

    def cover_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.covers)


class FiniteLattice:
    """Immutable finite lattice given by its meet and join tables."""

    def __init__(self, name: str, names: Sequence[str], meet, join, bottom: int, top: int):
        self.name = name
        self.names = tuple(names)
        self.meet = np.array(meet, dtype=np.uint8)
        self.join = np.array(join, dtype=np.uint8)
        self.meet.setflags(write=False)
        self.join.setflags(write=False)
        self.bottom = int(bottom)
        self.top = int(top)
        self._index = {x: i for i, x in enumerate(self.names)}

    @property
    def n(self) -> int:
        return len(self.names)

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return f"FiniteLattice({self.name!r}, n={self.n})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownName(name, self.name) from None

    def label(self, i: int) -> str:
        return self.names[i]

    @cached_property
    def order(self) -> np.ndarray:
        """Boolean matrix ``order[a, b] == (a <= b)``."""
        le = self.meet == np.arange(self.n, dtype=np.uint8)[:, None]
        le.setflags(write=False)
        return le

    @cached_property
    def heights(self) -> np.ndarray:
        """Length of the longest chain from bottom to each element."""
        h = np.zeros(self.n, dtype=np.int64)
        for a in sorted(range(self.n), key=lambda x: int(self.order[:, x].sum())):
            below = np.flatnonzero(self.order[:, a])
            below = below[below != a]
            h[a] = 0 if len(below) == 0 else int(h[below].max()) + 1
        h.setflags(write=False)
        return h

    def leq(self, a: int, b: int) -> bool:
        return int(self.meet[a, b]) == a


def leq(L: FiniteLattice, a: int, b: int) -> bool:
    return L.leq(a, b)


def _transitive_closure(rel: np.ndarray) -> np.ndarray:
    le = rel.copy()
    for k in range(len(le)):
        le |= le[:, k : k + 1] & le[k : k + 1, :]
    return le


def lattice_from_cover_graph(g: CoverGraph) -> FiniteLattice:
    """Build meet/join tables from a cover graph, validating that it is a lattice."""
    names = list(g.elements)
    n = len(names)
    if n == 0:
        raise NotALattice(None, None, "no elements at all")
    if n > MAX_TABLE_SIZE:
        raise ValueError(f"{g.name}: {n} elements exceed table capacity {MAX_TABLE_SIZE}")
    index = {}
    for i, x in enumerate(names):
        if x in index:
            raise ValueError(f"{g.name}: element {x!r} listed twice")
        index[x] = i
    rel = np.zeros((n, n), dtype=bool)
    for lo, hi in g.covers:
        for x in (lo, hi):
            if x not in index:
                raise UnknownName(x, g.name)
        if lo == hi:
            raise CyclicCovers([lo])
        rel[index[lo], index[hi]] = True

    # Kahn's algorithm; whatever survives lies on or above a cycle
    indeg = rel.sum(axis=0)
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    indeg = indeg.copy()
    while ready:
        i = ready.pop()
        seen += 1
        for j in np.flatnonzero(rel[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(int(j))
    if seen < n:
        raise CyclicCovers([names[i] for i in range(n) if indeg[i] > 0])

    strict = _transitive_closure(rel)
    for lo, hi in g.covers:
        a, b = index[lo], index[hi]
        if np.any(strict[a] & strict[:, b]):
            raise RedundantCover(lo, hi)
    le = strict | np.eye(n, dtype=bool)

    meet = np.zeros((n, n), dtype=np.uint8)
    join = np.zeros((n, n), dtype=np.uint8)
    # all meets before any join, so a failure names the first bad glb pair
    for table, cone in ((meet, le), (join, le.T)):
        for a in range(n):
            for b in range(a, n):
                common = np.flatnonzero(cone[:, a] & cone[:, b])
                best = [c for c in common if cone[common, c].all()]
                if len(best) != 1:
                    what = "no greatest lower bound" if table is meet else "no least upper bound"
                    raise NotALattice(names[a], names[b], what)
                table[a, b] = table[b, a] = best[0]
    bottoms = [i for i in range(n) if le[i].all()]
    tops = [i for i in range(n) if le[:, i].all()]
    return FiniteLattice(g.name, names, meet, join, bottoms[0], tops[0])


def lattice_from_order(name: str, names: Sequence[str], le) -> FiniteLattice:
    """Build a lattice from a full (reflexive) order matrix."""
    le = np.asarray(le, dtype=bool)
    n = len(names)
    strict = le & ~np.eye(n, dtype=bool)
    cov = strict & ~((strict.astype(np.int64) @ strict.astype(np.int64)) > 0)
    pairs = [(names[a], names[b]) for a, b in zip(*np.nonzero(cov))]
    return lattice_from_cover_graph(CoverGraph(name, tuple(names), tuple(pairs)))


def covers(L: FiniteLattice) -> list[tuple[int, int]]:
    """Covering pairs (a, b), a < b with nothing strictly between, sorted."""
    strict = L.order & ~np.eye(L.n, dtype=bool)
    s = strict.astype(np.int64)
    cov = strict & ~((s @ s) > 0)
    return [(int(a), int(b)) for a, b in zip(*np.nonzero(cov))]


def cover_graph(L: FiniteLattice) -> CoverGraph:
    pairs = tuple((L.names[a], L.names[b]) for a, b in covers(L))
    return CoverGraph(L.name, L.names, pairs)


def atoms(L: FiniteLattice) -> frozenset[int]:
    return frozenset(b for a, b in covers(L) if a == L.bottom)


def coatoms(L: FiniteLattice) -> frozenset[int]:
    return frozenset(a for a, b in covers(L) if b == L.top)


def dual(L: FiniteLattice) -> FiniteLattice:
    name = L.name[:-2] if L.name.endswith("^d") else L.name + "^d"
    return FiniteLattice(name, L.names, L.join, L.meet, L.top, L.bottom)


class Violation(NamedTuple):
    axiom: str
    elements: tuple[int, ...]


def validate_axioms(L: FiniteLattice) -> list[Violation]:
    """Every violated lattice-axiom instance of the tables; empty iff L is a lattice.

    Commutativity and absorption are reported once per unordered pair,
    associativity per ordered triple.
    """
    M = np.asarray(L.meet, dtype=np.int64)
    J = np.asarray(L.join, dtype=np.int64)
    n = L.n
    out: list[Violation] = []
    idx = np.arange(n)
    for op, T in (("meet", M), ("join", J)):
        for a in np.flatnonzero(T[idx, idx] != idx):
            out.append(Violation(f"{op}-idempotence", (int(a),)))
        for a, b in zip(*np.nonzero(np.triu(T != T.T))):
            out.append(Violation(f"{op}-commutativity", (int(a), int(b))))
        bad = T[T, :] != T[:, T]  # [a,b,c]: (a.b).c vs a.(b.c)
        for a, b, c in zip(*np.nonzero(bad)):
            out.append(Violation(f"{op}-associativity", (int(a), int(b), int(c))))
    for a, b in zip(*np.nonzero(M[idx[:, None], J] != idx[:, None])):
        out.append(Violation("absorption-meet-join", (int(a), int(b))))
    for a, b in zip(*np.nonzero(J[idx[:, None], M] != idx[:, None])):
        out.append(Violation("absorption-join-meet", (int(a), int(b))))
    for a in np.flatnonzero(M[L.bottom] != L.bottom):
        out.append(Violation("bottom", (int(a),)))
    for a in np.flatnonzero(J[L.top] != L.top):
        out.append(Violation("top", (int(a),)))
    return out


def sublattice_closure(L: FiniteLattice, elems: Iterable[int]) -> frozenset[int]:
    """Smallest subset containing ``elems`` closed under meet and join."""
    have = list(dict.fromkeys(int(e) for e in elems))
    seen = set(have)
    lo = 0
    meet, join = L.meet, L.join
    while lo < len(have):
        hi = len(have)
        for i in range(lo, hi):
            x = have[i]
            for j in range(hi):
                y = have[j]
                for z in (int(meet[x, y]), int(join[x, y])):
                    if z not in seen:
                        seen.add(z)
                        have.append(z)
        lo = hi
    return frozenset(seen)


def is_generated_by(L: FiniteLattice, t: Iterable[int]) -> bool:
    return len(sublattice_closure(L, t)) == L.n


def isomorphisms(A: FiniteLattice, B: FiniteLattice) -> Iterator[tuple[int, ...]]:
    """All order isomorphisms A -> B as image tuples, by backtracking."""
    if A.n != B.n:
        return
    n = A.n
    la, lb = A.order, B.order
    sig_a = [(int(la[:, x].sum()), int(la[x].sum()), int(A.heights[x])) for x in range(n)]
    sig_b = [(int(lb[:, x].sum()), int(lb[x].sum()), int(B.heights[x])) for x in range(n)]
    if sorted(sig_a) != sorted(sig_b):
        return
    seq = sorted(range(n), key=lambda x: (sig_a.count(sig_a[x]), sig_a[x]))
    image = [-1] * n
    used = [False] * n

    def extend(k):
        if k == n:
            yield tuple(image)
            return
        x = seq[k]
        for y in range(n):
            if used[y] or sig_b[y] != sig_a[x]:
                continue
            ok = True
            for i in range(k):
                w = seq[i]
                if la[x, w] != lb[y, image[w]] or la[w, x] != lb[image[w], y]:
                    ok = False
                    break
            if ok:
                image[x] = y
                used[y] = True
                yield from extend(k + 1)
                used[y] = False
        image[x] = -1

    yield from extend(0)


def is_isomorphic(A: FiniteLattice, B: FiniteLattice) -> bool:
    return next(isomorphisms(A, B), None) is not None


def direct_product(A: FiniteLattice, B: FiniteLattice, name: str | None = None) -> FiniteLattice:
    sep = "" if all(len(x) == 1 for x in A.names + B.names) else "_"
    names = [a + sep + b for a in A.names for b in B.names]
    nb = B.n

    def pair_table(TA, TB):
        T = np.empty((A.n * nb, A.n * nb), dtype=np.uint8)
        for i in range(A.n * nb):
            for j in range(A.n * nb):
                T[i, j] = TA[i // nb, j // nb] * nb + TB[i % nb, j % nb]
        return T

    return FiniteLattice(
        name or f"{A.name}x{B.name}",
        names,
        pair_table(A.meet, B.meet),
        pair_table(A.join, B.join),
        A.bottom * nb + B.bottom,
        A.top * nb + B.top,
    )


def to_dot(L: FiniteLattice) -> str:
    lines = [f'digraph "{L.name}" {{', "  rankdir=BT;"]
    for a, b in covers(L):
        lines.append(f'  "{L.names[a]}" -> "{L.names[b]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"

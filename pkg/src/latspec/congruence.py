"""Congruences, subdirect irreducibility and homomorphisms of small lattices.

Everything here is exhaustive and meant for catalog-scale lattices
(a few dozen elements at most); nothing is tuned for the product lattices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import NotSubdirectlyIrreducible, TooLarge
from .lattice import (
    FiniteLattice,
    covers,
    dual,
    isomorphisms,
    lattice_from_order,
    sublattice_closure,
)

CATALOG_SCALE = 16


def _normalize(labels: Iterable[int]) -> tuple[int, ...]:
    ids: dict[int, int] = {}
    return tuple(ids.setdefault(x, len(ids)) for x in labels)


@dataclass(frozen=True)
class Congruence:
    """Partition of a host lattice's elements; block ids numbered by first occurrence."""

    partition: tuple[int, ...]
    lattice: FiniteLattice | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "partition", _normalize(self.partition))

    @property
    def n_blocks(self) -> int:
        return max(self.partition) + 1 if self.partition else 0

    def blocks(self) -> list[frozenset[int]]:
        out: list[set[int]] = [set() for _ in range(self.n_blocks)]
        for x, b in enumerate(self.partition):
            out[b].add(x)
        return [frozenset(b) for b in out]

    def block_of(self, x: int) -> frozenset[int]:
        b = self.partition[x]
        return frozenset(y for y, c in enumerate(self.partition) if c == b)

    def related(self, x: int, y: int) -> bool:
        return self.partition[x] == self.partition[y]

    def is_delta(self) -> bool:
        return self.n_blocks == len(self.partition)

    def is_nabla(self) -> bool:
        return self.n_blocks <= 1

    def __le__(self, other: "Congruence") -> bool:
        # refinement order: every block of self lies inside a block of other
        seen: dict[int, int] = {}
        for b, c in zip(self.partition, other.partition):
            if seen.setdefault(b, c) != c:
                return False
        return True

    def __lt__(self, other: "Congruence") -> bool:
        return self != other and self <= other


class _UnionFind:
    def __init__(self, labels):
        first: dict[int, int] = {}
        self.parent = [first.setdefault(b, x) for x, b in enumerate(labels)]

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def labels(self):
        return [self.find(x) for x in range(len(self.parent))]


def _close(L: FiniteLattice, start: Iterable[int], pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Smallest congruence above the partition ``start`` relating all ``pairs``."""
    uf = _UnionFind(list(start))
    meet, join = L.meet, L.join
    n = L.n
    work = list(pairs)
    while work:
        a, b = work.pop()
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        uf.parent[ra] = rb
        # translations of a pair already related are implied by those of merged pairs
        for z in range(n):
            work.append((int(meet[a, z]), int(meet[b, z])))
            work.append((int(join[a, z]), int(join[b, z])))
    return Congruence(tuple(uf.labels()), L)


def delta(L: FiniteLattice) -> Congruence:
    return Congruence(tuple(range(L.n)), L)


def nabla(L: FiniteLattice) -> Congruence:
    return Congruence((0,) * L.n, L)


def principal_congruence(L: FiniteLattice, a: int, b: int) -> Congruence:
    return _close(L, range(L.n), [(a, b)])


def congruence_join(L: FiniteLattice, c1: Congruence, c2: Congruence) -> Congruence:
    pairs = [(x, min(blk)) for blk in c2.blocks() for x in blk]
    return _close(L, c1.partition, pairs)


def is_congruence(L: FiniteLattice, c: Congruence) -> bool:
    """Exhaustive compatibility check, independent of the closure procedure."""
    p = np.asarray(c.partition)
    same = p[:, None] == p[None, :]
    for T in (np.asarray(L.meet), np.asarray(L.join)):
        img = p[T]  # img[x, z] = block of x.z
        # x ~ y must give img[x, z] == img[y, z] for every z
        for x, y in zip(*np.nonzero(np.triu(same, 1))):
            if np.any(img[x] != img[y]):
                return False
    return True


def congruence_lattice(L: FiniteLattice, limit: int = CATALOG_SCALE) -> set[Congruence]:
    """All congruences of L, generated as joins of principal ones."""
    if L.n > limit:
        raise TooLarge(L.n, limit)
    principal = {principal_congruence(L, a, b) for a in range(L.n) for b in range(a + 1, L.n)}
    found = {delta(L)}
    frontier = set(found)
    while frontier:
        fresh = set()
        for c in frontier:
            for p in principal:
                j = congruence_join(L, c, p)
                if j not in found:
                    fresh.add(j)
        found |= fresh
        frontier = fresh
    return found


def _atoms_of_con(L: FiniteLattice) -> list[Congruence]:
    # every atom of Con L is generated by a covering pair
    cands = {principal_congruence(L, a, b) for a, b in covers(L)}
    return sorted((c for c in cands if not any(d < c for d in cands)), key=lambda c: c.partition)


def is_subdirectly_irreducible(L: FiniteLattice) -> bool:
    return L.n > 1 and len(_atoms_of_con(L)) == 1


def monolith(L: FiniteLattice) -> Congruence:
    if L.n > CATALOG_SCALE:
        raise TooLarge(L.n, CATALOG_SCALE)
    mins = _atoms_of_con(L)
    if L.n <= 1 or len(mins) != 1:
        raise NotSubdirectlyIrreducible(L.name)
    return mins[0]


def is_zero_separating(c: Congruence, L: FiniteLattice | None = None) -> bool:
    L = L or c.lattice
    return len(c.block_of(L.bottom)) == 1


def is_one_separating(c: Congruence, L: FiniteLattice | None = None) -> bool:
    L = L or c.lattice
    return len(c.block_of(L.top)) == 1


def quotient(L: FiniteLattice, c: Congruence) -> tuple[FiniteLattice, tuple[int, ...]]:
    """Quotient lattice L/c and the natural map (element -> block index)."""
    p = c.partition
    k = c.n_blocks
    reps = [p.index(b) for b in range(k)]
    le = np.array([[p[int(L.join[reps[i], reps[j]])] == j for j in range(k)] for i in range(k)])
    names = ["/".join(L.names[x] for x in sorted(blk)) for blk in c.blocks()]
    return lattice_from_order(f"{L.name}/~", names, le), p


def _generating_sets(L: FiniteLattice) -> dict[frozenset[int], bool]:
    memo: dict[frozenset[int], bool] = {}
    for t in itertools.combinations_with_replacement(range(L.n), 3):
        s = frozenset(t)
        if s not in memo:
            memo[s] = len(sublattice_closure(L, s)) == L.n
    return memo


def meet_condition_witness(L: FiniteLattice) -> tuple[int, int, int] | None:
    """First generating triple (lexicographic) with fewer than two nonzero pairwise meets."""
    if L.n > CATALOG_SCALE:
        raise TooLarge(L.n, CATALOG_SCALE)
    gens = _generating_sets(L)
    bot = L.bottom
    for t in itertools.product(range(L.n), repeat=3):
        if not gens[frozenset(t)]:
            continue
        nonzero = sum(int(L.meet[t[i], t[j]]) != bot for i, j in ((0, 1), (0, 2), (1, 2)))
        if nonzero < 2:
            return t
    return None


def meet_condition(L: FiniteLattice) -> bool:
    return meet_condition_witness(L) is None


def join_condition_witness(L: FiniteLattice) -> tuple[int, int, int] | None:
    return meet_condition_witness(dual(L))


def join_condition(L: FiniteLattice) -> bool:
    return meet_condition(dual(L))


def automorphisms(L: FiniteLattice) -> list[tuple[int, ...]]:
    return list(isomorphisms(L, L))


def automorphism_count(L: FiniteLattice) -> int:
    return sum(1 for _ in isomorphisms(L, L))


def surjective_homomorphisms(src: FiniteLattice, dst: FiniteLattice) -> list[tuple[int, ...]]:
    """Every surjective lattice homomorphism src -> dst as an image tuple (sorted)."""
    maps = set()
    for c in congruence_lattice(src, limit=max(CATALOG_SCALE, src.n)):
        if c.n_blocks != dst.n:
            continue
        q, nat = quotient(src, c)
        for iso in isomorphisms(q, dst):
            maps.add(tuple(iso[nat[x]] for x in range(src.n)))
    return sorted(maps)


def is_homomorphism(src: FiniteLattice, dst: FiniteLattice, f) -> bool:
    f = np.asarray(f)
    return bool(
        np.array_equal(f[np.asarray(src.meet)], np.asarray(dst.meet)[f[:, None], f[None, :]])
        and np.array_equal(f[np.asarray(src.join)], np.asarray(dst.join)[f[:, None], f[None, :]])
    )

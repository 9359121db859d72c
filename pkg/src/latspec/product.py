"""Sublattices of direct products generated by a triple (x, y, z).

Each factor contributes one coordinate.  The closure grows frontier-wise:
in every round only pairs (new element, any element) are combined, which is
enough because older pairs were combined in earlier rounds.  Membership uses
an open-addressing hash table over packed coordinate words (or over raw
coordinate rows when the factors need more than 63 bits).  The finished
element store is sorted lexicographically so every output is reproducible.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import CapacityExceeded
from .lattice import FiniteLattice

DEFAULT_BUDGET = 1 << 20
BITMAP_BITS = 28  # direct-address membership up to 2**28 keys (32 MB)
_EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def default_budget() -> int:
    env = os.environ.get("LATSPEC_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class Factor:
    lattice: FiniteLattice
    assignment: tuple[int, int, int]

    def __post_init__(self):
        t = tuple(int(v) for v in self.assignment)
        if len(t) != 3 or not all(0 <= v < self.lattice.n for v in t):
            raise ValueError(f"assignment {self.assignment} out of range for {self.lattice.name}")
        object.__setattr__(self, "assignment", t)

    def label(self) -> str:
        x, y, z = (self.lattice.names[v] for v in self.assignment)
        return f"{self.lattice.name}({x},{y},{z})"


class FactorSystem:
    """Ordered list of (factor lattice, generator assignment)."""

    def __init__(self, factors: Iterable[Factor | tuple[FiniteLattice, Sequence[int]]]):
        fs = []
        for f in factors:
            fs.append(f if isinstance(f, Factor) else Factor(f[0], tuple(f[1])))
        if not fs:
            raise ValueError("a factor system needs at least one factor")
        self.factors: tuple[Factor, ...] = tuple(fs)

    def __len__(self):
        return len(self.factors)

    def __repr__(self):
        return "FactorSystem(" + ", ".join(f.label() for f in self.factors) + ")"

    @property
    def lattices(self) -> list[FiniteLattice]:
        return [f.lattice for f in self.factors]

    def generators(self) -> list[tuple[int, ...]]:
        return [tuple(f.assignment[g] for f in self.factors) for g in range(3)]

    def restrict(self, positions: Iterable[int]) -> "FactorSystem":
        return FactorSystem([self.factors[i] for i in positions])

    def permuted(self, perm: Sequence[int]) -> "FactorSystem":
        return FactorSystem([self.factors[i] for i in perm])

    def product_size(self) -> int:
        size = 1
        for f in self.factors:
            size *= f.lattice.n
        return size

    def generates_each(self) -> bool:
        from .lattice import is_generated_by

        return all(is_generated_by(f.lattice, f.assignment) for f in self.factors)

    @cached_property
    def _tables(self):
        k = len(self.factors)
        s = max(f.lattice.n for f in self.factors)
        meet = np.zeros((k, s, s), dtype=np.uint8)
        join = np.zeros((k, s, s), dtype=np.uint8)
        le = np.zeros((k, s, s), dtype=np.bool_)
        heights = np.zeros((k, s), dtype=np.int64)
        for i, f in enumerate(self.factors):
            n = f.lattice.n
            meet[i, :n, :n] = f.lattice.meet
            join[i, :n, :n] = f.lattice.join
            le[i, :n, :n] = f.lattice.order
            heights[i, :n] = f.lattice.heights
        widths = [max(1, (f.lattice.n - 1).bit_length()) for f in self.factors]
        shifts = np.zeros(k, dtype=np.uint64)
        acc = 0
        for i in range(k - 1, -1, -1):
            shifts[i] = acc
            acc += widths[i]
        masks = np.array([(1 << w) - 1 for w in widths], dtype=np.uint64)
        return meet, join, le, heights, shifts, masks, acc

    @property
    def packed_bits(self) -> int:
        return self._tables[6]


# --- numba kernels -----------------------------------------------------------


@njit(cache=True)
def _slot(key, logsize):
    return np.int64((key * _GOLDEN) >> np.uint64(64 - logsize))


@njit(cache=True)
def _rehash(keys, n, logsize):
    size = 1 << logsize
    table = np.full(size, _EMPTY, dtype=np.uint64)
    mask = size - 1
    for i in range(n):
        h = _slot(keys[i], logsize)
        while table[h] != _EMPTY:
            h = (h + 1) & mask
        table[h] = keys[i]
    return table


@njit(cache=True)
def _packed_closure(meet, join, shifts, masks, seeds, budget):
    k = shifts.shape[0]
    cap = 1024
    while cap < 2 * seeds.shape[0]:
        cap *= 2
    keys = np.empty(cap, dtype=np.uint64)
    coords = np.empty((cap, k), dtype=np.uint8)
    logsize = 11
    while (1 << logsize) < 2 * cap:
        logsize += 1
    table = np.full(1 << logsize, _EMPTY, dtype=np.uint64)
    n = 0
    for s in range(seeds.shape[0]):
        key = seeds[s]
        h = _slot(key, logsize)
        tmask = (1 << logsize) - 1
        found = False
        while table[h] != _EMPTY:
            if table[h] == key:
                found = True
                break
            h = (h + 1) & tmask
        if found:
            continue
        table[h] = key
        keys[n] = key
        for f in range(k):
            coords[n, f] = np.uint8((key >> shifts[f]) & masks[f])
        n += 1
    lo = 0
    cand = np.empty(2, dtype=np.uint64)
    while lo < n:
        hi = n
        for i in range(lo, hi):
            for j in range(i + 1):
                m = np.uint64(0)
                jn = np.uint64(0)
                for f in range(k):
                    a = coords[i, f]
                    b = coords[j, f]
                    m |= np.uint64(meet[f, a, b]) << shifts[f]
                    jn |= np.uint64(join[f, a, b]) << shifts[f]
                ki = keys[i]
                kj = keys[j]
                cand[0] = m
                cand[1] = jn
                for c in range(2):
                    key = cand[c]
                    # comparable pairs reproduce an operand; skip the probe
                    if key == ki or key == kj:
                        continue
                    tmask = (1 << logsize) - 1
                    h = _slot(key, logsize)
                    found = False
                    while table[h] != _EMPTY:
                        if table[h] == key:
                            found = True
                            break
                        h = (h + 1) & tmask
                    if found:
                        continue
                    if n >= budget:
                        return keys[:0], -1
                    if n == cap:
                        cap *= 2
                        nk = np.empty(cap, dtype=np.uint64)
                        nk[:n] = keys[:n]
                        keys = nk
                        nc = np.empty((cap, k), dtype=np.uint8)
                        nc[:n] = coords[:n]
                        coords = nc
                    keys[n] = key
                    for f in range(k):
                        coords[n, f] = np.uint8((key >> shifts[f]) & masks[f])
                    n += 1
                    if 2 * n > (1 << logsize):
                        logsize += 1
                        table = _rehash(keys, n, logsize)
                    else:
                        table[h] = key
        lo = hi
    return keys[:n].copy(), n


@njit(cache=True)
def _bitmap_closure(meet, join, shifts, masks, seeds, budget, bits):
    """Packed closure with a direct-address bit set instead of hashing (small keys)."""
    k = shifts.shape[0]
    seen = np.zeros(((1 << bits) + 63) >> 6, dtype=np.uint64)
    one = np.uint64(1)
    cap = 1024
    while cap < 2 * seeds.shape[0]:
        cap *= 2
    keys = np.empty(cap, dtype=np.uint64)
    coords = np.empty((cap, k), dtype=np.uint8)
    n = 0
    for s in range(seeds.shape[0]):
        key = seeds[s]
        w = np.int64(key >> np.uint64(6))
        bit = one << (key & np.uint64(63))
        if seen[w] & bit:
            continue
        seen[w] |= bit
        keys[n] = key
        for f in range(k):
            coords[n, f] = np.uint8((key >> shifts[f]) & masks[f])
        n += 1
    lo = 0
    while lo < n:
        hi = n
        for i in range(lo, hi):
            for j in range(i + 1):
                m = np.uint64(0)
                jn = np.uint64(0)
                for f in range(k):
                    a = coords[i, f]
                    b = coords[j, f]
                    m |= np.uint64(meet[f, a, b]) << shifts[f]
                    jn |= np.uint64(join[f, a, b]) << shifts[f]
                for c in range(2):
                    key = m if c == 0 else jn
                    w = np.int64(key >> np.uint64(6))
                    bit = one << (key & np.uint64(63))
                    if seen[w] & bit:
                        continue
                    if n >= budget:
                        return keys[:0], -1
                    if n == cap:
                        cap *= 2
                        nk = np.empty(cap, dtype=np.uint64)
                        nk[:n] = keys[:n]
                        keys = nk
                        nc = np.empty((cap, k), dtype=np.uint8)
                        nc[:n] = coords[:n]
                        coords = nc
                    seen[w] |= bit
                    keys[n] = key
                    for f in range(k):
                        coords[n, f] = np.uint8((key >> shifts[f]) & masks[f])
                    n += 1
        lo = hi
    return keys[:n].copy(), n


@njit(cache=True)
def _row_hash(rows, i, k):
    h = np.uint64(1469598103934665603)
    for f in range(k):
        h = (h ^ np.uint64(rows[i, f])) * np.uint64(1099511628211)
    return h


@njit(cache=True)
def _rows_equal(rows, i, j, k):
    for f in range(k):
        if rows[i, f] != rows[j, f]:
            return False
    return True


@njit(cache=True)
def _rehash_rows(rows, n, logsize, k):
    size = 1 << logsize
    table = np.full(size, -1, dtype=np.int64)
    mask = size - 1
    for i in range(n):
        h = np.int64(_row_hash(rows, i, k) >> np.uint64(64 - logsize))
        while table[h] != -1:
            h = (h + 1) & mask
        table[h] = i
    return table


@njit(cache=True)
def _row_closure(meet, join, seeds, budget):
    """Same frontier closure over raw coordinate rows (any number of factors)."""
    k = seeds.shape[1]
    cap = 1024
    while cap < 2 * seeds.shape[0] + 2:
        cap *= 2
    rows = np.empty((cap, k), dtype=np.uint8)
    logsize = 11
    while (1 << logsize) < 2 * cap:
        logsize += 1
    table = np.full(1 << logsize, -1, dtype=np.int64)
    n = 0
    for s in range(seeds.shape[0]):
        rows[n] = seeds[s]
        tmask = (1 << logsize) - 1
        h = np.int64(_row_hash(rows, n, k) >> np.uint64(64 - logsize))
        found = False
        while table[h] != -1:
            if _rows_equal(rows, table[h], n, k):
                found = True
                break
            h = (h + 1) & tmask
        if not found:
            table[h] = n
            n += 1
    lo = 0
    while lo < n:
        hi = n
        for i in range(lo, hi):
            for j in range(i + 1):
                for c in range(2):
                    if n + 1 >= cap:
                        cap *= 2
                        nr = np.empty((cap, k), dtype=np.uint8)
                        nr[:n] = rows[:n]
                        rows = nr
                    # build the candidate in the scratch slot rows[n]
                    for f in range(k):
                        a = rows[i, f]
                        b = rows[j, f]
                        rows[n, f] = meet[f, a, b] if c == 0 else join[f, a, b]
                    tmask = (1 << logsize) - 1
                    h = np.int64(_row_hash(rows, n, k) >> np.uint64(64 - logsize))
                    found = False
                    while table[h] != -1:
                        if _rows_equal(rows, table[h], n, k):
                            found = True
                            break
                        h = (h + 1) & tmask
                    if found:
                        continue
                    if n >= budget:
                        return rows[:0], -1
                    table[h] = n
                    n += 1
                    if 2 * n > (1 << logsize):
                        logsize += 1
                        table = _rehash_rows(rows, n, logsize, k)
        lo = hi
    return rows[:n].copy(), n


@njit(cache=True)
def _minimal_count(coords, le, rank, bottom):
    """Number of minimal elements of coords minus ``bottom`` w.r.t. the product order.

    Elements are visited by increasing rank; an element is minimal iff no
    minimal element found so far lies below it.
    """
    n, k = coords.shape
    order = np.argsort(rank, kind="mergesort")
    found = np.empty(n, dtype=np.int64)
    nf = 0
    for t in range(n):
        u = order[t]
        is_bottom = True
        for f in range(k):
            if coords[u, f] != bottom[f]:
                is_bottom = False
                break
        if is_bottom:
            continue
        covered = False
        for q in range(nf):
            a = found[q]
            below = True
            for f in range(k):
                if not le[f, coords[a, f], coords[u, f]]:
                    below = False
                    break
            if below:
                covered = True
                break
        if not covered:
            found[nf] = u
            nf += 1
    return found[:nf].copy()


# --- public surface ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneratedLattice:
    """Closure of the generator triple inside the direct product of the factors."""

    system: FactorSystem
    elements: np.ndarray  # (n, k) uint8, lexicographically sorted rows
    generators: tuple[tuple[int, ...], ...]

    def __len__(self):
        return int(self.elements.shape[0])

    @cached_property
    def bottom(self) -> tuple[int, ...]:
        return _fold(self.system, self.elements, "meet")

    @cached_property
    def top(self) -> tuple[int, ...]:
        return _fold(self.system, self.elements, "join")

    @cached_property
    def _rank(self) -> np.ndarray:
        heights = self.system._tables[3]
        k = self.elements.shape[1]
        return heights[np.arange(k)[None, :], self.elements].sum(axis=1)

    @cached_property
    def atoms(self) -> np.ndarray:
        le = self.system._tables[2]
        idx = _minimal_count(self.elements, le, self._rank, np.array(self.bottom, dtype=np.uint8))
        return self.elements[np.sort(idx)]

    @cached_property
    def coatoms(self) -> np.ndarray:
        le = np.ascontiguousarray(np.transpose(self.system._tables[2], (0, 2, 1)))
        idx = _minimal_count(self.elements, le, -self._rank, np.array(self.top, dtype=np.uint8))
        return self.elements[np.sort(idx)]

    def __contains__(self, row) -> bool:
        row = np.asarray(row, dtype=np.uint8)
        hit = np.all(self.elements == row[None, :], axis=1)
        return bool(hit.any())

    def as_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(v) for v in r) for r in self.elements}

    def format_element(self, row) -> str:
        names = [f.lattice.names[int(v)] for f, v in zip(self.system.factors, row)]
        sep = "" if all(len(x) == 1 for x in names) else ","
        return sep.join(names)


def _fold(fs: FactorSystem, elements: np.ndarray, op: str) -> tuple[int, ...]:
    out = []
    for i, f in enumerate(fs.factors):
        T = f.lattice.meet if op == "meet" else f.lattice.join
        acc = int(elements[0, i])
        for v in np.unique(elements[:, i]):
            acc = int(T[acc, int(v)])
        out.append(acc)
    return tuple(out)


def _pack(fs: FactorSystem, rows: np.ndarray) -> np.ndarray:
    shifts, masks = fs._tables[4], fs._tables[5]
    rows = np.asarray(rows, dtype=np.uint64)
    return np.bitwise_or.reduce(rows << shifts[None, :], axis=1)


def _unpack(fs: FactorSystem, keys: np.ndarray) -> np.ndarray:
    shifts, masks = fs._tables[4], fs._tables[5]
    return ((keys[:, None] >> shifts[None, :]) & masks[None, :]).astype(np.uint8)


def generate(fs: FactorSystem, seeds, budget: int | None = None, kernel: str = "auto") -> np.ndarray:
    """Sorted rows of the sublattice of the product generated by ``seeds``.

    ``kernel`` picks the membership structure: ``bitmap`` (direct address,
    small keys), ``hash`` (packed keys up to 63 bits) or ``rows`` (any width).
    """
    budget = default_budget() if budget is None else int(budget)
    seeds = np.ascontiguousarray(np.atleast_2d(np.asarray(seeds, dtype=np.uint8)))
    meet, join = fs._tables[0], fs._tables[1]
    bits = fs.packed_bits
    if kernel == "auto":
        kernel = "bitmap" if bits <= BITMAP_BITS else "hash" if bits <= 63 else "rows"
    if kernel in ("bitmap", "hash"):
        if kernel == "bitmap" and bits > BITMAP_BITS or bits > 63:
            raise ValueError(f"{bits}-bit keys do not fit the {kernel} kernel")
        packed = _pack(fs, seeds)
        if kernel == "bitmap":
            keys, n = _bitmap_closure(meet, join, fs._tables[4], fs._tables[5], packed, budget, bits)
        else:
            keys, n = _packed_closure(meet, join, fs._tables[4], fs._tables[5], packed, budget)
        if n < 0:
            raise CapacityExceeded(budget)
        return _unpack(fs, np.sort(keys))
    if kernel != "rows":
        raise ValueError(f"unknown kernel {kernel!r}")
    rows, n = _row_closure(meet, join, seeds, budget)
    if n < 0:
        raise CapacityExceeded(budget)
    order = np.lexsort(rows.T[::-1])
    return np.ascontiguousarray(rows[order])


def closure(fs: FactorSystem, budget: int | None = None, kernel: str = "auto") -> GeneratedLattice:
    gens = fs.generators()
    rows = generate(fs, gens, budget, kernel)
    return GeneratedLattice(fs, rows, tuple(gens))


def count_atoms(g: GeneratedLattice) -> int:
    return int(len(g.atoms))


def count_coatoms(g: GeneratedLattice) -> int:
    return int(len(g.coatoms))


def element_count(g: GeneratedLattice) -> int:
    return len(g)


def naive_closure(fs: FactorSystem, seeds=None) -> set[tuple[int, ...]]:
    """Reference fixpoint: recombine every pair each round until nothing changes."""
    meets = [f.lattice.meet for f in fs.factors]
    joins = [f.lattice.join for f in fs.factors]
    cur = {tuple(g) for g in (fs.generators() if seeds is None else seeds)}
    while True:
        nxt = set(cur)
        for u in cur:
            for v in cur:
                nxt.add(tuple(int(M[a, b]) for M, a, b in zip(meets, u, v)))
                nxt.add(tuple(int(J[a, b]) for J, a, b in zip(joins, u, v)))
        if nxt == cur:
            return cur
        cur = nxt

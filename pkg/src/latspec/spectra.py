"""Atom, coatom and double spectra over the subsets of a run file's assignments.

Each valid subset I of the assignments gives the sublattice of the product of
the selected factors generated by the selected coordinates of (x, y, z).
Projection onto I is a lattice homomorphism, so that sublattice is the image
of the closure over any superset of I.  The default method therefore closes
once over all assignments and walks the subset tree downwards, obtaining each
child by masking one factor's bits and deduplicating.  The ``closure`` method
recomputes every subset from scratch and serves as a cross-check.
"""

from __future__ import annotations

import itertools
import multiprocessing as mp
import sys
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numba import njit

from .congruence import automorphisms
from .errors import CapacityExceeded
from .lattice import FiniteLattice, is_generated_by
from .product import FactorSystem, GeneratedLattice, closure, default_budget, generate
from .runfile import AssignmentLine, RunSpec, derive_constraints

MODES = ("atoms", "coatoms", "double", "free")
MAX_ASSIGNMENTS = 30


# --- reference tables ---------------------------------------------------------

@dataclass(frozen=True)
class DeltaTable:
    d3: frozenset
    d4: frozenset
    d6: frozenset
    d6_inv: frozenset

    def as_dict(self) -> dict[str, frozenset]:
        return {"delta3": self.d3, "delta4": self.d4, "delta6": self.d6, "delta6inv": self.d6_inv}


def delta_tables() -> DeltaTable:
    d3 = frozenset({(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)})
    return DeltaTable(
        d3,
        d3 | {(4, 3), (3, 4), (4, 2), (2, 4)},
        d3 | {(4, 2), (4, 3), (6, 3)},
        d3 | {(2, 4), (3, 4), (3, 6)},
    )


# --- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class SubsetResult:
    mask: int
    n: int
    atoms: int
    coatoms: int | None = None

    def line(self) -> str:
        s = f"mask={self.mask:x} n={self.n} atoms={self.atoms}"
        return s if self.coatoms is None else s + f" coatoms={self.coatoms}"


def format_set(values) -> str:
    def fmt(v):
        return f"({v[0]},{v[1]})" if isinstance(v, tuple) else str(v)

    return "{" + ",".join(fmt(v) for v in sorted(values)) + "}"


def parse_set(text: str) -> frozenset:
    """Inverse of :func:`format_set` for integer sets and integer-pair sets."""
    s = text.strip().replace(" ", "")
    if not (s.startswith("{") and s.endswith("}")):
        raise ValueError(f"not a set literal: {text!r}")
    body = s[1:-1]
    if not body:
        return frozenset()
    if body.startswith("("):
        pairs = body[1:-1].split("),(")
        return frozenset(tuple(int(v) for v in p.split(",")) for p in pairs)
    return frozenset(int(v) for v in body.split(","))


@dataclass
class SpectrumReport:
    mode: str
    atom_set: set = field(default_factory=set)
    coatom_set: set = field(default_factory=set)
    pair_set: set = field(default_factory=set)
    subsets_total: int = 0
    subsets_valid: int = 0
    subsets_skipped: int = 0
    per_subset: list = field(default_factory=list)

    def add(self, r: SubsetResult):
        self.per_subset.append(r)
        self.atom_set.add(r.atoms)
        if r.coatoms is not None:
            self.coatom_set.add(r.coatoms)
            self.pair_set.add((r.atoms, r.coatoms))

    def result_set(self):
        return {"atoms": self.atom_set, "coatoms": self.coatom_set, "double": self.pair_set}[self.mode]

    def summary(self) -> str:
        label = {"atoms": "AS", "coatoms": "CS", "double": "DS"}[self.mode]
        return f"{label}={format_set(self.result_set())}"

    def machine_lines(self) -> list[str]:
        return [r.line() for r in sorted(self.per_subset, key=lambda r: r.mask)]


# --- building factor systems from run files -------------------------------------

def resolve(a: AssignmentLine, catalog: Mapping[str, FiniteLattice]):
    L = catalog[a.lattice_name]
    return L, tuple(L.index(v) for v in a.triple)


def factor_system(rs: RunSpec, catalog, mask: int | None = None) -> FactorSystem:
    k = len(rs.assignments)
    idx = range(k) if mask is None else [i for i in range(k) if mask >> i & 1]
    return FactorSystem([resolve(rs.assignments[i], catalog) for i in idx])


def constraint_masks(rs: RunSpec) -> list[int]:
    return sorted({(1 << i) | (1 << j) for i, j in rs.constraint_pairs()})


def subset_valid(mask: int, rs: RunSpec | Sequence[int]) -> bool:
    """False iff the mask selects both ends of some constraint."""
    bad = constraint_masks(rs) if isinstance(rs, RunSpec) else rs
    return all(mask & b != b for b in bad)


def free_lattice(rs: RunSpec, catalog, budget: int | None = None) -> GeneratedLattice:
    if not rs.assignments:
        raise ValueError("run file has no assignments")
    return closure(factor_system(rs, catalog), budget)


# --- counting kernels on packed keys --------------------------------------------

@njit(cache=True)
def _extremal_count(keys, shifts, masks, le, heights, sign):
    """Minimal elements above the least one (sign=1), or maximal below the top (sign=-1)."""
    n = keys.shape[0]
    k = shifts.shape[0]
    coords = np.empty((n, k), dtype=np.uint8)
    rank = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = 0
        for f in range(k):
            c = np.uint8((keys[i] >> shifts[f]) & masks[f])
            coords[i, f] = c
            r += heights[f, c]
        rank[i] = sign * r
    order = np.argsort(rank, kind="mergesort")
    found = np.empty(n, dtype=np.int64)
    nf = 0
    for t in range(1, n):  # order[0] is the least element (bottom, or top when sign=-1)
        u = order[t]
        covered = False
        for q in range(nf):
            a = found[q]
            below = True
            for f in range(k):
                if sign > 0:
                    ok = le[f, coords[a, f], coords[u, f]]
                else:
                    ok = le[f, coords[u, f], coords[a, f]]
                if not ok:
                    below = False
                    break
            if below:
                covered = True
                break
        if not covered:
            found[nf] = u
            nf += 1
    return nf


class _Packed:
    """Packing of the full system's coordinates into uint64 keys."""

    def __init__(self, fs: FactorSystem):
        meet, join, le, heights, shifts, masks, bits = fs._tables
        if bits > 63:
            raise ValueError("too many factors to pack into 64 bits")
        self.fs = fs
        self.le, self.heights, self.shifts, self.masks = le, heights, shifts, masks
        self.fields = masks << shifts

    def keys_of(self, rows: np.ndarray, cols: Sequence[int]) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.uint64)
        sh = self.shifts[list(cols)]
        return np.sort(np.bitwise_or.reduce(rows << sh[None, :], axis=1))

    def project(self, keys: np.ndarray, drop_mask: int) -> np.ndarray:
        clear = np.uint64(0)
        for f in range(len(self.fields)):
            if drop_mask >> f & 1:
                clear |= self.fields[f]
        return np.unique(keys & ~clear)

    def counts(self, keys: np.ndarray, want_coatoms: bool) -> tuple[int, int | None]:
        a = int(_extremal_count(keys, self.shifts, self.masks, self.le, self.heights, 1))
        c = None
        if want_coatoms:
            c = int(_extremal_count(keys, self.shifts, self.masks, self.le, self.heights, -1))
        return a, c


def _direct_keys(P: _Packed, fs_full: FactorSystem, mask: int, budget: int) -> np.ndarray:
    cols = [i for i in range(len(fs_full)) if mask >> i & 1]
    sub = fs_full.restrict(cols)
    rows = generate(sub, sub.generators(), budget)
    return P.keys_of(rows, cols)


# --- the enumerator -------------------------------------------------------------

class _Walker:
    def __init__(self, rs, catalog, mode, budget):
        self.k = len(rs.assignments)
        self.fs = factor_system(rs, catalog)
        self.P = _Packed(self.fs)
        self.bad = constraint_masks(rs)
        self.want_coatoms = mode in ("coatoms", "double")
        self.budget = budget

    def valid(self, mask):
        return all(mask & b != b for b in self.bad)

    def keys_for(self, mask, parent_keys):
        """Keys for ``mask``; None when the closure is over budget and mask is skipped anyway."""
        if parent_keys is not None:
            return self.P.project(parent_keys, ((1 << self.k) - 1) & ~mask)
        try:
            return _direct_keys(self.P, self.fs, mask, self.budget)
        except CapacityExceeded:
            if self.valid(mask):
                raise CapacityExceeded(self.budget, mask) from None
            return None

    def walk(self, mask, limit, keys, out, tick=None):
        # node (mask, limit): children drop one bit below ``limit``
        stack = [(mask, limit, keys)]
        while stack:
            m, lim, ks = stack.pop()
            if self.valid(m):
                if ks is None:
                    ks = self.keys_for(m, None)
                a, c = self.P.counts(ks, self.want_coatoms)
                out.append(SubsetResult(m, int(ks.shape[0]), a, c))
                if tick:
                    tick()
            for i in range(lim - 1, -1, -1):
                child = m & ~(1 << i)
                if child:
                    ck = self.keys_for(child, ks) if ks is not None else None
                    stack.append((child, i, ck))


_WORKER: _Walker | None = None
_ROOT_KEYS = None


def _run_task(task):
    mask, limit = task
    w = _WORKER
    full = (1 << w.k) - 1
    keys = None if _ROOT_KEYS is None else w.P.project(_ROOT_KEYS, full & ~mask)
    out: list[SubsetResult] = []
    w.walk(mask, limit, keys, out)
    return out


def _split(k: int, want: int):
    """Subtree roots covering every nonempty proper subset exactly once."""
    tasks = [((1 << k) - 1, k)]
    done = []
    while tasks and len(tasks) + len(done) < want:
        mask, limit = tasks.pop(0)
        done.append((mask, 0))  # the node itself, no children
        for i in range(limit - 1, -1, -1):
            child = mask & ~(1 << i)
            if child:
                tasks.append((child, i))
    return done, tasks


def enumerate_spectrum(
    rs: RunSpec,
    catalog,
    mode: str = "atoms",
    jobs: int = 1,
    budget: int | None = None,
    method: str = "project",
    progress: Callable[[int, int], None] | None = None,
) -> SpectrumReport:
    """Spectrum of a run file; output is independent of ``jobs`` and visit order."""
    global _WORKER, _ROOT_KEYS
    if mode not in ("atoms", "coatoms", "double"):
        raise ValueError(f"unknown mode {mode!r}")
    k = len(rs.assignments)
    if not 1 <= k <= MAX_ASSIGNMENTS:
        raise ValueError(f"need between 1 and {MAX_ASSIGNMENTS} assignments, got {k}")
    budget = default_budget() if budget is None else budget
    w = _Walker(rs, catalog, mode, budget)
    report = SpectrumReport(mode, subsets_total=(1 << k) - 1)
    valid_total = sum(1 for m in range(1, 1 << k) if w.valid(m))
    results: list[SubsetResult] = []

    if method == "closure":
        for m in range(1, 1 << k):
            if not w.valid(m):
                continue
            try:
                ks = _direct_keys(w.P, w.fs, m, budget)
            except CapacityExceeded:
                raise CapacityExceeded(budget, m) from None
            a, c = w.P.counts(ks, w.want_coatoms)
            results.append(SubsetResult(m, int(ks.shape[0]), a, c))
            if progress:
                progress(len(results), valid_total)
    elif method == "project":
        root = (1 << k) - 1
        try:
            root_keys = _direct_keys(w.P, w.fs, root, budget)
        except CapacityExceeded:
            if w.valid(root):
                raise CapacityExceeded(budget, root) from None
            root_keys = None
        if jobs <= 1:
            count = [0]

            def tick():
                count[0] += 1
                if progress and (count[0] % 1024 == 0 or count[0] == valid_total):
                    progress(count[0], valid_total)

            w.walk(root, k, root_keys, results, tick)
        else:
            singles, tasks = _split(k, 16 * jobs)
            _WORKER, _ROOT_KEYS = w, root_keys
            try:
                for mask, _ in singles:
                    results.extend(_run_task((mask, 0)))
                with mp.get_context("fork").Pool(jobs) as pool:
                    for part in pool.imap_unordered(_run_task, tasks):
                        results.extend(part)
                        if progress:
                            progress(len(results), valid_total)
            finally:
                _WORKER = _ROOT_KEYS = None
    else:
        raise ValueError(f"unknown method {method!r}")

    for r in sorted(results, key=lambda r: r.mask):
        report.add(r)
    report.subsets_valid = len(results)
    report.subsets_skipped = report.subsets_total - report.subsets_valid
    return report


# --- run-file generation ----------------------------------------------------------

def generating_triples(L: FiniteLattice) -> list[tuple[int, int, int]]:
    return [t for t in itertools.product(range(L.n), repeat=3) if is_generated_by(L, t)]


def triples_up_to_automorphism(L: FiniteLattice, triples) -> list[tuple[int, int, int]]:
    """Lexicographically least representative of each Aut(L)-orbit, in increasing order."""
    auts = list(automorphisms(L))
    reps = set()
    for t in triples:
        reps.add(min(tuple(g[v] for v in t) for g in auts))
    return sorted(reps)


def assignments_for(L: FiniteLattice, mode: str) -> list[AssignmentLine]:
    trip = generating_triples(L)
    if mode == "atoms":
        # x^z = y^z = 0 loses nothing for atom counts
        trip = [t for t in trip if L.meet[t[0], t[2]] == L.bottom and L.meet[t[1], t[2]] == L.bottom]
    elif mode == "coatoms":
        trip = [t for t in trip if L.join[t[0], t[2]] == L.top and L.join[t[1], t[2]] == L.top]
    out = []
    for t in triples_up_to_automorphism(L, trip):
        out.append(AssignmentLine(L.name, *(L.names[v] for v in t)))
    return out


def generate_run_spec(catalog, names: Sequence[str], mode: str = "double", constraints: bool = True) -> RunSpec:
    """Assignments for the listed factors (up to automorphism) plus derived constraints.

    mode ``atoms`` keeps only triples with x^z = y^z = 0, ``coatoms`` the dual;
    ``double`` and ``free`` keep every generating triple.
    """
    assigns = []
    for name in names:
        assigns.extend(assignments_for(catalog[name], mode))
    rs = RunSpec(tuple(assigns))
    if constraints:
        rs = RunSpec(rs.assignments, tuple(derive_constraints(rs, catalog)))
    return rs


def stderr_progress(done: int, total: int):
    print(f"\r{done}/{total} subsets", end="" if done < total else "\n", file=sys.stderr, flush=True)

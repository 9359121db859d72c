"""Catalog of small subdirectly irreducible lattices, read from text files.

File format::

    lattice N5
    elements 0 a b c 1
    covers 0<a a<b b<1 0<c c<1
    end

Blank lines and ``#`` lines outside blocks are ignored.  Expected invariants
live in ``expectations.json`` next to the ``.lat`` files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .congruence import (
    automorphism_count,
    is_one_separating,
    is_subdirectly_irreducible,
    is_zero_separating,
    join_condition,
    meet_condition,
    monolith,
)
from .errors import CatalogSyntaxError, LatspecError, MissingEntry
from .lattice import CoverGraph, FiniteLattice, dual, is_isomorphic, lattice_from_cover_graph, validate_axioms

REQUIRED = (
    ["C2", "M3", "N5", "U8"]
    + [f"L{i}" for i in range(1, 16)]
    + [f"V{i}" for i in range(1, 9)]
)
EXPECTATIONS_FILE = "expectations.json"
_NAME = re.compile(r"[A-Za-z0-9_]+\Z")


def parse_catalog(text: str, path=None) -> list[CoverGraph]:
    graphs = []
    cur = None  # [name, elements, covers, start line]
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split()
        if cur is None:
            if not words or words[0].startswith("#"):
                continue
            if words[0] != "lattice" or len(words) != 2 or not _NAME.match(words[1]):
                raise CatalogSyntaxError("expected 'lattice NAME'", path, lineno)
            cur = [words[1], None, [], lineno]
            continue
        if not words or words[0].startswith("#"):
            continue
        key = words[0]
        if key == "elements":
            if cur[1] is not None:
                raise CatalogSyntaxError("second 'elements' line", path, lineno)
            for w in words[1:]:
                if not _NAME.match(w):
                    raise CatalogSyntaxError(f"bad element name {w!r}", path, lineno)
            cur[1] = words[1:]
        elif key == "covers":
            for w in words[1:]:
                lo, sep, hi = w.partition("<")
                if not sep or not _NAME.match(lo) or not _NAME.match(hi):
                    raise CatalogSyntaxError(f"bad cover {w!r}, expected lo<hi", path, lineno)
                cur[2].append((lo, hi))
        elif key == "end":
            if cur[1] is None:
                raise CatalogSyntaxError(f"lattice {cur[0]} has no 'elements' line", path, lineno)
            graphs.append(CoverGraph(cur[0], tuple(cur[1]), tuple(cur[2])))
            cur = None
        else:
            raise CatalogSyntaxError(f"unexpected {key!r} inside lattice {cur[0]}", path, lineno)
    if cur is not None:
        raise CatalogSyntaxError(f"lattice {cur[0]} (line {cur[3]}) lacks 'end'", path, cur[3])
    return graphs


def render_catalog(graphs: Iterable[CoverGraph]) -> str:
    out = []
    for g in graphs:
        out.append(f"lattice {g.name}")
        out.append("elements " + " ".join(g.elements))
        out.append("covers " + " ".join(f"{a}<{b}" for a, b in g.covers))
        out.append("end")
        out.append("")
    return "\n".join(out)


@dataclass
class Catalog:
    """Name -> lattice mapping plus per-entry expectations and construction errors."""

    lattices: dict[str, FiniteLattice] = field(default_factory=dict)
    graphs: dict[str, CoverGraph] = field(default_factory=dict)
    expectations: dict[str, dict] = field(default_factory=dict)
    errors: dict[str, LatspecError] = field(default_factory=dict)

    def __getitem__(self, name) -> FiniteLattice:
        return self.lattices[name]

    def __contains__(self, name):
        return name in self.lattices

    def __iter__(self):
        return iter(self.lattices)

    def __len__(self):
        return len(self.lattices)

    def names(self) -> list[str]:
        return list(self.graphs)


def default_catalog_dir() -> Path:
    return Path(str(resources.files("latspec") / "data" / "catalog"))


def _catalog_files(paths) -> list[Path]:
    if paths is None:
        paths = [default_catalog_dir()]
    if isinstance(paths, (str, Path)):
        paths = [paths]
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.lat")) if p.is_dir() else [p])
    return files


def load_catalog(paths=None, strict: bool = True, require=REQUIRED) -> Catalog:
    """Read catalog files (or directories of ``.lat`` files).

    With ``strict`` a construction error is raised; otherwise it is kept in
    ``catalog.errors`` so that verification can report it per entry.
    """
    cat = Catalog()
    dirs = set()
    for f in _catalog_files(paths):
        dirs.add(f.parent)
        for g in parse_catalog(f.read_text(encoding="utf-8"), path=str(f)):
            if g.name in cat.graphs:
                raise CatalogSyntaxError(f"lattice {g.name} defined twice", str(f))
            cat.graphs[g.name] = g
            try:
                cat.lattices[g.name] = lattice_from_cover_graph(g)
            except LatspecError as e:
                if strict:
                    raise
                cat.errors[g.name] = e
    for d in sorted(dirs):
        ex = d / EXPECTATIONS_FILE
        if ex.exists():
            cat.expectations.update(json.loads(ex.read_text(encoding="utf-8")))
    missing = [n for n in (require or ()) if n not in cat.graphs]
    if missing:
        raise MissingEntry(missing)
    return cat


@dataclass(frozen=True)
class EntryReport:
    name: str
    size: int | None
    aut: int | None
    si: bool | None
    zero_sep: bool | None
    one_sep: bool | None
    meet: bool | None
    join: bool | None
    mismatches: tuple[str, ...]

    def row(self) -> str:
        def b(v):
            return "-" if v is None else ("yes" if v is True else "no" if v is False else str(v))

        return (
            f"{self.name:<4} n={b(self.size):<3} aut={b(self.aut):<2} si={b(self.si):<3} "
            f"0sep={b(self.zero_sep):<3} 1sep={b(self.one_sep):<3} meet={b(self.meet):<3} join={b(self.join):<3}"
        )


def _check_relation(L: FiniteLattice, rel: str) -> bool:
    m = re.fullmatch(r"(\w+)([&|<])(\w+)(?:=(\w+))?", rel.replace(" ", ""))
    if not m:
        raise ValueError(f"bad relation {rel!r}")
    a, op, b, c = m.groups()
    ia, ib = L.index(a), L.index(b)
    if op == "<":
        return L.leq(ia, ib)
    table = L.meet if op == "&" else L.join
    return int(table[ia, ib]) == L.index(c)


def verify_entry(cat: Catalog, name: str) -> EntryReport:
    exp = cat.expectations.get(name, {})
    if name in cat.errors:
        return EntryReport(name, None, None, None, None, None, None, None, (f"construction failed: {cat.errors[name]}",))
    L = cat.lattices[name]
    bad = []
    if validate_axioms(L):
        bad.append("lattice axioms violated")
    si = is_subdirectly_irreducible(L)
    zs = os_ = None
    if si:
        mu = monolith(L)
        zs, os_ = is_zero_separating(mu, L), is_one_separating(mu, L)
    aut = automorphism_count(L)
    mc, jc = meet_condition(L), join_condition(L)
    got = {"size": L.n, "aut": aut, "si": si, "zero_separating": zs, "one_separating": os_, "meet": mc, "join": jc}
    for key, val in got.items():
        if key in exp and exp[key] != val:
            bad.append(f"{key}: expected {exp[key]}, got {val}")
    other = exp.get("dual_of")
    if other is not None:
        if other not in cat.lattices or not is_isomorphic(dual(L), cat.lattices[other]):
            bad.append(f"dual is not isomorphic to {other}")
    for rel in exp.get("relations", ()):
        try:
            ok = _check_relation(L, rel)
        except LatspecError:
            ok = False
        if not ok:
            bad.append(f"relation {rel} fails")
    return EntryReport(name, L.n, aut, si, zs, os_, mc, jc, tuple(bad))


def verify_catalog(cat: Catalog) -> list[EntryReport]:
    return [verify_entry(cat, name) for name in cat.names()]

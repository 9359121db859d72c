"""Run files: assignment lines and constraint lines.

    \\lattice=N5 \\with x=b y=a z=c
    \\if N5 \\with x=b y=a z=c \\ThenNot C2 \\with x=0 y=0 z=1

Tokens are separated by one or more spaces; tabs and other whitespace are
syntax errors.  Empty lines and lines starting with ``#`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    DanglingConstraint,
    DuplicateAssignment,
    RunFileSyntaxError,
    UnknownElement,
    UnknownLattice,
)
from .lattice import FiniteLattice

NAME = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True)
class AssignmentLine:
    lattice_name: str
    x: str
    y: str
    z: str

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.x, self.y, self.z)

    def binding(self) -> str:
        return f"{self.lattice_name} \\with x={self.x} y={self.y} z={self.z}"

    def render(self) -> str:
        return f"\\lattice={self.binding()}"


@dataclass(frozen=True)
class ConstraintLine:
    if_part: AssignmentLine
    then_not_part: AssignmentLine

    def render(self) -> str:
        return f"\\if {self.if_part.binding()} \\ThenNot {self.then_not_part.binding()}"


@dataclass(frozen=True)
class RunSpec:
    assignments: tuple[AssignmentLine, ...] = ()
    constraints: tuple[ConstraintLine, ...] = ()
    lines: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def index_of(self, part: AssignmentLine) -> int:
        return self.assignments.index(part)

    def constraint_pairs(self) -> list[tuple[int, int]]:
        """(if index, then-not index) for every constraint, in file order."""
        return [(self.index_of(c.if_part), self.index_of(c.then_not_part)) for c in self.constraints]

    def without(self, lattice_name: str) -> "RunSpec":
        """Drop every assignment over ``lattice_name`` and the constraints touching it."""
        keep = tuple(a for a in self.assignments if a.lattice_name != lattice_name)
        cons = tuple(
            c
            for c in self.constraints
            if c.if_part.lattice_name != lattice_name and c.then_not_part.lattice_name != lattice_name
        )
        return RunSpec(keep, cons)


class _Cursor:
    def __init__(self, text: str, lineno: int, path):
        self.text, self.pos, self.lineno, self.path = text, 0, lineno, path

    def fail(self, expected):
        found = self.text[self.pos :].split(" ", 1)[0] if self.pos < len(self.text) else ""
        raise RunFileSyntaxError(self.lineno, self.pos + 1, expected, self.path, found)

    def spaces(self, required=True):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] == " ":
            self.pos += 1
        if required and self.pos == start and self.pos < len(self.text):
            self.fail("a space")

    def literal(self, s):
        if not self.text.startswith(s, self.pos):
            self.fail(repr(s))
        self.pos += len(s)

    def name(self, what):
        m = re.compile(r"[A-Za-z0-9_]+").match(self.text, self.pos)
        if not m:
            self.fail(what)
        self.pos = m.end()
        return m.group(0)

    def end(self):
        self.spaces(required=False)
        if self.pos != len(self.text):
            self.fail("end of line")


def _binding(cur: _Cursor, lattice_name: str) -> AssignmentLine:
    cur.spaces()
    cur.literal("\\with")
    vals = []
    for key in "xyz":
        cur.spaces()
        cur.literal(key + "=")
        vals.append(cur.name(f"element name for {key}"))
    return AssignmentLine(lattice_name, *vals)


def _parse_line(text: str, lineno: int, path):
    cur = _Cursor(text, lineno, path)
    cur.spaces(required=False)
    if text.startswith("\\lattice=", cur.pos):
        cur.literal("\\lattice=")
        a = _binding(cur, cur.name("lattice name"))
        cur.end()
        return a
    if text.startswith("\\if", cur.pos):
        cur.literal("\\if")
        cur.spaces()
        first = _binding(cur, cur.name("lattice name"))
        cur.spaces()
        cur.literal("\\ThenNot")
        cur.spaces()
        second = _binding(cur, cur.name("lattice name"))
        cur.end()
        return ConstraintLine(first, second)
    cur.fail("'\\lattice=' or '\\if'")


def _resolve(part: AssignmentLine, catalog, lineno, path):
    try:
        L = catalog[part.lattice_name]
    except KeyError:
        raise UnknownLattice(part.lattice_name, lineno, path) from None
    for v in part.triple:
        if v not in L.names:
            raise UnknownElement(part.lattice_name, v, lineno, path)


def parse_run_file(text: str, catalog: Mapping[str, FiniteLattice] | None = None, path=None) -> RunSpec:
    """Parse run-file text; names are resolved against ``catalog`` when given."""
    assignments: list[AssignmentLine] = []
    first_line: dict[AssignmentLine, int] = {}
    lines: list[int] = []
    constraints: list[tuple[ConstraintLine, int]] = []
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if not line.strip(" ") or line.startswith("#"):
            continue
        item = _parse_line(line, lineno, path)
        parts = [item] if isinstance(item, AssignmentLine) else [item.if_part, item.then_not_part]
        if catalog is not None:
            for p in parts:
                _resolve(p, catalog, lineno, path)
        if isinstance(item, AssignmentLine):
            if item in first_line:
                raise DuplicateAssignment(lineno, path, first_line[item])
            first_line[item] = lineno
            assignments.append(item)
            lines.append(lineno)
        else:
            constraints.append((item, lineno))
    for c, lineno in constraints:
        if c.if_part not in first_line:
            raise DanglingConstraint(lineno, path, "\\if")
        if c.then_not_part not in first_line:
            raise DanglingConstraint(lineno, path, "\\ThenNot")
    return RunSpec(tuple(assignments), tuple(c for c, _ in constraints), tuple(lines))


def read_run_file(path, catalog=None) -> RunSpec:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_run_file(fh.read(), catalog, path=str(path))


def render_run_file(rs: RunSpec) -> str:
    out = [a.render() for a in rs.assignments] + [c.render() for c in rs.constraints]
    return "".join(line + "\n" for line in out)


def _criticizes(src: FiniteLattice, s, dst: FiniteLattice, d) -> bool:
    """True if some surjective non-injective homomorphism src -> dst sends triple s to d.

    Generates the sublattice of src x dst spanned by the paired generators; it
    is the graph of such a map exactly when its first projection is injective.
    Assumes s generates src.
    """
    if src.n <= dst.n:
        return False
    seen = {(a, b) for a, b in zip(s, d)}
    frontier = list(seen)
    while frontier:
        new = []
        for p in frontier:
            for q in list(seen):
                for r in (
                    (int(src.meet[p[0], q[0]]), int(dst.meet[p[1], q[1]])),
                    (int(src.join[p[0], q[0]]), int(dst.join[p[1], q[1]])),
                ):
                    if r not in seen:
                        seen.add(r)
                        new.append(r)
        frontier = new
    firsts = {p[0] for p in seen}
    return len(firsts) == len(seen) and len({p[1] for p in seen}) == dst.n


def derive_constraints(rs: RunSpec, catalog: Mapping[str, FiniteLattice]) -> list[ConstraintLine]:
    """Constraint for every ordered assignment pair related by a non-bijective criticizing homomorphism."""
    resolved = []
    for a in rs.assignments:
        L = catalog[a.lattice_name]
        resolved.append((L, tuple(L.index(v) for v in a.triple)))
    out = []
    for i, (Li, ti) in enumerate(resolved):
        for j, (Lj, tj) in enumerate(resolved):
            if i != j and _criticizes(Li, ti, Lj, tj):
                c = ConstraintLine(rs.assignments[i], rs.assignments[j])
                if c not in out:
                    out.append(c)
    return out

"""Exception hierarchy shared by all latspec modules."""


class LatspecError(Exception):
    """Base class for domain errors (CLI maps these to exit status 1)."""


class UsageError(LatspecError):
    """Bad input shape: syntax errors in catalog or run files (exit status 2)."""


class NotALattice(LatspecError):
    def __init__(self, a, b, reason="no unique bound"):
        self.a, self.b = a, b
        super().__init__(f"not a lattice: elements {a!r} and {b!r} have {reason}")


class CyclicCovers(LatspecError):
    def __init__(self, names):
        self.names = tuple(names)
        super().__init__("cover relation has a cycle through " + ", ".join(map(str, self.names)))


class UnknownName(LatspecError):
    def __init__(self, name, where=""):
        self.name = name
        super().__init__(f"unknown element name {name!r}" + (f" in {where}" if where else ""))


class RedundantCover(LatspecError):
    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        super().__init__(f"cover {lo}<{hi} is implied by other covers")


class TooLarge(LatspecError):
    def __init__(self, n, limit):
        super().__init__(f"lattice has {n} elements, above the limit {limit} for this operation")


class NotSubdirectlyIrreducible(LatspecError):
    def __init__(self, name=""):
        super().__init__(f"lattice {name} is not subdirectly irreducible".replace("  ", " "))


class CapacityExceeded(LatspecError):
    def __init__(self, budget, mask=None):
        self.budget = budget
        self.mask = mask
        msg = f"closure grew past the element budget {budget}"
        if mask is not None:
            msg += f" (subset mask={mask:x})"
        super().__init__(msg)


class CatalogSyntaxError(UsageError):
    def __init__(self, message, path=None, line=None):
        self.path, self.line = path, line
        where = f"{path or '<catalog>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


class MissingEntry(LatspecError):
    def __init__(self, names):
        self.names = tuple(names)
        super().__init__("catalog lacks required lattices: " + ", ".join(self.names))


class RunFileError(LatspecError):
    """Run-file problem tied to a line number."""

    def __init__(self, message, line=None, path=None):
        self.line, self.path = line, path
        prefix = f"{path or '<run>'}:{line}: " if line is not None else ""
        super().__init__(prefix + message)


class RunFileSyntaxError(RunFileError, UsageError):
    def __init__(self, line, column, expected, path=None, found=""):
        self.column, self.expected = column, expected
        got = f", found {found!r}" if found else ""
        RunFileError.__init__(self, f"column {column}: expected {expected}{got}", line, path)


class UnknownLattice(RunFileError):
    def __init__(self, name, line=None, path=None):
        self.name = name
        super().__init__(f"unknown lattice {name!r}", line, path)


class UnknownElement(RunFileError):
    def __init__(self, lattice, name, line=None, path=None):
        self.lattice, self.name = lattice, name
        super().__init__(f"lattice {lattice} has no element {name!r}", line, path)


class DuplicateAssignment(RunFileError):
    def __init__(self, line, path=None, first=None):
        self.first = first
        extra = f" (same as line {first})" if first is not None else ""
        super().__init__("duplicate assignment" + extra, line, path)


class DanglingConstraint(RunFileError):
    def __init__(self, line, path=None, part=""):
        super().__init__(f"constraint {part} part matches no assignment line".replace("  ", " "), line, path)

"""``latspec`` command line.

Exit status: 0 on success, 1 on domain errors or failed expectations,
2 on usage and parse errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import REQUIRED, default_catalog_dir, load_catalog, render_catalog, verify_catalog
from .errors import LatspecError, UsageError
from .lattice import cover_graph, dual, lattice_from_order, to_dot, validate_axioms
from .product import closure, count_atoms, count_coatoms, default_budget
from .runfile import read_run_file, render_run_file
from .spectra import (
    enumerate_spectrum,
    factor_system,
    format_set,
    free_lattice,
    generate_run_spec,
    parse_set,
    stderr_progress,
)

DOT_LIMIT = 200


def _catalog(args, strict=True):
    return load_catalog(args.catalog or default_catalog_dir(), strict=strict)


def _budget(args):
    return args.budget if args.budget is not None else default_budget()


def _run(args, cat):
    rs = read_run_file(args.run, cat)
    for name in getattr(args, "drop", None) or ():
        rs = rs.without(name)
    return rs


def cmd_validate(args, out):
    cat = _catalog(args)
    bad = 0
    for name in cat.names():
        v = validate_axioms(cat[name])
        if v:
            bad += 1
            print(f"{name}: {len(v)} axiom violations, first {v[0].axiom} at {v[0].elements}", file=out)
    if args.run:
        rs = _run(args, cat)
        fs = factor_system(rs, cat)
        if not fs.generates_each():
            for a in rs.assignments:
                sub = factor_system(type(rs)((a,)), cat)
                if not sub.generates_each():
                    print(f"{args.run}: {a.render()} does not generate {a.lattice_name}", file=out)
            bad += 1
        print(f"{args.run}: {len(rs.assignments)} assignments, {len(rs.constraints)} constraints", file=out)
    print(f"catalog: {len(cat)} lattices", file=out)
    return 1 if bad else 0


def cmd_catalog_verify(args, out):
    cat = load_catalog(args.dir or args.catalog or default_catalog_dir(), strict=False, require=None)
    reports = verify_catalog(cat)
    failed = 0
    for r in reports:
        print(r.row(), file=out)
        for m in r.mismatches:
            failed += 1
            print(f"MISMATCH {r.name}: {m}", file=out)
    missing = [n for n in REQUIRED if n not in cat.graphs]
    for n in missing:
        failed += 1
        print(f"MISMATCH {n}: missing from catalog", file=out)
    print(f"{len(reports)} entries, {failed} mismatches", file=out)
    return 1 if failed else 0


def cmd_closure(args, out):
    cat = _catalog(args)
    rs = _run(args, cat)
    g = closure(factor_system(rs, cat), _budget(args))
    print(f"n={len(g)} atoms={count_atoms(g)} coatoms={count_coatoms(g)}", file=out)
    if args.dump == "tuples":
        for row in g.elements:
            print(g.format_element(row), file=out)
    elif args.dump == "dot":
        if len(g) > DOT_LIMIT:
            raise UsageError(f"DOT output is limited to {DOT_LIMIT} elements, lattice has {len(g)}")
        names = [g.format_element(r) for r in g.elements]
        rows = g.elements
        le = np.ones((len(g), len(g)), dtype=bool)
        for f, fac in enumerate(g.system.factors):
            le &= fac.lattice.order[rows[:, f][:, None], rows[:, f][None, :]]
        print(to_dot(lattice_from_order("closure", names, le)), end="", file=out)
    return 0


def cmd_free(args, out):
    cat = _catalog(args)
    rs = _run(args, cat)
    g = free_lattice(rs, cat, _budget(args))
    print(f"n={len(g)} atoms={count_atoms(g)} coatoms={count_coatoms(g)}", file=out)
    if args.expect is not None and len(g) != args.expect:
        print(f"expected n={args.expect}", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(args, out):
    cat = _catalog(args)
    rs = _run(args, cat)
    t0 = time.time()
    rep = enumerate_spectrum(
        rs,
        cat,
        mode=args.mode,
        jobs=args.jobs,
        budget=_budget(args),
        method=args.method,
        progress=stderr_progress if args.progress else None,
    )
    if args.log_subsets:
        for line in rep.machine_lines():
            print(line, file=out)
    if args.format == "text":
        print(
            f"subsets total={rep.subsets_total} valid={rep.subsets_valid} skipped={rep.subsets_skipped}"
            f" time={time.time() - t0:.1f}s",
            file=out,
        )
    print(rep.summary(), file=out)
    if args.expect is not None:
        want = parse_set(args.expect)
        got = frozenset(rep.result_set())
        if want != got:
            print(f"expected {format_set(want)}, got {format_set(got)}", file=sys.stderr)
            return 1
    return 0


def cmd_genrunfile(args, out):
    cat = _catalog(args)
    names = [n for n in args.lattices.split(",") if n]
    for n in names:
        if n not in cat:
            raise UsageError(f"unknown lattice {n!r}")
    rs = generate_run_spec(cat, names, mode=args.mode, constraints=not args.no_constraints)
    text = render_run_file(rs)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        print(text, end="", file=out)
    return 0


def cmd_dual(args, out):
    cat = _catalog(args)
    if args.name not in cat:
        raise UsageError(f"unknown lattice {args.name!r}")
    D = dual(cat[args.name])
    if args.dot:
        print(to_dot(D), end="", file=out)
    else:
        print(render_catalog([cover_graph(D)]), end="", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latspec", description="Atom spectra of three-generated lattices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--catalog", help="catalog directory or .lat file (default: bundled catalog)")
    common.add_argument("--budget", type=_positive, help="closure element budget (env LATSPEC_BUDGET)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check catalog axioms and optionally a run file")
    s.add_argument("--run")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("catalog-verify", parents=[common], help="recompute and check catalog invariants")
    s.add_argument("dir", nargs="?")
    s.set_defaults(func=cmd_catalog_verify)

    s = sub.add_parser("closure", parents=[common], help="generate the sublattice for all assignments")
    s.add_argument("--run", required=True)
    s.add_argument("--dump", choices=["tuples", "dot"])
    s.set_defaults(func=cmd_closure)

    s = sub.add_parser("free", parents=[common], help="free lattice: closure over every assignment")
    s.add_argument("--run", required=True)
    s.add_argument("--drop", action="append", metavar="LATTICE", help="leave out assignments over LATTICE")
    s.add_argument("--expect", type=int)
    s.set_defaults(func=cmd_free)

    s = sub.add_parser("spectrum", parents=[common], help="enumerate subsets and collect a spectrum")
    s.add_argument("--run", required=True)
    s.add_argument("--mode", choices=["atoms", "coatoms", "double"], default="atoms")
    s.add_argument("--jobs", type=_positive, default=1)
    s.add_argument("--method", choices=["project", "closure"], default="project")
    s.add_argument("--expect", help='expected set, e.g. "{1,2,3,4,6}"')
    s.add_argument("--log-subsets", action="store_true", help="print one line per valid subset")
    s.add_argument("--format", choices=["text", "machine"], default="text")
    s.add_argument("--progress", action="store_true", help="report progress on stderr")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("genrunfile", parents=[common], help="write assignments and derived constraints")
    s.add_argument("--lattices", required=True, help="comma separated catalog names")
    s.add_argument("--mode", choices=["atoms", "coatoms", "double"], default="double")
    s.add_argument("--no-constraints", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_genrunfile)

    s = sub.add_parser("dual", parents=[common], help="print the dual of a catalog lattice")
    s.add_argument("name")
    s.add_argument("--dot", action="store_true")
    s.set_defaults(func=cmd_dual)
    return p


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"latspec: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as e:
        print(f"latspec: {e}", file=sys.stderr)
        return 2
    except LatspecError as e:
        print(f"latspec: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

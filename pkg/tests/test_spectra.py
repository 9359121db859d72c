import sys
from pathlib import Path

import numpy as np
import pytest

from latspec.errors import CapacityExceeded
from latspec.product import closure
from latspec.runfile import read_run_file
from latspec.spectra import (
    SubsetResult,
    delta_tables,
    enumerate_spectrum,
    factor_system,
    format_set,
    generate_run_spec,
    parse_set,
    subset_valid,
)

sys.path.insert(0, str(Path(__file__).parent))
from oracles import check_minimal_cover, fixpoint_closure  # noqa: E402


def load(catalog, runs_dir, name):
    return read_run_file(runs_dir / f"{name}.run", catalog)


def test_delta_tables():
    d = delta_tables()
    assert len(d.d3) == 7
    assert d.d6_inv == {(b, a) for a, b in d.d6}
    assert d.d4 == {(b, a) for a, b in d.d4}


def test_set_format_round_trip():
    for s in ({1, 2, 3, 4, 6}, {(1, 2), (6, 3)}, set()):
        assert parse_set(format_set(s)) == s
    assert format_set({6, 1, 3}) == "{1,3,6}"
    with pytest.raises(ValueError):
        parse_set("1,2")


def test_constraint_validity(catalog, runs_dir):
    rs = load(catalog, runs_dir, "as_mn5")
    i_n5 = rs.assignments.index(rs.constraints[0].if_part)
    i_c2 = rs.assignments.index(rs.constraints[0].then_not_part)
    assert not subset_valid((1 << i_n5) | (1 << i_c2), rs)
    assert subset_valid(1 << i_n5, rs)


def test_atom_spectrum_mn5(catalog, runs_dir):
    rep = enumerate_spectrum(load(catalog, runs_dir, "as_mn5"), catalog, "atoms")
    assert rep.result_set() == {1, 2, 3}
    assert rep.summary() == "AS={1,2,3}"
    assert rep.subsets_total == 127 and rep.subsets_valid + rep.subsets_skipped == 127


def test_double_spectrum_ml1(catalog, runs_dir, deltas):
    rep = enumerate_spectrum(load(catalog, runs_dir, "ds_ml1"), catalog, "double")
    assert rep.result_set() == deltas.d3


@pytest.mark.parametrize("name, mode", [("as_ml3", "atoms"), ("ds_mn5", "double"), ("ds_ml4", "coatoms")])
def test_projection_matches_direct_closure(catalog, runs_dir, name, mode):
    rs = load(catalog, runs_dir, name)
    a = enumerate_spectrum(rs, catalog, mode, method="project")
    b = enumerate_spectrum(rs, catalog, mode, method="closure")
    assert a.machine_lines() == b.machine_lines()
    assert a.result_set() == b.result_set()


def test_per_subset_counts_against_oracle(catalog, runs_dir):
    rs = load(catalog, runs_dir, "ds_mn5")
    rep = enumerate_spectrum(rs, catalog, "double")
    rng = np.random.default_rng(7)
    for r in rng.choice(rep.per_subset, size=60, replace=False):
        fs = factor_system(rs, catalog, r.mask)
        rows = fixpoint_closure(fs.lattices, fs.generators())
        assert len(rows) == r.n
        g = closure(fs)
        assert check_minimal_cover(fs.lattices, rows, g.atoms, g.bottom) is None
        assert (len(g.atoms), len(g.coatoms)) == (r.atoms, r.coatoms)


def test_jobs_do_not_change_output(catalog, runs_dir):
    rs = load(catalog, runs_dir, "ds_ml4")
    one = enumerate_spectrum(rs, catalog, "double", jobs=1)
    three = enumerate_spectrum(rs, catalog, "double", jobs=3)
    assert one.machine_lines() == three.machine_lines()
    masks = [r.mask for r in one.per_subset]
    assert masks == sorted(masks) and len(set(masks)) == len(masks)


def test_progress_reaches_total(catalog, runs_dir):
    seen = []
    rep = enumerate_spectrum(load(catalog, runs_dir, "as_mn5"), catalog, "atoms", progress=lambda d, t: seen.append((d, t)))
    assert seen[-1] == (rep.subsets_valid, rep.subsets_valid)


def test_budget_names_subset(catalog, runs_dir):
    rs = load(catalog, runs_dir, "as_mn5")
    with pytest.raises(CapacityExceeded) as e:
        enumerate_spectrum(rs, catalog, "atoms", budget=10, method="closure")
    assert e.value.mask is not None


def test_subset_line_format():
    assert SubsetResult(0x1A, 92, 6).line() == "mask=1a n=92 atoms=6"
    assert SubsetResult(3, 5, 2, 2).line() == "mask=3 n=5 atoms=2 coatoms=2"


def test_generator_modes(catalog):
    n5 = catalog["N5"]
    atoms_mode = generate_run_spec(catalog, ["N5"], "atoms", constraints=False)
    for a in atoms_mode.assignments:
        x, y, z = (n5.index(v) for v in a.triple)
        assert n5.meet[x, z] == n5.bottom and n5.meet[y, z] == n5.bottom
    full = generate_run_spec(catalog, ["N5"], "double", constraints=False)
    assert set(atoms_mode.assignments) <= set(full.assignments)
    assert len(generate_run_spec(catalog, ["C2"], "double").assignments) == 6


@pytest.mark.extended
def test_u8_nine_spectrum_actual_set(catalog, runs_dir):
    """The nine U8/L4 assignments alone give the large values of the containment set.

    Every single factor already has three atoms, so 1 and 2 (which come from
    C2 and C2 x C2 inside the variety) cannot appear here.
    """
    rs = load(catalog, runs_dir, "u8_nine")
    for m in range(9):
        assert len(closure(factor_system(rs, catalog, 1 << m)).atoms) == 3
    rep = enumerate_spectrum(rs, catalog, "atoms")
    assert rep.result_set() == {3, 4, 5, 6, 8, 9, 12, 15, 18}

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latspec.errors import CapacityExceeded
from latspec.product import BITMAP_BITS, FactorSystem, closure, count_atoms, count_coatoms, generate, naive_closure
from latspec.runfile import read_run_file
from latspec.spectra import assignments_for, factor_system

sys.path.insert(0, str(Path(__file__).parent))
from oracles import check_minimal_cover, fixpoint_closure  # noqa: E402

KERNELS = ("bitmap", "hash", "rows")


def system(catalog, *parts):
    return FactorSystem([(catalog[n], tuple(catalog[n].index(v) for v in t.split())) for n, t in parts])


def l92(catalog):
    return system(catalog, ("L4", "c a b"), ("L4", "a c b"), ("L4", "a b c"))


def test_l92_against_pure_python_fixpoint(catalog):
    fs = l92(catalog)
    g = closure(fs)
    assert len(g) == 92 and count_atoms(g) == 6 and count_coatoms(g) == 3
    assert g.as_set() == naive_closure(fs)


@pytest.mark.parametrize("kernel", KERNELS)
def test_kernels_agree(catalog, runs_dir, kernel):
    for name in ("l92", "free_modular", "as_mn5", "ds_mn5"):
        fs = factor_system(read_run_file(runs_dir / f"{name}.run", catalog), catalog)
        want = fixpoint_closure(fs.lattices, fs.generators()) if len(fs) <= 7 else closure(fs).elements
        if kernel == "bitmap" and fs.packed_bits > BITMAP_BITS:
            continue
        assert np.array_equal(generate(fs, fs.generators(), kernel=kernel), want), name


def test_wide_system_uses_rows_and_matches_hash(catalog):
    # 22 factors of U8 need 66 bits, beyond the packed kernels
    fs = FactorSystem([(catalog["C2"], (0, 1, 0))] * 3 + [(catalog["U8"], (catalog["U8"].index("a"), catalog["U8"].index("b"), catalog["U8"].index("c")))] * 22)
    assert fs.packed_bits > 63
    g = closure(fs)
    small = FactorSystem([fs.factors[0], fs.factors[-1]])
    # repeated factors add no new elements
    assert len(g) == len(closure(small))


@pytest.mark.parametrize("name", ["C2", "M3", "N5", "L1", "L3", "L4", "L5", "V6", "U8", "L6", "V1"])
def test_single_factor_systems_exhaustive(catalog, name):
    L = catalog[name]
    for a in assignments_for(L, "double"):
        fs = FactorSystem([(L, tuple(L.index(v) for v in a.triple))])
        g = closure(fs)
        assert len(g) == L.n
        assert np.array_equal(g.elements, fixpoint_closure(fs.lattices, fs.generators()))


SMALL_NAMES = ["C2", "M3", "N5", "L1", "L3", "L4", "L5", "V6", "U8"]


@st.composite
def systems(draw, catalog):
    k = draw(st.integers(1, 5))
    parts, size = [], 1
    for _ in range(k):
        L = catalog[draw(st.sampled_from(SMALL_NAMES))]
        if size * L.n > 10**4:
            break
        size *= L.n
        parts.append((L, tuple(draw(st.integers(0, L.n - 1)) for _ in range(3))))
    return FactorSystem(parts)


def test_random_systems_match_oracle(catalog):
    @settings(max_examples=150, deadline=None)
    @given(systems(catalog))
    def check(fs):
        g = closure(fs)
        assert np.array_equal(g.elements, fixpoint_closure(fs.lattices, fs.generators()))
        assert check_minimal_cover(fs.lattices, g.elements, g.atoms, g.bottom, up=True) is None
        assert check_minimal_cover(fs.lattices, g.elements, g.coatoms, g.top, up=False) is None
        perm = list(range(len(fs)))[::-1]
        h = closure(fs.permuted(perm))
        assert len(h) == len(g) and count_atoms(h) == count_atoms(g) and count_coatoms(h) == count_coatoms(g)
        # closing the closure adds nothing
        assert np.array_equal(generate(fs, g.elements), g.elements)

    check()


def test_budget_is_enforced(catalog, monkeypatch):
    fs = l92(catalog)
    for kernel in KERNELS:
        with pytest.raises(CapacityExceeded) as e:
            generate(fs, fs.generators(), budget=50, kernel=kernel)
        assert e.value.budget == 50
    monkeypatch.setenv("LATSPEC_BUDGET", "91")
    with pytest.raises(CapacityExceeded):
        closure(fs)
    monkeypatch.setenv("LATSPEC_BUDGET", "92")
    assert len(closure(fs)) == 92


def test_bounds_and_membership(catalog):
    g = closure(l92(catalog))
    L4 = catalog["L4"]
    assert g.bottom == (L4.bottom,) * 3 and g.top == (L4.top,) * 3
    assert g.bottom in g and g.top in g
    assert g.format_element(g.elements[0]) == "000"


def test_generators_are_per_factor_transposed(catalog):
    fs = l92(catalog)
    L4 = catalog["L4"]
    assert fs.generators()[0] == tuple(L4.index(v) for v in "caa")
    assert fs.generators()[1] == tuple(L4.index(v) for v in "acb")
    assert fs.generators()[2] == tuple(L4.index(v) for v in "bbc")

"""Atom, coatom and double spectra of three-generated lattices in small varieties."""

__version__ = "0.1.0"

from .catalog import Catalog, load_catalog, verify_catalog
from .lattice import CoverGraph, FiniteLattice, atoms, coatoms, dual, lattice_from_cover_graph
from .product import FactorSystem, GeneratedLattice, closure, count_atoms, count_coatoms, element_count
from .runfile import RunSpec, parse_run_file, render_run_file
from .spectra import delta_tables, enumerate_spectrum, free_lattice

__all__ = [
    "Catalog",
    "CoverGraph",
    "FactorSystem",
    "FiniteLattice",
    "GeneratedLattice",
    "RunSpec",
    "atoms",
    "closure",
    "coatoms",
    "count_atoms",
    "count_coatoms",
    "delta_tables",
    "dual",
    "element_count",
    "enumerate_spectrum",
    "free_lattice",
    "lattice_from_cover_graph",
    "load_catalog",
    "parse_run_file",
    "render_run_file",
    "verify_catalog",
]

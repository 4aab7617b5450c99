"""Exact harmonic analysis on q-homogeneous trees with radial measures q^{-alpha|x|}."""

from .czmax import cz_decompose, hl_maximal, sharp_maximal
from .funcspace import TailConstantFunction, random_function
from .hardy_bmo import Atom, atomic_decompose, bmo_norm
from .measure import MeasureParams, doubling_constant, total_mass
from .operators import FiniteKernel, hormander_constant, l2_operator_norm
from .tree import DyadicSet, TreeParams

__all__ = [
    "Atom",
    "DyadicSet",
    "FiniteKernel",
    "MeasureParams",
    "TailConstantFunction",
    "TreeParams",
    "atomic_decompose",
    "bmo_norm",
    "cz_decompose",
    "doubling_constant",
    "hl_maximal",
    "hormander_constant",
    "l2_operator_norm",
    "random_function",
    "sharp_maximal",
    "total_mass",
]

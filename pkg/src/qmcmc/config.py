"""Numerical tolerances used across the package, in one record."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericsConfig:
    """Tolerance budget for validation and verification routines.

    The defaults follow the layered scheme used throughout: exact-construction
    checks (row sums) at 1e-12, algebraic identity checks (detailed balance,
    symmetry, unitarity, isometry) at 1e-10, spectral comparisons at 1e-9 and
    eigenphase correspondence at 1e-8.
    """

    row_sum_tol: float = 1e-12
    balance_tol: float = 1e-10
    symmetry_tol: float = 1e-10
    unitary_tol: float = 1e-10
    spectrum_tol: float = 1e-9
    phase_tol: float = 1e-8
    stationary_tol: float = 1e-10
    norm_tol: float = 1e-10
    post_select_cutoff: float = 1e-12


DEFAULT_NUMERICS = NumericsConfig()

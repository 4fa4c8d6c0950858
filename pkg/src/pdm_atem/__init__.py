"""Bound states of position-dependent-mass Schrodinger equations by
asymptotic Taylor expansion, with a finite-difference cross-check."""

from .atem import (ConvergenceReport, EigenResult, RecurrenceTrace, converge,
                   find_roots, iterate, parity_condition, termination_det)
from .estimators import ATEMSolver, GridSolver
from .expr import parse
from .hamiltonian import (GAUSSIAN, IDENTITY, PRESETS, CanonicalODE, GaugeSpec,
                          OrderingSpec, build_ode, mass_power_gauge,
                          parse_ordering)
from .oracle import GridSpec, discretize, lowest_eigenvalues
from .series import TruncatedSeries
from .wavefunction import (PolynomialWavefunction, boundary_ratio, build_f,
                           count_nodes, psi_samples)

__version__ = "0.1.0"

__all__ = [
    "ATEMSolver", "GridSolver", "TruncatedSeries", "parse", "OrderingSpec",
    "PRESETS", "parse_ordering", "GaugeSpec", "GAUSSIAN", "IDENTITY",
    "mass_power_gauge", "CanonicalODE", "build_ode", "RecurrenceTrace",
    "EigenResult", "ConvergenceReport", "iterate", "termination_det",
    "parity_condition", "find_roots", "converge", "PolynomialWavefunction",
    "boundary_ratio", "build_f", "psi_samples", "count_nodes", "GridSpec",
    "discretize", "lowest_eigenvalues",
]

"""
scikit-learn style front ends.

``ATEMSolver().fit()`` solves the eigenproblem described by its parameters;
``predict(X)`` returns the normalized wavefunctions of the accepted states at
positions ``X``.  ``GridSolver`` is the finite-difference counterpart.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import atem
from . import wavefunction as wf
from ._validation import (check_k_list, check_ordering, check_positions,
                          check_precision, check_range)
from .hamiltonian import GAUSSIAN, build_ode, mass_power_gauge
from .oracle import GridSpec, discretize, lowest_eigenvalues

CAPACITY_MARGIN = 4


class ATEMSolver(BaseEstimator):
    """Stabilized ATEM eigenvalues and eigenfunctions.

    Parameters
    ----------
    mass, potential : str
        Expressions in ``x`` and named parameters.
    params : dict
        Parameter bindings, e.g. ``{"gamma": 0.1}``.
    ordering : str or tuple
        Preset name or ``(eta, eps, rho)``.
    k_list : sequence of int
        Ascending iteration counts.
    energy_range : (float, float)
    digit_threshold : int
        Digits the two largest-k estimates must share.
    precision : {"double", "dd"}
        ``"dd"`` runs the recurrence in double-double arithmetic.
    gauge_power : float
        Exponent ``s`` of the gauge ``m^s exp(-x^2/2)``; 0 is the plain
        Gaussian gauge.
    """

    def __init__(self, mass="1", potential="0.5*x^2", params=None, ordering="BDD",
                 k_list=(20, 30, 40, 50, 60), energy_range=(0.0, 5.5),
                 digit_threshold=10, mode="determinant", grid_step=0.05,
                 precision="double", gauge_power=0.0, L=8.0):
        self.mass = mass
        self.potential = potential
        self.params = params
        self.ordering = ordering
        self.k_list = k_list
        self.energy_range = energy_range
        self.digit_threshold = digit_threshold
        self.mode = mode
        self.grid_step = grid_step
        self.precision = precision
        self.gauge_power = gauge_power
        self.L = L

    def _gauge(self):
        if self.gauge_power:
            return mass_power_gauge(self.mass, self.gauge_power, self.params or {})
        return GAUSSIAN

    def fit(self, X=None, y=None):
        """Run the convergence study; ``X`` and ``y`` are ignored."""
        ks = check_k_list(self.k_list)
        rng = check_range(self.energy_range)
        ordering = check_ordering(self.ordering)
        check_precision(self.precision)
        self.gauge_ = self._gauge()
        self.ode_ = build_ode(self.mass, self.potential, self.params or {}, ordering,
                              capacity=ks[-1] + CAPACITY_MARGIN, gauge=self.gauge_,
                              precision=self.precision)
        self.report_ = atem.converge(self.ode_, rng, ks, self.digit_threshold,
                                     self.mode, self.grid_step)
        self.states_ = list(self.report_.accepted)
        self.eigenvalues_ = np.array([s.energy for s in self.states_])
        self._wavefunctions = {}
        return self

    def wavefunction(self, n):
        """Normalized :class:`PolynomialWavefunction` of accepted state ``n``."""
        check_is_fitted(self, "states_")
        if not 0 <= n < len(self.states_):
            raise IndexError(f"state {n} not among the {len(self.states_)} accepted states")
        if n not in self._wavefunctions:
            state = self.states_[n]
            trace = atem.iterate(self.ode_, state.energy, state.k)
            w = wf.build_f(trace, n=n, gauge=self.gauge_, L=self.L)
            self._wavefunctions[n] = wf.normalized(w, self.gauge_)
        return self._wavefunctions[n]

    def predict(self, X):
        """``psi_n(x)`` for every accepted state, shape ``(n_samples, n_states)``."""
        check_is_fitted(self, "states_")
        x = check_positions(X)
        cols = [wf.psi_values(self.wavefunction(n), x, self.gauge_)
                for n in range(len(self.states_))]
        return np.column_stack(cols) if cols else np.empty((x.size, 0))


class GridSolver(BaseEstimator):
    """Lowest eigenvalues from the finite-difference discretization."""

    def __init__(self, mass="1", potential="0.5*x^2", params=None, ordering="BDD",
                 n_states=6, L=12.0, N=4001, refine=True):
        self.mass = mass
        self.potential = potential
        self.params = params
        self.ordering = ordering
        self.n_states = n_states
        self.L = L
        self.N = N
        self.refine = refine

    def fit(self, X=None, y=None):
        ordering = check_ordering(self.ordering)
        self.grid_ = GridSpec(float(self.L), int(self.N))
        self.matrix_ = discretize(self.mass, self.potential, ordering, self.grid_,
                                  self.params or {})
        self.eigenvalues_ = lowest_eigenvalues(self.matrix_, self.n_states, self.refine)
        return self


__all__ = ["ATEMSolver", "GridSolver"]

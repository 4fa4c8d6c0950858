"""
Reduction of a von Roos ordered PDM Hamiltonian to a canonical ODE.

The kinetic operator ``(1/4)(m^eta p m^eps p m^rho + m^rho p m^eps p m^eta)``
acting on ``psi`` expands to::

    -(1/2m) psi'' + (m'/2m^2) psi' + U_ord psi

    U_ord = -(1/4) [ (eta+rho) m''/m^2 + (rho(eps+rho-1) + eta(eps+eta-1)) m'^2/m^3 ]

so ``H psi = E psi`` becomes, after multiplying by ``-2m``::

    psi'' = P psi' + (Q_V + E Q_E) psi,   P = m'/m,  Q_V = 2m(V + U_ord),  Q_E = -2m

Writing ``psi = g f`` with ``lambda = g'/g`` gives the form
``f'' = p0 f' + q0 f`` consumed by :mod:`pdm_atem.atem`.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import series as ts
from .exceptions import OrderingConstraintError, UnphysicalMassError
from .expr import evaluate, parse, to_series

_CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class OrderingSpec:
    """von Roos ambiguity parameters with ``eta + eps + rho = -1``."""

    eta: float
    eps: float
    rho: float
    name: str = ""

    def __post_init__(self):
        total = self.eta + self.eps + self.rho
        if abs(total + 1) > _CONSTRAINT_TOL:
            raise OrderingConstraintError(
                f"ordering (eta, eps, rho) = ({self.eta}, {self.eps}, {self.rho}) "
                f"violates eta + eps + rho = -1 (sum is {total:g})")

    @property
    def triple(self):
        return (self.eta, self.eps, self.rho)

    @property
    def label(self):
        return self.name or "{:g},{:g},{:g}".format(*self.triple)

    def coefficients(self):
        """Weights of ``m''/m^2`` and ``m'^2/m^3`` in ``U_ord``."""
        eta, eps, rho = self.triple
        return eta + rho, rho * (eps + rho - 1) + eta * (eps + eta - 1)


# triples follow the written operator forms
PRESETS = {
    "BDD": OrderingSpec(0.0, -1.0, 0.0, "BDD"),
    "MM": OrderingSpec(-1.0, 0.0, 0.0, "MM"),
    "ZK": OrderingSpec(-0.5, 0.0, -0.5, "ZK"),
    "LK-sym": OrderingSpec(-0.5, -0.5, 0.0, "LK-sym"),
}

PRESET_FORMS = {
    "BDD": "(1/2) p (1/m) p",
    "MM": "(1/4) (m^-1 p^2 + p^2 m^-1)",
    "ZK": "(1/2) m^-1/2 p^2 m^-1/2",
    "LK-sym": "(1/4) (p m^-1/2 p m^-1/2 + m^-1/2 p m^-1/2 p)",
}


def _number(text):
    return float(Fraction(text.strip()))


def parse_ordering(value):
    """Preset name, ``"eta,eps,rho"`` text, 3-sequence or an OrderingSpec."""
    if isinstance(value, OrderingSpec):
        return value
    if isinstance(value, str):
        key = value.strip()
        for name, spec in PRESETS.items():
            if key.lower() == name.lower():
                return spec
        parts = key.split(",")
        if len(parts) != 3:
            raise OrderingConstraintError(
                f"unknown ordering {value!r}; use one of {sorted(PRESETS)} or 'eta,eps,rho'")
        try:
            eta, eps, rho = (_number(p) for p in parts)
        except (ValueError, ZeroDivisionError):
            raise OrderingConstraintError(f"cannot read ordering triple {value!r}") from None
        return OrderingSpec(eta, eps, rho)
    eta, eps, rho = value
    return OrderingSpec(float(eta), float(eps), float(rho))


@dataclass(frozen=True)
class GaugeSpec:
    """Gauge factor ``g`` given by its logarithmic derivative ``lam = g'/g``.

    ``lam=None`` means the Gaussian gauge ``g = exp(-x^2/2)``.  Setting
    ``mass`` and ``power`` multiplies that by ``m(x)^power``, which removes
    the branch points some orderings create at the complex zeros of ``m``.
    """

    lam: ts.TruncatedSeries = None
    name: str = "gaussian"
    mass: str = None
    power: float = 0.0
    bindings: tuple = ()

    @property
    def is_gaussian(self):
        return self.lam is None and self.name == "gaussian" and not self.power

    def series(self, capacity, extended=False):
        if self.lam is not None:
            lam = self.lam
            if lam.capacity != capacity:
                raise ValueError("gauge series capacity does not match the problem")
            return lam.to_extended() if extended else lam
        if self.name == "identity":
            return ts.zeros(capacity, extended)
        lam = ts.neg(ts.variable(capacity, extended))
        if self.power:
            m = to_series(self.mass, dict(self.bindings), capacity, extended)
            _check_mass(m)
            log_dm = ts.mul(ts.derivative(m), ts.reciprocal(m))
            lam = ts.add(lam, ts.scale(log_dm, self.power))
        return lam

    def values(self, x, bindings=None):
        """``g(x)`` normalized to ``g(0) = 1``."""
        x = np.asarray(x, dtype=np.float64)
        if self.name == "identity" and self.lam is None:
            return np.ones_like(x)
        if self.lam is not None:
            return np.exp(ts.evaluate(ts.integrate(self.lam.to_float()), x))
        g = np.exp(-0.5 * x**2)
        if self.power:
            b = dict(self.bindings)
            m = evaluate(self.mass, x, b) / evaluate(self.mass, 0.0, b)
            g = g * m**self.power
        return g


def mass_power_gauge(mass, power, bindings=None):
    """Gauge ``g = m(x)^power exp(-x^2/2)``."""
    bindings = tuple(sorted((bindings or {}).items()))
    return GaugeSpec(None, f"gaussian*m^{power:g}", str(mass), float(power), bindings)


GAUSSIAN = GaugeSpec()
IDENTITY = GaugeSpec(None, "identity")


@dataclass(frozen=True)
class CanonicalODE:
    """``f'' = p0 f' + (q0_V + E q0_E) f``."""

    p0: ts.TruncatedSeries
    q0_V: ts.TruncatedSeries
    q0_E: ts.TruncatedSeries

    @property
    def capacity(self):
        return self.p0.capacity

    @property
    def valid_order(self):
        return min(self.p0.valid_order, self.q0_V.valid_order, self.q0_E.valid_order)

    @property
    def extended(self):
        return self.p0.extended

    def q0(self, E):
        return ts.add(self.q0_V, ts.scale(self.q0_E, E))

    def is_symmetric(self, tol=1e-12):
        """True when ``p0`` is odd and ``q0`` is even (coefficient parity)."""
        even_p, odd_p = ts.parity_defect(self.p0)
        scale_p = max(even_p, odd_p, 1.0)
        if even_p > tol * scale_p:
            return False
        for q in (self.q0_V, self.q0_E):
            even_q, odd_q = ts.parity_defect(q)
            if odd_q > tol * max(even_q, odd_q, 1.0):
                return False
        return True


def _check_mass(m):
    if not ts.eval_at_origin(m) > 0:
        raise UnphysicalMassError(f"mass at the origin must be positive, got {float(m[0]):g}")


def ordering_potential(m, ordering):
    _check_mass(m)
    ordering = parse_ordering(ordering)
    a, b = ordering.coefficients()
    if a == 0 and b == 0:
        return ts.zeros(m.capacity, m.extended)
    inv = ts.reciprocal(m)
    m1 = ts.derivative(m)
    m2 = ts.derivative(m1)
    inv2 = ts.mul(inv, inv)
    u = ts.add(ts.scale(ts.mul(m2, inv2), a),
               ts.scale(ts.mul(ts.mul(m1, m1), ts.mul(inv2, inv)), b))
    return ts.scale(u, -0.25)


def reduce_to_ode(m, V, ordering):
    """Return ``(P, Q_V, Q_E)`` of ``psi'' = P psi' + (Q_V + E Q_E) psi``."""
    _check_mass(m)
    U = ordering_potential(m, ordering)
    P = ts.mul(ts.derivative(m), ts.reciprocal(m))
    Q_V = ts.scale(ts.mul(m, ts.add(V, U)), 2)
    Q_E = ts.scale(m, -2)
    return P, Q_V, Q_E


def apply_gauge(P, Q_V, Q_E, gauge=GAUSSIAN):
    lam = gauge.series(P.capacity, P.extended)
    p0 = ts.add(P, ts.scale(lam, -2))
    q0_V = ts.add(ts.add(Q_V, ts.mul(P, lam)),
                  ts.neg(ts.add(ts.derivative(lam), ts.mul(lam, lam))))
    return CanonicalODE(p0, q0_V, Q_E)


def build_ode(mass, potential, bindings=None, ordering="BDD", capacity=64,
              gauge=GAUSSIAN, precision="double"):
    """Parse, expand and reduce a problem in one call.

    ``precision="dd"`` builds the series with extended coefficients so that
    :func:`pdm_atem.atem.iterate` runs its double-double kernel.
    """
    if precision not in ("double", "dd"):
        raise ValueError(f"precision must be 'double' or 'dd', got {precision!r}")
    mass, potential = parse(mass), parse(potential)
    ordering = parse_ordering(ordering)
    extended = precision == "dd"
    if extended:
        with ts.extended_precision():
            m = to_series(mass, bindings, capacity, extended=True)
            V = to_series(potential, bindings, capacity, extended=True)
            return apply_gauge(*reduce_to_ode(m, V, ordering), gauge)
    m = to_series(mass, bindings, capacity)
    V = to_series(potential, bindings, capacity)
    return apply_gauge(*reduce_to_ode(m, V, ordering), gauge)


def u_ord_pointwise(m, dm, d2m, ordering):
    """``U_ord`` from sampled ``m, m', m''`` (arrays or floats)."""
    a, b = parse_ordering(ordering).coefficients()
    return -0.25 * (a * d2m / m**2 + b * dm**2 / m**3)


__all__ = ["OrderingSpec", "PRESETS", "PRESET_FORMS", "parse_ordering", "GaugeSpec",
           "GAUSSIAN", "IDENTITY", "mass_power_gauge", "CanonicalODE", "ordering_potential",
           "reduce_to_ode", "apply_gauge", "build_ode", "u_ord_pointwise"]

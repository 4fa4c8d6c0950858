"""
Eigenfunctions rebuilt from a recurrence trace.

At an eigenvalue the Maclaurin series of ``f`` follows from the two boundary
values alone::

    f(x) = f(0) + f'(0) x + sum_{j>=2} [q_{j-2}(0) f(0) + p_{j-2}(0) f'(0)] x^j / j!

and ``psi = g f`` with the gauge factor ``g``.  Partial sums of a series
this long are useless far from the origin, so sampling resums it with a
diagonal Pade approximant (in ``y = x^2`` for states of definite parity).
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import pade

from . import series as ts
from .exceptions import (DegenerateBoundaryError, DomainTooSmallError,
                         RescaleUnderflowError)
from .hamiltonian import GAUSSIAN

DEFAULT_L = 8.0
DEFAULT_COUNT = 4001
TERM_TOL = 1e-4
TAIL_TOL = 1e-4
NODE_FLOOR = 1e-3
_NULL_TOL = 1e-12


@dataclass(frozen=True)
class PolynomialWavefunction:
    """Taylor data of ``f`` for one eigenstate.

    ``coeffs[j]`` is the coefficient of ``x^j`` for ``j = 0 .. k``;
    ``degree_cap`` is the degree used for truncated output.
    """

    n: int
    energy: float
    coeffs: np.ndarray
    boundary: tuple
    degree_cap: int
    parity: str = "none"
    norm: float = None
    L: float = DEFAULT_L

    @property
    def k(self):
        return self.coeffs.size - 1

    def truncated(self, degree=None):
        """Coefficients up to ``degree`` scaled so the lowest nonzero one is 1."""
        degree = self.degree_cap if degree is None else degree
        c = self.coeffs[:degree + 1]
        nz = np.flatnonzero(np.abs(c) > _NULL_TOL * np.max(np.abs(c)))
        return c / c[nz[0]]

    def f(self, x, degree=None):
        """Taylor partial sum of ``f`` (unnormalized)."""
        degree = self.degree_cap if degree is None else degree
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x)
        for c in self.coeffs[:degree + 1][::-1]:
            acc = acc * x + c
        return acc


def boundary_ratio(trace):
    """Null vector ``(f(0), f'(0))`` of the last two boundary rows.

    The rows ``(q_n(0), p_n(0))`` for the two highest ``n`` are put on one
    scale and the right singular vector of the smaller singular value is
    returned, scaled so its larger component is 1.
    """
    # bring both rows to the rescale factor of the last step
    shift = math.exp(trace.log_scale[-2] - trace.log_scale[-1])
    rows = np.array([[trace.q[-1], trace.p[-1]],
                     [trace.q[-2] * shift, trace.p[-2] * shift]], dtype=np.float64)
    if not np.any(rows):
        raise DegenerateBoundaryError("both boundary rows vanish")
    _, _, vt = np.linalg.svd(rows)
    v = vt[-1]
    v = v / v[np.argmax(np.abs(v))]
    f0, f0p = (0.0 if abs(c) < _NULL_TOL else float(c) for c in v)
    return f0, f0p


def full_coefficients(trace, boundary):
    """Taylor coefficients ``c_0 .. c_k`` of ``f`` with rescaling undone."""
    f0, f0p = boundary
    M = len(trace)
    c = np.empty(M + 2)
    c[0], c[1] = f0, f0p
    with np.errstate(over="raise", under="ignore", invalid="raise"):
        for n in range(M):
            d = trace.q[n] * f0 + trace.p[n] * f0p
            if d == 0:
                c[n + 2] = 0.0
                continue
            log_mag = math.log(abs(d)) + trace.log_scale[n] - math.lgamma(n + 3)
            if log_mag > 709:
                raise RescaleUnderflowError(
                    f"Taylor coefficient of degree {n + 2} overflows double precision")
            c[n + 2] = math.copysign(math.exp(log_mag), d)
    return c


def gauge_values(gauge, x):
    """``g(x)`` with ``g(0) = 1``."""
    return gauge.values(x)


def _default_cap(c, gauge, L, k):
    x = np.linspace(-L, L, 801)
    g = gauge_values(gauge, x)
    cap = max(1, k // 2)
    terms = np.array([np.max(np.abs(c[j] * x**j * g)) for j in range(cap + 1)])
    ref = np.max(np.abs(np.polyval(c[:cap + 1][::-1], x) * g))
    big = np.flatnonzero(terms >= TERM_TOL * ref)
    return int(big[-1]) if big.size else cap


def build_f(trace, boundary=None, degree_cap=None, n=None, gauge=GAUSSIAN, L=DEFAULT_L):
    """Assemble the eigenfunction of a trace taken at an eigenvalue.

    ``degree_cap`` defaults to the highest degree whose term still moves the
    sampled ``psi`` by at least ``1e-4`` of its sup norm on ``[-L, L]``,
    capped at ``k // 2``.
    """
    if boundary is None:
        boundary = boundary_ratio(trace)
    f0, f0p = boundary
    if f0 == 0 and f0p == 0:
        raise DegenerateBoundaryError("boundary vector is zero")
    c = full_coefficients(trace, (f0, f0p))
    # phase: lowest nonzero coefficient positive
    nz = np.flatnonzero(np.abs(c) > _NULL_TOL * np.max(np.abs(c)))
    if c[nz[0]] < 0:
        c = -c
        f0, f0p = -f0, -f0p
    parity = "none"
    if trace.symmetric:
        parity = "even" if f0p == 0 else "odd" if f0 == 0 else "none"
    if degree_cap is None:
        degree_cap = _default_cap(c, gauge, L, trace.k)
    degree_cap = int(min(degree_cap, c.size - 1))
    c.flags.writeable = False
    return PolynomialWavefunction(n, trace.energy, c, (f0, f0p), degree_cap, parity, None, L)


def _pade_candidates(c, parity, L):
    """Pole-free diagonal Pade approximants of ``f`` on ``[-L, L]``."""
    if parity in ("even", "odd"):
        shift = 1 if parity == "odd" else 0
        coeffs = c[shift::2]
        probe = np.linspace(0, L * L, 2001)

        def wrap(num, den):
            return lambda x: x**shift * num(x * x) / den(x * x)
    else:
        coeffs = c
        probe = np.linspace(-L, L, 2001)

        def wrap(num, den):
            return lambda x: num(x) / den(x)
    out = {}
    for M in range(2, (coeffs.size - 1) // 2 + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                num, den = pade(coeffs[:2 * M + 1], M)
        except (np.linalg.LinAlgError, ValueError):
            continue
        dv = den(probe)
        if np.any(dv == 0) or np.any(np.sign(dv) != np.sign(dv[0])):
            continue
        if np.all(np.isfinite(num(probe) / dv)):
            out[M] = wrap(num, den)
    return out


def resummation(w, gauge=GAUSSIAN, L=None, count=DEFAULT_COUNT):
    """Callable ``f(x)`` resumming the full series of ``w``.

    Among the pole-free approximants the one that changes ``g f`` least
    relative to its predecessor on ``[-L, L]`` is used.  Falls back to the
    truncated polynomial when no approximant qualifies.
    """
    L = w.L if L is None else float(L)
    cands = _pade_candidates(np.asarray(w.coeffs), w.parity, L)
    if not cands:
        return w.f
    orders = sorted(cands)
    if len(orders) == 1:
        return cands[orders[0]]
    x = np.linspace(-L, L, count)
    g = gauge_values(gauge, x)
    vals = {M: cands[M](x) * g for M in orders}
    best, best_change = orders[-1], np.inf
    for a, b in zip(orders, orders[1:]):
        change = np.max(np.abs(vals[b] - vals[a]))
        if change < best_change:
            best, best_change = b, change
    return cands[best]


def _raw_psi(w, gauge, x, L, method):
    g = gauge_values(gauge, x)
    if method == "pade":
        return resummation(w, gauge, L)(x) * g
    if method == "taylor":
        return w.f(x) * g
    raise ValueError(f"unknown sampling method {method!r}")


def psi_samples(w, gauge=GAUSSIAN, L=None, count=DEFAULT_COUNT, method="pade",
                check_tail=True):
    """Sample the normalized ``psi = N g f`` on ``count`` points over ``[-L, L]``.

    ``method="taylor"`` uses the truncated polynomial of degree
    ``w.degree_cap``; ``"pade"`` resums the full series.  Returns ``(x, psi)``.
    """
    L = w.L if L is None else float(L)
    count = int(count)
    if count < 3 or count % 2 == 0:
        raise ValueError(f"count must be odd and at least 3, got {count}")
    if not L > 0:
        raise ValueError("L must be positive")
    x = np.linspace(-L, L, count)
    psi = _raw_psi(w, gauge, x, L, method)
    total = simpson(psi**2, x=x)
    if not total > 0 or not np.isfinite(total):
        raise DomainTooSmallError("wavefunction is not normalizable on the domain")
    psi = psi / math.sqrt(total)
    peak = np.max(psi**2)
    if check_tail and max(psi[0]**2, psi[-1]**2) > TAIL_TOL * peak:
        raise DomainTooSmallError(
            f"|psi(+-L)|^2 exceeds {TAIL_TOL:g} of the peak; enlarge L")
    return x, psi


def normalized(w, gauge=GAUSSIAN, L=None, count=DEFAULT_COUNT, method="pade"):
    """Copy of ``w`` carrying the normalization constant of :func:`psi_samples`."""
    L = w.L if L is None else float(L)
    x = np.linspace(-L, L, count)
    raw = _raw_psi(w, gauge, x, L, method)
    return replace(w, norm=1.0 / math.sqrt(simpson(raw**2, x=x)), L=L)


def psi_values(w, x, gauge=GAUSSIAN, method="pade"):
    """Normalized ``psi`` at arbitrary points; ``w`` must carry ``norm``."""
    if w.norm is None:
        w = normalized(w, gauge, method=method)
    x = np.asarray(x, dtype=np.float64)
    return w.norm * _raw_psi(w, gauge, x, w.L, method)


def count_nodes(psi, floor=NODE_FLOOR):
    """Sign changes of ``psi`` among samples above ``floor * max|psi|``.

    The floor ignores the numerically flat tails where rounding flips signs.
    """
    psi = np.asarray(psi, dtype=np.float64)
    keep = psi[np.abs(psi) > floor * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.diff(np.sign(keep)) != 0))


__all__ = ["PolynomialWavefunction", "boundary_ratio", "full_coefficients",
           "build_f", "resummation", "psi_samples", "normalized", "psi_values", "gauge_values", "count_nodes"]

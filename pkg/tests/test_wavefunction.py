import math

import numpy as np
import pytest
from scipy.integrate import simpson

from pdm_atem import atem
from pdm_atem import wavefunction as wf
from pdm_atem.atem import RecurrenceTrace
from pdm_atem.exceptions import DegenerateBoundaryError, DomainTooSmallError
from pdm_atem.hamiltonian import IDENTITY, build_ode, mass_power_gauge, u_ord_pointwise

from conftest import EIGENFUNCTION_N2, HARMONIC, MASS


def _trace(p, q, symmetric=True):
    p, q = np.array(p, float), np.array(q, float)
    return RecurrenceTrace(p, q, np.zeros_like(p), p.size + 2, 0.0, symmetric)


def test_boundary_even_example():
    assert wf.boundary_ratio(_trace([0, 1, 0], [0, 0, 0])) == (1.0, 0.0)


def test_boundary_odd_example():
    assert wf.boundary_ratio(_trace([0, 0, 0], [1, 0, 2])) == (0.0, 1.0)


def test_boundary_generic_null_vector():
    # rows (2, 1) and (4, 2) share the null vector (1, -2)
    tr = RecurrenceTrace(np.array([2.0, 1.0]), np.array([4.0, 2.0]), np.zeros(2), 4, 0.0)
    f0, f0p = wf.boundary_ratio(tr)
    assert (f0, f0p) == pytest.approx((-0.5, 1.0))


def test_boundary_degenerate():
    with pytest.raises(DegenerateBoundaryError):
        wf.boundary_ratio(_trace([0, 0], [0, 0]))


def _state(ode, E_range, k, index=0, gauge=None):
    roots = atem.find_roots(ode, E_range, k)
    r = roots[index]
    tr = atem.iterate(ode, r.energy, k)
    kw = {} if gauge is None else {"gauge": gauge}
    return r, tr, wf.build_f(tr, n=index, **kw)


def test_harmonic_second_state_is_hermite(harmonic_ode):
    _, _, w = _state(harmonic_ode, (2, 3), 20)
    assert w.parity == "even"
    assert np.allclose(w.truncated(4), [1, 0, -2, 0, 0], atol=1e-12)


def test_harmonic_ground_state_normalized(harmonic_ode):
    _, _, w = _state(harmonic_ode, (0, 1), 20)
    x, psi = wf.psi_samples(w, count=2001)
    assert np.max(np.abs(psi - math.pi**-0.25 * np.exp(-x * x / 2))) < 1e-6


def test_eigenfunction_coefficients(well_ode):
    for k, reference in EIGENFUNCTION_N2.items():
        _, _, w = _state(well_ode, (2.2, 2.5), k)
        got = w.truncated(12)[::2]
        for value, text in zip(got, reference):
            digits = len(text.split("e")[0].replace("-", "").replace(".", "").lstrip("0"))
            exponent = math.floor(math.log10(abs(float(text))))
            unit = 10.0 ** (exponent - digits + 1)
            assert abs(value - float(text)) <= 5 * unit, (k, text, value)


def test_sample_count_validation(harmonic_ode):
    _, _, w = _state(harmonic_ode, (0, 1), 20)
    with pytest.raises(ValueError):
        wf.psi_samples(w, count=2)
    with pytest.raises(ValueError):
        wf.psi_samples(w, count=100)
    with pytest.raises(ValueError):
        wf.psi_samples(w, method="fourier")


def test_domain_too_small(well_ode):
    _, _, w = _state(well_ode, (0, 1), 40)
    with pytest.raises(DomainTooSmallError):
        wf.psi_samples(w, L=1.0)


def test_unbounded_without_gauge():
    ode = build_ode("1", HARMONIC, {}, "BDD", capacity=44, gauge=IDENTITY)
    # without the Gaussian factor f = exp(-x^2/2) is itself the series
    tr = atem.iterate(ode, 0.5, 40)
    w = wf.build_f(tr, boundary=(1.0, 0.0), gauge=IDENTITY, degree_cap=6)
    assert np.allclose(w.truncated(6), [1, 0, -0.5, 0, 0.125, 0, -1 / 48])


def _psi_and_ode(ode_mass, gamma, E, w, gauge):
    def psi(x):
        return wf.psi_values(w, x, gauge)

    def residual(x, h=1e-3):
        f = [psi(x + j * h) for j in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        m, dm, d2m = 1 + gamma * x * x, 2 * gamma * x, 2 * gamma
        return (-d2 / (2 * m) + dm / (2 * m * m) * d1
                + (0.5 * x * x + u_ord_pointwise(m, dm, d2m, ode_mass)) * f[2] - E * f[2])
    return psi, residual


@pytest.mark.parametrize("index", range(5))
def test_ode_residual(well_ode, index):
    r, _, w = _state(well_ode, (0, 5.5), 60, index)
    w = wf.normalized(w)
    psi, residual = _psi_and_ode("BDD", 0.1, r.energy, w, wf.GAUSSIAN)
    x = np.linspace(-2, 2, 41)
    assert np.max(np.abs(residual(x))) < 1e-4 * np.max(np.abs(psi(x)))


@pytest.mark.parametrize("index", range(5))
def test_parity_purity(well_ode, index):
    _, _, w = _state(well_ode, (0, 5.5), 60, index)
    expected = "even" if index % 2 == 0 else "odd"
    assert w.parity == expected
    wrong = w.coeffs[1::2] if expected == "even" else w.coeffs[0::2]
    assert np.all(wrong == 0)
    x = np.linspace(0.1, 4, 40)
    sign = 1 if expected == "even" else -1
    w = wf.normalized(w)
    assert np.allclose(wf.psi_values(w, -x), sign * wf.psi_values(w, x), atol=1e-12)


def test_orthogonality_and_decay(well_ode):
    samples = []
    for index in range(5):
        _, _, w = _state(well_ode, (0, 5.5), 60, index)
        x, psi = wf.psi_samples(w)
        assert psi[0]**2 < 1e-6 and psi[-1]**2 < 1e-6
        assert simpson(psi**2, x=x) == pytest.approx(1.0, abs=1e-10)
        assert wf.count_nodes(psi) == index
        samples.append(psi)
    for i in range(5):
        for j in range(i):
            assert abs(simpson(samples[i] * samples[j], x=x)) < 1e-3


def test_taylor_sampling_close_to_origin(well_ode):
    _, _, w = _state(well_ode, (0, 1), 60)
    w = wf.normalized(w)
    x = np.linspace(-1.5, 1.5, 31)
    assert np.allclose(wf.psi_values(w, x, method="taylor"), wf.psi_values(w, x), atol=1e-6)


def test_count_nodes_floor():
    psi = np.array([1e-9, -1e-9, 0.5, 1.0, 0.3, -0.4, -1e-8, 2e-9])
    assert wf.count_nodes(psi) == 1
    assert wf.count_nodes(psi, floor=0) == 4


def test_mass_gauge_state_solves_symmetric_ordering():
    # the m^(1/2) gauge absorbs the branch points this ordering puts at x = +-i/sqrt(gamma)
    gauge = mass_power_gauge(MASS, 0.5, {"gamma": 0.1})
    ode = build_ode(MASS, HARMONIC, {"gamma": 0.1}, "ZK", capacity=64, gauge=gauge)
    for index in range(3):
        r, _, w = _state(ode, (0, 3), 60, index, gauge=gauge)
        w = wf.normalized(w, gauge)
        psi, residual = _psi_and_ode("ZK", 0.1, r.energy, w, gauge)
        x = np.linspace(-2, 2, 41)
        assert np.max(np.abs(residual(x))) < 1e-4 * np.max(np.abs(psi(x)))

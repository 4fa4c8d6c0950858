import math

import mpmath
import numpy as np
import pytest

from pdm_atem import atem
from pdm_atem.exceptions import IterationOverflowError, ParityNotApplicableError
from pdm_atem.hamiltonian import build_ode

from conftest import HARMONIC, MASS, BDD_REFERENCE, K_LIST


def test_harmonic_terminates_exactly(harmonic_ode):
    for E in (0.5, 1.5, 2.5):
        assert abs(_raw_det(harmonic_ode, E, 20)) < 1e-12 * abs(_raw_det(harmonic_ode, E + 0.1, 20))


def termination_det(tr):
    return atem.termination_det(tr, normalized=True)


def test_harmonic_excited_state_polynomial(harmonic_ode):
    # at E = 2.5 the even solution is 1 - 2x^2, so f^(n+2)(0) = q_n(0) = 0 for n >= 1
    tr = atem.iterate(harmonic_ode, 2.5, 12)
    assert tr.q[0] != 0 and np.all(tr.q[1:] == 0)


def _raw_det(ode, E, k):
    tr = atem.iterate(ode, E, k)
    return atem.termination_det(tr) * math.exp(tr.log_scale[-1] + tr.log_scale[-2])


def test_ground_state_root_determinant(well_ode):
    at_root = _raw_det(well_ode, 0.46889651, 60)
    nearby = _raw_det(well_ode, 0.47889651, 60)
    assert abs(at_root) < 1e-6 * abs(nearby)
    assert _raw_det(well_ode, 0.46, 60) * _raw_det(well_ode, 0.48, 60) < 0


def test_normalized_determinant_on_symmetric_problem(well_ode):
    assert abs(termination_det(atem.iterate(well_ode, 0.46, 60))) == pytest.approx(1.0)


def test_no_sign_change_below_spectrum(well_ode):
    vals = [termination_det(atem.iterate(well_ode, E, 40)) for E in np.linspace(-2, -0.5, 7)]
    assert all(v > 0 for v in vals) or all(v < 0 for v in vals)


def test_parity_vanishing_pattern(well_ode):
    tr = atem.iterate(well_ode, 1.2, 30)
    assert tr.symmetric
    assert np.all(tr.p[0::2] == 0) and np.all(tr.q[1::2] == 0)


def test_parity_needs_symmetry():
    ode = build_ode("1+0.1*x", HARMONIC, {}, "BDD", capacity=24)
    tr = atem.iterate(ode, 1.0, 20)
    with pytest.raises(ParityNotApplicableError):
        atem.parity_condition(tr, "even")
    with pytest.raises(ParityNotApplicableError):
        atem.find_roots(ode, (0, 2), 20, mode="odd")


def test_bad_arguments(harmonic_ode):
    with pytest.raises(ValueError):
        atem.iterate(harmonic_ode, 1.0, 2)
    with pytest.raises(ValueError):
        atem.iterate(harmonic_ode, 1.0, 100)
    with pytest.raises(ValueError):
        atem.find_roots(harmonic_ode, (1, 0), 20)
    with pytest.raises(ValueError):
        atem.find_roots(harmonic_ode, (0, 1), 20, mode="sideways")
    with pytest.raises(ValueError):
        atem.converge(harmonic_ode, (0, 1), [20])
    with pytest.raises(ValueError):
        atem.converge(harmonic_ode, (0, 1), [30, 20])


def test_find_roots_harmonic(harmonic_ode):
    roots = atem.find_roots(harmonic_ode, (0, 6), 40)
    assert [r.energy for r in roots] == pytest.approx([0.5, 1.5, 2.5, 3.5, 4.5, 5.5], abs=1e-12)
    assert [r.parity for r in roots] == ["even", "odd"] * 3
    assert [r.index for r in roots] == list(range(6))


@pytest.mark.parametrize("col, k", list(enumerate(K_LIST)))
def test_find_roots_reference(well_ode, col, k):
    roots = atem.find_roots(well_ode, (0, 5.5), k)
    got = np.array([r.energy for r in roots[:6]])
    assert np.max(np.abs(got - BDD_REFERENCE[:, col])) < 1e-6


def test_empty_range_is_valid(well_ode):
    assert atem.find_roots(well_ode, (-3, -1), 30) == []


@pytest.mark.parametrize("k", [30, 40, 60])
def test_parity_and_determinant_roots_agree(well_ode, k):
    det = atem.find_roots(well_ode, (0, 5.5), k)
    par = sorted(atem.find_roots(well_ode, (0, 5.5), k, "even")
                 + atem.find_roots(well_ode, (0, 5.5), k, "odd"), key=lambda r: r.energy)
    assert len(det) == len(par)
    for a, b in zip(det, par):
        assert abs(a.energy - b.energy) < 1e-10
        assert a.parity == b.parity


def test_converge_threshold_monotone(well_ode):
    loose = atem.converge(well_ode, (0, 5.5), K_LIST, 8)
    tight = atem.converge(well_ode, (0, 5.5), K_LIST, 12)
    assert len(tight.accepted) < len(loose.accepted)
    assert {r.index for r in tight.accepted} <= {r.index for r in loose.accepted}
    energies = [r.energy for r in loose.accepted]
    assert energies == sorted(energies) and len(set(energies)) == len(energies)
    for r in loose.accepted:
        assert r.digits >= 8 and r.k == K_LIST[-1]


def test_converge_report_table(well_ode):
    rep = atem.converge(well_ode, (0, 5.5), K_LIST, 8, threads=1)
    for i in range(6):
        assert np.allclose(np.array(rep.table[i], float), BDD_REFERENCE[i], atol=1e-6)
        assert np.allclose(np.array(rep.matched[i][1:], float), BDD_REFERENCE[i][1:], atol=1e-6)
    # the k=20 estimate of state 5 is too far off to be paired
    assert rep.matched[5][0] is None
    assert rep.digits(0) >= 9


def test_converge_harmonic_exact(harmonic_ode):
    rep = atem.converge(harmonic_ode, (0, 5.6), [20, 30], 12)
    got = [r.energy for r in rep.accepted]
    assert np.max(np.abs(np.array(got) - np.arange(6) - 0.5)) < 1e-12


def test_thread_env(well_ode, monkeypatch):
    monkeypatch.setenv("ATEM_THREADS", "1")
    one = atem.converge(well_ode, (0, 5.5), [20, 30, 40], 6)
    monkeypatch.setenv("ATEM_THREADS", "3")
    three = atem.converge(well_ode, (0, 5.5), [20, 30, 40], 6)
    assert [r.energy for r in one.accepted] == [r.energy for r in three.accepted]


def test_matched_digits():
    assert atem.matched_digits(1.0, 1.0) == 17
    assert atem.matched_digits(0.46889651, 0.46889651 + 4e-9) == 8
    assert atem.matched_digits(1.0, 2.0) == 0


def test_rescaling_preserves_signs(well_ode):
    for k in (10, 18, 25):
        for E in (0.3, 1.1, 2.9):
            a = atem.iterate(well_ode, E, k, rescale=True)
            b = atem.iterate(well_ode, E, k, rescale=False)
            pa, qa = a.unscaled()
            assert np.array_equal(np.sign(pa), np.sign(b.p))
            assert np.array_equal(np.sign(qa), np.sign(b.q))
            assert np.allclose(pa, b.p, rtol=1e-12) and np.allclose(qa, b.q, rtol=1e-12)
            assert math.copysign(1, atem.termination_det(a)) == \
                math.copysign(1, atem.termination_det(b))


def test_overflow_without_rescaling(well_ode):
    ode = build_ode(MASS, HARMONIC, {"gamma": 0.1}, "BDD", capacity=404)
    with pytest.raises(IterationOverflowError) as err:
        atem.iterate(ode, 1.0, 400, rescale=False)
    assert err.value.step > 0
    tr = atem.iterate(ode, 1.0, 400)
    assert np.all(np.isfinite(tr.p)) and np.all(np.isfinite(tr.q))


# ----------------------------------------- independent Taylor-coefficient oracle

def _taylor_solution(p0, q0, f0, f1, n):
    """Coefficients of the solution of f'' = p0 f' + q0 f from f(0), f'(0)."""
    c = [mpmath.mpf(f0), mpmath.mpf(f1)]
    for j in range(n - 1):
        acc = mpmath.mpf(0)
        for i in range(j + 1):
            acc += p0[i] * (j - i + 1) * c[j - i + 1] + q0[i] * c[j - i]
        c.append(acc / ((j + 2) * (j + 1)))
    return c


def test_trace_matches_taylor_coefficients(well_ode):
    k, E = 24, 1.3
    tr = atem.iterate(well_ode, E, k)
    p, q = tr.unscaled()
    with mpmath.workdps(40):
        p0 = [mpmath.mpf(v) for v in well_ode.p0.coeffs]
        q0 = [mpmath.mpf(v) for v in well_ode.q0(E).coeffs]
        even = _taylor_solution(p0, q0, 1, 0, k + 1)
        odd = _taylor_solution(p0, q0, 0, 1, k + 1)
        for n in range(len(tr)):
            fac = mpmath.factorial(n + 2)
            assert float(q[n]) == pytest.approx(float(fac * even[n + 2]), rel=1e-11, abs=1e-11)
            assert float(p[n]) == pytest.approx(float(fac * odd[n + 2]), rel=1e-11, abs=1e-11)


def _mp_trace(ode, E, k):
    """Plain mpmath evaluation of the recurrence at 40 digits."""
    cap = ode.capacity
    p0 = [mpmath.mpf(v) for v in ode.p0.coeffs]
    q0 = [mpmath.mpf(a) + mpmath.mpf(E) * mpmath.mpf(b)
          for a, b in zip(ode.q0_V.coeffs, ode.q0_E.coeffs)]

    def mul(a, b):
        return [mpmath.fsum(a[i] * b[j - i] for i in range(j + 1)) for j in range(cap + 1)]

    def der(a):
        return [a[j + 1] * (j + 1) for j in range(cap)] + [mpmath.mpf(0)]

    p, q = p0, q0
    ps, qs = [p[0]], [q[0]]
    for _ in range(1, k - 1):
        p, q = ([a + b + c for a, b, c in zip(mul(p0, p), der(p), q)],
                [a + b for a, b in zip(mul(q0, p), der(q))])
        ps.append(p[0])
        qs.append(q[0])
    return ps, qs


def test_double_double_against_mpmath():
    ode = build_ode(MASS, HARMONIC, {"gamma": 0.1}, "BDD", capacity=44, precision="dd")
    k, E = 40, 0.46889651
    tr = atem.iterate(ode, E, k)
    with mpmath.workdps(40):
        ps, qs = _mp_trace(ode, E, k)
        for n in range(len(tr)):
            for ours, ref in ((tr.p[n], ps[n]), (tr.q[n], qs[n])):
                val = mpmath.mpf(ours) * mpmath.exp(tr.log_scale[n])
                assert abs(val - ref) <= mpmath.mpf(1e-12) * max(abs(ref), 1), n


def test_double_double_resolves_cancellation():
    dd = build_ode(MASS, HARMONIC, {"gamma": 0.1}, "BDD", capacity=104, precision="dd")
    roots = atem.find_roots(dd, (0, 5.5), 100)
    assert len(roots) >= 6
    assert roots[5].energy == pytest.approx(4.9426, abs=1e-3)

"""Double-double evaluation of the p_n / q_n recurrence (about 31 digits).

Numbers are carried as unevaluated sums ``hi + lo`` of two doubles using the
classic error-free transformations (Dekker / Knuth).  Rescaling uses exact
powers of two so it adds no rounding.
"""

import math

import numpy as np
from numba import njit

_SPLITTER = 134217729.0  # 2**27 + 1
_LN2 = math.log(2.0)


@njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, inline="always")
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


@njit(cache=True, inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


@njit(cache=True)
def _step(p0h, p0l, q0h, q0l, ph, pl, qh, ql, m):
    """One recurrence step, keeping orders 0..m-1 of p_n and q_n."""
    nph = np.empty(m)
    npl = np.empty(m)
    nqh = np.empty(m)
    nql = np.empty(m)
    for j in range(m):
        sh, sl = 0.0, 0.0
        th, tl = 0.0, 0.0
        for i in range(j + 1):
            ah, al = _dd_mul(p0h[i], p0l[i], ph[j - i], pl[j - i])
            sh, sl = _dd_add(sh, sl, ah, al)
            bh, bl = _dd_mul(q0h[i], q0l[i], ph[j - i], pl[j - i])
            th, tl = _dd_add(th, tl, bh, bl)
        fj = float(j + 1)
        dh, dl = _dd_mul(ph[j + 1], pl[j + 1], fj, 0.0)
        sh, sl = _dd_add(sh, sl, dh, dl)
        sh, sl = _dd_add(sh, sl, qh[j], ql[j])
        dh, dl = _dd_mul(qh[j + 1], ql[j + 1], fj, 0.0)
        th, tl = _dd_add(th, tl, dh, dl)
        nph[j] = sh
        npl[j] = sl
        nqh[j] = th
        nql[j] = tl
    return nph, npl, nqh, nql


@njit(cache=True)
def recurrence(p0h, p0l, qVh, qVl, qEh, qEl, energy, k, rescale):
    """Values ``p_n(0), q_n(0)`` for ``n = 0..k-2``.

    Returns ``(p, q, log_scale, failed_step)`` where ``log_scale[n]`` is the
    natural log of the accumulated rescale factor and ``failed_step`` is -1
    unless a non-finite value appeared.
    """
    length = k - 1
    q0h = np.empty(length)
    q0l = np.empty(length)
    for j in range(length):
        eh, el = _dd_mul(qEh[j], qEl[j], energy, 0.0)
        q0h[j], q0l[j] = _dd_add(qVh[j], qVl[j], eh, el)
    ph = p0h[:length].copy()
    pl = p0l[:length].copy()
    qh = q0h.copy()
    ql = q0l.copy()
    out_p = np.zeros(length)
    out_q = np.zeros(length)
    out_log = np.zeros(length)
    out_p[0] = ph[0]
    out_q[0] = qh[0]
    log_s = 0.0
    for n in range(1, length):
        ph, pl, qh, ql = _step(p0h, p0l, q0h, q0l, ph, pl, qh, ql, length - n)
        if not (np.isfinite(ph[0]) and np.isfinite(qh[0])):
            return out_p, out_q, out_log, n
        if rescale:
            big = max(abs(ph[0]), abs(qh[0]), 1.0)
            if big > 1.0:
                e = math.frexp(big)[1]
                f = math.ldexp(1.0, -e)
                ph *= f
                pl *= f
                qh *= f
                ql *= f
                log_s += e * _LN2
        for j in range(ph.size):
            if not (np.isfinite(ph[j]) and np.isfinite(qh[j])):
                return out_p, out_q, out_log, n
        out_p[n] = ph[0]
        out_q[n] = qh[0]
        out_log[n] = log_s
    return out_p, out_q, out_log, -1

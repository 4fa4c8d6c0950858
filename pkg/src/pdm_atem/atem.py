"""
The asymptotic Taylor expansion engine.

For ``f'' = p0 f' + q0 f`` every higher derivative is a combination of the
two boundary values::

    f^(n+2)(x) = q_n(x) f(x) + p_n(x) f'(x)
    p_n = p0 p_{n-1} + p_{n-1}' + q_{n-1}
    q_n = q0 p_{n-1} + q_{n-1}'

An iteration count ``k`` means the expansion is carried to ``x^k``, so the
trace holds ``n = 0 .. k-2``.  Energies where the last two pairs become
linearly dependent are the eigenvalue estimates.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _ddkernel
from . import series as ts
from .exceptions import IterationOverflowError, ParityNotApplicableError

BRACKET_TOL = 1e-13
DEFAULT_GRID_STEP = 0.05
MATCH_GAP = 0.2
MODES = ("determinant", "even", "odd")


@dataclass(frozen=True)
class RecurrenceTrace:
    """Rescaled values ``p_n(0), q_n(0)`` for ``n = 0 .. k-2``.

    The true values are ``p[n] * exp(log_scale[n])``.
    """

    p: np.ndarray
    q: np.ndarray
    log_scale: np.ndarray
    k: int
    energy: float
    symmetric: bool = False

    def __len__(self):
        return self.p.size

    def unscaled(self):
        """``(p_n(0), q_n(0))`` without rescaling; may overflow to inf."""
        with np.errstate(over="ignore"):
            s = np.exp(self.log_scale)
            return self.p * s, self.q * s


@dataclass(frozen=True)
class EigenResult:
    energy: float
    k: int
    digits: int = None
    parity: str = "none"
    bracket: tuple = (math.nan, math.nan)
    index: int = None


@dataclass
class ConvergenceReport:
    """Per-k roots plus the states that stabilized.

    ``table[i][j]`` is the i-th lowest root found at ``k_list[j]`` (None if
    fewer roots were found); ``matched[s][j]`` follows one physical state
    across k by nearest-value pairing.
    """

    k_list: list
    digit_threshold: int
    roots: dict
    table: list
    matched: list
    accepted: list = field(default_factory=list)

    def digits(self, state):
        """Matched digits of ``matched[state]`` between the two largest k."""
        a, b = self.matched[state][-2:]
        if a is None or b is None:
            return 0
        return matched_digits(a, b)


def matched_digits(a, b):
    """Number of leading significant digits shared by ``a`` and ``b``."""
    if a == b:
        return 17
    rel = abs(a - b) / max(abs(b), 1e-300)
    return max(0, min(17, math.floor(-math.log10(rel))))


def _threads():
    raw = os.environ.get("ATEM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


class Recurrence:
    """The recurrence for one ODE and iteration count, reusable across E."""

    def __init__(self, ode, k):
        k = int(k)
        if k < 3:
            raise ValueError(f"iteration count must be at least 3, got {k}")
        if ode.valid_order < k - 2:
            raise ValueError(
                f"ODE series valid to order {ode.valid_order}; k={k} needs {k - 2}")
        self.k = k
        self.extended = ode.extended
        self.symmetric = ode.is_symmetric()
        n = k - 1
        if self.extended:
            self._p0 = ts.split_double_double(ode.p0)
            self._qV = ts.split_double_double(ode.q0_V)
            self._qE = ts.split_double_double(ode.q0_E)
            self._p0 = tuple(np.ascontiguousarray(a[:n]) for a in self._p0)
            self._qV = tuple(np.ascontiguousarray(a[:n]) for a in self._qV)
            self._qE = tuple(np.ascontiguousarray(a[:n]) for a in self._qE)
        else:
            self._p0 = np.array(ode.p0.coeffs[:n], dtype=np.float64)
            self._qV = np.array(ode.q0_V.coeffs[:n], dtype=np.float64)
            self._qE = np.array(ode.q0_E.coeffs[:n], dtype=np.float64)

    def __call__(self, E, rescale=True):
        E = float(E)
        if self.extended:
            p, q, logs, failed = _ddkernel.recurrence(
                *self._p0, *self._qV, *self._qE, E, self.k, rescale)
            if failed >= 0:
                raise IterationOverflowError(failed)
        else:
            p, q, logs = self._run_double(E, rescale)
        return RecurrenceTrace(p, q, logs, self.k, E, self.symmetric)

    def _run_double(self, E, rescale):
        length = self.k - 1
        p0 = self._p0
        q0 = self._qV + E * self._qE
        p, q = p0.copy(), q0.copy()
        out_p = np.empty(length)
        out_q = np.empty(length)
        logs = np.zeros(length)
        out_p[0], out_q[0] = p[0], q[0]
        log_s = 0.0
        j = np.arange(1, length)
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(1, length):
                m = length - n
                new_p = np.convolve(p0[:m], p[:m])[:m] + j[:m] * p[1:m + 1] + q[:m]
                new_q = np.convolve(q0[:m], p[:m])[:m] + j[:m] * q[1:m + 1]
                if not (np.all(np.isfinite(new_p)) and np.all(np.isfinite(new_q))):
                    raise IterationOverflowError(n)
                if rescale:
                    s = max(abs(new_p[0]), abs(new_q[0]), 1.0)
                    if s > 1.0:
                        new_p /= s
                        new_q /= s
                        log_s += math.log(s)
                p, q = new_p, new_q
                out_p[n], out_q[n] = p[0], q[0]
                logs[n] = log_s
        return out_p, out_q, logs


def iterate(ode, E, k, rescale=True):
    """Run the recurrence at trial energy ``E`` for iteration count ``k``."""
    return Recurrence(ode, k)(E, rescale)


def termination_det(trace, normalized=False):
    """``q_M p_{M-1} - p_M q_{M-1}`` at the last index ``M = k-2``.

    With ``normalized=True`` the value is divided by the norms of the two
    vectors ``(q_n, p_n)``: the sine of the angle between them, in ``[-1, 1]``.
    On symmetric problems the two vectors are orthogonal by parity, so this
    reduces to the sign of the determinant.
    """
    if len(trace) < 2:
        raise ValueError("termination determinant needs at least two trace entries")
    d = trace.q[-1] * trace.p[-2] - trace.p[-1] * trace.q[-2]
    if normalized:
        scale = math.hypot(trace.q[-1], trace.p[-1]) * math.hypot(trace.q[-2], trace.p[-2])
        return d / scale if scale > 0 else 0.0
    return d


def parity_condition(trace, parity):
    """Boundary condition for a definite-parity state.

    On a symmetric problem ``p_n(0)`` vanishes for even ``n`` and ``q_n(0)``
    for odd ``n``, so the even branch uses ``q`` at the largest even index of
    the trace and the odd branch ``p`` at the largest odd index.
    """
    if not trace.symmetric:
        raise ParityNotApplicableError(
            "parity conditions need p0 odd and q0 even; use the determinant")
    last = len(trace) - 1
    if parity == "even":
        return trace.q[last - (last % 2)]
    if parity == "odd":
        idx = last if last % 2 else last - 1
        if idx < 0:
            raise ValueError("trace too short for the odd condition")
        return trace.p[idx]
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def _condition(mode):
    if mode == "determinant":
        return termination_det
    if mode in ("even", "odd"):
        return lambda t: parity_condition(t, mode)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _refine(fn, a, fa, b, fb, tol):
    """Shrink a sign-change bracket to width ``tol``.

    Secant steps are taken when they land inside the bracket; whenever a
    step fails to halve the bracket a bisection step follows.
    """
    while b - a > tol:
        width = b - a
        c = b - fb * (b - a) / (fb - fa) if fb != fa else 0.5 * (a + b)
        if not a < c < b:
            c = 0.5 * (a + b)
        fc = fn(c)
        if fc == 0:
            return c, c
        if (fa < 0) == (fc < 0):
            a, fa = c, fc
        else:
            b, fb = c, fc
        if b - a > 0.5 * width:
            c = 0.5 * (a + b)
            if not a < c < b:
                break
            fc = fn(c)
            if fc == 0:
                return c, c
            if (fa < 0) == (fc < 0):
                a, fa = c, fc
            else:
                b, fb = c, fc
    return a, b


def _parity_of(rec, a, b):
    if not rec.symmetric:
        return "none"
    ta, tb = rec(a), rec(b)
    for parity in ("even", "odd"):
        va, vb = parity_condition(ta, parity), parity_condition(tb, parity)
        if va == 0 or vb == 0 or (va < 0) != (vb < 0):
            return parity
    return "none"


def _energy_grid(lo, hi, step):
    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = lo + step * np.arange(count + 1)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    return grid


def find_roots(ode, E_range, k, mode="determinant", grid_step=DEFAULT_GRID_STEP,
               tol=BRACKET_TOL):
    """Eigenvalue estimates in ``E_range`` at iteration count ``k``.

    Scans a uniform energy grid for sign changes of the chosen condition and
    refines every bracket.  Returns :class:`EigenResult` objects sorted by
    energy; an empty list is a valid answer.
    """
    lo, hi = (float(v) for v in E_range)
    if not lo < hi:
        raise ValueError(f"empty energy range [{lo}, {hi}]")
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    rec = Recurrence(ode, k)
    cond = _condition(mode)

    def fn(E):
        return cond(rec(E))

    grid = _energy_grid(lo, hi, grid_step)
    values = [fn(E) for E in grid]
    brackets = []
    for i, v in enumerate(values):
        if v == 0:
            brackets.append((grid[i], grid[i]))
            continue
        if i + 1 < len(values):
            w = values[i + 1]
            if w != 0 and (v < 0) != (w < 0):
                brackets.append((grid[i], grid[i + 1]))
    results = []
    for a, b in brackets:
        if a != b:
            a, b = _refine(fn, a, fn(a), b, fn(b), tol)
        energy = 0.5 * (a + b)
        parity = mode if mode != "determinant" else _parity_of(rec, a, b)
        results.append(EigenResult(energy, rec.k, None, parity, (a, b), len(results)))
    return results


def _match(previous, current, gap):
    """Pair each value of ``current`` with the nearest unused one in ``previous``."""
    pairs = sorted(
        ((abs(c - p), i, j) for i, c in enumerate(current) for j, p in enumerate(previous)
         if abs(c - p) <= gap))
    used_i, used_j, out = set(), set(), {}
    for _, i, j in pairs:
        if i not in used_i and j not in used_j:
            used_i.add(i)
            used_j.add(j)
            out[i] = j
    return out


def converge(ode, E_range, k_list, digit_threshold=10, mode="determinant",
             grid_step=DEFAULT_GRID_STEP, max_gap=MATCH_GAP, threads=None):
    """Run :func:`find_roots` for every ``k`` and keep the stabilized states.

    A state is accepted when its estimates at the two largest ``k`` share at
    least ``digit_threshold`` significant digits.
    """
    k_list = [int(k) for k in k_list]
    if len(k_list) < 2:
        raise ValueError("converge needs at least two iteration counts")
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError("iteration counts must be strictly ascending")
    workers = min(threads or _threads(), len(k_list))

    def run(k):
        return find_roots(ode, E_range, k, mode, grid_step)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(run, k_list))
    else:
        found = [run(k) for k in k_list]
    roots = {k: r for k, r in zip(k_list, found)}

    depth = max((len(r) for r in found), default=0)
    table = [[roots[k][i].energy if i < len(roots[k]) else None for k in k_list]
             for i in range(depth)]

    # follow states backwards from the largest k
    last = roots[k_list[-1]]
    chains = [[None] * len(k_list) for _ in last]
    current = [r.energy for r in last]
    owner = list(range(len(last)))
    for i, e in enumerate(current):
        chains[i][-1] = e
    for col in range(len(k_list) - 2, -1, -1):
        prev = [r.energy for r in roots[k_list[col]]]
        live = [(s, e) for s, e in zip(owner, current) if e is not None]
        pairing = _match(prev, [e for _, e in live], max_gap)
        nxt = {}
        for idx, (s, _) in enumerate(live):
            if idx in pairing:
                chains[s][col] = prev[pairing[idx]]
                nxt[s] = prev[pairing[idx]]
        owner = list(nxt)
        current = [nxt[s] for s in owner]

    report = ConvergenceReport(k_list, digit_threshold, roots, table, chains)
    for s, r in enumerate(last):
        d = report.digits(s)
        if d >= digit_threshold:
            report.accepted.append(
                EigenResult(r.energy, r.k, d, r.parity, r.bracket, s))
    return report


__all__ = ["RecurrenceTrace", "EigenResult", "ConvergenceReport", "Recurrence",
           "iterate", "termination_det", "parity_condition", "find_roots",
           "converge", "matched_digits", "BRACKET_TOL", "MODES"]

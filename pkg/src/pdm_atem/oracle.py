"""
Finite-difference cross-check for the ATEM eigenvalues.

Discretizes ``-(1/2)(psi'/m)' + (V + U_ord) psi = E psi`` on a uniform grid
with Dirichlet ends.  The flux form keeps the matrix symmetric tridiagonal,
so eigenvalues come from Sturm-sequence bisection.  Nothing here touches the
series machinery; ``m``, ``V`` and the derivatives of ``m`` are sampled
pointwise.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import UnphysicalMassError
from .expr import evaluate, parse
from .hamiltonian import parse_ordering, u_ord_pointwise

MAX_STATES = 10
EIG_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``N`` points on ``[-L, L]``."""

    L: float = 12.0
    N: int = 4001

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"grid half-width must be positive, got {self.L}")
        if self.N < 101 or self.N % 2 == 0:
            raise ValueError(f"grid point count must be odd and >= 101, got {self.N}")

    @property
    def h(self):
        return 2 * self.L / (self.N - 1)

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.N)

    def refined(self):
        """Same interval with the step halved."""
        return GridSpec(self.L, 2 * self.N - 1)


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix plus what is needed to rebuild it."""

    diag: np.ndarray
    off: np.ndarray
    grid: GridSpec
    source: tuple = None

    @property
    def size(self):
        return self.diag.size

    def dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def refine(self):
        """The same problem on the grid with half the step."""
        if self.source is None:
            raise ValueError("matrix was not built by discretize(); cannot refine")
        m_expr, V_expr, ordering, bindings = self.source
        return discretize(m_expr, V_expr, ordering, self.grid.refined(), dict(bindings))


def discretize(m_expr, V_expr, ordering="BDD", grid=None, bindings=None):
    """Assemble the flux-form matrix on the interior points of ``grid``."""
    grid = grid or GridSpec()
    bindings = dict(bindings or {})
    m_expr, V_expr = parse(m_expr), parse(V_expr)
    ordering = parse_ordering(ordering)
    x = grid.x
    h = grid.h
    inner = x[1:-1]
    m_half = evaluate(m_expr, 0.5 * (x[:-1] + x[1:]), bindings)
    m_c = evaluate(m_expr, inner, bindings)
    m_l = evaluate(m_expr, inner - h, bindings)
    m_r = evaluate(m_expr, inner + h, bindings)
    if np.any(m_half <= 0) or np.any(m_c <= 0) or np.any(m_l <= 0) or np.any(m_r <= 0):
        raise UnphysicalMassError("mass is not positive everywhere on the grid")
    dm = (m_r - m_l) / (2 * h)
    d2m = (m_r - 2 * m_c + m_l) / h**2
    U = u_ord_pointwise(m_c, dm, d2m, ordering)
    V = evaluate(V_expr, inner, bindings)
    diag = (1 / (2 * h * h)) * (1 / m_half[1:] + 1 / m_half[:-1]) + V + U
    off = -1 / (2 * h * h * m_half[1:-1])
    source = (m_expr, V_expr, ordering, tuple(sorted(bindings.items())))
    return Tridiagonal(diag, off, grid, source)


@njit(cache=True, nogil=True)
def sturm_count(diag, off, x):
    """Number of eigenvalues strictly below ``x``."""
    count = 0
    q = diag[0] - x
    if q < 0:
        count += 1
    for i in range(1, diag.size):
        if q == 0:
            q = 1e-300
        q = diag[i] - x - off[i - 1] * off[i - 1] / q
        if q < 0:
            count += 1
    return count


@njit(cache=True, nogil=True)
def _kth(diag, off, k, lo, hi, tol):
    # smallest x with more than k eigenvalues below it
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, off, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _gershgorin(diag, off):
    r = np.zeros_like(diag)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def _eigenvalues(T, k, tol):
    lo, hi = _gershgorin(T.diag, T.off)
    return np.array([_kth(T.diag, T.off, i, lo, hi, tol) for i in range(k)])


def lowest_eigenvalues(T, k, grid_refine=True, tol=EIG_TOL):
    """The ``k`` smallest eigenvalues of ``T``.

    With ``grid_refine`` the problem is also solved on the grid with half the
    step and the two results are combined as ``(4 E_fine - E_coarse) / 3``.
    """
    k = int(k)
    if not 1 <= k <= MAX_STATES:
        raise ValueError(f"k must be between 1 and {MAX_STATES}, got {k}")
    if k > T.size:
        raise ValueError("more eigenvalues requested than the matrix has")
    coarse = _eigenvalues(T, k, tol)
    if not grid_refine:
        return coarse
    fine = _eigenvalues(T.refine(), k, tol)
    return (4 * fine - coarse) / 3


def solve(m_expr, V_expr, ordering="BDD", k=6, grid=None, bindings=None, grid_refine=True):
    """Discretize and return the ``k`` lowest eigenvalues in one call."""
    T = discretize(m_expr, V_expr, ordering, grid, bindings)
    return lowest_eigenvalues(T, k, grid_refine)


__all__ = ["GridSpec", "Tridiagonal", "discretize", "sturm_count",
           "lowest_eigenvalues", "solve", "MAX_STATES"]

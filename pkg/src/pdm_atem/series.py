"""
Truncated Taylor series about ``x = 0``.

A :class:`TruncatedSeries` holds coefficients ``c_0 .. c_N`` of::

    f(x) = c_0 + c_1 x + c_2 x**2 + ... + c_N x**N + O(x**(N+1))

together with ``valid_order``, the highest coefficient that can be trusted.
Coefficients above ``valid_order`` are unknown and stored as zero.  The
capacity ``N`` is fixed at construction and every operation keeps it.

Two coefficient representations are supported:

* ``float64`` numpy arrays, the default and fast path;
* ``object`` arrays of :class:`mpmath.mpf`, used to build the coefficient
  series for the extended-precision recurrence kernel.  Arithmetic on those
  runs at the working precision of :data:`mpmath.mp`; use
  :func:`extended_precision` to set it.

Values are immutable; every operation returns a new series.
"""

import contextlib
import math
from numbers import Number

import mpmath
import numpy as np

from .exceptions import (DegenerateSeriesError, NegativeSqrtError,
                         SeriesOverflowError, SingularAtOriginError)

#: decimal digits used for ``object``-dtype series
EXTENDED_DPS = 36

_SINGULAR_TOL = 1e-300


@contextlib.contextmanager
def extended_precision(dps=EXTENDED_DPS):
    with mpmath.workdps(dps):
        yield


class TruncatedSeries:
    """Immutable truncated power series.

    Parameters
    ----------
    coeffs : array_like
        Taylor coefficients ``c_0 .. c_N``.
    valid_order : int, optional
        Highest trustworthy coefficient; defaults to ``N``.
    """

    __slots__ = ("coeffs", "valid_order")

    def __init__(self, coeffs, valid_order=None):
        arr = np.asarray(coeffs)
        if arr.dtype != object:
            arr = arr.astype(np.float64)
        arr = np.array(arr, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValueError("a series needs at least one coefficient")
        cap = arr.size - 1
        if valid_order is None:
            valid_order = cap
        valid_order = int(valid_order)
        if not 0 <= valid_order <= cap:
            raise ValueError(f"valid_order {valid_order} outside [0, {cap}]")
        arr[valid_order + 1:] = 0
        if not _all_finite(arr):
            raise SeriesOverflowError("non-finite series coefficient")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "valid_order", valid_order)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    @property
    def capacity(self):
        return self.coeffs.size - 1

    @property
    def extended(self):
        return self.coeffs.dtype == object

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        shown = ", ".join(f"{float(c):.6g}" for c in self.coeffs[:8])
        more = ", ..." if self.coeffs.size > 8 else ""
        return (f"TruncatedSeries([{shown}{more}], "
                f"valid_order={self.valid_order})")

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.valid_order == other.valid_order
                and self.coeffs.size == other.coeffs.size
                and bool(np.all(self.coeffs == other.coeffs)))

    __hash__ = None

    def __add__(self, other):
        return add(self, _coerce(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_coerce(other, self)))

    def __rsub__(self, other):
        return add(_coerce(other, self), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if _is_scalar(other):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            return scale(self, 1 / _as_scalar(other, self.extended))
        return mul(self, reciprocal(other))

    def __call__(self, x):
        return evaluate(self, x)

    def to_float(self):
        """Round an extended series to ``float64`` coefficients."""
        if not self.extended:
            return self
        return TruncatedSeries([float(c) for c in self.coeffs], self.valid_order)

    def to_extended(self):
        if self.extended:
            return self
        return TruncatedSeries(
            np.array([mpmath.mpf(float(c)) for c in self.coeffs], dtype=object),
            self.valid_order)


def _is_scalar(v):
    return isinstance(v, (Number, mpmath.mpf))


def _as_scalar(v, extended):
    if extended:
        return v if isinstance(v, mpmath.mpf) else mpmath.mpf(v)
    return float(v)


def _all_finite(arr):
    if arr.dtype == object:
        return all(mpmath.isfinite(c) for c in arr)
    return bool(np.all(np.isfinite(arr)))


def _coerce(other, like):
    if isinstance(other, TruncatedSeries):
        return other
    if _is_scalar(other):
        return constant(other, like.capacity, extended=like.extended)
    raise TypeError(f"cannot combine series with {type(other).__name__}")


def _zeros(capacity, extended):
    if extended:
        return np.array([mpmath.mpf(0)] * (capacity + 1), dtype=object)
    return np.zeros(capacity + 1)


def _pair(a, b):
    if a.capacity != b.capacity:
        raise ValueError(f"incompatible capacities {a.capacity} and {b.capacity}")
    if a.extended != b.extended:
        a, b = a.to_extended(), b.to_extended()
    return a, b


def constant(value, capacity, extended=False):
    c = _zeros(capacity, extended)
    c[0] = _as_scalar(value, extended)
    return TruncatedSeries(c)


def variable(capacity, extended=False):
    """The series of ``x`` itself."""
    c = _zeros(capacity, extended)
    if capacity >= 1:
        c[1] = _as_scalar(1, extended)
    return TruncatedSeries(c)


def zeros(capacity, extended=False):
    return TruncatedSeries(_zeros(capacity, extended))


def add(a, b):
    a, b = _pair(a, b)
    return TruncatedSeries(a.coeffs + b.coeffs, min(a.valid_order, b.valid_order))


def neg(a):
    return TruncatedSeries(-a.coeffs, a.valid_order)


def scale(a, s):
    return TruncatedSeries(a.coeffs * _as_scalar(s, a.extended), a.valid_order)


def mul(a, b):
    """Cauchy product truncated at the smaller valid order."""
    a, b = _pair(a, b)
    order = min(a.valid_order, b.valid_order)
    c = np.convolve(a.coeffs[:order + 1], b.coeffs[:order + 1])[:order + 1]
    out = _zeros(a.capacity, a.extended)
    out[:order + 1] = c
    if not _all_finite(out):
        raise SeriesOverflowError("series product overflowed")
    return TruncatedSeries(out, order)


def derivative(a):
    if a.valid_order == 0:
        raise DegenerateSeriesError("cannot differentiate a series valid only to order 0")
    out = _zeros(a.capacity, a.extended)
    out[:-1] = a.coeffs[1:] * np.arange(1, a.capacity + 1)
    return TruncatedSeries(out, a.valid_order - 1)


def integrate(a):
    """Antiderivative vanishing at 0; the top coefficient is dropped."""
    out = _zeros(a.capacity, a.extended)
    k = np.arange(1, a.capacity + 1)
    out[1:] = a.coeffs[:-1] / (k if not a.extended else k.astype(object))
    return TruncatedSeries(out, min(a.valid_order + 1, a.capacity))


def eval_at_origin(a):
    return a.coeffs[0]


def evaluate(a, x):
    """Partial sum of the series at ``x`` (scalar or array), Horner scheme."""
    c = a.coeffs[:a.valid_order + 1]
    if a.extended:
        c = c.astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    for ck in c[::-1]:
        acc = acc * x + ck
    return acc if acc.ndim else float(acc)


def reciprocal(a):
    a0 = a.coeffs[0]
    if abs(a0) <= _SINGULAR_TOL:
        raise SingularAtOriginError("reciprocal of a series with zero constant term")
    n = a.valid_order
    c = a.coeffs
    r = _zeros(a.capacity, a.extended)
    r[0] = 1 / a0
    for k in range(1, n + 1):
        r[k] = -np.dot(c[1:k + 1], r[k - 1::-1][:k]) / a0
    return TruncatedSeries(r, n)


def power(a, n):
    """Integer power; negative exponents go through :func:`reciprocal`."""
    n = int(n)
    if n < 0:
        return power(reciprocal(a), -n)
    result = constant(1, a.capacity, extended=a.extended)
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    if a.valid_order < result.valid_order:
        result = TruncatedSeries(result.coeffs, a.valid_order)
    return result


def sqrt(a):
    """Positive-branch square root, ``s**2 = a`` with ``s_0 = +sqrt(a_0)``."""
    a0 = a.coeffs[0]
    if not a0 > 0:
        raise NegativeSqrtError("sqrt needs a positive constant term")
    n = a.valid_order
    s = _zeros(a.capacity, a.extended)
    s[0] = mpmath.sqrt(a0) if a.extended else math.sqrt(a0)
    two_s0 = 2 * s[0]
    for k in range(1, n + 1):
        acc = np.dot(s[1:k], s[k - 1:0:-1]) if k > 1 else 0
        s[k] = (a.coeffs[k] - acc) / two_s0
    return TruncatedSeries(s, n)


def exp(a):
    # k e_k = sum_j j a_j e_{k-j}
    n = a.valid_order
    e = _zeros(a.capacity, a.extended)
    e[0] = mpmath.exp(a.coeffs[0]) if a.extended else math.exp(a.coeffs[0])
    ja = a.coeffs * np.arange(a.capacity + 1)
    for k in range(1, n + 1):
        e[k] = np.dot(ja[1:k + 1], e[k - 1::-1][:k]) / k
    return TruncatedSeries(e, n)


def sincos(a):
    n = a.valid_order
    s = _zeros(a.capacity, a.extended)
    c = _zeros(a.capacity, a.extended)
    a0 = a.coeffs[0]
    if a.extended:
        s[0], c[0] = mpmath.sin(a0), mpmath.cos(a0)
    else:
        s[0], c[0] = math.sin(a0), math.cos(a0)
    ja = a.coeffs * np.arange(a.capacity + 1)
    for k in range(1, n + 1):
        s[k] = np.dot(ja[1:k + 1], c[k - 1::-1][:k]) / k
        c[k] = -np.dot(ja[1:k + 1], s[k - 1::-1][:k]) / k
    return TruncatedSeries(s, n), TruncatedSeries(c, n)


def sin(a):
    return sincos(a)[0]


def cos(a):
    return sincos(a)[1]


def split_double_double(a):
    """Split an extended series into ``(hi, lo)`` float64 arrays."""
    if not a.extended:
        hi = np.array(a.coeffs, dtype=np.float64)
        return hi, np.zeros_like(hi)
    hi = np.array([float(c) for c in a.coeffs])
    lo = np.array([float(c - mpmath.mpf(h)) for c, h in zip(a.coeffs, hi)])
    return hi, lo


def parity_defect(a):
    """Return ``(even_part_norm, odd_part_norm)`` of the valid coefficients."""
    c = np.abs(np.asarray(a.coeffs[:a.valid_order + 1], dtype=np.float64))
    return float(np.max(c[0::2], initial=0.0)), float(np.max(c[1::2], initial=0.0))

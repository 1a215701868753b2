# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Statistical kernels shared by every procedure: CUSUM vectors, the
# truncation functions and the candidate time grids. Everything in here is
# a pure function of its arguments.

from __future__ import division
import math
import numbers

import numpy as np
from scipy.special import erfcx

from cpminimax.exceptions import DomainError

import logging
# Re-adding the handler on reload causes duplicate log messages.
logger = logging.getLogger("cpminimax")
logger.setLevel(logging.WARNING)
log_handler = logging.StreamHandler()
log_handler.setLevel(logging.DEBUG)
log_handler.setFormatter(logging.Formatter("%(message)s"))
if len(logger.handlers) == 0:  # Avoid duplicate messages on reload
    logger.addHandler(log_handler)


SQRT2 = math.sqrt(2.0)
SQRT_HALF_PI = math.sqrt(math.pi / 2.0)

DYADIC = 'dyadic'
GEOMETRIC = 'geometric'


def loglog8n(n):
    """ log(log(8n)), natural logs. Positive for every n >= 1. """
    check_int(n, 1, None, "n")
    return math.log(math.log(8.0 * n))


def check_int(value, low, high, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError("{0} must be an integer, got {1!r}".format(
            name, value))
    if low is not None and value < low:
        raise DomainError("{0} must be at least {1}, got {2}".format(
            name, low, value))
    if high is not None and value > high:
        raise DomainError("{0} must be at most {1}, got {2}".format(
            name, high, value))
    return int(value)


class ObservationMatrix(object):
    """
    A p x n matrix of observations. Column t-1 holds the observation X_t.

    The values are copied into a read-only float64 array, and the column
    prefix sums every CUSUM statistic is read from are built once, here.
    The prefix sums are taken after subtracting the first column from every
    column; CUSUM contrasts don't see a common mean, and this way constant
    data produce exact zeros.
    """

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise DomainError(
                "Observations must be a p x n matrix, got shape {0}".format(
                    arr.shape))
        p, n = arr.shape
        if p < 1 or n < 2:
            raise DomainError(
                "Need p >= 1 and n >= 2, got p={0}, n={1}".format(p, n))
        if not np.all(np.isfinite(arr)):
            raise DomainError("Observations contain non-finite values")
        arr.setflags(write=False)
        self.values = arr

        prefix = np.zeros((p, n + 1))
        np.cumsum(arr - arr[:, :1], axis=1, out=prefix[:, 1:])
        prefix.setflags(write=False)
        self.prefix_sums = prefix

    @classmethod
    def wrap(cls, thing):
        """ Return thing if it's already an ObservationMatrix, else build one.
        """
        if isinstance(thing, cls):
            return thing
        return cls(thing)

    @property
    def p(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    @property
    def is_degenerate(self):
        """ True when every column is identical -- nothing ever changes. """
        return bool(np.all(self.values == self.values[:, :1]))

    def reversed(self):
        return ObservationMatrix(self.values[:, ::-1])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __str__(self):
        return "ObservationMatrix: p={0}, n={1}".format(self.p, self.n)

    def __repr__(self):
        return str(self)


class CusumVector(object):
    """ The CUSUM vector Y_t at time index t. """

    def __init__(self, t, y):
        self.t = t
        self.y = y

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.y
        return self.y.astype(dtype)

    def __len__(self):
        return len(self.y)

    def __repr__(self):
        return "CusumVector(t={0}, p={1})".format(self.t, len(self.y))


class TimeGrid(object):
    """
    A strictly increasing set of candidate time indexes.

    kind is 'dyadic' or 'geometric'; delta is the geometric ratio step
    (None for dyadic grids).
    """

    def __init__(self, kind, points, delta=None):
        self.kind = kind
        self.delta = delta
        self.points = tuple(int(t) for t in points)

    def as_array(self):
        return np.array(self.points, dtype=np.int64)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, TimeGrid) and
            self.kind == other.kind and
            self.points == other.points)

    def __repr__(self):
        return "TimeGrid({0}, {1})".format(self.kind, list(self.points))


class TruncationLevel(object):
    """ A threshold a together with nu_a = E(Z^2 | |Z| >= a). """

    def __init__(self, a):
        self.nu = nu_a(a)
        self.a = float(a)

    def __repr__(self):
        return "TruncationLevel(a={0:.6g}, nu={1:.6g})".format(
            self.a, self.nu)


def time_grid(n, kind=DYADIC, delta=None):
    """
    The candidate locations a test scans.

    dyadic:    {1, 2, 4, ..., 2^floor(log2(n/2))}
    geometric: {floor((1+delta)^j) : (1+delta)^j <= n/2}, unioned with its
               reflection {n - t}. Used by the asymptotic tests, which need
               the normalized statistic on both ends of the series.
    """
    n = check_int(n, 2, None, "n")
    if kind == DYADIC:
        # floor(log2(n/2)) without floating point
        kmax = n.bit_length() - 2
        return TimeGrid(DYADIC, [2 ** k for k in range(kmax + 1)])
    if kind == GEOMETRIC:
        if delta is None or not delta > 0 or not math.isfinite(delta):
            raise DomainError(
                "Geometric grids need delta > 0, got {0!r}".format(delta))
        base = 1.0 + delta
        log_base = math.log(base)
        jmax = int(math.floor(math.log(n / 2.0) / log_base))
        first = set()
        j = 0
        while j <= jmax:
            t = int(math.floor(base ** j))
            first.add(t)
            # Skip to the first exponent whose floor passes t.
            nxt = max(j + 1, int(math.ceil(math.log(t + 1) / log_base)))
            while nxt > j + 1 and math.floor(base ** (nxt - 1)) > t:
                nxt -= 1
            j = nxt
        first = set(t for t in first if 1 <= t <= n // 2)
        points = first | set(n - t for t in first)
        return TimeGrid(GEOMETRIC, sorted(points), delta=float(delta))
    raise DomainError("Unknown grid kind: {0!r}".format(kind))


def cusum(X, t):
    """
    Y_t = ((X_1 + ... + X_t) - (X_{n-t+1} + ... + X_n)) / sqrt(2t)

    for 1 <= t <= floor(n/2).
    """
    X = ObservationMatrix.wrap(X)
    t = check_int(t, 1, X.n // 2, "t")
    return CusumVector(t, cusum_path(X, [t])[0])


def cusum_path(X, grid):
    """
    The CUSUM vectors for every t in grid, stacked as a len(grid) x p array.

    Reads the shared prefix sums, so the whole grid costs one O(p) step per
    point after the O(pn) setup.
    """
    X = ObservationMatrix.wrap(X)
    ts = np.asarray(list(grid), dtype=np.int64)
    if len(ts) and (ts.min() < 1 or ts.max() > X.n // 2):
        raise DomainError("CUSUM times must lie in [1, {0}]".format(X.n // 2))
    S = X.prefix_sums
    head = S[:, ts]
    tail = S[:, [X.n]] - S[:, X.n - ts]
    return ((head - tail) / np.sqrt(2.0 * ts)).T


def normalized_cusum(X, t):
    """
    sqrt(t(n-t)/n) * (mean of the first t columns - mean of the rest),
    for 1 <= t <= n-1.
    """
    X = ObservationMatrix.wrap(X)
    t = check_int(t, 1, X.n - 1, "t")
    return normalized_cusum_path(X, [t])[0]


def normalized_cusum_path(X, grid):
    X = ObservationMatrix.wrap(X)
    n = X.n
    ts = np.asarray(list(grid), dtype=np.int64)
    if len(ts) and (ts.min() < 1 or ts.max() > n - 1):
        raise DomainError(
            "Normalized CUSUM times must lie in [1, {0}]".format(n - 1))
    S = X.prefix_sums
    before = S[:, ts] / ts
    after = (S[:, [n]] - S[:, ts]) / (n - ts)
    scale = np.sqrt(ts * (n - ts) / n)
    return (scale * (before - after)).T


def nu_a(a):
    """
    nu_a = E(Z^2 | |Z| >= a) = 1 + a * phi(a) / Phi_bar(a).

    The Mills ratio Phi_bar/phi is read off the scaled complementary error
    function, which neither underflows nor loses relative accuracy in the
    tail.
    """
    try:
        a = float(a)
    except (TypeError, ValueError):
        raise DomainError("a must be a real number, got {0!r}".format(a))
    if not math.isfinite(a) or a < 0:
        raise DomainError("a must be finite and nonnegative, got {0}".format(a))
    if a == 0:
        return 1.0
    mills = SQRT_HALF_PI * float(erfcx(a / SQRT2))
    return 1.0 + a / mills


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def f_a(x, level):
    """ (x^2 - nu_a) where |x| >= a, zero elsewhere. Vectorized. """
    arr = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(arr) >= level.a, arr * arr - level.nu, 0.0)
    return _scalar_or_array(x, out)


def window_halfwidth(cprime, p, n):
    """ w = C' * sqrt(loglog(8n) / p), the tolerance g_a absorbs. """
    if not cprime >= 0:
        raise DomainError("C' must be nonnegative, got {0!r}".format(cprime))
    check_int(p, 1, None, "p")
    return cprime * math.sqrt(loglog8n(n) / p)


def g_a(x, level, cprime, p, n):
    """
    inf { f_a(y) : |y - x| <= w }, w = C' sqrt(loglog(8n)/p).

    Over the window, |y| sweeps [max(|x| - w, 0), |x| + w]. The infimum is
    either 0 (some |y| < a) or m^2 - nu_a with m the smallest |y| >= a in
    the window, whichever is smaller.
    """
    w = window_halfwidth(cprime, p, n)
    arr = np.asarray(x, dtype=np.float64)
    absx = np.abs(arr)
    lo = np.maximum(absx - w, 0.0)
    hi = absx + w
    a = level.a
    below = np.where(lo < a, 0.0, np.inf)
    m = np.maximum(lo, a)
    above = np.where(hi >= a, m * m - level.nu, np.inf)
    return _scalar_or_array(x, np.minimum(below, above))


def h_a(x, level):
    """
    0 on |x| <= 9a/10, a^2 - nu_a on (9a/10, 11a/10], and
    (|x| - a/10)^2 - nu_a beyond. Matches inf{f_a(y) : |x - y| <= a/10}.
    """
    a = level.a
    if a <= 0:
        raise DomainError("h_a needs a > 0")
    arr = np.asarray(x, dtype=np.float64)
    absx = np.abs(arr)
    outer = (absx - a / 10.0) ** 2 - level.nu
    out = np.where(
        absx <= 9.0 * a / 10.0, 0.0,
        np.where(absx <= 11.0 * a / 10.0, a * a - level.nu, outer))
    return _scalar_or_array(x, out)


def threshold_stat(y, level):
    """
    A = sum_j (y_j^2 - nu_a) 1{|y_j| >= a}; with a = 0 this is ||y||^2 - p.

    Summed with math.fsum, so the result is correctly rounded whatever p is.
    """
    terms = np.atleast_1d(f_a(np.asarray(y, dtype=np.float64), level))
    return math.fsum(terms)


def threshold_stats(Y, level):
    """ threshold_stat applied to each row of a stack of CUSUM vectors. """
    return [threshold_stat(row, level) for row in np.atleast_2d(Y)]


def median_correct(y, gamma):
    """
    (y - Median(y)) / sqrt(1 - gamma). The median of an even-length vector
    is the average of the two central order statistics.
    """
    check_gamma(gamma)
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1 or len(arr) < 1:
        raise DomainError("median_correct needs a nonempty vector")
    return (arr - np.median(arr)) / math.sqrt(1.0 - gamma)


def check_gamma(gamma):
    if not (0 <= gamma < 1):
        raise DomainError("gamma must lie in [0, 1), got {0!r}".format(gamma))
    return float(gamma)

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Closed-form detection rates, threshold recipes and the chi-squared tail
# bounds the procedures are compared against. All logarithms are natural.
#
# Tail bounds return levels (the value exceeded with probability at most
# e^-x), not probabilities, since every caller compares a statistic to a
# level.

from __future__ import division
import math

import numpy as np

from cpminimax import core
from cpminimax.core import loglog8n, check_int  # noqa
from cpminimax.exceptions import DomainError

DENSE = 'dense'
SPARSE = 'sparse'

# The truncated chi-squared tail constant.
TRUNCATED_TAIL_CONSTANT = 9.0


class ProblemSize(object):
    """ Dimension p, length n and (optionally) sparsity s of a problem. """

    def __init__(self, p, n, s=None):
        self.p = check_int(p, 1, None, "p")
        self.n = check_int(n, 2, None, "n")
        self.s = None
        if s is not None:
            self.s = check_int(s, 1, self.p, "s")

    @property
    def L(self):
        return loglog8n(self.n)

    @property
    def regime(self):
        return regime(self)

    def __repr__(self):
        return "ProblemSize(p={0}, n={1}, s={2})".format(
            self.p, self.n, self.s)


def _require_s(sz):
    if sz.s is None:
        raise DomainError("This needs a sparsity level s")
    return sz.s


def regime(sz):
    """ 'dense' iff s >= sqrt(p loglog(8n)); a tie counts as dense. """
    s = _require_s(sz)
    if s >= math.sqrt(sz.p * sz.L):
        return DENSE
    return SPARSE


def sparse_rate(sz):
    """ s log(e p L / s^2), the sparse-branch rate before the max with L. """
    s = _require_s(sz)
    return s * math.log(math.e * sz.p * sz.L / (s * s))


def rate_rstar(sz):
    """
    The minimax rate r*(p, n, s):

        sqrt(p L)                       if s >= sqrt(p L)
        max(s log(e p L / s^2), L)      otherwise

    with L = loglog(8n).
    """
    L = sz.L
    if regime(sz) == DENSE:
        return math.sqrt(sz.p * L)
    return max(sparse_rate(sz), L)


def threshold_a(sz):
    """
    The truncation level of the fixed-sparsity test:
    a^2 = 4 log(e p L / s^2) in the sparse regime, a = 0 in the dense one.
    """
    if regime(sz) == DENSE:
        return core.TruncationLevel(0.0)
    s = _require_s(sz)
    a2 = 4.0 * math.log(math.e * sz.p * sz.L / (s * s))
    return core.TruncationLevel(math.sqrt(a2))


def sparsity_grid(p, n):
    """
    S = {1, 2, 4, ..., 2^(ceil(log2 sqrt(pL)) - 1)} u {p}, ascending.

    Powers above p can't be sparsity levels and are left out.
    """
    p = check_int(p, 1, None, "p")
    root = math.sqrt(p * loglog8n(n))
    top = int(math.ceil(math.log2(root))) - 1
    levels = set(2 ** k for k in range(top + 1) if 2 ** k <= p)
    levels.add(p)
    return sorted(levels)


def loglog_n(n):
    """ log(log(n)), as the asymptotic results use it. Needs n > e. """
    n = check_int(n, 2, None, "n")
    inner = math.log(n)
    if inner <= 1:
        raise DomainError(
            "loglog(n) is not positive for n={0}".format(n))
    return math.log(inner)


def asymptotic_boundary(kind, sz, xi):
    """
    The asymptotic detection boundaries, scaled by xi:

        dense:  rho = xi * (p loglog n)^(1/4)
        sparse: rho = xi * sqrt(s log(p loglog n / s^2))

    Returns rho, not rho^2.
    """
    if not xi > 0:
        raise DomainError("xi must be positive, got {0!r}".format(xi))
    ll = loglog_n(sz.n)
    if kind == DENSE:
        return xi * (sz.p * ll) ** 0.25
    if kind == SPARSE:
        s = _require_s(sz)
        arg = sz.p * ll / (s * s)
        if arg <= 1:
            raise DomainError(
                "p loglog(n) / s^2 = {0:.4g} must exceed 1".format(arg))
        return xi * math.sqrt(s * math.log(arg))
    raise DomainError("Unknown regime: {0!r}".format(kind))


def temporal_rate(p, n, B):
    """ B p + (1 + B) max(sqrt(p L), L). """
    p = check_int(p, 1, None, "p")
    if not B >= 0:
        raise DomainError("B must be nonnegative, got {0!r}".format(B))
    L = loglog8n(n)
    return B * p + (1 + B) * max(math.sqrt(p * L), L)


def _check_x(x):
    if not x > 0 or not math.isfinite(x):
        raise DomainError("x must be positive and finite, got {0!r}".format(x))


def _sorted_weights(weights):
    lam = np.asarray(weights, dtype=np.float64)
    if lam.ndim != 1 or len(lam) == 0:
        raise DomainError("weights must be a nonempty vector")
    if np.any(lam < 0):
        raise DomainError("weights must be nonnegative")
    if np.any(np.diff(lam) > 0):
        raise DomainError("weights must be sorted in descending order")
    return lam


def tail_chisq_upper(weights, x):
    """
    For Z ~ N(0, I), P(sum lam_j Z_j^2 >= level) <= e^-x at
    level = sum lam + 2 sqrt(x sum lam^2) + 2 lam_1 x.
    """
    _check_x(x)
    lam = _sorted_weights(weights)
    return (
        math.fsum(lam) + 2.0 * math.sqrt(x * math.fsum(lam * lam)) +
        2.0 * lam[0] * x)


def tail_chisq_lower(weights, x):
    """ P(sum lam_j Z_j^2 <= sum lam - 2 sqrt(x sum lam^2)) <= e^-x. """
    _check_x(x)
    lam = _sorted_weights(weights)
    return math.fsum(lam) - 2.0 * math.sqrt(x * math.fsum(lam * lam))


def tail_noncentral(p, lam, x):
    """
    Upper and lower e^-x levels of a noncentral chi-squared with p degrees
    of freedom and noncentrality lam:

        upper = p + lam + 2 sqrt(x (p + 2 lam)) + 2x
        lower = p + lam - 2 sqrt(x (p + 2 lam))

    The lower level may be negative; it's returned as is.
    """
    p = check_int(p, 1, None, "p")
    if not lam >= 0:
        raise DomainError("lam must be nonnegative, got {0!r}".format(lam))
    _check_x(x)
    spread = 2.0 * math.sqrt(x * (p + 2.0 * lam))
    return (p + lam + spread + 2.0 * x, p + lam - spread)


def tail_truncated(p, a, x):
    """
    Null level of sum_j f_a(Z_j), Z ~ N(0, I_p), exceeded with probability
    at most e^-x: 9 (sqrt(p e^(-a^2/2) x) + x).
    """
    p = check_int(p, 1, None, "p")
    if not a >= 0:
        raise DomainError("a must be nonnegative, got {0!r}".format(a))
    _check_x(x)
    return TRUNCATED_TAIL_CONSTANT * (
        math.sqrt(p * math.exp(-a * a / 2.0) * x) + x)


def sparse_asym_null_bound(n, delta):
    """
    Union bound on the null rejection probability of the asymptotic sparse
    test: 2 (floor(log_{1+delta}(n/2)) + 1) (log n)^-2.
    """
    n = check_int(n, 2, None, "n")
    if not delta > 0:
        raise DomainError("delta must be positive, got {0!r}".format(delta))
    count = math.floor(math.log(n / 2.0) / math.log(1.0 + delta)) + 1
    return 2.0 * count / math.log(n) ** 2

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Covariance functionals estimated so that one changepoint can't spoil them:
# the series is cut into three consecutive blocks, and each functional is
# the median of its three block values. A change falls inside at most one
# block, so at least two blocks are clean.

from __future__ import division
import math

import numpy as np
from scipy import linalg

from cpminimax import core
from cpminimax.exceptions import DomainError

import logging
logger = logging.getLogger("cpminimax.spatial")

BLOCK_COUNT = 3
MIN_BLOCK = 2
# Relative slack allowed on the functional ordering checks.
ORDER_TOLERANCE = 1e-9


class BlockPartition(object):
    """ Three contiguous index ranges covering range(n). """

    def __init__(self, n, bounds):
        self.n = n
        self.bounds = tuple(bounds)

    @property
    def blocks(self):
        return [range(lo, hi) for lo, hi in self.bounds]

    @property
    def sizes(self):
        return [hi - lo for lo, hi in self.bounds]

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.bounds)

    def __repr__(self):
        return "BlockPartition(n={0}, sizes={1})".format(self.n, self.sizes)


def block_partition(n):
    """ Sizes floor(n/3) or ceil(n/3), the earlier blocks taking the extra
    columns. """
    n = core.check_int(n, BLOCK_COUNT * MIN_BLOCK, None, "n")
    base, extra = divmod(n, BLOCK_COUNT)
    sizes = [base + (1 if i < extra else 0) for i in range(BLOCK_COUNT)]
    bounds = []
    start = 0
    for size in sizes:
        bounds.append((start, start + size))
        start += size
    return BlockPartition(n, bounds)


class SpatialFunctionals(object):
    """
    Trace, Frobenius norm and operator norm of a p x p covariance matrix.

    For a positive semidefinite matrix, operator <= frobenius <=
    sqrt(p) * operator and trace <= p * operator.
    """

    def __init__(self, trace, frobenius, operator):
        self.trace = float(trace)
        self.frobenius = float(frobenius)
        self.operator = float(operator)

    @classmethod
    def from_covariance(cls, sigma):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
        sym = (sigma + sigma.T) / 2.0
        eigs = linalg.eigvalsh(sym)
        return cls(
            np.trace(sym),
            np.linalg.norm(sym, 'fro'),
            np.max(np.abs(eigs)))

    @classmethod
    def equicorrelated(cls, p, gamma):
        """ Closed forms for (1-gamma) I + gamma 11^T. """
        p = core.check_int(p, 1, None, "p")
        gamma = core.check_gamma(gamma)
        frob2 = (1.0 - gamma * gamma) * p + p * p * gamma * gamma
        return cls(p, math.sqrt(frob2), 1.0 + (p - 1) * gamma)

    def is_consistent(self, p):
        """ True when the ordering of the three functionals is possible. """
        tol = ORDER_TOLERANCE * max(1.0, self.frobenius, self.operator)
        if self.frobenius < 0 or self.operator < 0:
            return False
        if self.operator > self.frobenius + tol:
            return False
        if self.frobenius > math.sqrt(p) * self.operator + tol:
            return False
        if self.trace > p * self.operator + tol * p:
            return False
        return True

    def as_dict(self):
        return {
            'trace': self.trace,
            'frobenius': self.frobenius,
            'operator': self.operator,
        }

    def __repr__(self):
        return "SpatialFunctionals(trace={0:.6g}, frobenius={1:.6g}, " \
            "operator={2:.6g})".format(
                self.trace, self.frobenius, self.operator)


def block_covariances(X):
    """
    The sample covariance (denominator |D| - 1) of each of the three blocks.
    Needs n >= 6 so that every block has two columns.
    """
    X = core.ObservationMatrix.wrap(X)
    if X.n < BLOCK_COUNT * MIN_BLOCK:
        raise DomainError(
            "Block covariances need n >= {0}, got n={1}".format(
                BLOCK_COUNT * MIN_BLOCK, X.n))
    part = block_partition(X.n)
    covs = []
    for lo, hi in part.bounds:
        cov = np.atleast_2d(np.cov(X.values[:, lo:hi], ddof=1))
        covs.append((cov + cov.T) / 2.0)
    return covs


def _median3(values):
    return float(np.median(np.asarray(values, dtype=np.float64)))


def robust_functionals(X):
    """
    Per-functional medians of the three block covariances. The three
    medians may come from different blocks.
    """
    per_block = [
        SpatialFunctionals.from_covariance(c) for c in block_covariances(X)]
    logger.debug("Block traces: {0}".format([f.trace for f in per_block]))
    return SpatialFunctionals(
        _median3([f.trace for f in per_block]),
        _median3([f.frobenius for f in per_block]),
        _median3([f.operator for f in per_block]))


def gamma_from_total(total, p):
    """
    Inverts 1^T Sigma(gamma) 1 = p + (p^2 - p) gamma, clamped into [0, 1).
    """
    p = core.check_int(p, 2, None, "p")
    raw = (total - p) / (p * p - p)
    upper = math.nextafter(1.0, 0.0)
    clamped = min(max(raw, 0.0), upper)
    if clamped != raw:
        logger.warning(
            "Estimated gamma {0:.4g} clamped to {1:.4g}".format(raw, clamped))
    return clamped


def gamma_estimate(X):
    """
    Estimate the equicorrelation parameter from the median over the blocks
    of the grand sum 1^T Sigma_D 1. The trace of Sigma(gamma) is p whatever
    gamma is, so only the off-diagonal mass identifies it.
    """
    X = core.ObservationMatrix.wrap(X)
    if X.p < 2:
        raise DomainError("gamma_estimate needs p >= 2, got p={0}".format(X.p))
    totals = [float(np.sum(c)) for c in block_covariances(X)]
    return gamma_from_total(_median3(totals), X.p)

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# The test procedures. Each one maps an ObservationMatrix and its tuning
# values to a TestOutcome: the statistic at every scanned time, the maximum,
# the threshold and the decision.
#
# Every procedure accepts threshold= to override its formula threshold (a
# user-supplied or calibrated value); threshold_mode records which it was.
# Thresholds from the formulas are C times a scale; TestOutcome.scale keeps
# that scale so calibration can work in units of C.

from __future__ import division
import math

import numpy as np

from cpminimax import core, rates, spatial
from cpminimax.spatial import SpatialFunctionals
from cpminimax.exceptions import DomainError

import logging
logger = logging.getLogger("cpminimax.procedures")

FORMULA = 'formula'
SUPPLIED = 'supplied'
CALIBRATED = 'calibrated'
THRESHOLD_MODES = (FORMULA, SUPPLIED, CALIBRATED)

DEFAULT_DELTA = 0.1
DEFAULT_CPRIME = 2.0
DEFAULT_N0_CONSTANT = 1.0


class TestOutcome(object):
    """
    The result of running one procedure on one data set.

    per_t is a list of (t, statistic) pairs in grid order. reject is
    max_stat > threshold, except for degenerate input (every column equal),
    which never rejects, and for composite procedures, which reject when any
    sub-outcome does.
    """

    # Keep pytest from collecting this as a test class.
    __test__ = False

    def __init__(self, procedure, grid, per_t, threshold, scale,
                 threshold_mode=FORMULA, tuning=None, degenerate=False,
                 sub_outcomes=None, reject=None):
        if threshold_mode not in THRESHOLD_MODES:
            raise DomainError("Unknown threshold mode: {0!r}".format(
                threshold_mode))
        self.procedure = procedure
        self.grid = grid
        self.per_t = [(int(t), float(stat)) for t, stat in per_t]
        self.max_stat = max(stat for _, stat in self.per_t)
        self.threshold = float(threshold)
        self.scale = float(scale)
        self.threshold_mode = threshold_mode
        self.tuning = dict(tuning or {})
        self.degenerate = bool(degenerate)
        self.sub_outcomes = list(sub_outcomes or [])
        if reject is None:
            reject = self.max_stat > self.threshold
        self.reject = bool(reject) and not self.degenerate

    @property
    def normalized_stat(self):
        """ max_stat in units of the threshold scale. A zero scale only
        arises from constant data. """
        if self.scale > 0:
            return self.max_stat / self.scale
        return math.inf if self.max_stat > 0 else -math.inf

    def as_dict(self):
        return {
            'procedure': self.procedure,
            'grid_kind': self.grid.kind,
            'grid': list(self.grid.points),
            'per_t': [[t, stat] for t, stat in self.per_t],
            'max_stat': self.max_stat,
            'threshold': self.threshold,
            'threshold_mode': self.threshold_mode,
            'scale': self.scale,
            'tuning': self.tuning,
            'degenerate': self.degenerate,
            'reject': self.reject,
            'sub_outcomes': [o.as_dict() for o in self.sub_outcomes],
        }

    def __str__(self):
        return "TestOutcome({0}): max_stat={1:.6g}, threshold={2:.6g}, " \
            "reject={3}".format(
                self.procedure, self.max_stat, self.threshold, self.reject)

    def __repr__(self):
        return str(self)


def _check_positive(value, name):
    if not value > 0 or not math.isfinite(value):
        raise DomainError("{0} must be positive and finite, got {1!r}".format(
            name, value))
    return float(value)


def _check_constant(C, threshold_mode):
    """ C > 0, except that a calibrated constant may be any finite value. """
    if threshold_mode == CALIBRATED:
        if not math.isfinite(C):
            raise DomainError("C must be finite, got {0!r}".format(C))
        return float(C)
    return _check_positive(C, "C")


def _resolve_threshold(C, scale, threshold, threshold_mode):
    if threshold is None:
        return C * scale, threshold_mode or FORMULA
    if not math.isfinite(threshold):
        raise DomainError("threshold must be finite, got {0!r}".format(
            threshold))
    return float(threshold), threshold_mode or SUPPLIED


def _fsum_rows(rows):
    return [math.fsum(row) for row in np.atleast_2d(rows)]


def _outcome(name, X, grid, stats, C, scale, threshold, threshold_mode,
             tuning):
    thr, mode = _resolve_threshold(C, scale, threshold, threshold_mode)
    tuning['C'] = C
    return TestOutcome(
        name, grid, zip(grid, stats), thr, scale, threshold_mode=mode,
        tuning=tuning, degenerate=X.is_degenerate)


def test_fixed(X, s, C=1.0, threshold=None, threshold_mode=None):
    """
    The fixed-sparsity test: max over the dyadic grid of A_{t,a} against
    r = C r*(p, n, s), with a from threshold_a.
    """
    X = core.ObservationMatrix.wrap(X)
    C = _check_constant(C, threshold_mode)
    sz = rates.ProblemSize(X.p, X.n, s)
    level = rates.threshold_a(sz)
    grid = core.time_grid(X.n, core.DYADIC)
    stats = core.threshold_stats(core.cusum_path(X, grid), level)
    scale = rates.rate_rstar(sz)
    tuning = {'s': sz.s, 'a': level.a, 'nu': level.nu, 'regime': sz.regime}
    return _outcome(
        'fixed', X, grid, stats, C, scale, threshold, threshold_mode, tuning)


def test_adaptive(X, C=1.0, threshold=None, threshold_mode=None):
    """
    Runs test_fixed at every s in sparsity_grid(p, n) and rejects when any
    of them does. The reported statistic at t is max_s A_{t,a_s} / r*(s),
    compared against C; a supplied threshold takes the place of C.
    """
    X = core.ObservationMatrix.wrap(X)
    if threshold is not None:
        C, _ = _resolve_threshold(C, 1.0, threshold, threshold_mode)
        threshold_mode = threshold_mode or SUPPLIED
    else:
        C = _check_constant(C, threshold_mode)
    levels = rates.sparsity_grid(X.p, X.n)
    subs = []
    for s in levels:
        sub_threshold = C * rates.rate_rstar(rates.ProblemSize(X.p, X.n, s))
        subs.append(test_fixed(
            X, s, threshold=sub_threshold,
            threshold_mode=threshold_mode or FORMULA))
    grid = subs[0].grid
    stats = []
    for i, t in enumerate(grid):
        stats.append(max(sub.per_t[i][1] / sub.scale for sub in subs))
    return TestOutcome(
        'adaptive', grid, zip(grid, stats), C, 1.0,
        threshold_mode=threshold_mode or FORMULA,
        tuning={'C': C, 'sparsity_grid': levels},
        degenerate=X.is_degenerate, sub_outcomes=subs,
        reject=any(sub.reject for sub in subs))


def _normalized_sq_norms(X, grid):
    Y = core.normalized_cusum_path(X, grid)
    return _fsum_rows(Y * Y)


def test_dense_asym(X, delta1=DEFAULT_DELTA, delta2=DEFAULT_DELTA, C=1.0,
                    threshold=None, threshold_mode=None):
    """
    max over the geometric grid of ||Y~_t||^2 - p against
    2 sqrt((1 + delta1) p loglog(n)).
    """
    X = core.ObservationMatrix.wrap(X)
    delta1 = _check_positive(delta1, "delta1")
    C = _check_constant(C, threshold_mode)
    ll = rates.loglog_n(X.n)
    grid = core.time_grid(X.n, core.GEOMETRIC, delta2)
    stats = [v - X.p for v in _normalized_sq_norms(X, grid)]
    scale = 2.0 * math.sqrt((1.0 + delta1) * X.p * ll)
    tuning = {'delta1': delta1, 'delta2': grid.delta, 'loglog_n': ll}
    return _outcome(
        'dense_asym', X, grid, stats, C, scale, threshold, threshold_mode,
        tuning)


def sparse_asym_level(p, n, s):
    """ a = sqrt(2 log(p loglog(n) / s^2)). """
    ll = rates.loglog_n(n)
    arg = p * ll / (s * s)
    if arg <= 1:
        raise DomainError(
            "p loglog(n) / s^2 = {0:.4g} must exceed 1".format(arg))
    return core.TruncationLevel(math.sqrt(2.0 * math.log(arg)))


def test_sparse_asym(X, s, delta2=DEFAULT_DELTA, C=1.0, threshold=None,
                     threshold_mode=None):
    """
    max over the geometric grid of sum_j f_a(Y~_t(j)) against
    9 (sqrt(p e^(-a^2/2) 2 loglog(n)) + 2 loglog(n)).
    """
    X = core.ObservationMatrix.wrap(X)
    s = core.check_int(s, 1, X.p - 1, "s")
    C = _check_constant(C, threshold_mode)
    level = sparse_asym_level(X.p, X.n, s)
    ll = rates.loglog_n(X.n)
    grid = core.time_grid(X.n, core.GEOMETRIC, delta2)
    Y = core.normalized_cusum_path(X, grid)
    stats = core.threshold_stats(Y, level)
    scale = rates.tail_truncated(X.p, level.a, 2.0 * ll)
    tuning = {'s': s, 'a': level.a, 'nu': level.nu, 'delta2': grid.delta}
    return _outcome(
        'sparse_asym', X, grid, stats, C, scale, threshold, threshold_mode,
        tuning)


def spatial_scale(fn, n):
    """ max(||Sigma||_F sqrt(L), ||Sigma||_op L). """
    L = core.loglog8n(n)
    return max(fn.frobenius * math.sqrt(L), fn.operator * L)


def _spatial(name, X, fn, C, threshold, threshold_mode):
    grid = core.time_grid(X.n, core.DYADIC)
    Y = core.cusum_path(X, grid)
    stats = [v - fn.trace for v in _fsum_rows(Y * Y)]
    tuning = fn.as_dict()
    return _outcome(
        name, X, grid, stats, C, spatial_scale(fn, X.n), threshold,
        threshold_mode, tuning)


def test_spatial_known(X, fn, C=1.0, threshold=None, threshold_mode=None):
    """
    For a known spatial covariance: max over the dyadic grid of
    ||Y_t||^2 - Tr(Sigma) against C max(||Sigma||_F sqrt(L), ||Sigma||_op L).
    """
    X = core.ObservationMatrix.wrap(X)
    C = _check_constant(C, threshold_mode)
    if not fn.is_consistent(X.p):
        raise DomainError("Inconsistent covariance functionals: {0!r}".format(
            fn))
    return _spatial('spatial_known', X, fn, C, threshold, threshold_mode)


def test_spatial_estimated(X, C=1.0, threshold=None, threshold_mode=None):
    """ test_spatial_known with the block-median functional estimates. """
    X = core.ObservationMatrix.wrap(X)
    C = _check_constant(C, threshold_mode)
    fn = spatial.robust_functionals(X)
    return _spatial('spatial_estimated', X, fn, C, threshold, threshold_mode)


def equicorr_level(p, n, s):
    """ a^2 = 4 log(e p L / s^2), floored at zero. """
    L = core.loglog8n(n)
    a2 = 4.0 * math.log(math.e * p * L / (s * s))
    return core.TruncationLevel(math.sqrt(max(a2, 0.0)))


def equicorr_scale(p, n, s, gamma):
    """ (1 - gamma) max(s log(e p L / s^2), L). """
    L = core.loglog8n(n)
    return (1.0 - gamma) * max(s * math.log(math.e * p * L / (s * s)), L)


def test_equicorr(X, gamma, s, C=1.0, cprime=DEFAULT_CPRIME,
                  n0_constant=DEFAULT_N0_CONSTANT, threshold=None,
                  threshold_mode=None):
    """
    For equicorrelated noise: max over the dyadic grid of
    sum_j g_a(Y~_t(j)), where Y~_t is the median-corrected CUSUM vector,
    against C (1 - gamma) max(s log(e p L / s^2), L).

    The guarantee needs s <= (p L)^(1/5) and n large; neither is enforced,
    both are logged when violated.
    """
    X = core.ObservationMatrix.wrap(X)
    gamma = core.check_gamma(gamma)
    s = core.check_int(s, 1, X.p, "s")
    C = _check_constant(C, threshold_mode)
    if not cprime >= 0:
        raise DomainError("C' must be nonnegative, got {0!r}".format(cprime))
    L = core.loglog8n(X.n)
    if s > (X.p * L) ** 0.2:
        logger.warning(
            "s={0} exceeds (p L)^(1/5) = {1:.4g}".format(s, (X.p * L) ** 0.2))
    if L / X.p > n0_constant:
        logger.warning(
            "loglog(8n)/p = {0:.4g} exceeds {1:.4g}".format(
                L / X.p, n0_constant))
    level = equicorr_level(X.p, X.n, s)
    grid = core.time_grid(X.n, core.DYADIC)
    stats = []
    for y in core.cusum_path(X, grid):
        corrected = core.median_correct(y, gamma)
        stats.append(math.fsum(np.atleast_1d(
            core.g_a(corrected, level, cprime, X.p, X.n))))
    tuning = {
        's': s, 'gamma': gamma, 'cprime': cprime, 'a': level.a,
        'nu': level.nu}
    return _outcome(
        'equicorr', X, grid, stats, C, equicorr_scale(X.p, X.n, s, gamma),
        threshold, threshold_mode, tuning)


def test_equicorr_adaptive(X, s, C=1.0, cprime=DEFAULT_CPRIME,
                           n0_constant=DEFAULT_N0_CONSTANT, threshold=None,
                           threshold_mode=None):
    """ test_equicorr with gamma replaced by gamma_estimate(X). """
    X = core.ObservationMatrix.wrap(X)
    gamma = spatial.gamma_estimate(X)
    outcome = test_equicorr(
        X, gamma, s, C, cprime, n0_constant, threshold, threshold_mode)
    outcome.procedure = 'equicorr_adaptive'
    return outcome


def temporal_scale(p, n, B):
    """ B p + (1 + B) (sqrt(p L) + L). """
    L = core.loglog8n(n)
    return B * p + (1.0 + B) * (math.sqrt(p * L) + L)


def test_temporal(X, B, C=1.0, threshold=None, threshold_mode=None):
    """
    For noise with temporal dependence of total size at most B: max over the
    dyadic grid of ||Y_t||^2 - p against C (B p + (1 + B)(sqrt(p L) + L)).
    """
    X = core.ObservationMatrix.wrap(X)
    if not B >= 0 or not math.isfinite(B):
        raise DomainError("B must be finite and nonnegative, got {0!r}".format(
            B))
    C = _check_constant(C, threshold_mode)
    grid = core.time_grid(X.n, core.DYADIC)
    stats = core.threshold_stats(
        core.cusum_path(X, grid), core.TruncationLevel(0.0))
    return _outcome(
        'temporal', X, grid, stats, C, temporal_scale(X.p, X.n, B),
        threshold, threshold_mode, {'B': float(B)})


class Procedure(object):
    """
    A named procedure together with what the harness needs to know about
    it.

    run(X, tuning, C, threshold, threshold_mode) runs it from a tuning dict.
    static_scale(p, n, tuning) is the threshold at C = 1, or None when it
    depends on the data. signal_scale(p, n, s, tuning, noise) is the rate
    signal ladders are multiples of. needs_s says whether s is required.
    """

    def __init__(self, name, run, static_scale, signal_scale, needs_s):
        self.name = name
        self.run = run
        self.static_scale = static_scale
        self.signal_scale = signal_scale
        self.needs_s = needs_s

    def __repr__(self):
        return "Procedure({0})".format(self.name)


def _get(tuning, key, default=None):
    value = tuning.get(key)
    if value is None:
        return default
    return value


def _noise_gamma(noise):
    if noise is not None and noise.gamma is not None:
        return noise.gamma
    return 0.0


def _noise_functionals(p, noise):
    if noise is None:
        return SpatialFunctionals(p, math.sqrt(p), 1.0)
    return SpatialFunctionals.from_covariance(noise.per_time_matrix(p))


def _rstar(p, n, s):
    return rates.rate_rstar(rates.ProblemSize(p, n, s))


def _dense_asym_scale(p, n, tuning):
    delta1 = _get(tuning, 'delta1', DEFAULT_DELTA)
    return 2.0 * math.sqrt((1.0 + delta1) * p * rates.loglog_n(n))


def _sparse_asym_scale(p, n, tuning):
    level = sparse_asym_level(p, n, tuning['s'])
    return rates.tail_truncated(p, level.a, 2.0 * rates.loglog_n(n))


def _registry():
    entries = [
        Procedure(
            'fixed',
            lambda X, tu, C, thr, mode: test_fixed(
                X, tu['s'], C, thr, mode),
            lambda p, n, tu: _rstar(p, n, tu['s']),
            lambda p, n, s, tu, noise: _rstar(p, n, s),
            True),
        Procedure(
            'adaptive',
            lambda X, tu, C, thr, mode: test_adaptive(X, C, thr, mode),
            lambda p, n, tu: 1.0,
            lambda p, n, s, tu, noise: _rstar(p, n, s),
            False),
        Procedure(
            'dense_asym',
            lambda X, tu, C, thr, mode: test_dense_asym(
                X, _get(tu, 'delta1', DEFAULT_DELTA),
                _get(tu, 'delta2', DEFAULT_DELTA), C, thr, mode),
            _dense_asym_scale,
            lambda p, n, s, tu, noise: _dense_asym_scale(p, n, tu),
            False),
        Procedure(
            'sparse_asym',
            lambda X, tu, C, thr, mode: test_sparse_asym(
                X, tu['s'], _get(tu, 'delta2', DEFAULT_DELTA), C, thr, mode),
            _sparse_asym_scale,
            lambda p, n, s, tu, noise: _sparse_asym_scale(p, n, tu),
            True),
        Procedure(
            'spatial_known',
            lambda X, tu, C, thr, mode: test_spatial_known(
                X, tu['functionals'], C, thr, mode),
            lambda p, n, tu: spatial_scale(tu['functionals'], n),
            lambda p, n, s, tu, noise: spatial_scale(
                _noise_functionals(p, noise), n),
            False),
        Procedure(
            'spatial_estimated',
            lambda X, tu, C, thr, mode: test_spatial_estimated(
                X, C, thr, mode),
            lambda p, n, tu: None,
            lambda p, n, s, tu, noise: spatial_scale(
                _noise_functionals(p, noise), n),
            False),
        Procedure(
            'equicorr',
            lambda X, tu, C, thr, mode: test_equicorr(
                X, _get(tu, 'gamma', 0.0), tu['s'], C,
                _get(tu, 'cprime', DEFAULT_CPRIME),
                _get(tu, 'n0_constant', DEFAULT_N0_CONSTANT), thr, mode),
            lambda p, n, tu: equicorr_scale(
                p, n, tu['s'], _get(tu, 'gamma', 0.0)),
            lambda p, n, s, tu, noise: equicorr_scale(
                p, n, s, _get(tu, 'gamma', _noise_gamma(noise))),
            True),
        Procedure(
            'equicorr_adaptive',
            lambda X, tu, C, thr, mode: test_equicorr_adaptive(
                X, tu['s'], C, _get(tu, 'cprime', DEFAULT_CPRIME),
                _get(tu, 'n0_constant', DEFAULT_N0_CONSTANT), thr, mode),
            lambda p, n, tu: None,
            lambda p, n, s, tu, noise: equicorr_scale(
                p, n, s, _noise_gamma(noise)),
            True),
        Procedure(
            'temporal',
            lambda X, tu, C, thr, mode: test_temporal(
                X, _get(tu, 'B', 0.0), C, thr, mode),
            lambda p, n, tu: temporal_scale(p, n, _get(tu, 'B', 0.0)),
            lambda p, n, s, tu, noise: temporal_scale(
                p, n, _get(tu, 'B', 0.0)),
            False),
    ]
    return dict((e.name, e) for e in entries)


PROCEDURES = _registry()


def get_procedure(name):
    try:
        return PROCEDURES[name]
    except KeyError:
        raise DomainError("Unknown procedure {0!r}; choose from {1}".format(
            name, ", ".join(sorted(PROCEDURES))))

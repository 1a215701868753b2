# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

from __future__ import absolute_import
import math

import numpy as np
import pytest
from scipy.optimize import isotonic_regression

from cpminimax import core, harness, rates, simgen, procedures
from cpminimax.config import ExperimentConfig
from cpminimax.spatial import SpatialFunctionals
from cpminimax.exceptions import DomainError

P, N = 20, 64


def run_all(X, s=3):
    """ Every procedure, with formula thresholds, on X. """
    p = X.shape[0]
    return [
        procedures.test_fixed(X, s),
        procedures.test_fixed(X, p),
        procedures.test_adaptive(X),
        procedures.test_dense_asym(X),
        procedures.test_sparse_asym(X, s),
        procedures.test_spatial_known(
            X, SpatialFunctionals.equicorrelated(p, 0.0)),
        procedures.test_spatial_estimated(X),
        procedures.test_equicorr(X, 0.2, s),
        procedures.test_equicorr_adaptive(X, s),
        procedures.test_temporal(X, 1.0),
    ]


def integer_data(seed, p=P, n=N):
    rng = np.random.default_rng(seed)
    return rng.integers(-4, 5, size=(p, n)).astype(float)


def test_zero_data_never_rejects():
    X = np.zeros((P, N))
    for outcome in run_all(X):
        assert not outcome.reject, outcome.procedure
        assert outcome.degenerate


def test_zero_data_statistics():
    X = np.zeros((P, N))
    dense = procedures.test_fixed(X, P)
    assert dense.max_stat == -P
    sparse = procedures.test_fixed(X, 1)
    assert sparse.max_stat == 0.0
    equi = procedures.test_equicorr(X, 0.0, 2)
    assert all(stat <= 0 for _, stat in equi.per_t)


def test_fixed_decision_is_statistic_against_threshold():
    rng = np.random.default_rng(1)
    for rep in range(20):
        X = rng.normal(size=(P, N)) + (rep % 4) * 0.3 * (
            np.arange(N) >= N // 2)
        outcome = procedures.test_fixed(X, 4)
        assert outcome.reject == (outcome.max_stat > outcome.threshold)
        assert outcome.threshold == pytest.approx(
            rates.rate_rstar(rates.ProblemSize(P, N, 4)))


def test_fixed_threshold_scales_with_C():
    X = np.random.default_rng(2).normal(size=(P, N))
    one = procedures.test_fixed(X, 4)
    three = procedures.test_fixed(X, 4, C=3.0)
    assert three.threshold == pytest.approx(3 * one.threshold)
    assert three.max_stat == one.max_stat
    with pytest.raises(DomainError):
        procedures.test_fixed(X, 4, C=0.0)


def test_supplied_threshold():
    X = np.random.default_rng(3).normal(size=(P, N))
    outcome = procedures.test_fixed(X, 4, threshold=-1e9)
    assert outcome.threshold_mode == procedures.SUPPLIED
    assert outcome.reject
    with pytest.raises(DomainError):
        procedures.test_fixed(X, 4, threshold=math.nan)


@pytest.mark.parametrize("seed", range(10))
def test_adaptive_is_union_of_fixed_tests(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(P, N))
    X[:seed % 5 + 1, N // 2:] += 1.5 * (seed % 3)
    C = 0.5 + (seed % 3) * 0.5
    adaptive = procedures.test_adaptive(X, C)
    fixed = [procedures.test_fixed(X, s, C)
             for s in rates.sparsity_grid(P, N)]
    assert adaptive.reject == any(f.reject for f in fixed)
    assert adaptive.tuning['sparsity_grid'] == rates.sparsity_grid(P, N)


def test_adaptive_statistic_is_normalized_maximum():
    X = np.random.default_rng(4).normal(size=(P, N))
    adaptive = procedures.test_adaptive(X)
    for i, (t, stat) in enumerate(adaptive.per_t):
        expected = max(sub.per_t[i][1] / sub.scale
                       for sub in adaptive.sub_outcomes)
        assert stat == expected
    assert adaptive.normalized_stat == adaptive.max_stat


def test_adaptive_accepts_calibrated_zero():
    X = np.random.default_rng(5).normal(size=(P, N))
    outcome = procedures.test_adaptive(
        X, threshold=0.0, threshold_mode=procedures.CALIBRATED)
    assert outcome.threshold == 0.0
    assert outcome.threshold_mode == procedures.CALIBRATED


@pytest.mark.parametrize("seed", range(5))
def test_statistics_ignore_a_common_mean(seed):
    X = integer_data(seed)
    shift = np.random.default_rng(seed + 100).integers(
        -1000, 1000, size=(P, 1)).astype(float)
    for base, moved in zip(run_all(X), run_all(X + shift)):
        assert base.reject == moved.reject, base.procedure
        assert [s for _, s in base.per_t] == pytest.approx(
            [s for _, s in moved.per_t], rel=1e-9, abs=1e-9)


def test_fixed_statistics_ignore_a_common_mean_exactly():
    X = integer_data(9)
    shift = np.arange(P, dtype=float)[:, np.newaxis] * 17
    assert procedures.test_fixed(X, 3).per_t == \
        procedures.test_fixed(X + shift, 3).per_t


def test_equicorr_without_correlation_or_window():
    X = np.random.default_rng(6).normal(size=(P, N)) * 2
    s = 3
    equi = procedures.test_equicorr(X, 0.0, s, cprime=0.0)
    level = procedures.equicorr_level(P, N, s)
    assert level.a == pytest.approx(
        rates.threshold_a(rates.ProblemSize(P, N, s)).a)
    grid = core.time_grid(N)
    for (t, stat), y in zip(equi.per_t, core.cusum_path(X, grid)):
        expected = core.threshold_stat(core.median_correct(y, 0.0), level)
        assert stat == pytest.approx(expected, abs=1e-12)


def test_equicorr_threshold():
    X = np.random.default_rng(7).normal(size=(P, N))
    outcome = procedures.test_equicorr(X, 0.5, 2, C=2.0)
    L = core.loglog8n(N)
    expected = 2.0 * 0.5 * max(2 * math.log(math.e * P * L / 4), L)
    assert outcome.threshold == pytest.approx(expected)
    with pytest.raises(DomainError):
        procedures.test_equicorr(X, 1.0, 2)


def test_equicorr_warns_outside_guarantee(caplog):
    X = np.random.default_rng(8).normal(size=(4, 32))
    procedures.test_equicorr(X, 0.0, 4)
    assert "exceeds" in caplog.text


def test_equicorr_adaptive_uses_estimated_gamma():
    cov = simgen.CovarianceSpec.equicorrelated(0.6)
    X = simgen.gen_null(30, 600, None, cov, 2)
    outcome = procedures.test_equicorr_adaptive(X, 2)
    assert outcome.procedure == 'equicorr_adaptive'
    assert 0.3 < outcome.tuning['gamma'] < 0.9


def test_spatial_known_with_identity_matches_dense_fixed():
    X = np.random.default_rng(9).normal(size=(P, N))
    fn = SpatialFunctionals(P, math.sqrt(P), 1.0)
    spatial = procedures.test_spatial_known(X, fn)
    dense = procedures.test_fixed(X, P)
    assert [s for _, s in spatial.per_t] == pytest.approx(
        [s for _, s in dense.per_t], abs=1e-9)
    assert spatial.threshold == pytest.approx(dense.threshold)


def test_spatial_known_checks_functionals():
    X = np.zeros((3, 12))
    with pytest.raises(DomainError):
        procedures.test_spatial_known(X, SpatialFunctionals(3.0, 1.0, 2.0))


def test_spatial_estimated_needs_six_columns():
    with pytest.raises(DomainError):
        procedures.test_spatial_estimated(np.ones((3, 5)))


def test_temporal_without_dependence_matches_dense_fixed():
    X = np.random.default_rng(10).normal(size=(P, N))
    temporal = procedures.test_temporal(X, 0.0)
    dense = procedures.test_fixed(X, P)
    assert temporal.per_t == dense.per_t
    L = core.loglog8n(N)
    assert temporal.threshold == pytest.approx(math.sqrt(P * L) + L)
    with pytest.raises(DomainError):
        procedures.test_temporal(X, -1.0)


def test_dense_asym_threshold_and_grid():
    X = np.random.default_rng(11).normal(size=(P, 128))
    outcome = procedures.test_dense_asym(X, delta1=0.5, delta2=0.2)
    ll = math.log(math.log(128))
    assert outcome.threshold == pytest.approx(2 * math.sqrt(1.5 * P * ll))
    assert outcome.grid == core.time_grid(128, core.GEOMETRIC, 0.2)
    with pytest.raises(DomainError):
        procedures.test_dense_asym(np.zeros((P, 2)))


def test_sparse_asym_domain():
    X = np.random.default_rng(12).normal(size=(3, 16))
    procedures.test_sparse_asym(X, 1)
    with pytest.raises(DomainError):
        procedures.test_sparse_asym(X, 2)
    with pytest.raises(DomainError):
        procedures.test_sparse_asym(X, 3)


def test_registry():
    assert sorted(procedures.PROCEDURES) == sorted([
        'fixed', 'adaptive', 'dense_asym', 'sparse_asym', 'spatial_known',
        'spatial_estimated', 'equicorr', 'equicorr_adaptive', 'temporal'])
    with pytest.raises(DomainError):
        procedures.get_procedure('bonferroni')
    fixed = procedures.get_procedure('fixed')
    X = np.random.default_rng(13).normal(size=(P, N))
    outcome = fixed.run(X, {'s': 3}, 1.0, None, None)
    assert outcome.threshold == pytest.approx(
        fixed.static_scale(P, N, {'s': 3}))


def test_outcome_as_dict():
    X = np.random.default_rng(14).normal(size=(P, N))
    d = procedures.test_adaptive(X).as_dict()
    assert d['procedure'] == 'adaptive'
    assert d['grid'] == list(core.time_grid(N))
    assert len(d['sub_outcomes']) == len(rates.sparsity_grid(P, N))


@pytest.mark.slow
def test_power_is_monotone_in_signal():
    # Paired replications: every signal level reuses the support, signs and
    # noise of the same replication.
    cov = simgen.CovarianceSpec.identity()
    ladder = np.linspace(0.0, 180.0, 10)
    reps = 1000
    rejects = np.zeros(len(ladder))
    for rep in range(reps):
        for i, rho2 in enumerate(ladder):
            rng = np.random.default_rng(rep)
            alt = simgen.AlternativeSpec.planted(P, N, 16, 5, rho2, rng=rng)
            X = simgen.gen_alternative(alt, cov, rep + 1000)
            rejects[i] += procedures.test_fixed(X, 5).reject
    powers = rejects / reps
    fit = isotonic_regression(powers).x
    assert np.max(np.abs(powers - fit)) < 0.02
    assert powers[0] <= 0.1
    assert powers[-1] > 0.9


def run_cells(**raw):
    return harness.run_experiment(ExperimentConfig(raw)).records


@pytest.mark.slow
def test_sparse_asym_null_and_power():
    p, n = 500, 512
    s = int(math.ceil(p ** 0.3))
    grid = core.time_grid(n, core.GEOMETRIC, procedures.DEFAULT_DELTA)
    t0 = max(t for t in grid if t <= n // 2)
    cov = simgen.CovarianceSpec.identity()
    reps = 100
    rejects = sum(
        procedures.test_sparse_asym(
            simgen.gen_null(p, n, None, cov, seed), s).reject
        for seed in range(reps))
    assert rejects / reps <= rates.sparse_asym_null_bound(
        n, procedures.DEFAULT_DELTA)
    (record,) = run_cells(
        procedure='sparse_asym', p=p, n=n, s=s, t0=t0,
        signal={'scale': 'xi_sparse', 'ladder': [2.0]},
        replications={'calibration': 500, 'null': 200, 'alternative': 200})
    assert record['type1'] <= 0.11
    assert 1.0 - record['type2'] >= 0.8


@pytest.mark.slow
def test_spatial_known_calibrates_under_equicorrelation():
    (record,) = run_cells(
        procedure='spatial_known', p=50, n=128,
        noise='equicorrelated:0.5',
        replications={'calibration': 2000, 'null': 1000})
    assert abs(record['type1'] - 0.05) <= 0.025


@pytest.mark.slow
def test_spatial_estimated_level_and_power():
    (record,) = run_cells(
        procedure='spatial_estimated', p=20, n=300, t0=150,
        signal={'ladder': [64]},
        replications={'calibration': 2000, 'null': 1000,
                      'alternative': 500})
    assert abs(record['type1'] - 0.05) <= 0.025
    assert 1.0 - record['type2'] >= 0.9

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

from __future__ import absolute_import
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from cpminimax import core
from cpminimax.core import ObservationMatrix, TruncationLevel
from cpminimax.exceptions import DomainError


def brute_window_min(x, level, w):
    """ inf of f_a over [x - w, x + w], from a grid plus every candidate
    minimizer (the endpoints, zero and +-a when they fall in the window). """
    lo, hi = x - w, x + w
    ys = list(np.linspace(lo, hi, 10001)) + [lo, hi]
    for cand in (0.0, level.a, -level.a):
        if lo <= cand <= hi:
            ys.append(cand)
    return float(np.min(core.f_a(np.array(ys), level)))


def test_loglog8n():
    assert core.loglog8n(100) == pytest.approx(1.89981, rel=1e-5)
    assert core.loglog8n(1) > 0


def test_check_int_rejects_floats_and_bools():
    with pytest.raises(DomainError):
        core.check_int(2.0, 1, None, "n")
    with pytest.raises(DomainError):
        core.check_int(True, 0, None, "n")
    assert core.check_int(np.int64(5), 1, 10, "n") == 5


def test_observation_matrix_validation():
    assert ObservationMatrix([1.0, 2.0, 3.0]).p == 1
    with pytest.raises(DomainError):
        ObservationMatrix([[1.0]])
    with pytest.raises(DomainError):
        ObservationMatrix([[1.0, np.nan]])
    with pytest.raises(DomainError):
        ObservationMatrix(np.zeros((2, 3, 4)))


def test_observation_matrix_is_read_only():
    X = ObservationMatrix(np.zeros((2, 4)))
    with pytest.raises(ValueError):
        X.values[0, 0] = 1.0
    assert X.is_degenerate


@pytest.mark.parametrize("n,expected", [
    (2, [1]),
    (3, [1]),
    (16, [1, 2, 4, 8]),
    (100, [1, 2, 4, 8, 16, 32]),
])
def test_dyadic_grid(n, expected):
    assert list(core.time_grid(n)) == expected


def test_dyadic_grid_cardinality():
    for n in list(range(2, 2000)) + [10 ** 4, 2 ** 20, 2 ** 20 - 1, 10 ** 6]:
        k = 0
        while 2 ** (k + 1) <= n:
            k += 1
        assert len(core.time_grid(n)) == k + 1


def test_geometric_grid():
    grid = core.time_grid(20, core.GEOMETRIC, 1.0)
    assert list(grid) == [1, 2, 4, 8, 12, 16, 18, 19]
    assert grid.delta == 1.0
    with pytest.raises(DomainError):
        core.time_grid(20, core.GEOMETRIC, 0.0)
    with pytest.raises(DomainError):
        core.time_grid(20, 'linear')


@pytest.mark.parametrize("n,delta", [
    (20, 0.1), (1000, 0.01), (12345, 0.1), (4096, 0.5), (777, 0.003)])
def test_geometric_grid_matches_every_exponent(n, delta):
    base = 1.0 + delta
    jmax = int(math.floor(math.log(n / 2.0) / math.log(base)))
    first = set(int(math.floor(base ** j)) for j in range(jmax + 1))
    first = set(t for t in first if 1 <= t <= n // 2)
    expected = sorted(first | set(n - t for t in first))
    assert list(core.time_grid(n, core.GEOMETRIC, delta)) == expected


def test_geometric_grid_with_tiny_ratio():
    # Every integer up to n/2 is hit, without visiting each exponent.
    n = 10 ** 6
    points = list(core.time_grid(n, core.GEOMETRIC, 1e-9))
    assert points[:n // 2 - 1] == list(range(1, n // 2))
    assert len(points) >= n - 2


def test_cusum_step_example():
    delta = 3.0
    X = np.array([[0.0, 0.0, delta, delta]])
    assert np.asarray(core.cusum(X, 2))[0] == pytest.approx(-delta)
    assert core.normalized_cusum(X, 2)[0] == pytest.approx(-delta)


def test_cusum_constant_columns_are_zero():
    X = np.tile(np.array([[1.5], [-2.25], [7.0]]), (1, 9))
    path = core.cusum_path(X, core.time_grid(9))
    assert np.all(path == 0.0)
    assert np.all(core.normalized_cusum_path(X, range(1, 9)) == 0.0)


def test_cusum_time_range():
    X = np.zeros((2, 7))
    with pytest.raises(DomainError):
        core.cusum(X, 0)
    with pytest.raises(DomainError):
        core.cusum(X, 4)
    with pytest.raises(DomainError):
        core.normalized_cusum(X, 7)


def test_cusum_matches_direct_sums():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(5, 37))
    path = core.cusum_path(X, range(1, 19))
    for i, t in enumerate(range(1, 19)):
        direct = (X[:, :t].sum(axis=1) - X[:, 37 - t:].sum(axis=1)) / \
            math.sqrt(2 * t)
        np.testing.assert_allclose(path[i], direct, atol=1e-10)


def test_normalized_cusum_matches_means():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(4, 25))
    for t in (1, 7, 24):
        direct = math.sqrt(t * (25 - t) / 25.0) * (
            X[:, :t].mean(axis=1) - X[:, t:].mean(axis=1))
        np.testing.assert_allclose(
            core.normalized_cusum(X, t), direct, atol=1e-10)


def test_cusum_antisymmetric_under_reversal():
    rng = np.random.default_rng(13)
    X = ObservationMatrix(rng.normal(size=(6, 40)))
    grid = core.time_grid(40)
    np.testing.assert_allclose(
        core.cusum_path(X, grid), -core.cusum_path(X.reversed(), grid),
        atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(-50, 50), min_size=12, max_size=12),
    st.lists(st.integers(-1000, 1000), min_size=3, max_size=3))
def test_cusum_ignores_common_mean(values, shift):
    X = np.array(values, dtype=float).reshape(3, 4)
    X = np.tile(X, (1, 2))
    shifted = X + np.array(shift, dtype=float)[:, np.newaxis]
    grid = core.time_grid(8)
    assert np.array_equal(
        core.cusum_path(X, grid), core.cusum_path(shifted, grid))


def test_cusum_permutation_equivariant():
    rng = np.random.default_rng(14)
    X = rng.normal(size=(7, 32))
    perm = rng.permutation(7)
    grid = core.time_grid(32)
    assert np.array_equal(
        core.cusum_path(X[perm], grid), core.cusum_path(X, grid)[:, perm])


def test_cusum_is_standard_normal_under_null():
    rng = np.random.default_rng(15)
    coords = [
        np.asarray(core.cusum(rng.normal(size=(1000, 200)), 8))
        for _ in range(100)]
    assert stats.kstest(np.concatenate(coords), 'norm').pvalue > 0.001


@pytest.mark.parametrize("a,expected", [
    (0.0, 1.0),
    (1.0, 2.525135),
    (2.0, 5.746450),
])
def test_nu_a_values(a, expected):
    assert core.nu_a(a) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0])
def test_nu_a_matches_mills_ratio(a):
    direct = 1.0 + a * stats.norm.pdf(a) / stats.norm.sf(a)
    assert core.nu_a(a) == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("a", [0.25, 1.0, 2.5, 4.0])
def test_nu_a_matches_conditional_second_moment(a):
    num, _ = integrate.quad(
        lambda z: z * z * stats.norm.pdf(z), a, np.inf, epsabs=1e-14)
    assert core.nu_a(a) == pytest.approx(num / stats.norm.sf(a), rel=1e-6)


def test_nu_a_bounds_and_monotonicity():
    grid = np.linspace(0.01, 50.0, 5000)
    values = np.array([core.nu_a(a) for a in grid])
    assert np.all(grid ** 2 < values)
    assert np.all(values <= grid ** 2 + 2)
    assert np.all(np.diff(values) > 0)


def test_nu_a_domain():
    for bad in (-1.0, np.inf, np.nan, "x"):
        with pytest.raises(DomainError):
            core.nu_a(bad)


def test_f_a():
    level = TruncationLevel(2.0)
    assert core.f_a(3.0, level) == pytest.approx(3.253550, abs=1e-6)
    assert core.f_a(1.9, level) == 0.0
    assert core.f_a(-3.0, level) == core.f_a(3.0, level)
    out = core.f_a(np.array([0.0, 2.0, -5.0]), level)
    assert out.shape == (3,)


def test_g_a_window_example():
    level = TruncationLevel(1.0)
    p, n = 50, 100
    cprime = 0.1 / math.sqrt(core.loglog8n(n) / p)
    assert core.window_halfwidth(cprime, p, n) == pytest.approx(0.1)
    assert core.g_a(3.0, level, cprime, p, n) == pytest.approx(
        2.9 ** 2 - 2.525135, abs=1e-6)


def test_g_a_without_window_is_f_a():
    level = TruncationLevel(1.3)
    x = np.linspace(-4.0, 4.0, 801)
    np.testing.assert_allclose(
        core.g_a(x, level, 0.0, 10, 50), core.f_a(x, level),
        rtol=0, atol=1e-15)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
def test_g_a_matches_brute_force(a):
    level = TruncationLevel(a)
    rng = np.random.default_rng(int(a * 100))
    p, n, cprime = 20, 64, 1.5
    w = core.window_halfwidth(cprime, p, n)
    for x in rng.uniform(-3 * a, 3 * a, size=200):
        assert core.g_a(x, level, cprime, p, n) == pytest.approx(
            brute_window_min(x, level, w), abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-20, 20, allow_nan=False),
    st.floats(0.0, 5.0, allow_nan=False),
    st.floats(0.0, 3.0, allow_nan=False))
def test_g_a_never_exceeds_f_a(x, a, cprime):
    level = TruncationLevel(a)
    assert core.g_a(x, level, cprime, 7, 40) <= core.f_a(x, level)


@pytest.mark.parametrize("x,expected", [
    (0.5, 0.0),
    (1.0, 1.0 - 2.525135),
    (2.0, 1.9 ** 2 - 2.525135),
])
def test_h_a_values(x, expected):
    assert core.h_a(x, TruncationLevel(1.0)) == pytest.approx(
        expected, abs=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_h_a_is_window_infimum(a):
    level = TruncationLevel(a)
    rng = np.random.default_rng(int(a * 10) + 1)
    for x in rng.uniform(-3 * a, 3 * a, size=200):
        assert core.h_a(x, level) == pytest.approx(
            brute_window_min(x, level, a / 10.0), abs=1e-8)


def test_h_a_needs_positive_a():
    with pytest.raises(DomainError):
        core.h_a(1.0, TruncationLevel(0.0))


def test_threshold_stat_examples():
    p = 6
    assert core.threshold_stat(np.zeros(p), TruncationLevel(0.0)) == -p
    assert core.threshold_stat(np.zeros(p), TruncationLevel(1.0)) == 0.0
    y = np.array([0.5, 1.5, -2.0])
    assert core.threshold_stat(y, TruncationLevel(1.0)) == pytest.approx(
        1.199730, abs=1e-6)


def test_threshold_stat_permutation_invariant():
    rng = np.random.default_rng(3)
    y = rng.normal(size=301) * 3
    level = TruncationLevel(1.7)
    assert core.threshold_stat(y, level) == core.threshold_stat(
        rng.permutation(y), level)


@pytest.mark.parametrize("a", [1.0, 1.5, 2.0])
def test_truncated_statistic_mean(a):
    level = TruncationLevel(a)
    rng = np.random.default_rng(int(a * 10) + 21)
    reps = 200000
    for theta in (0.0, 0.5, 1.5, 3.0, 12.0):
        vals = core.f_a(theta + rng.normal(size=reps), level)
        mean = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(reps)
        if theta == 0.0:
            assert abs(mean) <= 4 * se
        assert mean >= -4 * se
        if theta >= 8 * level.a:
            assert mean >= theta ** 2 / 2


@pytest.mark.parametrize("y,gamma,expected", [
    ([1.0, 2.0, 3.0], 0.0, [-1.0, 0.0, 1.0]),
    ([1.0, 2.0, 3.0, 4.0], 0.0, [-1.5, -0.5, 0.5, 1.5]),
    ([0.0, 0.0, 2.0], 0.75, [0.0, 0.0, 4.0]),
])
def test_median_correct(y, gamma, expected):
    np.testing.assert_allclose(core.median_correct(y, gamma), expected)


def test_median_correct_domain():
    with pytest.raises(DomainError):
        core.median_correct([1.0, 2.0], 1.0)
    with pytest.raises(DomainError):
        core.median_correct([], 0.0)

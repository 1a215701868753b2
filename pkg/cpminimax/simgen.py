# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Data generators: null and changepoint models under the three noise
# regimes, the sampling processes behind the lower bounds, and a Monte Carlo
# estimate of the chi-squared divergence between a prior mixture and the
# null.
#
# Random streams: every generator takes a seed that np.random.default_rng
# accepts. Replication streams are derived with replication_seed, which
# spawns a SeedSequence keyed on (setting, role, replication); the scheme is
# named by SEED_SCHEME and recorded in every report.

from __future__ import division
import math

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from cpminimax import core, rates
from cpminimax.exceptions import DomainError

import logging
logger = logging.getLogger("cpminimax.simgen")

SEED_SCHEME = "cpminimax-seedseq-v1"

ROLE_CALIBRATION = 0
ROLE_NULL = 1
ROLE_SIGNAL = 2

# exp() of anything above this overflows a double, near enough.
LOG_OVERFLOW = 700.0

# Pairs drawn per batch in chisq_divergence_mc.
DIVERGENCE_BATCH = 8192


def make_rng(seed):
    """ A numpy Generator from an int, a SeedSequence or a Generator. """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replication_seed(master, setting, role, rep):
    """
    The SeedSequence for replication rep of the given role within setting.

    The mapping depends only on these four integers, so the streams don't
    change with worker count or scheduling order.
    """
    return np.random.SeedSequence(
        entropy=int(master), spawn_key=(int(setting), int(role), int(rep)))


class CovarianceSpec(object):
    """
    How the noise E is drawn.

    identity:        E_t iid N(0, I_p)
    equicorrelated:  E_t iid N(0, (1 - gamma) I + gamma 11^T), drawn through
                     the factor form sqrt(gamma) W_t + sqrt(1 - gamma) Z_tj
    explicit:        E_t iid N(0, Sigma) for a positive definite Sigma; the
                     Cholesky factor is computed once, here
    temporal_block:  unit per-time covariance; columns repeat within blocks
                     of floor(B) + 1 consecutive times, so that
                     sum_{s != t} ||Cov(E_s, E_t)||_op = block_len - 1 <= B
    """

    IDENTITY = 'identity'
    EQUICORRELATED = 'equicorrelated'
    EXPLICIT = 'explicit'
    TEMPORAL_BLOCK = 'temporal_block'

    def __init__(self, kind, gamma=None, matrix=None, B=None):
        self.kind = kind
        self.gamma = None
        self.matrix = None
        self.B = None
        self._chol = None
        if kind == self.IDENTITY:
            pass
        elif kind == self.EQUICORRELATED:
            self.gamma = core.check_gamma(gamma)
        elif kind == self.EXPLICIT:
            self._set_matrix(matrix)
        elif kind == self.TEMPORAL_BLOCK:
            if B is None or not B >= 0 or not math.isfinite(B):
                raise DomainError(
                    "B must be finite and nonnegative, got {0!r}".format(B))
            self.B = float(B)
        else:
            raise DomainError("Unknown covariance kind: {0!r}".format(kind))

    @classmethod
    def identity(cls):
        return cls(cls.IDENTITY)

    @classmethod
    def equicorrelated(cls, gamma):
        return cls(cls.EQUICORRELATED, gamma=gamma)

    @classmethod
    def explicit(cls, matrix):
        return cls(cls.EXPLICIT, matrix=matrix)

    @classmethod
    def temporal_block(cls, B):
        return cls(cls.TEMPORAL_BLOCK, B=B)

    def _set_matrix(self, matrix):
        sigma = np.array(matrix, dtype=np.float64)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise DomainError("Covariance must be a square matrix")
        if not np.all(np.isfinite(sigma)):
            raise DomainError("Covariance contains non-finite values")
        if not np.allclose(sigma, sigma.T):
            raise DomainError("Covariance must be symmetric")
        try:
            chol = linalg.cholesky(sigma, lower=True)
        except linalg.LinAlgError:
            raise DomainError("Covariance is not positive definite")
        sigma.setflags(write=False)
        chol.setflags(write=False)
        self.matrix = sigma
        self._chol = chol

    @property
    def block_len(self):
        if self.kind != self.TEMPORAL_BLOCK:
            return 1
        return int(math.floor(self.B)) + 1

    def check_dimension(self, p):
        if self.kind == self.EXPLICIT and self.matrix.shape[0] != p:
            raise DomainError(
                "Covariance is {0}x{0} but p={1}".format(
                    self.matrix.shape[0], p))

    def per_time_matrix(self, p):
        """ Cov(E_t), the same for every t. """
        p = core.check_int(p, 1, None, "p")
        self.check_dimension(p)
        if self.kind == self.EQUICORRELATED:
            return (
                (1.0 - self.gamma) * np.eye(p) +
                self.gamma * np.ones((p, p)))
        if self.kind == self.EXPLICIT:
            return np.array(self.matrix)
        return np.eye(p)

    def sample_noise(self, p, n, rng):
        """ A p x n noise matrix. """
        p = core.check_int(p, 1, None, "p")
        n = core.check_int(n, 2, None, "n")
        self.check_dimension(p)
        if self.kind == self.TEMPORAL_BLOCK:
            width = self.block_len
            blocks = -(-n // width)
            Z = rng.standard_normal((p, blocks))
            return np.repeat(Z, width, axis=1)[:, :n]
        Z = rng.standard_normal((p, n))
        if self.kind == self.EQUICORRELATED:
            W = rng.standard_normal(n)
            return (
                math.sqrt(1.0 - self.gamma) * Z +
                math.sqrt(self.gamma) * W[np.newaxis, :])
        if self.kind == self.EXPLICIT:
            return self._chol.dot(Z)
        return Z

    def describe(self):
        if self.kind == self.EQUICORRELATED:
            return "equicorrelated:{0!r}".format(self.gamma)
        if self.kind == self.TEMPORAL_BLOCK:
            return "temporal:{0!r}".format(self.B)
        if self.kind == self.EXPLICIT:
            return "explicit:{0}x{0}".format(self.matrix.shape[0])
        return self.kind

    def __repr__(self):
        return "CovarianceSpec({0})".format(self.describe())


def _mean_vector(mu, p):
    if mu is None:
        return np.zeros(p)
    vec = np.array(mu, dtype=np.float64)
    if vec.ndim == 0:
        vec = np.full(p, float(vec))
    if vec.shape != (p,):
        raise DomainError(
            "Mean vector must have length {0}, got shape {1}".format(
                p, vec.shape))
    if not np.all(np.isfinite(vec)):
        raise DomainError("Mean vector contains non-finite values")
    return vec


def gen_null(p, n, mu, cov, seed):
    """ X = mu 1^T + E. mu may be None (zero mean) or a scalar. """
    p = core.check_int(p, 1, None, "p")
    n = core.check_int(n, 2, None, "n")
    vec = _mean_vector(mu, p)
    noise = cov.sample_noise(p, n, make_rng(seed))
    return core.ObservationMatrix(vec[:, np.newaxis] + noise)


def gen_alternative(alt, cov, seed):
    """
    Columns 1..t0 have mean mu1, the rest mu2. Draws exactly the noise
    gen_null draws for the same seed, so the two share a realization.
    """
    noise = cov.sample_noise(alt.p, alt.n, make_rng(seed))
    return core.ObservationMatrix(alt.mean_matrix() + noise)


class AlternativeSpec(object):
    """ A single change in mean at t0, from mu1 to mu2. """

    def __init__(self, n, t0, mu1, mu2):
        self.n = core.check_int(n, 2, None, "n")
        self.t0 = core.check_int(t0, 1, self.n - 1, "t0")
        mu1 = np.array(mu1, dtype=np.float64)
        if mu1.ndim != 1 or len(mu1) < 1:
            raise DomainError("mu1 must be a nonempty vector")
        self.mu1 = _mean_vector(mu1, len(mu1))
        self.mu2 = _mean_vector(mu2, len(mu1))

    @classmethod
    def planted(cls, p, n, t0, s, rho2, signs='random', support='random',
                rng=None):
        """
        A change of sparsity s and strength rho2, starting from mu1 = 0.

        Every changed coordinate moves by delta = sqrt(rho2 n / (t0 (n - t0))
        / s), so that rho2 comes out exactly. signs is 'random' or
        'positive'; support is 'random' or 'first' (coordinates 0..s-1).
        """
        p = core.check_int(p, 1, None, "p")
        n = core.check_int(n, 2, None, "n")
        t0 = core.check_int(t0, 1, n - 1, "t0")
        s = core.check_int(s, 1, p, "s")
        if not rho2 >= 0 or not math.isfinite(rho2):
            raise DomainError(
                "rho2 must be finite and nonnegative, got {0!r}".format(rho2))
        if (signs == 'random' or support == 'random') and rng is None:
            raise DomainError("Random signs or support need an rng")
        if support == 'first':
            idx = np.arange(s)
        elif support == 'random':
            idx = np.sort(rng.choice(p, size=s, replace=False))
        else:
            raise DomainError("Unknown support: {0!r}".format(support))
        if signs == 'positive':
            u = np.ones(s)
        elif signs == 'random':
            u = rng.choice([-1.0, 1.0], size=s)
        else:
            raise DomainError("Unknown signs: {0!r}".format(signs))
        delta = math.sqrt(rho2 * n / (t0 * (n - t0)) / s)
        mu2 = np.zeros(p)
        mu2[idx] = delta * u
        return cls(n, t0, np.zeros(p), mu2)

    @property
    def p(self):
        return len(self.mu1)

    @property
    def diff(self):
        return self.mu2 - self.mu1

    @property
    def s(self):
        return int(np.count_nonzero(self.diff))

    @property
    def rho2(self):
        d = self.diff
        return self.t0 * (self.n - self.t0) / self.n * math.fsum(d * d)

    def in_parameter_space(self, s, rho):
        """ True if this change lies in the class of s-sparse changes of
        strength at least rho. """
        return self.s <= s and self.rho2 >= rho * rho

    def mean_matrix(self):
        theta = np.empty((self.p, self.n))
        theta[:, :self.t0] = self.mu1[:, np.newaxis]
        theta[:, self.t0:] = self.mu2[:, np.newaxis]
        return theta

    def __repr__(self):
        return "AlternativeSpec(p={0}, n={1}, t0={2}, s={3}, rho2={4:.6g})" \
            .format(self.p, self.n, self.t0, self.s, self.rho2)


DENSE = 'dense'
SPARSE_POSITIVE = 'sparse_positive'
ASYM_DENSE = 'asym_dense'
ASYM_SPARSE = 'asym_sparse'
POINT = 'point'

PRIOR_KINDS = (DENSE, SPARSE_POSITIVE, ASYM_DENSE, ASYM_SPARSE, POINT)
SIGNED_KINDS = (DENSE, ASYM_DENSE)
ASYMPTOTIC_KINDS = (ASYM_DENSE, ASYM_SPARSE)


class PriorSpec(object):
    """
    One of the sampling processes behind the lower bounds.

    Each draw picks a support S of size s, a scale k from the kind's grid and
    signs u (random for the dense kinds, all +1 for the sparse ones), then
    sets theta = beta u_j / sqrt(2^k) on S x [2^k] and zero elsewhere.

    s defaults to p. beta defaults to default_beta with beta_constant and
    epsilon. grid_constant is the c in the coarsened scale grid of the
    asymptotic kinds. The point kind always returns theta.
    """

    def __init__(self, kind, s=None, beta=None, beta_constant=1.0,
                 grid_constant=1.0, epsilon=0.1, theta=None):
        if kind not in PRIOR_KINDS:
            raise DomainError("Unknown prior kind: {0!r}".format(kind))
        self.kind = kind
        self.s = s
        self.beta = beta
        self.beta_constant = float(beta_constant)
        self.grid_constant = float(grid_constant)
        self.epsilon = float(epsilon)
        self.theta = None
        if kind == POINT:
            if theta is None:
                raise DomainError("A point prior needs theta")
            theta = np.array(theta, dtype=np.float64)
            if theta.ndim != 2 or not np.all(np.isfinite(theta)):
                raise DomainError("theta must be a finite p x n matrix")
            theta.setflags(write=False)
            self.theta = theta
        elif beta is not None and not beta >= 0:
            raise DomainError("beta must be nonnegative, got {0!r}".format(
                beta))

    def sparsity(self, p):
        if self.s is None:
            return p
        return core.check_int(self.s, 1, p, "s")

    def resolve_beta(self, p, n):
        if self.beta is not None:
            return float(self.beta)
        return default_beta(
            self.kind, p, n, self.sparsity(p), self.beta_constant,
            self.epsilon)

    def advertised_rho2(self, p, n):
        """
        The signal strength every draw is guaranteed to reach: s beta^2 / 2
        on the full dyadic grid, s beta^2 (n - 2^kmax) / n on a coarsened
        one. None for point priors.
        """
        if self.kind == POINT:
            return None
        s = self.sparsity(p)
        beta = self.resolve_beta(p, n)
        if self.kind in ASYMPTOTIC_KINDS:
            width = 2 ** max(prior_grid(self, n))
            return s * beta * beta * (n - width) / n
        return s * beta * beta / 2.0

    def __repr__(self):
        return "PriorSpec({0}, s={1}, beta={2})".format(
            self.kind, self.s, self.beta)


def default_beta(kind, p, n, s, constant=1.0, epsilon=0.1):
    """
    The signal heights the lower-bound constructions use:

        dense:            beta = (c p L / s^2)^(1/4)
        sparse_positive:  beta = sqrt(log(c p L / s^2))
        asym_dense:       beta^2 = (2 - eps) sqrt(p loglog(n) / s^2)
        asym_sparse:      beta^2 = (1 - eps) log(p loglog(n) / s^2)

    with L = loglog(8n).
    """
    p = core.check_int(p, 1, None, "p")
    s = core.check_int(s, 1, p, "s")
    if not constant > 0:
        raise DomainError("constant must be positive, got {0!r}".format(
            constant))
    if kind == DENSE:
        return (constant * p * core.loglog8n(n) / (s * s)) ** 0.25
    if kind == SPARSE_POSITIVE:
        arg = constant * p * core.loglog8n(n) / (s * s)
        if arg <= 1:
            raise DomainError(
                "c p L / s^2 = {0:.4g} must exceed 1".format(arg))
        return math.sqrt(math.log(arg))
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1), got {0!r}".format(
            epsilon))
    ratio = p * rates.loglog_n(n) / (s * s)
    if kind == ASYM_DENSE:
        return math.sqrt((2.0 - epsilon) * math.sqrt(ratio))
    if kind == ASYM_SPARSE:
        if ratio <= 1:
            raise DomainError(
                "p loglog(n) / s^2 = {0:.4g} must exceed 1".format(ratio))
        return math.sqrt((1.0 - epsilon) * math.log(ratio))
    raise DomainError("No default beta for prior kind {0!r}".format(kind))


def prior_grid(prior, n):
    """
    The scales k a prior draws from, uniformly:

        dense, sparse_positive: {0, 1, ..., floor(log2(n/2))}
        asymptotic kinds:       {0, m, 2m, ..., m floor(log2(sqrt(n)) / m)}
                                with m = floor(c logloglog(n))
    """
    n = core.check_int(n, 2, None, "n")
    if prior.kind in ASYMPTOTIC_KINDS:
        loglog = math.log(math.log(n)) if n > 2 else 0.0
        if loglog <= 0:
            raise DomainError("n={0} is too small for the coarse grid".format(
                n))
        m = int(math.floor(prior.grid_constant * math.log(loglog)))
        if m < 1:
            raise DomainError(
                "The coarse scale grid is empty for n={0}, c={1}".format(
                    n, prior.grid_constant))
        top = int(math.floor(math.log2(n) / 2.0 / m))
        return [m * j for j in range(top + 1)]
    if prior.kind == POINT:
        raise DomainError("Point priors have no scale grid")
    return list(range(n.bit_length() - 1))


def _draw_components(prior, p, n, size, rng):
    """
    Scales and signed support indicators for size draws: returns the widths
    2^k as an int array and a size x p matrix holding u_j on S, 0 elsewhere.
    """
    s = prior.sparsity(p)
    grid = np.asarray(prior_grid(prior, n), dtype=np.int64)
    widths = 2 ** grid[rng.integers(len(grid), size=size)]
    if s == p:
        support = np.broadcast_to(np.arange(p), (size, p))
    else:
        support = np.argsort(rng.random((size, p)), axis=1)[:, :s]
    if prior.kind in SIGNED_KINDS:
        signs = rng.choice([-1.0, 1.0], size=(size, s))
    else:
        signs = np.ones((size, s))
    V = np.zeros((size, p))
    np.put_along_axis(V, np.asarray(support), signs, axis=1)
    return widths, V


def sample_prior(prior, p, n, seed):
    """ One p x n mean matrix theta drawn from prior. """
    p = core.check_int(p, 1, None, "p")
    n = core.check_int(n, 2, None, "n")
    if prior.kind == POINT:
        if prior.theta.shape != (p, n):
            raise DomainError("theta has shape {0}, expected {1}".format(
                prior.theta.shape, (p, n)))
        return np.array(prior.theta)
    rng = make_rng(seed)
    beta = prior.resolve_beta(p, n)
    widths, V = _draw_components(prior, p, n, 1, rng)
    width = int(widths[0])
    theta = np.zeros((p, n))
    theta[:, :width] = (beta * V[0] / math.sqrt(width))[:, np.newaxis]
    return theta


class DivergenceEstimate(object):
    """
    Monte Carlo estimate of E exp(<theta1, theta2>) - 1.

    overflow is set when any exponent passed LOG_OVERFLOW; estimate is then
    +inf. log_mean is log of the sample mean of exp(<theta1, theta2>),
    finite either way.
    """

    def __init__(self, estimate, std_error, overflow, log_mean, reps):
        self.estimate = estimate
        self.std_error = std_error
        self.overflow = overflow
        self.log_mean = log_mean
        self.reps = reps

    def as_dict(self):
        return {
            'estimate': self.estimate,
            'std_error': self.std_error,
            'overflow': self.overflow,
            'log_mean': self.log_mean,
            'reps': self.reps,
        }

    def __repr__(self):
        return "DivergenceEstimate({0:.6g} +/- {1:.3g}{2})".format(
            self.estimate, self.std_error,
            ", overflow" if self.overflow else "")


def _inverse(sigma):
    try:
        factor = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError:
        raise DomainError("Covariance is not invertible")
    return linalg.cho_solve(factor, np.eye(len(sigma)))


def chisq_divergence_mc(prior, p, n, cov, R, seed):
    """
    Estimate chi^2(mixture || null) = E exp(<theta1, theta2>_{Sigma^-1}) - 1
    over independent pairs theta1, theta2 from prior.

    The pairing sums theta1_t^T Sigma^-1 theta2_t over t. For the scale
    draws this is min(w1, w2) beta^2 / sqrt(w1 w2) * u1^T Sigma^-1 u2, so
    no p x n matrix is ever built. Terms are averaged in log space. The
    standard error is the jackknife one, which for a mean is the sample
    standard deviation over sqrt(R).
    """
    p = core.check_int(p, 1, None, "p")
    n = core.check_int(n, 2, None, "n")
    R = core.check_int(R, 2, None, "R")
    precision = _inverse(cov.per_time_matrix(p))

    if prior.kind == POINT:
        theta = sample_prior(prior, p, n, None)
        z = math.fsum(np.einsum('it,ij,jt->t', theta, precision, theta))
        if z > LOG_OVERFLOW:
            logger.warning(
                "Divergence term exp({0:.4g}) overflows; reporting +inf"
                .format(z))
            return DivergenceEstimate(math.inf, 0.0, True, z, R)
        return DivergenceEstimate(math.expm1(z), 0.0, False, z, R)

    rng = make_rng(seed)
    beta = prior.resolve_beta(p, n)
    chunks = []
    remaining = R
    while remaining > 0:
        size = min(remaining, DIVERGENCE_BATCH)
        w1, V1 = _draw_components(prior, p, n, size, rng)
        w2, V2 = _draw_components(prior, p, n, size, rng)
        inner = np.einsum('ri,ij,rj->r', V1, precision, V2)
        scale = np.minimum(w1, w2) / np.sqrt(w1 * w2.astype(np.float64))
        chunks.append(beta * beta * scale * inner)
        remaining -= size
    return _summarize(np.concatenate(chunks))


def _summarize(z):
    R = len(z)
    top = float(np.max(z))
    log_mean = float(logsumexp(z) - math.log(R))
    if top > LOG_OVERFLOW:
        logger.warning(
            "Divergence term exp({0:.4g}) overflows; reporting +inf".format(
                top))
        return DivergenceEstimate(
            math.inf, math.inf, True, log_mean, R)
    shifted = np.exp(z - top)
    std_error = math.exp(top) * float(np.std(shifted, ddof=1)) / math.sqrt(R)
    return DivergenceEstimate(
        math.expm1(log_mean), std_error, False, log_mean, R)

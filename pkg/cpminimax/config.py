# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Defaults, the noise specification mini-language and experiment
# configuration. The JSON layout is documented in notes/config_schema.md.

from __future__ import division
import copy
import json
import math
import os

from cpminimax import matrix_io
from cpminimax.procedures import get_procedure
from cpminimax.simgen import CovarianceSpec
from cpminimax.exceptions import ConfigError, DomainError, MatrixFormatError

import logging
logger = logging.getLogger("cpminimax.config")

DEFAULTS = {
    'delta1': 0.1,
    'delta2': 0.1,
    'cprime': 2.0,
    # loglog(8n)/p above this triggers the large-n warning of test_equicorr
    'n0_constant': 1.0,
    'grid_constant': 1.0,
    'constant_floor': 1.0,
    'alpha': 0.05,
}

THREADS_ENV = 'CPMINIMAX_THREADS'

# No frequency is reported over fewer replications than this.
MIN_REPLICATIONS = 100

SIGNAL_SCALES = ('rate', 'xi_dense', 'xi_sparse', 'rho2')
TUNING_KEYS = (
    'C', 'cprime', 'gamma', 'B', 'delta1', 'delta2', 'n0_constant')


def worker_count():
    """ Parallel workers allowed, from CPMINIMAX_THREADS (default 1). """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError("{0} must be an integer, got {1!r}".format(
            THREADS_ENV, raw))
    if value < 1:
        raise ConfigError("{0} must be at least 1, got {1}".format(
            THREADS_ENV, value))
    return value


def parse_noise(spec, base_dir=None):
    """
    identity | equicorrelated:<gamma> | temporal:<B> | explicit:<file>

    Explicit matrix files are read with matrix_io.read_matrix, relative to
    base_dir when given.
    """
    if isinstance(spec, CovarianceSpec):
        return spec
    if not isinstance(spec, str) or not spec:
        raise ConfigError("Noise spec must be a string, got {0!r}".format(
            spec))
    kind, _, arg = spec.partition(':')
    kind = kind.strip()
    try:
        if kind == 'identity' and not arg:
            return CovarianceSpec.identity()
        if kind == 'equicorrelated':
            return CovarianceSpec.equicorrelated(float(arg))
        if kind == 'temporal':
            return CovarianceSpec.temporal_block(float(arg))
        if kind == 'explicit' and arg:
            path = arg
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            return CovarianceSpec.explicit(matrix_io.read_matrix(path))
    except (ValueError, DomainError, MatrixFormatError) as e:
        raise ConfigError("Bad noise spec {0!r}: {1}".format(spec, e))
    raise ConfigError("Unknown noise spec {0!r}".format(spec))


def check_alpha(alpha):
    if not 0 < alpha < 0.5:
        raise ConfigError("alpha must lie in (0, 0.5), got {0!r}".format(
            alpha))
    return float(alpha)


def _int_list(raw, name, allow_none=False):
    if raw is None and allow_none:
        return [None]
    if not isinstance(raw, list):
        raw = [raw]
    if not raw:
        raise ConfigError("{0} must not be empty".format(name))
    out = []
    for v in raw:
        if v is None and allow_none:
            out.append(None)
        elif isinstance(v, int) and not isinstance(v, bool):
            out.append(v)
        else:
            raise ConfigError("{0} entries must be integers, got {1!r}".format(
                name, v))
    return out


def resolve_t0(t0, n):
    """ Integers are times and must lie in [1, n - 1]; reals in (0, 1) are
    fractions of n, floored and clipped into [1, n - 1]. """
    if isinstance(t0, float):
        if not 0 < t0 < 1:
            raise ConfigError(
                "Fractional t0 must lie in (0, 1), got {0!r}".format(t0))
        return min(max(int(math.floor(t0 * n)), 1), n - 1)
    if not isinstance(t0, int) or isinstance(t0, bool):
        raise ConfigError(
            "t0 must be an integer or a fraction, got {0!r}".format(t0))
    if not 1 <= t0 <= n - 1:
        raise ConfigError(
            "t0 = {0} lies outside [1, {1}] for n = {2}".format(t0, n - 1, n))
    return t0


class ExperimentConfig(object):
    """ A validated experiment description. """

    def __init__(self, raw, base_dir=None):
        if not isinstance(raw, dict):
            raise ConfigError("Config must be a JSON object")
        self.raw = copy.deepcopy(raw)
        try:
            self.procedure = get_procedure(raw.get('procedure'))
        except DomainError as e:
            raise ConfigError(str(e))
        self.tuning = self._tuning(raw.get('tuning', {}))
        self.p = _int_list(raw.get('p'), 'p')
        self.n = _int_list(raw.get('n'), 'n')
        self.s = _int_list(raw.get('s'), 's', allow_none=True)
        if self.procedure.needs_s and None in self.s:
            raise ConfigError(
                "Procedure {0} needs s".format(self.procedure.name))
        self.noise_spec = raw.get('noise', 'identity')
        self.noise = parse_noise(self.noise_spec, base_dir)
        t0 = raw.get('t0', [0.5])
        if not isinstance(t0, list):
            t0 = [t0]
        if not t0:
            raise ConfigError("t0 must not be empty")
        for n in self.n:
            for value in t0:
                resolve_t0(value, n)
        self.t0 = t0
        self._signal(raw.get('signal', {}))
        self._threshold(raw.get('threshold', 'calibrate'))
        self._replications(raw.get('replications', {}))
        self.alpha = check_alpha(raw.get('alpha', DEFAULTS['alpha']))
        seed = raw.get('seed', 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        self.seed = seed
        self.constant_floor = float(
            raw.get('constant_floor', DEFAULTS['constant_floor']))

    @classmethod
    def load(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            try:
                raw = json.load(f)
            except ValueError as e:
                raise ConfigError("{0}: invalid JSON: {1}".format(path, e))
        return cls(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    def _tuning(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("tuning must be an object")
        unknown = set(raw) - set(TUNING_KEYS)
        if unknown:
            raise ConfigError("Unknown tuning keys: {0}".format(
                ", ".join(sorted(unknown))))
        tuning = dict((k, DEFAULTS[k]) for k in (
            'delta1', 'delta2', 'cprime', 'n0_constant'))
        tuning['C'] = 1.0
        tuning.update(raw)
        return tuning

    def _signal(self, raw):
        self.signal_scale = raw.get('scale', 'rate')
        if self.signal_scale not in SIGNAL_SCALES:
            raise ConfigError("signal scale must be one of {0}".format(
                ", ".join(SIGNAL_SCALES)))
        ladder = raw.get('ladder', [])
        if not isinstance(ladder, list) or any(
                not isinstance(v, (int, float)) or v < 0 for v in ladder):
            raise ConfigError("signal ladder must be nonnegative numbers")
        self.ladder = [float(v) for v in ladder]
        self.signs = raw.get('signs', 'random')
        self.support = raw.get('support', 'random')
        if self.signs not in ('random', 'positive'):
            raise ConfigError("signs must be 'random' or 'positive'")
        if self.support not in ('random', 'first'):
            raise ConfigError("support must be 'random' or 'first'")

    def _threshold(self, raw):
        if raw == 'calibrate':
            self.threshold = None
        elif isinstance(raw, (int, float)) and not isinstance(raw, bool):
            self.threshold = float(raw)
        else:
            raise ConfigError(
                "threshold must be 'calibrate' or a number, got {0!r}".format(
                    raw))

    def _replications(self, raw):
        self.calibration_reps = raw.get('calibration', 2000)
        self.null_reps = raw.get('null', 1000)
        self.alternative_reps = raw.get('alternative', 1000)
        checks = [('null', self.null_reps)]
        if self.threshold is None:
            checks.append(('calibration', self.calibration_reps))
        if self.ladder:
            checks.append(('alternative', self.alternative_reps))
        for name, value in checks:
            if not isinstance(value, int) or value < MIN_REPLICATIONS:
                raise ConfigError(
                    "{0} replications must be an integer >= {1}, "
                    "got {2!r}".format(name, MIN_REPLICATIONS, value))

    def settings(self):
        """ (p, n, s) for every cell of the grid, in a fixed order. """
        out = []
        for p in self.p:
            for n in self.n:
                for s in self.s:
                    out.append((p, n, s))
        return out

    def as_dict(self):
        return copy.deepcopy(self.raw)

    def __repr__(self):
        return "ExperimentConfig({0}, {1} settings)".format(
            self.procedure.name, len(self.settings()))

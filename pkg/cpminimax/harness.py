# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Monte Carlo experiments: null calibration of thresholds, Type I and Type II
# error estimates over a grid of problem sizes and signal strengths, phase
# diagrams, and export.
#
# Replications are split into chunks and run through joblib; every
# replication draws from its own SeedSequence (simgen.replication_seed) and
# chunk results are put back in replication order, so the numbers don't
# depend on the worker count.

from __future__ import division
import hashlib
import json
import math
import os
import time

import joblib
import numpy as np

from cpminimax import rates, simgen, _metadata as meta
from cpminimax.config import MIN_REPLICATIONS, resolve_t0, worker_count
from cpminimax.procedures import (
    get_procedure, CALIBRATED, SUPPLIED, SpatialFunctionals)
from cpminimax.report import ExperimentReport, PowerGrid, empty_record
from cpminimax.writers import csvwriter, jsonwriter, hdf5writer
from cpminimax.exceptions import ConfigError, DomainError

import logging
logger = logging.getLogger("cpminimax.harness")

# Chunks handed to each worker.
CHUNKS_PER_WORKER = 4
# Slack on the order-statistic index so that (1 - alpha) R landing on an
# integer isn't pushed up by rounding.
INDEX_SLACK = 1e-9

EXPORT_FORMATS = ('csv', 'json', 'hdf5')


def power_se(frequency, reps):
    """ Binomial standard error sqrt(f (1 - f) / R). """
    if reps < 1:
        raise DomainError("reps must be positive")
    return math.sqrt(frequency * (1.0 - frequency) / reps)


def bootstrap_se(decisions, resamples=2000, seed=0):
    """ Bootstrap standard error of the rejection frequency of decisions. """
    arr = np.asarray(decisions, dtype=np.float64)
    if arr.ndim != 1 or len(arr) < 2:
        raise DomainError("Need at least two decisions")
    rng = simgen.make_rng(seed)
    idx = rng.integers(len(arr), size=(resamples, len(arr)))
    return float(np.std(arr[idx].mean(axis=1), ddof=1))


def order_statistic_index(alpha, reps):
    """ 1-based index ceil((1 - alpha) R) of the calibrated order statistic.
    """
    return int(math.ceil((1.0 - alpha) * reps - INDEX_SLACK))


def _check_calibration_args(alpha, reps):
    if not 0 < alpha <= 0.5:
        raise ConfigError("alpha must lie in (0, 0.5], got {0!r}".format(
            alpha))
    if not isinstance(reps, int) or reps < MIN_REPLICATIONS:
        raise ConfigError(
            "Calibration needs at least {0} replications, got {1!r}".format(
                MIN_REPLICATIONS, reps))


def cell_tuning(procedure, p, s, tuning, noise):
    """ The tuning dict one cell runs with: s filled in, and the values a
    procedure reads off the noise when they aren't given. """
    tu = dict(tuning or {})
    tu['s'] = s
    if procedure.name == 'equicorr' and tu.get('gamma') is None:
        tu['gamma'] = noise.gamma if noise.gamma is not None else 0.0
    if procedure.name == 'spatial_known' and tu.get('functionals') is None:
        tu['functionals'] = SpatialFunctionals.from_covariance(
            noise.per_time_matrix(p))
    return tu


def _chunks(reps, workers):
    size = max(1, -(-reps // (workers * CHUNKS_PER_WORKER)))
    return [range(lo, min(lo + size, reps)) for lo in range(0, reps, size)]


def _map_reps(func, reps, args):
    """ func(rep_range, *args) over chunks; results flattened in rep order.
    """
    workers = worker_count()
    chunks = _chunks(reps, workers)
    if workers == 1:
        parts = [func(c, *args) for c in chunks]
    else:
        with joblib.Parallel(n_jobs=workers) as parallel:
            parts = parallel(joblib.delayed(func)(c, *args) for c in chunks)
    out = []
    for part in parts:
        out.extend(part)
    return out


def _null_chunk(rep_range, name, p, n, tuning, noise, master, setting, role,
                C, threshold, mode):
    procedure = get_procedure(name)
    out = []
    for rep in rep_range:
        seed = simgen.replication_seed(master, setting, role, rep)
        X = simgen.gen_null(p, n, None, noise, seed)
        outcome = procedure.run(X, tuning, C, threshold, mode)
        out.append((outcome.normalized_stat, outcome.reject))
    return out


def _alternative_chunk(rep_range, name, p, n, s, t0, rho2, signs, support,
                       tuning, noise, master, setting, C, threshold, mode):
    procedure = get_procedure(name)
    out = []
    for rep in rep_range:
        signal_rng = simgen.make_rng(simgen.replication_seed(
            master, setting, simgen.ROLE_SIGNAL, rep))
        alt = simgen.AlternativeSpec.planted(
            p, n, t0, s, rho2, signs=signs, support=support, rng=signal_rng)
        seed = simgen.replication_seed(master, setting, simgen.ROLE_NULL, rep)
        X = simgen.gen_alternative(alt, noise, seed)
        out.append(procedure.run(X, tuning, C, threshold, mode).reject)
    return out


class Calibration(object):
    """
    A calibrated procedure: constant is the (1 - alpha) order statistic of
    the null max statistic in units of the threshold scale; threshold is
    constant times the scale, or None when the scale depends on the data.
    """

    def __init__(self, constant, threshold, stats, alpha):
        self.constant = constant
        self.threshold = threshold
        self.stats = stats
        self.alpha = alpha

    def run_kwargs(self):
        """ C, threshold and mode for applying the calibration. """
        if self.threshold is None:
            return self.constant, None, CALIBRATED
        return 1.0, self.threshold, CALIBRATED

    def __repr__(self):
        return "Calibration(constant={0:.6g}, threshold={1})".format(
            self.constant, self.threshold)


def calibrate_procedure(procedure, p, n, noise, alpha, R, seed, s=None,
                        tuning=None, setting=0):
    procedure = _as_procedure(procedure)
    _check_calibration_args(alpha, R)
    tu = cell_tuning(procedure, p, s, tuning, noise)
    results = _map_reps(
        _null_chunk, R,
        (procedure.name, p, n, tu, noise, seed, setting,
         simgen.ROLE_CALIBRATION, 1.0, None, None))
    stats = np.sort(np.array([r[0] for r in results]))
    constant = float(stats[order_statistic_index(alpha, R) - 1])
    scale = procedure.static_scale(p, n, tu)
    threshold = None if scale is None else constant * scale
    logger.info("Calibrated {0} at p={1}, n={2}, s={3}: C={4:.6g}".format(
        procedure.name, p, n, s, constant))
    return Calibration(constant, threshold, stats, alpha)


def calibrate(procedure, p, n, noise, alpha, R, seed, s=None, tuning=None):
    """
    Simulate R null data sets and return the empirical (1 - alpha) quantile
    of the procedure's max statistic: the order statistic at index
    ceil((1 - alpha) R).

    For procedures whose threshold scale depends on the data
    (spatial_estimated, equicorr_adaptive), the quantile is of the max
    statistic over that scale, which is the constant C to run them with.
    """
    cal = calibrate_procedure(
        procedure, p, n, noise, alpha, R, seed, s=s, tuning=tuning)
    if cal.threshold is None:
        return cal.constant
    return cal.threshold


def _as_procedure(procedure):
    if isinstance(procedure, str):
        return get_procedure(procedure)
    return procedure


def config_hash(cfg):
    body = json.dumps(cfg.as_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(body.encode('utf-8')).hexdigest()


def report_metadata(cfg):
    return {
        'seed': cfg.seed,
        'version': meta.version,
        'config_hash': config_hash(cfg),
        'seed_scheme': simgen.SEED_SCHEME,
        'procedure': cfg.procedure.name,
        'noise': cfg.noise.describe(),
        'alpha': cfg.alpha,
    }


def signal_rho2(cfg, p, n, s, constant, tu, rung):
    """ rho^2 for one rung of the signal ladder. """
    scale = cfg.signal_scale
    if scale == 'rho2':
        return rung
    if scale == 'rate':
        factor = max(constant, cfg.constant_floor)
        return rung * factor * cfg.procedure.signal_scale(
            p, n, s, tu, cfg.noise)
    if rung == 0:
        return 0.0
    kind = rates.DENSE if scale == 'xi_dense' else rates.SPARSE
    rho = rates.asymptotic_boundary(kind, rates.ProblemSize(p, n, s), rung)
    return rho * rho


def _run_setting(cfg, index, p, n, s):
    """ The records for one (p, n, s) setting. """
    procedure = cfg.procedure
    tu = cell_tuning(procedure, p, s, cfg.tuning, cfg.noise)
    start = time.time()
    if cfg.threshold is None:
        cal = calibrate_procedure(
            procedure, p, n, cfg.noise, cfg.alpha, cfg.calibration_reps,
            cfg.seed, s=s, tuning=cfg.tuning, setting=index)
        C, threshold, mode = cal.run_kwargs()
        constant = cal.constant
        reported_threshold = cal.threshold
    else:
        C, threshold, mode = tu.get('C', 1.0), cfg.threshold, SUPPLIED
        scale = procedure.static_scale(p, n, tu)
        constant = C if scale is None else threshold / scale
        reported_threshold = threshold

    null = _map_reps(
        _null_chunk, cfg.null_reps,
        (procedure.name, p, n, tu, cfg.noise, cfg.seed, index,
         simgen.ROLE_NULL, C, threshold, mode))
    type1 = sum(1 for _, reject in null if reject) / cfg.null_reps
    base = dict(
        setting=index, p=p, n=n, s=s, threshold=reported_threshold,
        threshold_mode=mode, constant=constant, type1=type1,
        type1_se=power_se(type1, cfg.null_reps), null_reps=cfg.null_reps)

    if not cfg.ladder:
        return [empty_record(wall_time=time.time() - start, **base)]

    signal_s = s if s is not None else p
    records = []
    for raw_t0 in cfg.t0:
        t0 = None
        for rung in cfg.ladder:
            cell_start = time.time()
            record = empty_record(signal=rung, **base)
            try:
                t0 = resolve_t0(raw_t0, n)
                record['t0'] = t0
                rho2 = signal_rho2(cfg, p, n, signal_s, constant, tu, rung)
                record['rho2'] = rho2
                rejects = _map_reps(
                    _alternative_chunk, cfg.alternative_reps,
                    (procedure.name, p, n, signal_s, t0, rho2, cfg.signs,
                     cfg.support, tu, cfg.noise, cfg.seed, index, C,
                     threshold, mode))
                power = sum(1 for r in rejects if r) / cfg.alternative_reps
                record['type2'] = 1.0 - power
                record['type2_se'] = power_se(power, cfg.alternative_reps)
                record['alt_reps'] = cfg.alternative_reps
            except (ValueError, ArithmeticError) as e:
                logger.warning("Cell aborted (setting {0}, t0={1}, "
                               "signal={2}): {3}".format(index, t0, rung, e))
                record['error'] = str(e)
            record['wall_time'] = time.time() - cell_start
            records.append(record)
    return records


def run_experiment(cfg):
    """
    For each (p, n, s) setting: calibrate (or use the configured threshold),
    estimate the Type I error, then the Type II error at every t0 and signal
    rung. An error in one cell is recorded there and the rest carry on.
    """
    records = []
    for index, (p, n, s) in enumerate(cfg.settings()):
        logger.info("Setting {0}: p={1}, n={2}, s={3}".format(index, p, n, s))
        start = time.time()
        try:
            records.extend(_run_setting(cfg, index, p, n, s))
        except (ValueError, ArithmeticError) as e:
            logger.warning("Setting {0} aborted: {1}".format(index, e))
            records.append(empty_record(
                setting=index, p=p, n=n, s=s, error=str(e),
                wall_time=time.time() - start))
    return ExperimentReport(records, report_metadata(cfg))


def sweep_phase(cfg):
    """
    Power over the (s, signal) grid at a single p, n and t0, for locating
    the empirical detection boundary.
    """
    if len(cfg.p) != 1 or len(cfg.n) != 1 or len(cfg.t0) != 1:
        raise ConfigError("A sweep needs exactly one p, one n and one t0")
    if not cfg.ladder:
        raise ConfigError("A sweep needs a nonempty signal ladder")
    report = run_experiment(cfg)
    s_values = list(cfg.s)
    signals = list(cfg.ladder)
    power = [[None] * len(signals) for _ in s_values]
    ses = [[None] * len(signals) for _ in s_values]
    rho2 = [[None] * len(signals) for _ in s_values]
    for record in report.records:
        if record['type2'] is None or record['signal'] is None:
            continue
        i = record['setting']
        j = signals.index(record['signal'])
        power[i][j] = 1.0 - record['type2']
        ses[i][j] = record['type2_se']
        rho2[i][j] = record['rho2']
    return PowerGrid(s_values, signals, power, ses, rho2, report)


def export(report, fmt, out_dir):
    """
    Write report (an ExperimentReport or a PowerGrid) to out_dir as csv,
    json or hdf5. Returns the paths written.
    """
    if fmt not in EXPORT_FORMATS:
        raise ConfigError("Unknown export format {0!r}".format(fmt))
    grid = None
    if isinstance(report, PowerGrid):
        grid, report = report, report.report
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError("Can't create {0}: {1}".format(out_dir, e))
    paths = []
    if fmt == 'csv':
        paths.append(_write(
            csvwriter.write_report_csv, report,
            os.path.join(out_dir, 'report.csv'), 'w'))
        if grid is not None:
            paths.append(_write(
                csvwriter.write_power_grid_csv, grid,
                os.path.join(out_dir, 'power.csv'), 'w'))
    elif fmt == 'json':
        paths.append(_write(
            jsonwriter.write_report_json, report,
            os.path.join(out_dir, 'report.json'), 'w'))
    else:
        path = os.path.join(out_dir, 'report.h5')
        try:
            hdf5writer.write_report_hdf5(report, path, grid)
        except OSError as e:
            raise OSError("Can't write {0}: {1}".format(path, e))
        paths.append(path)
    return paths


def _write(func, thing, path, mode):
    try:
        with open(path, mode, encoding='utf-8', newline='') as f:
            func(thing, f)
    except OSError as e:
        raise OSError("Can't write {0}: {1}".format(path, e))
    return path

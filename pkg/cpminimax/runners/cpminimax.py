#!/usr/bin/env python
# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# This contains the entry point for the cpminimax executable.

"""Test for a sparse change in mean; calibrate thresholds and run Monte
Carlo experiments.

Usage:
  cpminimax calibrate --proc=<name> --p=<int> --n=<int> [options]
  cpminimax test --input=<file> --proc=<name> [options]
  cpminimax experiment --config=<file> --out=<dir> [options]
  cpminimax sweep --config=<file> --out=<dir> [options]
  cpminimax -h | --help
  cpminimax --version

Options:
  --proc=<name>       Procedure: fixed, adaptive, dense_asym, sparse_asym,
                      spatial_known, spatial_estimated, equicorr,
                      equicorr_adaptive or temporal.
  --s=<int>           Sparsity level, for the procedures that take one.
  --noise=<spec>      Noise model: identity, equicorrelated:<gamma>,
                      temporal:<B> or explicit:<matrix file>.
                      [default: identity]
  --alpha=<float>     Nominal level for calibration. [default: 0.05]
  --reps=<int>        Null replications for calibration. [default: 2000]
  --seed=<int>        Master seed. [default: 0]
  --threshold=<t>     A number, 'auto' to calibrate against the --noise
                      model first, or 'formula' for C times the procedure's
                      rate. [default: auto]
  --C=<float>         Threshold constant. [default: 1.0]
  --cprime=<float>    Window constant of the equicorrelated test.
                      [default: 2.0]
  --gamma=<float>     Equicorrelation; taken from --noise when not given.
  --B=<float>         Temporal dependence bound. [default: 0.0]
  --delta1=<float>    Threshold slack of the asymptotic dense test.
                      [default: 0.1]
  --delta2=<float>    Grid ratio step of the asymptotic tests. [default: 0.1]
  --format=<fmts>     Comma-separated export formats: csv, json, hdf5.
                      [default: csv,json]
  -v, --verbose       Print progress and debugging messages.

Matrix files are CSV (p rows of n values) or the CPMX0001 binary format.
The test command prints a JSON verdict and exits 0 whether or not it
rejects; any error exits 1.
"""

import sys
import json
import logging

from docopt import docopt

from cpminimax import core, harness, matrix_io
from cpminimax import _metadata as meta
from cpminimax.config import DEFAULTS, ExperimentConfig, parse_noise
from cpminimax.procedures import get_procedure, SUPPLIED

logger = logging.getLogger("cpminimax.runners.cpminimax")


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]

    runner = CpminimaxRunner(argv)
    runner.run()


class CpminimaxRunner(object):
    """ Parses the command line and dispatches to one subcommand. """

    def __init__(self, argv, out=None):
        self.argv = argv
        if out is None:
            out = sys.stdout
        self.out = out

    def run(self):
        pargs = docopt(__doc__, self.argv, version=meta.version_description)
        if pargs['--verbose']:
            core.logger.setLevel(logging.DEBUG)
        logger.debug(pargs)
        try:
            if pargs['calibrate']:
                self.calibrate(pargs)
            elif pargs['test']:
                self.test(pargs)
            elif pargs['experiment']:
                self.experiment(pargs)
            elif pargs['sweep']:
                self.sweep(pargs)
        except (ValueError, OSError) as e:
            logger.error(str(e))
            sys.exit(1)

    def emit(self, obj):
        self.out.write(json.dumps(obj, indent=2, sort_keys=True))
        self.out.write("\n")

    def common(self, pargs):
        procedure = get_procedure(pargs['--proc'])
        s = None
        if pargs['--s'] is not None:
            s = int(pargs['--s'])
        if procedure.needs_s and s is None:
            raise ValueError("{0} needs --s".format(procedure.name))
        gamma = pargs['--gamma']
        tuning = {
            'C': float(pargs['--C']),
            'cprime': float(pargs['--cprime']),
            'gamma': None if gamma is None else float(gamma),
            'B': float(pargs['--B']),
            'delta1': float(pargs['--delta1']),
            'delta2': float(pargs['--delta2']),
            'n0_constant': DEFAULTS['n0_constant'],
        }
        noise = parse_noise(pargs['--noise'])
        return procedure, s, tuning, noise

    def calibrate(self, pargs):
        procedure, s, tuning, noise = self.common(pargs)
        p = int(pargs['--p'])
        n = int(pargs['--n'])
        cal = harness.calibrate_procedure(
            procedure, p, n, noise, float(pargs['--alpha']),
            int(pargs['--reps']), int(pargs['--seed']), s=s, tuning=tuning)
        self.emit({
            'procedure': procedure.name,
            'p': p,
            'n': n,
            's': s,
            'noise': noise.describe(),
            'alpha': cal.alpha,
            'reps': int(pargs['--reps']),
            'seed': int(pargs['--seed']),
            'threshold': cal.threshold,
            'constant': cal.constant,
        })

    def test(self, pargs):
        procedure, s, tuning, noise = self.common(pargs)
        X = core.ObservationMatrix(matrix_io.read_matrix(pargs['--input']))
        tu = harness.cell_tuning(procedure, X.p, s, tuning, noise)
        choice = pargs['--threshold']
        if choice == 'formula':
            C, threshold, mode = tu['C'], None, None
        elif choice == 'auto':
            cal = harness.calibrate_procedure(
                procedure, X.p, X.n, noise, float(pargs['--alpha']),
                int(pargs['--reps']), int(pargs['--seed']), s=s,
                tuning=tuning)
            C, threshold, mode = cal.run_kwargs()
        else:
            C, threshold, mode = tu['C'], float(choice), SUPPLIED
        outcome = procedure.run(X, tu, C, threshold, mode)
        self.emit(outcome.as_dict())

    def experiment(self, pargs):
        cfg = ExperimentConfig.load(pargs['--config'])
        report = harness.run_experiment(cfg)
        self.export(report, pargs)

    def sweep(self, pargs):
        cfg = ExperimentConfig.load(pargs['--config'])
        grid = harness.sweep_phase(cfg)
        self.export(grid, pargs)

    def export(self, thing, pargs):
        paths = []
        for fmt in pargs['--format'].split(','):
            paths.extend(harness.export(thing, fmt.strip(), pargs['--out']))
        for path in paths:
            logger.info("Wrote {0}".format(path))
        self.emit({'written': paths})

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# The result containers run_experiment and sweep_phase hand to the writers.

from __future__ import division

SCHEMA_VERSION = 1

# Column order of the CSV export, and the keys of every record.
INT_FIELDS = ('setting', 'p', 'n', 's', 't0', 'null_reps', 'alt_reps')
FLOAT_FIELDS = (
    'signal', 'rho2', 'threshold', 'constant', 'type1', 'type1_se', 'type2',
    'type2_se', 'wall_time')
STR_FIELDS = ('threshold_mode', 'error')
FIELDS = (
    'setting', 'p', 'n', 's', 't0', 'signal', 'rho2', 'threshold',
    'threshold_mode', 'constant', 'type1', 'type1_se', 'null_reps', 'type2',
    'type2_se', 'alt_reps', 'wall_time', 'error')

# Excluded when comparing reruns.
TIMING_FIELDS = ('wall_time',)


def empty_record(**values):
    record = dict((f, None) for f in FIELDS)
    for key, value in values.items():
        if key not in record:
            raise KeyError("Unknown record field: {0}".format(key))
        record[key] = value
    return record


class ExperimentReport(object):
    """ Per-cell records plus run metadata (seed, version, config hash,
    seed scheme). """

    def __init__(self, records=None, metadata=None):
        self.records = list(records or [])
        self.metadata = dict(metadata or {})

    def as_dict(self):
        return {
            'schema_version': SCHEMA_VERSION,
            'metadata': dict(self.metadata),
            'records': [dict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, d):
        records = [empty_record(**r) for r in d.get('records', [])]
        return cls(records, d.get('metadata', {}))

    def body(self):
        """ The records without timing fields, for rerun comparisons. """
        return [
            dict((k, v) for k, v in r.items() if k not in TIMING_FIELDS)
            for r in self.records]

    def __eq__(self, other):
        return (
            isinstance(other, ExperimentReport) and
            self.records == other.records and
            self.metadata == other.metadata)

    def __len__(self):
        return len(self.records)

    def __repr__(self):
        return "ExperimentReport({0} records)".format(len(self.records))


class PowerGrid(object):
    """
    Empirical power for every (s, signal) pair of a sweep. power and
    power_se are lists of rows, one row per s value; missing cells are None.
    """

    def __init__(self, s_values, signals, power, power_se, rho2, report):
        self.s_values = list(s_values)
        self.signals = list(signals)
        self.power = power
        self.power_se = power_se
        self.rho2 = rho2
        self.report = report

    def long_rows(self):
        for i, s in enumerate(self.s_values):
            for j, signal in enumerate(self.signals):
                yield {
                    's': s,
                    'signal': signal,
                    'rho2': self.rho2[i][j],
                    'power': self.power[i][j],
                    'power_se': self.power_se[i][j],
                }

    def __repr__(self):
        return "PowerGrid({0} x {1})".format(
            len(self.s_values), len(self.signals))

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers
#
# Experiment reports as CSV: one row per cell, header row first, RFC-4180
# quoting, UTF-8. Missing values are empty fields. Floats are written with
# repr so they read back bit for bit.

from __future__ import division
import csv

from cpminimax.report import (
    ExperimentReport, FIELDS, INT_FIELDS, FLOAT_FIELDS)

POWER_FIELDS = ['s', 'signal', 'rho2', 'power', 'power_se']


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return value


def write_report_csv(report, out_stream):
    csv_out = csv.DictWriter(
        out_stream, FIELDS, lineterminator='\r\n',
        quoting=csv.QUOTE_MINIMAL)
    csv_out.writeheader()
    for record in report.records:
        csv_out.writerow(
            dict((k, format_value(record.get(k))) for k in FIELDS))


def parse_value(field, text):
    if text == '':
        return None
    if field in INT_FIELDS:
        return int(text)
    if field in FLOAT_FIELDS:
        return float(text)
    return text


def read_report_csv(in_stream, metadata=None):
    """ The records of a CSV report. CSV has no room for metadata; pass it
    in if you have it. """
    records = []
    for row in csv.DictReader(in_stream):
        records.append(dict(
            (f, parse_value(f, row.get(f, ''))) for f in FIELDS))
    return ExperimentReport(records, metadata)


def write_power_grid_csv(grid, out_stream):
    """ Long format: one row per (s, signal) pair. """
    csv_out = csv.DictWriter(
        out_stream, POWER_FIELDS, lineterminator='\r\n')
    csv_out.writeheader()
    for row in grid.long_rows():
        csv_out.writerow(
            dict((k, format_value(row[k])) for k in POWER_FIELDS))

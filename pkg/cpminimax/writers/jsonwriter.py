# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers
#
# Experiment reports as a schema-versioned JSON object:
#   {"schema_version": 1, "metadata": {...}, "records": [{...}, ...]}

import json

from cpminimax.report import ExperimentReport, SCHEMA_VERSION
from cpminimax.exceptions import ConfigError


def write_report_json(report, out_stream):
    json.dump(report.as_dict(), out_stream, indent=2, sort_keys=True)
    out_stream.write("\n")


def read_report_json(in_stream):
    d = json.load(in_stream)
    version = d.get('schema_version')
    if version != SCHEMA_VERSION:
        raise ConfigError("Unsupported report schema version {0!r}".format(
            version))
    return ExperimentReport.from_dict(d)

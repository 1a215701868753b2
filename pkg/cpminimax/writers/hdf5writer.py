# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers
#
# Experiment reports as HDF5, using h5py: http://www.h5py.org/
#
# Layout:
#   /                 attrs: schema_version and the report metadata
#   /records/<field>  one dataset per record field; numeric fields are f8
#                     with NaN for missing values, text fields are strings
#   /power            (sweeps only) power, power_se and rho2 as len(s) x
#                     len(signal) arrays, with s and signal datasets

import numpy as np

from cpminimax.report import FIELDS, STR_FIELDS, SCHEMA_VERSION
from cpminimax.exceptions import ConfigError

import logging
logger = logging.getLogger("cpminimax.writers.hdf5writer")

try:
    import h5py
except ImportError:
    h5py = None

COMPRESSION_OPTS = {'compression': 'gzip'}


def _numeric(values):
    return np.array(
        [np.nan if v is None else float(v) for v in values], dtype='f8')


def _grid_array(rows):
    return np.array(
        [[np.nan if v is None else v for v in row] for row in rows],
        dtype='f8')


def write_report_hdf5(report, path, grid=None):
    if h5py is None:
        raise ConfigError("HDF5 export requires h5py")
    with h5py.File(path, 'w') as hdf5_file:
        hdf5_file.attrs['schema_version'] = SCHEMA_VERSION
        for key, value in sorted(report.metadata.items()):
            hdf5_file.attrs[key] = value
        rg = hdf5_file.create_group('/records')
        for field in FIELDS:
            values = [r.get(field) for r in report.records]
            logger.debug("Creating dataset {0}".format(field))
            if field in STR_FIELDS:
                data = np.array(
                    ['' if v is None else v for v in values],
                    dtype=h5py.string_dtype())
                rg.create_dataset(field, data=data)
            else:
                opts = COMPRESSION_OPTS if values else {}
                rg.create_dataset(field, data=_numeric(values), **opts)
        if grid is not None:
            pg = hdf5_file.create_group('/power')
            pg.create_dataset(
                's', data=_numeric(grid.s_values))
            pg.create_dataset('signal', data=_numeric(grid.signals))
            pg.create_dataset('power', data=_grid_array(grid.power))
            pg.create_dataset('power_se', data=_grid_array(grid.power_se))
            pg.create_dataset('rho2', data=_grid_array(grid.rho2))

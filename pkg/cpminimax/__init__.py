# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

from __future__ import absolute_import

from cpminimax import core

from ._metadata import version as __version__, author as __author__  # noqa


def read_matrix(filelike):
    """
    Read an observation matrix (a filename or a binary IO object, CSV or
    CPMX0001 binary) and return an ObservationMatrix.
    """
    from cpminimax import matrix_io
    return core.ObservationMatrix(matrix_io.read_matrix(filelike))

# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# Reading and writing p x n observation matrices. Two formats:
#
#   CSV:    p rows of n comma-separated values, no header, '.' decimal.
#   Binary: the 8 bytes b"CPMX0001", then p and n as little-endian u64,
#           then p*n little-endian float64 values, column-major (all of X_1,
#           then all of X_2, ...).
#
# read_matrix sniffs the magic bytes, so callers don't have to say which.
# See notes/matrix_format.md.

from __future__ import division
from contextlib import contextmanager
import io
import struct

import numpy as np

from cpminimax.exceptions import MatrixFormatError

import logging
logger = logging.getLogger("cpminimax.matrix_io")

MAGIC = b"CPMX0001"
HEADER = struct.Struct(str('<QQ'))
VALUE_DTYPE = np.dtype('<f8')


@contextmanager
def open_or_yield(thing, mode):
    """ If 'thing' is a string, open it and yield it. Otherwise, yield it.

    This lets you use a filename, open file, other IO object. If 'thing' was
    a filename, the file is guaranteed to be closed after yielding.
    """
    if isinstance(thing, str):
        with open(thing, mode) as f:
            yield(f)
    else:
        yield(thing)


def read_matrix(fo):
    """ Read a p x n float64 matrix from a filename or binary stream. """
    with open_or_yield(fo, 'rb') as f:
        data = f.read()
    if data[:len(MAGIC)] == MAGIC:
        return _decode_binary(data)
    return _decode_csv(data)


def _decode_binary(data):
    offset = len(MAGIC)
    if len(data) < offset + HEADER.size:
        raise MatrixFormatError("Binary matrix header is truncated")
    p, n = HEADER.unpack_from(data, offset)
    offset += HEADER.size
    logger.debug("Binary matrix: p={0}, n={1}".format(p, n))
    expected = p * n * VALUE_DTYPE.itemsize
    payload = data[offset:]
    if len(payload) != expected:
        raise MatrixFormatError(
            "Expected {0} payload bytes for p={1}, n={2}, found {3}".format(
                expected, p, n, len(payload)))
    values = np.frombuffer(payload, dtype=VALUE_DTYPE, count=p * n)
    return values.reshape((n, p)).T.astype(np.float64)


def _decode_csv(data):
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError:
        raise MatrixFormatError("Matrix file is neither binary nor UTF-8 CSV")
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise MatrixFormatError("Matrix file is empty")
    try:
        values = np.loadtxt(io.StringIO(text), delimiter=',', ndmin=2)
    except ValueError as e:
        raise MatrixFormatError("Malformed CSV matrix: {0}".format(e))
    return values


def write_matrix_binary(X, fo):
    values = np.asarray(X, dtype=np.float64)
    p, n = values.shape
    with open_or_yield(fo, 'wb') as f:
        f.write(MAGIC)
        f.write(HEADER.pack(p, n))
        f.write(values.T.astype(VALUE_DTYPE).tobytes())


def write_matrix_csv(X, fo):
    """ Values are written with repr, so they read back exactly. """
    values = np.asarray(X, dtype=np.float64)
    lines = [
        ",".join(repr(float(v)) for v in row) for row in values]
    with open_or_yield(fo, 'w') as f:
        f.write("\n".join(lines) + "\n")

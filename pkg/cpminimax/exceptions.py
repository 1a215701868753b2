# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers


class DomainError(ValueError):
    """An argument or a data value lies outside where the math is defined."""


class ConfigError(ValueError):
    """An experiment configuration or command-line setting is unusable."""


class MatrixFormatError(ValueError):
    """A matrix file could not be decoded."""

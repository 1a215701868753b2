# coding: utf8
# Part of the cpminimax package for testing for a sparse change in mean.
#
# Copyright (c) 2026 The cpminimax developers

# NOTE: This file must not import anything, or it will break installation.

version_tuple = (0, 3, 0)
version = ".".join([str(p) for p in version_tuple])
version_description = "cpminimax {0}".format(version)

author = "The cpminimax developers"
license = "MIT"
copyright = "Copyright (c) 2026 The cpminimax developers"

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Exceptions For The Cut Order Planner
# This file is part of CutPlan.
# Copyright (C) 2024-2026 The CutPlan Developers
# CutPlan is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License version 3 or,
# at your option, any later version.
#
# CutPlan is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with CutPlan.  If not, see <http://www.gnu.org/licenses/>.

"""
The exceptions raised by CutPlan. Every exception carries the exit status
the command line front end uses when it reaches the top level:

    0   success
    1   validation or domain error
    2   usage error (bad flags, bad config file)
    3   internal numeric failure

Each class also derives from the closest builtin exception, so callers
that don't care about CutPlan's hierarchy can catch ValueError,
RuntimeError or ArithmeticError as usual.

.. module: errors.py
    :platform: Any
    :synopsis: Exception hierarchy and exit codes.

"""

class CutPlanError(Exception):
    """Base class for everything CutPlan raises on purpose."""
    exit_code = 1

class DomainError(CutPlanError):
    """A cut order planning rule was broken."""
    exit_code = 1

class InvalidOrderError(DomainError, ValueError):
    """A size or an order has a value no cutting room could work with."""

class InvalidSectionError(DomainError, ValueError):
    """A section has no garments, negative counts, or no whole plies."""

class DimensionError(DomainError, ValueError):
    """A vector doesn't have one entry per size in the order."""

class ConstraintError(DomainError, RuntimeError):
    """A section breaks the board length or ply height constraint."""

class NoActionError(DomainError, RuntimeError):
    """There is no remaining demand to cut, so no section can be decoded."""

class OracleRefusal(DomainError, RuntimeError):
    """The exhaustive search was asked to solve an instance beyond its limits."""

class OrderFormatError(DomainError, ValueError):
    """
    An order file couldn't be read. The diagnostics attribute holds one
    message per problem found, each naming the row or field at fault.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

class CheckpointError(DomainError, ValueError):
    """A checkpoint file is missing, malformed, or has the wrong dimensions."""

class ConfigError(CutPlanError, ValueError):
    """A configuration file or flag value is invalid."""
    exit_code = 2

class NumericError(CutPlanError, ArithmeticError):
    """A non-finite number turned up where only finite ones make sense."""
    exit_code = 3

class TrainingAborted(NumericError):
    """Training stopped because the loss went non-finite."""

    def __init__(self, message, episode, seed):
        super().__init__(message)
        self.episode = episode
        self.seed = seed

    def as_record(self):
        """Return a JSON-friendly diagnostic record."""
        return {"error": str(self), "episode": self.episode, "seed": self.seed}

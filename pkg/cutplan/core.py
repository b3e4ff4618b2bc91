#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Cut Order Planning Domain Model
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
This is the part of the package that holds the cut order planning domain
model: orders, sections, cut plans, the board and ply constraints, and the
fabric and waste accounting.

Everything in here is an immutable value object or a pure function, so it
is safe to share between threads and processes.

Lengths are in yards. Marker lengths and consumptions are stored as
fractions.Fraction, so all of the accounting is exact: garment counts are
integers and yards only become fractional through the inputs.

For example:

>>> from cutplan import core
>>> order = core.Order.uniform(["XS", "S", "M"], [4, 4, 4], board_len=9, marker_len=3)
>>> plan = core.CutPlan((core.Section(4, (1, 1, 1)),))
>>> core.validate_plan(plan, order).feasible_exact
True

.. module: core.py
    :platform: Any
    :synopsis: Orders, sections, plans, constraint checks, and accounting.

"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionError, InvalidOrderError, InvalidSectionError

logger = logging.getLogger(__name__)

#The size labels used in the garment order the toolkit was built around.
STANDARD_SIZES = ("XS", "S", "M", "L", "XL", "XXL")

def to_fraction(value):
    """
    Convert a number to an exact Fraction.

    Floats go through their shortest decimal form, so 0.1 becomes 1/10
    rather than the nearest binary fraction.

    Args:
        value (int, float, str, Fraction):  The number.

    Returns:
        Fraction.

    Usage:

    >>> to_fraction(2.5)
    Fraction(5, 2)
    """

    if isinstance(value, Fraction):
        return value

    if isinstance(value, float):
        return Fraction(repr(value))

    return Fraction(value)

@dataclass(frozen=True)
class SizeSpec:
    """One garment size: its label, marker length, and fabric consumption."""
    label: str
    marker_len: Fraction
    consumption: Fraction

    def __post_init__(self):
        object.__setattr__(self, "marker_len", to_fraction(self.marker_len))
        object.__setattr__(self, "consumption", to_fraction(self.consumption))

        if self.marker_len <= 0:
            raise InvalidOrderError("size "+self.label+": marker_len must be positive")

        if self.consumption <= 0:
            raise InvalidOrderError("size "+self.label+": consumption must be positive")

@dataclass(frozen=True)
class Order:
    """
    A garment order: the sizes in order, the demand for each, and the
    length of the cutting board.
    """
    sizes: tuple
    demands: tuple
    board_len: Fraction

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(self.sizes))
        object.__setattr__(self, "demands", tuple(int(d) for d in self.demands))
        object.__setattr__(self, "board_len", to_fraction(self.board_len))

        if not self.sizes:
            raise InvalidOrderError("an order needs at least one size")

        if len(self.demands) != len(self.sizes):
            raise DimensionError("order has "+str(len(self.sizes))+" sizes but "
                                 + str(len(self.demands))+" demands")

        for spec, demand in zip(self.sizes, self.demands):
            if demand < 0:
                raise InvalidOrderError("size "+spec.label+": demand must not be negative")

        if self.board_len < max(spec.marker_len for spec in self.sizes):
            raise InvalidOrderError("board length "+str(self.board_len)+" is shorter than the "
                                    + "longest marker, so some size could never be cut")

    @classmethod
    def uniform(cls, labels, demands, board_len, marker_len, consumption=None):
        """
        Build an order where every size has the same marker length and
        consumption (consumption defaults to the marker length).

        Usage:

        >>> Order.uniform(STANDARD_SIZES, [78, 151, 214, 188, 172, 36], 9, 3)
        """

        if consumption is None:
            consumption = marker_len

        sizes = tuple(SizeSpec(label, marker_len, consumption) for label in labels)
        return cls(sizes, tuple(demands), board_len)

    @property
    def n(self):
        """The number of sizes."""
        return len(self.sizes)

    @property
    def labels(self):
        return tuple(spec.label for spec in self.sizes)

    @property
    def marker_lens(self):
        return tuple(spec.marker_len for spec in self.sizes)

    @property
    def total_demand(self):
        """Total number of garments ordered."""
        return sum(self.demands)

    @property
    def total_demand_fabric(self):
        """R: the fabric the order needs, sum of demand times consumption."""
        return sum((d * spec.consumption for d, spec in zip(self.demands, self.sizes)),
                   Fraction(0))

    def with_demands(self, demands):
        """Return a copy of this order with different demands."""
        return Order(self.sizes, tuple(demands), self.board_len)

@dataclass(frozen=True)
class Section:
    """
    One spreading group: a ply count and, for each size, how many
    garments of that size the marker holds.
    """
    plies: int
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

        if int(self.plies) != self.plies or self.plies < 1:
            raise InvalidSectionError("a section needs a positive whole number of plies, got "
                                      + str(self.plies))

        object.__setattr__(self, "plies", int(self.plies))

        if any(c < 0 for c in self.counts):
            raise InvalidSectionError("marker counts must not be negative")

        if not any(c > 0 for c in self.counts):
            raise InvalidSectionError("a section must cut at least one garment")

    @property
    def garments_per_ply(self):
        return sum(self.counts)

    @property
    def selected(self):
        """Indices of the sizes this section cuts."""
        return tuple(i for i, c in enumerate(self.counts) if c > 0)

@dataclass(frozen=True)
class CutPlan:
    """An ordered list of sections."""
    sections: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))

    def __len__(self):
        return len(self.sections)

    def __iter__(self):
        return iter(self.sections)

    def __add__(self, other):
        return CutPlan(self.sections + other.sections)

    def append(self, section):
        """Return a new plan with section added at the end."""
        return CutPlan(self.sections + (section,))

@dataclass(frozen=True)
class SectionCheck:
    """The constraint status of one section in a plan."""
    index: int
    layer_len: Fraction
    board_ok: bool
    plies_ok: bool = True

@dataclass(frozen=True)
class ValidationReport:
    """What validate_plan found."""
    sections: tuple
    production: tuple
    balance: tuple

    @property
    def board_ok(self):
        return all(check.board_ok for check in self.sections)

    @property
    def plies_ok(self):
        return all(check.plies_ok for check in self.sections)

    @property
    def exact(self):
        """True if every size is produced exactly as ordered."""
        return all(b == 0 for b in self.balance)

    @property
    def feasible_exact(self):
        return self.board_ok and self.plies_ok and self.exact

    @property
    def status(self):
        if self.feasible_exact:
            return "FEASIBLE-EXACT"

        if self.board_ok and self.plies_ok:
            return "FEASIBLE-INEXACT"

        return "INFEASIBLE"

    def to_dict(self):
        return {
            "status": self.status,
            "feasible_exact": self.feasible_exact,
            "sections": [{"index": c.index, "layer_len": float(c.layer_len),
                          "board_ok": c.board_ok, "plies_ok": c.plies_ok}
                         for c in self.sections],
            "production": list(self.production),
            "balance": list(self.balance),
        }

def _check_dims(counts, order):
    if len(counts) != order.n:
        raise DimensionError("section has "+str(len(counts))+" counts but the order has "
                             + str(order.n)+" sizes")

def layer_length(section, order):
    """
    Get C, the marker length a section spreads on every ply.

    Args:
        section (Section):  The section.
        order (Order):      The order it belongs to.

    Returns:
        Fraction.   Sum over sizes of count times marker length.

    Raises:
        DimensionError, if the section and order disagree on the number
        of sizes.
    """

    _check_dims(section.counts, order)
    return sum((c * m for c, m in zip(section.counts, order.marker_lens)), Fraction(0))

def production(plan, order):
    """
    Get P, the number of garments of each size the plan produces.

    Returns:
        tuple of int, one per size.
    """

    produced = [0] * order.n

    for section in plan:
        _check_dims(section.counts, order)

        for i, count in enumerate(section.counts):
            produced[i] += section.plies * count

    return tuple(produced)

def fabric_used(plan, order):
    """F: the fabric the plan spreads, sum of plies times layer length."""
    return sum((section.plies * layer_length(section, order) for section in plan), Fraction(0))

def waste(plan, order):
    """
    W = F - R. This is negative when the plan under-produces; that isn't
    clamped here, validate_plan flags it instead.
    """

    return fabric_used(plan, order) - order.total_demand_fabric

def board_utilisation(plan, order):
    """
    The share of the spread board length actually covered by markers.

    Returns:
        Fraction in [0, 1], or 0 for an empty plan.
    """

    spread = sum((section.plies * order.board_len for section in plan), Fraction(0))

    if spread == 0:
        return Fraction(0)

    return fabric_used(plan, order) / spread

def validate_plan(plan, order, max_plies=None):
    """
    Check a plan against the board length constraint (C <= L), the
    optional ply height cap, and exact demand fulfilment (P = d).

    Violations are reported, not raised.

    Args:
        plan (CutPlan):     The plan.
        order (Order):      The order it should fulfil.

    Kwargs:
        max_plies (int):    The most plies one section may have. Default
                            None, meaning no cap.

    Returns:
        ValidationReport.

    Raises:
        DimensionError, if a section has the wrong number of counts.

    Usage:

    >>> report = validate_plan(plan, order)
    >>> report.status
    'FEASIBLE-EXACT'
    """

    checks = []

    for index, section in enumerate(plan):
        length = layer_length(section, order)
        plies_ok = max_plies is None or section.plies <= max_plies

        checks.append(SectionCheck(index=index, layer_len=length,
                                   board_ok=(0 < length <= order.board_len),
                                   plies_ok=plies_ok))

        if not checks[-1].board_ok:
            logger.debug("section %d: layer length %s exceeds board length %s",
                         index, length, order.board_len)

    produced = production(plan, order)
    balance = tuple(d - p for d, p in zip(order.demands, produced))

    return ValidationReport(sections=tuple(checks), production=produced, balance=balance)

def plan_summary(plan, order):
    """
    Summarise a plan: section count, garments, fabric, waste and board
    utilisation, as plain floats for reporting.
    """

    report = validate_plan(plan, order)

    return {
        "sections": len(plan),
        "garments": sum(report.production),
        "fabric_used": float(fabric_used(plan, order)),
        "demand_fabric": float(order.total_demand_fabric),
        "waste": float(waste(plan, order)),
        "utilisation": float(board_utilisation(plan, order)),
        "status": report.status,
    }

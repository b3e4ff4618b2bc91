#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Non-learning Planners For The Cut Order Planner
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
This is the part of the package that holds the planners that don't
learn anything:

- greedy_plan(): a sliding window over the size order. This is the
  planner that reproduces the reference allocation table row for row.
- largest_remaining_plan(): the same marker filling, but sizes are taken
  by largest remaining demand.
- random_plan(): sections decoded from uniformly random score vectors.
- oracle_min_sections(): an exhaustive depth-first search for the
  smallest number of sections that fulfils an order exactly. Only small
  instances are accepted.

.. module: baselines.py
    :platform: Any
    :synopsis: Greedy, random and exhaustive planners.

"""

import logging
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import core
from . import env
from .errors import OracleRefusal

logger = logging.getLogger(__name__)

def _plan_from_priority(order, priority, max_plies=None):
    """Run fill_section until nothing remains, ranking sizes with priority(remaining)."""
    remaining = list(order.demands)
    sections = []

    while any(r > 0 for r in remaining):
        section = env.fill_section(priority(remaining), remaining, order, max_plies=max_plies)
        sections.append(section)

        for i, count in enumerate(section.counts):
            remaining[i] -= section.plies * count

    return core.CutPlan(tuple(sections))

def greedy_plan(order, max_plies=None):
    """
    Plan an order by repeatedly cutting the lowest-indexed sizes that
    still have demand, one garment each, as many as fit on the board,
    with plies equal to the smallest of their remaining demands.

    Args:
        order (Order):  The order.

    Kwargs:
        max_plies (int):    Optional ply height cap.

    Returns:
        CutPlan. Always FEASIBLE-EXACT, and never has more sections than
        there are sizes with positive demand when there is no ply cap.

    Usage:

    >>> plan = greedy_plan(order)
    """

    return _plan_from_priority(order, lambda remaining: range(order.n), max_plies=max_plies)

def largest_remaining_plan(order, max_plies=None):
    """Like greedy_plan(), but sizes with the most remaining demand go first."""
    return _plan_from_priority(order,
                               lambda remaining: sorted(range(order.n),
                                                        key=lambda i: (-remaining[i], i)),
                               max_plies=max_plies)

@dataclass(frozen=True)
class RandomPlanResult:
    """A random plan, and whether it reached exact fulfilment before the cap."""
    plan: core.CutPlan
    complete: bool

def random_plan(order, seed, max_sections=None, max_plies=None):
    """
    Plan an order by decoding uniformly random score vectors.

    Args:
        order (Order):  The order.
        seed (int):     Seed for numpy's default generator.

    Kwargs:
        max_sections (int):     Give up after this many sections. Default
                                four times the number of sizes.
        max_plies (int):        Optional ply height cap.

    Returns:
        RandomPlanResult. complete is False if the cap was hit first.
    """

    rng = np.random.default_rng(seed)

    if max_sections is None:
        max_sections = 4 * order.n

    state = env.reset(order)
    sections = []

    while not state.exhausted and len(sections) < max_sections:
        section = env.decode_action(rng.random(order.n), state, order, max_plies=max_plies)
        sections.append(section)
        remaining = tuple(max(0, r - section.plies * c)
                          for r, c in zip(state.remaining, section.counts))

        state = env.EnvState(remaining=remaining, step_index=state.step_index + 1)

    if not state.exhausted:
        logger.warning("random_plan(): gave up after %d sections with %s still to cut",
                       max_sections, state.remaining)

    return RandomPlanResult(plan=core.CutPlan(tuple(sections)), complete=state.exhausted)

@dataclass(frozen=True)
class OracleLimits:
    """
    How much work oracle_min_sections() may do.

    max_states bounds the product of (demand + 1) over sizes, the number
    of distinct remaining-demand vectors. node_budget, when set, replaces
    that guard with a hard cap on search nodes. binary_counts restricts
    markers to at most one garment per size.
    """
    max_states: int = 10 ** 7
    node_budget: int = None
    binary_counts: bool = False
    max_plies: int = None

@dataclass(frozen=True)
class OracleResult:
    """The minimum section count, a plan achieving it, and the search effort."""
    min_sections: int
    witness: core.CutPlan
    nodes_explored: int
    fabric_used: float = 0.0

def _count_vectors(order, binary_counts):
    """
    Every non-zero marker that fits on the board, in descending
    lexicographic order.
    """

    ranges = []

    for spec in order.sizes:
        most = int(order.board_len // spec.marker_len)
        ranges.append(range(min(most, 1) if binary_counts else most, -1, -1))

    vectors = []

    for counts in product(*ranges):
        if not any(counts):
            continue

        length = sum(c * m for c, m in zip(counts, order.marker_lens))

        if length <= order.board_len:
            vectors.append(tuple(counts))

    return vectors

def _max_distinct_sizes(order):
    """The most different sizes one marker can hold."""
    total = 0
    fitted = 0

    for marker in sorted(order.marker_lens):
        if total + marker > order.board_len:
            break

        total += marker
        fitted += 1

    return fitted

class _Search:
    """Iterative deepening over canonically ordered sections."""

    def __init__(self, order, limits):
        self.order = order
        self.limits = limits
        self.vectors = _count_vectors(order, limits.binary_counts)
        self.per_marker = _max_distinct_sizes(order)
        self.nodes = 0
        self.failed = set()

    def _tick(self):
        self.nodes += 1

        if self.limits.node_budget is not None and self.nodes > self.limits.node_budget:
            raise OracleRefusal("oracle_min_sections(): node budget of "
                                + str(self.limits.node_budget)+" exceeded")

    def _lower_bound(self, remaining):
        positive = sum(1 for r in remaining if r > 0)
        return math.ceil(positive / self.per_marker)

    def solve(self, remaining, depth, last):
        """
        Find sections (as (counts, plies) pairs) that use up remaining
        in at most depth steps, each not above last in lexicographic
        order. Returns a list, or None if there is no such plan.
        """

        self._tick()

        if not any(remaining):
            return []

        if depth == 0 or self._lower_bound(remaining) > depth:
            return None

        key = (remaining, depth, last)

        if key in self.failed:
            return None

        for counts in self.vectors:
            if last is not None and counts > last[0]:
                continue

            if any(c > r for c, r in zip(counts, remaining)):
                continue

            most = min(r // c for c, r in zip(counts, remaining) if c)

            if self.limits.max_plies is not None:
                most = min(most, self.limits.max_plies)

            for plies in range(most, 0, -1):
                if last is not None and (counts, plies) > last:
                    continue

                after = tuple(r - plies * c for r, c in zip(remaining, counts))
                rest = self.solve(after, depth - 1, (counts, plies))

                if rest is not None:
                    return [(counts, plies)] + rest

        self.failed.add(key)
        return None

def oracle_min_sections(order, limits=None):
    """
    Find the smallest number of sections that produces every size
    exactly, by exhaustive search.

    Sections are generated in non-increasing lexicographic order of
    (counts, plies), which removes reorderings of the same plan. Plies
    are bounded so no size is over-produced, and the search deepens one
    section at a time from a simple lower bound up to the greedy plan's
    length, so the first plan found is a minimum.

    Args:
        order (Order):  The order.

    Kwargs:
        limits (OracleLimits):  Search limits. Default OracleLimits().

    Returns:
        OracleResult.

    Raises:
        OracleRefusal, if the instance is too big for the state guard and
        no node budget was given, or if the node budget runs out.

    Usage:

    >>> result = oracle_min_sections(order)
    >>> result.min_sections
    1
    """

    limits = limits or OracleLimits()
    states = 1

    for demand in order.demands:
        states *= demand + 1

    if limits.node_budget is None and states > limits.max_states:
        raise OracleRefusal("oracle_min_sections(): instance has "+str(states)
                            + " demand states, limit is "+str(limits.max_states)
                            + "; pass a node budget to search anyway")

    search = _Search(order, limits)
    upper = len(greedy_plan(order, max_plies=limits.max_plies))
    start = search._lower_bound(tuple(order.demands))

    for depth in range(start, upper + 1):
        found = search.solve(tuple(order.demands), depth, None)

        if found is not None:
            witness = core.CutPlan(tuple(core.Section(plies=plies, counts=counts)
                                         for counts, plies in found))

            logger.debug("oracle_min_sections(): %d sections after %d nodes",
                         depth, search.nodes)

            return OracleResult(min_sections=len(witness), witness=witness,
                                nodes_explored=search.nodes,
                                fabric_used=float(core.fabric_used(witness, order)))

    #The greedy plan is itself a candidate at depth == upper, so this can't happen.
    raise RuntimeError("oracle_min_sections(): no plan found up to the greedy bound")

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Cut Order Planning Environment
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
This is the part of the package that turns an order into an episodic
decision process. The state is the remaining demand, an action is one
section, and an episode ends when the demand is fulfilled or the step
cap is reached.

The reward for a step is

    (garments that reduce remaining demand / total demand)
        * (layer length / board length)
    - overproduction_weight * (garments beyond remaining demand / total demand)

so an episode that fulfils the order exactly scores its garment-weighted
board utilisation, a number in (0, 1].

The transition functions are pure. CutOrderEnv wraps them in the usual
reset()/step() object for code that prefers a stateful environment; an
instance belongs to exactly one episode loop at a time.

.. module: env.py
    :platform: Any
    :synopsis: The sequential decision process over remaining demand.

"""

import logging
from dataclasses import dataclass

import numpy as np

from . import core
from .errors import ConstraintError, DimensionError, NoActionError

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class EnvState:
    """Remaining demand per size and the number of steps taken."""
    remaining: tuple
    step_index: int = 0

    @property
    def exhausted(self):
        return not any(r > 0 for r in self.remaining)

@dataclass(frozen=True)
class EnvConfig:
    """
    Episode settings.

    max_plies is the optional ply height cap; None (the default) means
    a section may have as many plies as its demand allows.
    """
    max_steps: int = 50
    overproduction_weight: float = 1.0
    max_plies: int = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("env.max_steps must be positive")

        if self.overproduction_weight < 0:
            raise ValueError("env.overproduction_weight must not be negative")

        if self.max_plies is not None and self.max_plies < 1:
            raise ValueError("env.max_plies must be positive when set")

    def check_order(self, order):
        """max_steps has to allow one step per size."""
        if self.max_steps < order.n:
            raise ValueError("env.max_steps ("+str(self.max_steps)+") is smaller than the "
                             + "number of sizes ("+str(order.n)+")")

@dataclass(frozen=True)
class StepOutcome:
    """The result of executing one section."""
    next_state: EnvState
    reward: float
    done: bool
    executed: core.Section
    overproduction: int = 0

def reset(order):
    """
    Start an episode: all of the demand remains and no steps are taken.

    Usage:

    >>> state = reset(order)
    """

    return EnvState(remaining=tuple(order.demands), step_index=0)

def is_terminal(state, cfg):
    """True if the demand is fulfilled or the step cap is reached."""
    return state.exhausted or state.step_index >= cfg.max_steps

def state_features(state, order):
    """
    Encode a state for the network: remaining over ordered demand per
    size, 0 where nothing was ordered.

    Returns:
        numpy array of float64 in [0, 1].
    """

    if len(state.remaining) != order.n:
        raise DimensionError("state has "+str(len(state.remaining))+" sizes, order has "
                             + str(order.n))

    features = np.zeros(order.n, dtype=np.float64)

    for i, (remaining, demand) in enumerate(zip(state.remaining, order.demands)):
        if demand > 0:
            features[i] = remaining / demand

    return features

def fill_section(candidates, remaining, order, max_plies=None):
    """
    Build a section from sizes in priority order.

    Walks candidates, skipping sizes with nothing left to cut, and adds
    one garment of each to the marker while it still fits on the board;
    the first candidate that doesn't fit ends the marker. The ply count
    is the smallest remaining demand among the chosen sizes, so at least
    one of them is fulfilled exactly (unless max_plies cuts it short).

    Args:
        candidates (iterable of int):   Size indices, highest priority first.
        remaining (sequence of int):    Remaining demand per size.
        order (Order):                  The order.

    Kwargs:
        max_plies (int):    Optional ply height cap.

    Returns:
        Section.

    Raises:
        NoActionError, if every remaining demand is zero.
    """

    counts = [0] * order.n
    length = 0

    for i in candidates:
        if remaining[i] <= 0:
            continue

        marker = order.sizes[i].marker_len

        if length + marker > order.board_len:
            break

        counts[i] = 1
        length += marker

    chosen = [i for i, c in enumerate(counts) if c]

    if not chosen:
        raise NoActionError("no size has remaining demand; the episode should be over")

    plies = min(remaining[i] for i in chosen)

    if max_plies is not None:
        plies = min(plies, max_plies)

    return core.Section(plies=plies, counts=tuple(counts))

def decode_action(probs, state, order, max_plies=None):
    """
    Turn a vector of per-size scores into a section.

    Sizes are tried in descending score order, ties going to the lower
    size index, and the marker is filled as described in fill_section().

    Args:
        probs (sequence of float):  One score per size, normally in [0, 1].
        state (EnvState):           The current state.
        order (Order):              The order.

    Kwargs:
        max_plies (int):    Optional ply height cap.

    Returns:
        Section, always within the board length.

    Raises:
        DimensionError, if probs has the wrong length.
        NoActionError, if nothing remains to be cut.
    """

    probs = np.asarray(probs, dtype=np.float64)

    if probs.shape != (order.n,):
        raise DimensionError("expected "+str(order.n)+" scores, got shape "+str(probs.shape))

    #Stable sort on the negated scores keeps lower indices first on ties.
    ranking = np.argsort(-probs, kind="stable")
    return fill_section((int(i) for i in ranking), state.remaining, order, max_plies=max_plies)

def step(state, section, order, cfg):
    """
    Execute a section.

    Remaining demand is reduced by what the section produces, clamped at
    zero; whatever goes past zero counts as overproduction and feeds the
    penalty term of the reward.

    Args:
        state (EnvState):       The current state.
        section (Section):      The section to cut.
        order (Order):          The order.
        cfg (EnvConfig):        Episode settings.

    Returns:
        StepOutcome.

    Raises:
        DimensionError, if the section has the wrong number of counts.
        ConstraintError, if the section is longer than the board or has
        more plies than the cap. The state is left as it was.
        NoActionError, if the episode is already over.
    """

    length = core.layer_length(section, order)

    if length > order.board_len:
        raise ConstraintError("section layer length "+str(length)+" exceeds board length "
                              + str(order.board_len))

    if cfg.max_plies is not None and section.plies > cfg.max_plies:
        raise ConstraintError("section has "+str(section.plies)+" plies, cap is "
                              + str(cfg.max_plies))

    if is_terminal(state, cfg):
        raise NoActionError("step() called on a finished episode")

    total = max(1, order.total_demand)
    useful = 0
    over = 0
    remaining = []

    for left, count in zip(state.remaining, section.counts):
        produced = section.plies * count
        useful += min(produced, left)
        over += max(0, produced - left)
        remaining.append(max(0, left - produced))

    utilisation = float(length / order.board_len)
    reward = (useful / total) * utilisation - cfg.overproduction_weight * (over / total)

    next_state = EnvState(remaining=tuple(remaining), step_index=state.step_index + 1)
    done = is_terminal(next_state, cfg)

    logger.debug("step %d: plies=%d counts=%s reward=%.6f done=%s", next_state.step_index,
                 section.plies, section.counts, reward, done)

    return StepOutcome(next_state=next_state, reward=reward, done=done, executed=section,
                       overproduction=over)

class CutOrderEnv:
    """
    A stateful wrapper around reset() and step() for one order.

    Usage:

    >>> env = CutOrderEnv(order)
    >>> state = env.reset()
    >>> outcome = env.step(decode_action(probs, state, order))
    """

    def __init__(self, order, cfg=None):
        self.order = order
        self.cfg = cfg or EnvConfig()
        self.cfg.check_order(order)
        self.state = None
        self.plan = core.CutPlan()
        self.total_reward = 0.0

    def reset(self):
        self.state = reset(self.order)
        self.plan = core.CutPlan()
        self.total_reward = 0.0
        return self.state

    @property
    def done(self):
        return self.state is not None and is_terminal(self.state, self.cfg)

    def features(self):
        return state_features(self.state, self.order)

    def decode(self, probs):
        return decode_action(probs, self.state, self.order, max_plies=self.cfg.max_plies)

    def step(self, section):
        if self.state is None:
            raise NoActionError("reset() must be called before step()")

        outcome = step(self.state, section, self.order, self.cfg)
        self.state = outcome.next_state
        self.plan = self.plan.append(section)
        self.total_reward += outcome.reward
        return outcome

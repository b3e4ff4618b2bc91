#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Exploration Machinery For The Cut Order Planner
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
This is the part of the package that perturbs the policy's outputs while
training:

- Ornstein-Uhlenbeck noise, discretised with Euler-Maruyama:
  x' = x + theta * (mu - x) * dt + sigma * sqrt(dt) * z
- an epsilon-greedy schedule, eps_k = max(floor, eps0 * decay ** k)
- an amplitude register: non-negative weights alpha with sum(alpha**2) == 1,
  read out as probabilities alpha**2, optionally by repeated measurement.

perturb_and_select() chains them: add the OU state to the probabilities
and clamp, replace the lot with a uniform random vector with probability
epsilon, then normalise to amplitudes. Each stage can be switched off in
ExploreConfig.

All randomness comes from the numpy Generator passed in, so equal seeds
give equal exploration.

.. module: explore.py
    :platform: Any
    :synopsis: OU noise, epsilon schedule, amplitude sampler.

"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

class DegenerateInputError(DomainError, ValueError):
    """The amplitude register was asked to normalise a zero vector."""

def check_ou_parameters(theta, sigma, dt):
    """
    Raise ValueError unless theta * dt lies in (0, 1), sigma is not
    negative and dt is positive.
    """

    if not 0 < theta * dt < 1:
        raise ValueError("ou.theta * ou.dt must lie in (0, 1)")

    if sigma < 0:
        raise ValueError("ou.sigma must not be negative")

    if dt <= 0:
        raise ValueError("ou.dt must be positive")

@dataclass(frozen=True)
class OUState:
    """
    The Ornstein-Uhlenbeck process: one lane per action dimension, with
    long-term mean mu, mean reversion rate theta, volatility sigma and
    time step dt.
    """
    x: np.ndarray
    mu: float = 0.001
    theta: float = 0.15
    sigma: float = 0.2
    dt: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "x", np.array(self.x, dtype=np.float64))
        check_ou_parameters(self.theta, self.sigma, self.dt)

    @classmethod
    def start(cls, lanes, mu=0.001, theta=0.15, sigma=0.2, dt=0.01):
        """A process with every lane at its mean."""
        return cls(x=np.full(lanes, float(mu)), mu=mu, theta=theta, sigma=sigma, dt=dt)

    @property
    def stationary_std(self):
        """sigma / sqrt(2 theta), the continuous-time stationary spread."""
        return self.sigma / np.sqrt(2.0 * self.theta)

    @property
    def lag1_autocorrelation(self):
        return 1.0 - self.theta * self.dt

def _ou_increment(x, mu, theta, sigma, dt, z):
    return x + theta * (mu - x) * dt + sigma * np.sqrt(dt) * z

def ou_step(state, rng, z=None):
    """
    Advance every lane by one time step.

    Args:
        state (OUState):                The current process.
        rng (numpy.random.Generator):   Draws the standard normals.

    Kwargs:
        z (array):  Use these normals instead of drawing. Default None.

    Returns:
        OUState, a new one; state isn't changed.

    Usage:

    >>> ou = ou_step(ou, rng)
    """

    if z is None:
        z = rng.standard_normal(state.x.shape)

    x = _ou_increment(state.x, state.mu, state.theta, state.sigma, state.dt, np.asarray(z))
    return replace(state, x=x)

def ou_reset(state):
    """Put every lane back on the mean."""
    return replace(state, x=np.full(state.x.shape, float(state.mu)))

@dataclass(frozen=True)
class EpsilonSchedule:
    """eps_k = max(floor, eps0 * decay ** k)."""
    eps0: float = 1.0
    decay: float = 0.995
    floor: float = 0.1

    def __post_init__(self):
        if not 0 <= self.floor <= self.eps0 <= 1:
            raise ValueError("epsilon schedule needs 0 <= eps.floor <= eps.start <= 1")

        if not 0 < self.decay < 1:
            raise ValueError("eps.decay must lie in (0, 1)")

def epsilon_at(schedule, k):
    """
    The exploration rate for episode k.

    Usage:

    >>> epsilon_at(EpsilonSchedule(), 0)
    1.0
    >>> epsilon_at(EpsilonSchedule(), 1000)
    0.1
    """

    if k < 0:
        raise ValueError("episode index must not be negative")

    return max(schedule.floor, schedule.eps0 * schedule.decay ** k)

@dataclass(frozen=True)
class Amplitudes:
    """Non-negative amplitudes alpha with sum(alpha ** 2) == 1."""
    alpha: np.ndarray

    @property
    def probs(self):
        return self.alpha ** 2

def to_amplitudes(raw):
    """
    Normalise a non-negative vector to unit Euclidean length.

    Args:
        raw (array):    Non-negative weights, at least one positive.

    Returns:
        Amplitudes. Squaring is monotone on non-negative numbers, so the
        largest raw weight is still the most likely outcome.

    Raises:
        DegenerateInputError, if raw is all zero or has negative entries.
    """

    raw = np.asarray(raw, dtype=np.float64)

    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise DegenerateInputError("amplitudes need finite non-negative weights, got "+str(raw))

    norm = np.linalg.norm(raw)

    if norm == 0:
        raise DegenerateInputError("can't normalise an all-zero weight vector")

    return Amplitudes(alpha=raw / norm)

def measure(amplitudes, rng, shots):
    """
    Measure the register shots times.

    Returns:
        numpy array of int, how often each index came out. Index i comes
        out with probability alpha_i ** 2.
    """

    probs = amplitudes.probs
    probs = probs / probs.sum()
    return rng.multinomial(shots, probs)

@dataclass(frozen=True)
class ExploreConfig:
    """Which exploration stages run, and their parameters."""
    ou_mu: float = 0.001
    ou_theta: float = 0.15
    ou_sigma: float = 0.2
    ou_dt: float = 0.01
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    ou_enabled: bool = True
    epsilon_enabled: bool = True
    amplitude_enabled: bool = True
    measure_shots: int = 0

    def __post_init__(self):
        check_ou_parameters(self.ou_theta, self.ou_sigma, self.ou_dt)

        if self.measure_shots < 0:
            raise ValueError("sampler.measure_shots must not be negative")

    def new_ou(self, lanes):
        return OUState.start(lanes, mu=self.ou_mu, theta=self.ou_theta,
                             sigma=self.ou_sigma, dt=self.ou_dt)

    def exploit_only(self):
        """The same settings with every source of noise switched off."""
        return replace(self, ou_enabled=False, epsilon_enabled=False, measure_shots=0)

def perturb_and_select(probs, eps, ou, rng, config=None):
    """
    Perturb the policy's probabilities for one decision.

    Args:
        probs (array):                  The network's outputs, in (0, 1).
        eps (float):                    The exploration rate.
        ou (OUState):                   The current OU noise.
        rng (numpy.random.Generator):   Randomness.

    Kwargs:
        config (ExploreConfig):     Stage switches. Default ExploreConfig().

    Returns:
        tuple (vector, mode). mode is "explore" if the epsilon draw
        replaced the vector with a uniform random one, else "exploit".
    """

    config = config or ExploreConfig()
    probs = np.asarray(probs, dtype=np.float64)
    vector = probs

    if config.ou_enabled:
        vector = np.clip(probs + ou.x, 0.0, 1.0)

    mode = "exploit"

    if config.epsilon_enabled and eps > 0 and rng.random() < eps:
        vector = rng.random(probs.shape)
        mode = "explore"

    if config.amplitude_enabled:
        try:
            amplitudes = to_amplitudes(vector)

        except DegenerateInputError:
            #Everything clamped to zero; decoding falls back to index order.
            logger.debug("perturb_and_select(): all-zero vector, amplitude stage skipped")

        else:
            if config.measure_shots > 0:
                vector = measure(amplitudes, rng, config.measure_shots) / config.measure_shots

            else:
                vector = amplitudes.probs

    return vector, mode

#------------------------------------ Noise statistics ------------------------------------
def noise_stats(n=100000, seed=0, lanes=256, mu=0.001, theta=0.15, sigma=0.2, dt=0.01,
                chunk=1000):
    """
    Run the OU process and compare its empirical moments with the
    closed forms.

    Each lane starts from the stationary law N(mu, sigma**2 / (2 theta)),
    so no burn-in is needed, and statistics are pooled across lanes. The
    lanes are one OUState advanced by ou_step(), fed normals drawn chunk
    rows at a time.

    Args:
        n (int):        Steps per lane.
        seed (int):     Generator seed.
        lanes (int):    Independent lanes to pool.

    Returns:
        dict with mean, std, lag1 and their expected values, the
        tolerances, and a boolean "passed".
    """

    if n < 2:
        raise ValueError("noise_stats() needs at least two steps")

    rng = np.random.default_rng(seed)
    state = OUState.start(lanes, mu=mu, theta=theta, sigma=sigma, dt=dt)
    state = replace(state, x=mu + state.stationary_std * rng.standard_normal(lanes))

    first = state.x.copy()
    total = state.x.copy()
    total_sq = state.x * state.x
    total_lag = np.zeros(lanes)
    done = 1

    while done < n:
        block = rng.standard_normal((min(chunk, n - done), lanes))
        previous = state.x

        #Overwrite each row of noise with the state ou_step() makes of it.
        for row in block:
            state = ou_step(state, rng, z=row)
            row[...] = state.x

        total += block.sum(axis=0)
        total_sq += (block * block).sum(axis=0)
        total_lag += previous * block[0] + (block[1:] * block[:-1]).sum(axis=0)
        done += len(block)

    x = state.x
    count = n * lanes
    mean = total.sum() / count
    variance = total_sq.sum() / count - mean ** 2

    #Lag-1 pairs exclude the last sample of each lane (as first term) and the first (as second).
    pairs = (n - 1) * lanes
    head = (total - x).sum() / pairs
    tail = (total - first).sum() / pairs
    covariance = total_lag.sum() / pairs - head * tail
    lag1 = covariance / variance

    std = float(np.sqrt(variance))
    expected_std = float(state.stationary_std)
    expected_lag1 = float(state.lag1_autocorrelation)

    report = {
        "n": n, "lanes": lanes, "seed": seed,
        "mean": float(mean), "expected_mean": mu, "mean_tolerance": 0.01,
        "std": std, "expected_std": expected_std, "std_rel_tolerance": 0.05,
        "lag1": float(lag1), "expected_lag1": expected_lag1, "lag1_tolerance": 0.01,
    }

    report["passed"] = bool(abs(report["mean"] - mu) <= 0.01
                            and abs(std - expected_std) <= 0.05 * expected_std
                            and abs(report["lag1"] - expected_lag1) <= 0.01)

    logger.info("noise_stats(): mean=%.5f std=%.5f lag1=%.5f passed=%s", report["mean"],
                std, report["lag1"], report["passed"])

    return report

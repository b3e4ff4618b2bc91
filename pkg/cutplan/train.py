#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Policy Gradient Training For The Cut Order Planner
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
This is the part of the package that trains the policy network with
REINFORCE.

Each episode is rolled out with the LSTM policy, OU noise and epsilon
exploration; discounted returns are turned into advantages with a
baseline per step index and a running scale; the loss

    -sum_t log pi(a_t | s_t) * A_t

is backpropagated through time and Adam takes one step. The action model
behind log pi treats every size that still has demand as an independent
Bernoulli: selected sizes contribute log p_i, unselected ones log(1 - p_i).

One training run is strictly sequential. train_many() runs independent
seeds in worker processes.

.. module: train.py
    :platform: Any
    :synopsis: Episode rollouts, returns, policy loss, training loop,
               evaluation.

"""

import csv
import json
import logging
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import core
from . import env
from . import explore
from . import neuro
from .env import EnvConfig
from .explore import ExploreConfig
from .errors import DimensionError, NumericError, TrainingAborted

logger = logging.getLogger(__name__)

METRICS_HEADER = ("episode", "total_reward", "loss", "epsilon", "steps")

#Probabilities are kept this far from 0 and 1 before taking logs.
PROB_CLAMP = 1e-7

@dataclass(frozen=True)
class TrainConfig:
    """Everything one training run needs besides the order."""
    episodes: int = 1000
    gamma: float = 0.99
    lr: float = 0.001
    hidden: int = 64
    seed: int = 0
    norm_window: int = 100
    log_every: int = 100
    onpolicy_logprob: bool = True
    env: EnvConfig = field(default_factory=EnvConfig)
    explore: ExploreConfig = field(default_factory=ExploreConfig)

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError("train.gamma must lie in [0, 1]")

        if self.episodes < 1:
            raise ValueError("train.episodes must be at least 1")

        if self.lr <= 0:
            raise ValueError("train.lr must be positive")

        if self.norm_window < 0:
            raise ValueError("train.norm_window must not be negative")

@dataclass
class TraceStep:
    """One decision in an episode."""
    features: np.ndarray
    probs: np.ndarray
    vector: np.ndarray
    mode: str
    section: core.Section
    selected: np.ndarray
    eligible: np.ndarray
    reward: float
    cache: neuro.StepCache

@dataclass
class EpisodeTrace:
    """A whole episode, step by step, plus its totals."""
    steps: list
    plan: core.CutPlan
    total_reward: float
    fulfilled: bool

    def __len__(self):
        return len(self.steps)

    @property
    def rewards(self):
        return [step.reward for step in self.steps]

@dataclass(frozen=True)
class EpisodeMetrics:
    """One row of the metrics file."""
    episode: int
    total_reward: float
    loss: float
    epsilon: float
    steps: int

class RunningStats:
    """
    Mean and standard deviation of everything seen so far, or of the last
    window values if window is positive.
    """

    def __init__(self, window=0):
        self.window = window
        self.values = deque(maxlen=window) if window else None
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def push(self, value):
        value = float(value)

        if self.values is not None:
            self.values.append(value)
            self.count = len(self.values)
            self.mean = float(np.mean(self.values))
            self._m2 = float(np.sum((np.asarray(self.values) - self.mean) ** 2))
            return

        #Welford.
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (value - self.mean)

    @property
    def std(self):
        if self.count < 2:
            return 1.0

        return float(np.sqrt(self._m2 / self.count))

class StepBaseline:
    """
    The baseline and scale behind the advantages.

    Returns are compared with earlier returns at the same step index, so
    the first decision of an episode is judged against earlier first
    decisions and the last against earlier last ones. The scale is the
    standard deviation of what is left once the baseline is taken off.
    Both look at the last window values if window is positive.
    """

    def __init__(self, window=0):
        self.window = window
        self.by_step = []
        self.residuals = RunningStats(window=window)

    def baselines(self, length):
        """b_t for t in range(length); 0 where no return has been seen yet."""
        return np.array([self.by_step[t].mean if t < len(self.by_step) else 0.0
                         for t in range(length)])

    @property
    def scale(self):
        return max(self.residuals.std, 1e-8)

    def push(self, episode_returns):
        """Fold in one episode's returns, after its advantages were used."""
        for t, value in enumerate(episode_returns):
            if t == len(self.by_step):
                self.by_step.append(RunningStats(window=self.window))

            stats = self.by_step[t]

            if stats.count:
                self.residuals.push(value - stats.mean)

            stats.push(value)

def run_episode(order, params, explore_config, eps, rng, env_config=None):
    """
    Roll out one episode with the policy.

    Every step: features -> LSTM -> sigmoid head -> perturb_and_select ->
    decode_action -> env step. The OU process is reset at the start and
    stepped before each decision; the network starts from a zero carry.

    Args:
        order (Order):                      The order.
        params (PolicyParams):              The network.
        explore_config (ExploreConfig):     Exploration switches and parameters.
        eps (float):                        Exploration rate for this episode.
        rng (numpy.random.Generator):       All randomness.

    Kwargs:
        env_config (EnvConfig):     Episode settings. Default EnvConfig().

    Returns:
        EpisodeTrace.

    Raises:
        NoActionError, from decode_action(), if an episode keeps going
        after its demand is used up (which would be a bug).
    """

    env_config = env_config or env.EnvConfig()
    ou = explore.ou_reset(explore_config.new_ou(order.n))
    net_state = neuro.NetState.zeros(params.hidden_dim)
    state = env.reset(order)
    steps = []
    sections = []
    total = 0.0

    while not env.is_terminal(state, env_config):
        features = env.state_features(state, order)
        net_state, cache = neuro.policy_step(features, net_state, params)

        if explore_config.ou_enabled:
            ou = explore.ou_step(ou, rng)

        vector, mode = explore.perturb_and_select(cache.probs, eps, ou, rng, explore_config)
        section = env.decode_action(vector, state, order, max_plies=env_config.max_plies)
        outcome = env.step(state, section, order, env_config)

        steps.append(TraceStep(
            features=features, probs=cache.probs, vector=np.asarray(vector), mode=mode,
            section=section,
            selected=np.array([c > 0 for c in section.counts]),
            eligible=np.array([r > 0 for r in state.remaining]),
            reward=outcome.reward, cache=cache))

        sections.append(section)
        total += outcome.reward
        state = outcome.next_state

    return EpisodeTrace(steps=steps, plan=core.CutPlan(tuple(sections)), total_reward=total,
                        fulfilled=state.exhausted)

def returns(trace, gamma):
    """
    Discounted returns, G_t = r_t + gamma * G_{t+1}.

    Args:
        trace (EpisodeTrace or sequence of float):  The rewards.
        gamma (float):                              Discount factor.

    Returns:
        numpy array, one return per step.

    Usage:

    >>> returns([0, 0, 1], 0.5)
    array([0.25, 0.5 , 1.  ])
    """

    rewards = trace.rewards if isinstance(trace, EpisodeTrace) else list(trace)
    out = np.zeros(len(rewards))
    running = 0.0

    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        out[t] = running

    return out

def policy_loss(trace, episode_returns, baseline, scale=1.0, skip_explore=False):
    """
    The REINFORCE loss and its gradient with respect to the network's
    output probabilities at every step.

    log pi is taken under the network's own outputs, before any noise;
    the perturbations are treated as exploration with no importance
    correction.

    Args:
        trace (EpisodeTrace):       The episode.
        episode_returns (array):    G_t per step.
        baseline (float or array):  b, subtracted from every return, or
                                    b_t, one per step.

    Kwargs:
        scale (float):          The advantage is (G_t - b_t) / scale. Default 1.
        skip_explore (bool):    Leave out steps whose action came from the
                                epsilon draw rather than the policy.
                                Default False.

    Returns:
        tuple (loss, list of dLoss/dprobs arrays).

    Raises:
        DimensionError, if trace and returns have different lengths.
    """

    if len(trace) != len(episode_returns):
        raise DimensionError("policy_loss(): "+str(len(trace))+" steps but "
                             + str(len(episode_returns))+" returns")

    baseline = np.asarray(baseline, dtype=np.float64)

    if baseline.ndim == 0:
        baseline = np.full(len(trace), float(baseline))

    elif baseline.shape != (len(trace),):
        raise DimensionError("policy_loss(): "+str(len(trace))+" steps but "
                             + str(baseline.shape)+" baselines")

    loss = 0.0
    dprobs = []

    for step, ret, base in zip(trace.steps, episode_returns, baseline):
        p = np.clip(step.probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
        grad = np.zeros_like(p)

        if skip_explore and step.mode == "explore":
            dprobs.append(grad)
            continue

        advantage = (ret - base) / scale
        selected = step.selected & step.eligible
        unselected = step.eligible & ~step.selected

        logp = np.sum(np.log(p[selected])) + np.sum(np.log(1.0 - p[unselected]))
        loss -= logp * advantage

        grad[selected] = -advantage / p[selected]
        grad[unselected] = advantage / (1.0 - p[unselected])

        #The clamp is flat outside its range.
        grad[(step.probs < PROB_CLAMP) | (step.probs > 1.0 - PROB_CLAMP)] = 0.0
        dprobs.append(grad)

    return float(loss), dprobs

def frozen_loss_fn(trace, advantages):
    """
    Build loss_fn(params) -> (loss, grads) for an episode whose inputs
    and actions are held fixed, so only the network's outputs change with
    the parameters. This is what neuro.finite_diff_check() needs.
    """

    advantages = np.asarray(advantages, dtype=np.float64)

    def loss_fn(params):
        net_state = neuro.NetState.zeros(params.hidden_dim)
        steps = []

        for step in trace.steps:
            net_state, cache = neuro.policy_step(step.features, net_state, params)
            steps.append(replace(step, probs=cache.probs, cache=cache))

        frozen = replace(trace, steps=steps)
        loss, dprobs = policy_loss(frozen, advantages, 0.0)
        grads = neuro.episode_backward([step.cache for step in steps], dprobs, params)
        return loss, grads

    return loss_fn

def gradcheck(seed=0, probes=200, eps=1e-5, steps=3, order=None, hidden=64):
    """
    Check episode_backward() against central differences on a seeded
    episode of the given length with random frozen actions and random
    advantages.

    Returns:
        dict with max_relative_error, tolerance (1e-4) and passed.
    """

    if order is None:
        order = core.Order.uniform(core.STANDARD_SIZES, [78, 151, 214, 188, 172, 36], 9, 3)

    rng = np.random.default_rng(seed)
    params = neuro.PolicyParams.init(order.n, hidden, order.n, rng)
    explore_config = explore.ExploreConfig(ou_enabled=False, amplitude_enabled=False)

    trace = run_episode(order, params, explore_config, 1.0, rng,
                        env_config=env.EnvConfig(max_steps=steps))
    advantages = rng.standard_normal(len(trace))

    error = neuro.finite_diff_check(params, frozen_loss_fn(trace, advantages), probes=probes,
                                    eps=eps, rng=rng)

    return {"seed": seed, "steps": len(trace), "probes": probes, "eps": eps,
            "max_relative_error": error, "tolerance": 1e-4, "passed": bool(error < 1e-4)}

def write_metrics(path, metrics):
    """
    Write the metrics CSV: header, one row per episode, LF line endings,
    floats in shortest round-trip form.
    """

    with open(path, "w", encoding="utf-8", newline="") as metrics_file:
        writer = csv.writer(metrics_file, lineterminator="\n")
        writer.writerow(METRICS_HEADER)

        for row in metrics:
            writer.writerow((row.episode, repr(float(row.total_reward)), repr(float(row.loss)),
                             repr(float(row.epsilon)), row.steps))

def read_metrics(path):
    """Read a metrics CSV back into EpisodeMetrics rows."""
    with open(path, "r", encoding="utf-8", newline="") as metrics_file:
        reader = csv.DictReader(metrics_file)
        return [EpisodeMetrics(episode=int(row["episode"]),
                               total_reward=float(row["total_reward"]),
                               loss=float(row["loss"]), epsilon=float(row["epsilon"]),
                               steps=int(row["steps"]))
                for row in reader]

def summarise_metrics(metrics, window=100):
    """Mean reward and loss over the first and last window episodes."""
    rewards = np.array([row.total_reward for row in metrics])
    losses = np.array([row.loss for row in metrics])
    window = min(window, len(metrics))

    return {
        "episodes": len(metrics),
        "first_mean_reward": float(rewards[:window].mean()) if window else 0.0,
        "last_mean_reward": float(rewards[-window:].mean()) if window else 0.0,
        "last_mean_loss": float(losses[-window:].mean()) if window else 0.0,
        "final_epsilon": float(metrics[-1].epsilon) if metrics else None,
        "max_steps": int(max(row.steps for row in metrics)) if metrics else 0,
        "best_reward": float(rewards.max()) if window else 0.0,
    }

@dataclass
class TrainResult:
    """What train() hands back."""
    params: neuro.PolicyParams
    metrics: list
    best: neuro.Checkpoint
    summary: dict = field(default_factory=dict)

def train(config, order, out_dir=None):
    """
    Train a policy on one order.

    For every episode k: eps = epsilon_at(k); roll out; compute returns;
    turn them into advantages with a StepBaseline of the returns seen so
    far; backpropagate the policy loss; take an Adam step; record a
    metrics row. The parameters that played the best episode (by total
    reward) and the final parameters are kept.

    Args:
        config (TrainConfig):   The run settings, seed included.
        order (Order):          The order to learn on.

    Kwargs:
        out_dir (str):  If given, metrics.csv, summary.json, best.json and
                        final.json are written here.

    Returns:
        TrainResult.

    Raises:
        TrainingAborted, if the loss or gradients go non-finite. If out_dir
        is set, abort.json records the episode and seed first.
    """

    config.env.check_order(order)
    rng = np.random.default_rng(config.seed)
    params = neuro.PolicyParams.init(order.n, config.hidden, order.n, rng)
    adam = neuro.AdamState.for_params(params)
    baseline = StepBaseline(window=config.norm_window)
    metrics = []
    best = None
    best_reward = -np.inf

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    for k in range(config.episodes):
        eps = explore.epsilon_at(config.explore.schedule, k)

        if not config.explore.epsilon_enabled:
            eps = 0.0

        trace = run_episode(order, params, config.explore, eps, rng, env_config=config.env)

        #These are the parameters that played the episode.
        if trace.total_reward > best_reward:
            best_reward = trace.total_reward
            best = neuro.Checkpoint(params=params.copy(), episode=k,
                                    extra={"total_reward": trace.total_reward})

        episode_returns = returns(trace, config.gamma)

        loss, dprobs = policy_loss(trace, episode_returns, baseline.baselines(len(trace)),
                                   scale=baseline.scale,
                                   skip_explore=not config.onpolicy_logprob)

        try:
            if not np.isfinite(loss):
                raise NumericError("loss is "+str(loss))

            if len(trace):
                grads = neuro.episode_backward([step.cache for step in trace.steps], dprobs,
                                               params)
                neuro.adam_step(params, grads, adam, lr=config.lr)

        except NumericError as err:
            aborted = TrainingAborted("train(): episode "+str(k)+" with seed "+str(config.seed)
                                      + ": "+str(err), episode=k, seed=config.seed)

            if out_dir is not None:
                with open(os.path.join(out_dir, "abort.json"), "w", encoding="utf-8") as abort_file:
                    json.dump(aborted.as_record(), abort_file, indent=2)

            raise aborted from err

        baseline.push(episode_returns)

        row = EpisodeMetrics(episode=k, total_reward=trace.total_reward, loss=loss,
                             epsilon=explore.epsilon_at(config.explore.schedule, k),
                             steps=len(trace))
        metrics.append(row)

        logger.debug("episode %d: reward=%.6f loss=%.6f eps=%.4f steps=%d", k,
                     row.total_reward, row.loss, row.epsilon, row.steps)

        if config.log_every and (k + 1) % config.log_every == 0:
            window = metrics[-config.log_every:]
            logger.info("episode %d: mean reward %.4f, loss %.4f, epsilon %.4f", k + 1,
                        float(np.mean([r.total_reward for r in window])), row.loss, row.epsilon)

    summary = summarise_metrics(metrics)
    summary["seed"] = config.seed

    if out_dir is not None:
        write_metrics(os.path.join(out_dir, "metrics.csv"), metrics)
        neuro.save_checkpoint(os.path.join(out_dir, "best.json"), best)
        neuro.save_checkpoint(os.path.join(out_dir, "final.json"),
                              neuro.Checkpoint(params=params, adam=adam,
                                               rng_state=rng.bit_generator.state,
                                               episode=config.episodes,
                                               extra={"seed": config.seed}))

        with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as summary_file:
            json.dump(summary, summary_file, indent=2, sort_keys=True)

    return TrainResult(params=params, metrics=metrics, best=best, summary=summary)

def _train_one(args):
    config, order, out_dir = args
    return train(config, order, out_dir=out_dir).summary

def train_many(config, order, seeds, out_dir, workers=None):
    """
    Train one run per seed in worker processes, each writing to
    out_dir/seed-<seed>, and merge their summaries in seed order.

    Returns:
        list of summary dicts, sorted by seed. Also written to
        out_dir/seeds.json.
    """

    seeds = sorted(set(int(seed) for seed in seeds))
    jobs = [(replace(config, seed=seed), order, os.path.join(out_dir, "seed-"+str(seed)))
            for seed in seeds]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        summaries = list(pool.map(_train_one, jobs))

    summaries.sort(key=lambda summary: summary["seed"])
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "seeds.json"), "w", encoding="utf-8") as seeds_file:
        json.dump(summaries, seeds_file, indent=2, sort_keys=True)

    return summaries

def evaluate(params, order, episodes=50, env_config=None, explore_config=None, seed=0):
    """
    Roll out the policy with no exploration (eps = 0, no OU noise) and
    report what it plans.

    Args:
        params (PolicyParams):  The network.
        order (Order):          The order.

    Kwargs:
        episodes (int):     Rollouts. Default 50.

    Returns:
        dict with one entry per rollout (plan sections, status, waste,
        reward) and a summary.
    """

    env_config = env_config or env.EnvConfig()
    explore_config = (explore_config or explore.ExploreConfig()).exploit_only()
    rng = np.random.default_rng(seed)
    rollouts = []

    for k in range(episodes):
        trace = run_episode(order, params, explore_config, 0.0, rng, env_config=env_config)
        report = core.validate_plan(trace.plan, order, max_plies=env_config.max_plies)

        rollouts.append({
            "episode": k,
            "sections": len(trace.plan),
            "status": report.status,
            "feasible_exact": report.feasible_exact,
            "waste": float(core.waste(trace.plan, order)),
            "fabric_used": float(core.fabric_used(trace.plan, order)),
            "total_reward": trace.total_reward,
            "plan": [{"plies": s.plies, "counts": list(s.counts)} for s in trace.plan],
        })

    feasible = [r for r in rollouts if r["feasible_exact"]]

    summary = {
        "episodes": episodes,
        "feasible_exact_rate": len(feasible) / episodes if episodes else 0.0,
        "mean_sections": float(np.mean([r["sections"] for r in rollouts])) if rollouts else 0.0,
        "max_sections": max((r["sections"] for r in rollouts), default=0),
        "mean_reward": float(np.mean([r["total_reward"] for r in rollouts])) if rollouts else 0.0,
        "mean_waste": float(np.mean([r["waste"] for r in rollouts])) if rollouts else 0.0,
    }

    return {"rollouts": rollouts, "summary": summary}

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Training Tests for CutPlan
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

#import modules.
import unittest
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import replace
from unittest import mock

import numpy as np

#import test data and functions.
from . import cutplan_test_data as data

sys.path.insert(0, os.path.abspath('../'))
sys.path.insert(0, os.path.abspath('../..'))

import cutplan.baselines as baselines
import cutplan.core as core
import cutplan.env as env
import cutplan.explore as explore
import cutplan.neuro as neuro
import cutplan.train as train
from cutplan.errors import DimensionError, TrainingAborted

def make_trace(probs, selected, eligible=None, modes=None):
    """An EpisodeTrace with only the fields policy_loss() reads filled in."""
    steps = []

    for index, (p, s) in enumerate(zip(probs, selected)):
        e = eligible[index] if eligible is not None else [True] * len(p)
        steps.append(train.TraceStep(
            features=np.ones(len(p)), probs=np.array(p, dtype=np.float64),
            vector=np.array(p, dtype=np.float64),
            mode=modes[index] if modes is not None else "exploit", section=None,
            selected=np.array(s, dtype=bool), eligible=np.array(e, dtype=bool), reward=0.0,
            cache=None))

    return train.EpisodeTrace(steps=steps, plan=core.CutPlan(), total_reward=0.0,
                              fulfilled=False)

class TestReturns(unittest.TestCase):
    def test_returns_1(self):
        """Test #1: Test that gamma 0 gives the rewards back."""
        np.testing.assert_array_equal(train.returns([1, 1, 1], 0.0), [1, 1, 1])

    def test_returns_2(self):
        """Test #2: Test the discounted recursion with gamma 0.5."""
        np.testing.assert_array_equal(train.returns([0, 0, 1], 0.5), [0.25, 0.5, 1.0])

    def test_returns_3(self):
        """Test #3: Test that zero rewards give zero returns, and no rewards give none."""
        np.testing.assert_array_equal(train.returns([0, 0, 0, 0], 0.99), np.zeros(4))
        self.assertEqual(len(train.returns([], 0.99)), 0)

class TestPolicyLoss(unittest.TestCase):
    def test_policy_loss_1(self):
        """Test #1: Test that zero advantages give zero loss and zero gradients."""
        trace = make_trace([[0.3, 0.6, 0.9]] * 2, [[1, 0, 1], [0, 1, 0]])
        loss, dprobs = train.policy_loss(trace, [0.4, 0.4], 0.4)
        self.assertEqual(loss, 0.0)

        for grad in dprobs:
            np.testing.assert_array_equal(grad, np.zeros(3))

    def test_policy_loss_2(self):
        """Test #2: Test one step with three of six sizes selected at p = 0.5."""
        trace = make_trace([[0.5] * 6], [[1, 1, 1, 0, 0, 0]])
        loss, dprobs = train.policy_loss(trace, [1.0], 0.0)
        self.assertAlmostEqual(loss, -6 * math.log(0.5), places=12)
        self.assertAlmostEqual(loss, 4.1589, places=4)
        np.testing.assert_allclose(dprobs[0], [-2, -2, -2, 2, 2, 2], rtol=1e-12)

    def test_policy_loss_3(self):
        """Test #3: Test that doubling the advantage doubles the loss and the gradients."""
        trace = make_trace([[0.2, 0.7, 0.4], [0.6, 0.1, 0.8]], [[1, 0, 1], [0, 1, 1]])
        loss, dprobs = train.policy_loss(trace, [1.5, 0.5], 0.25)
        double_loss, double_dprobs = train.policy_loss(trace, [2.75, 0.75], 0.25)

        self.assertAlmostEqual(double_loss, 2 * loss, places=12)

        for single, double in zip(dprobs, double_dprobs):
            np.testing.assert_allclose(double, 2 * single, rtol=1e-12)

    def test_policy_loss_4(self):
        """Test #4: Test that sizes with no demand left take no part in the loss."""
        trace = make_trace([[0.5, 0.9, 0.5]], [[1, 0, 0]], eligible=[[True, False, True]])
        loss, dprobs = train.policy_loss(trace, [1.0], 0.0)
        self.assertAlmostEqual(loss, -2 * math.log(0.5), places=12)
        self.assertEqual(dprobs[0][1], 0.0)

    def test_policy_loss_5(self):
        """Test #5: Test that probabilities of exactly 0 and 1 are clamped to a finite loss."""
        trace = make_trace([[0.0, 1.0, 0.5]], [[1, 0, 1]])
        loss, dprobs = train.policy_loss(trace, [1.0], 0.0)
        self.assertTrue(math.isfinite(loss))
        self.assertAlmostEqual(loss, -(2 * math.log(1e-7) + math.log(0.5)), places=5)
        np.testing.assert_array_equal(dprobs[0][:2], [0.0, 0.0])
        self.assertAlmostEqual(dprobs[0][2], -2.0, places=12)

    def test_policy_loss_6(self):
        """Test #6: Test that the scale divides the advantage and explore steps can be skipped."""
        trace = make_trace([[0.5, 0.5]] * 2, [[1, 0], [0, 1]], modes=["explore", "exploit"])
        loss, _ = train.policy_loss(trace, [1.0, 1.0], 0.0)
        scaled, _ = train.policy_loss(trace, [1.0, 1.0], 0.0, scale=4.0)
        skipped, dprobs = train.policy_loss(trace, [1.0, 1.0], 0.0, skip_explore=True)

        self.assertAlmostEqual(scaled, loss / 4, places=12)
        self.assertAlmostEqual(skipped, loss / 2, places=12)
        np.testing.assert_array_equal(dprobs[0], [0.0, 0.0])

    def test_policy_loss_7(self):
        """Test #7: Test that a return per step is required."""
        trace = make_trace([[0.5, 0.5]] * 2, [[1, 0], [0, 1]])
        self.assertRaises(DimensionError, train.policy_loss, trace, [1.0], 0.0)

    def test_policy_loss_8(self):
        """Test #8: Test a baseline per step: returns equal to it give no loss, a wrong length is refused."""
        trace = make_trace([[0.3, 0.6]] * 2, [[1, 0], [0, 1]])
        loss, dprobs = train.policy_loss(trace, [0.9, 0.2], [0.9, 0.2])
        self.assertEqual(loss, 0.0)

        for grad in dprobs:
            np.testing.assert_array_equal(grad, np.zeros(2))

        moved, _ = train.policy_loss(trace, [0.9, 0.2], [0.9, 0.0])
        expected = -(math.log(1 - 0.3) + math.log(0.6)) * 0.2
        self.assertAlmostEqual(moved, expected, places=12)

        self.assertRaises(DimensionError, train.policy_loss, trace, [0.9, 0.2], [0.9, 0.2, 0.1])

class TestRunningStats(unittest.TestCase):
    def test_running_stats_1(self):
        """Test #1: Test the running mean and standard deviation against numpy."""
        values = np.random.default_rng(2).standard_normal(50)
        stats = train.RunningStats()

        self.assertEqual(stats.std, 1.0)
        stats.push(values[0])
        self.assertEqual(stats.std, 1.0)

        for value in values[1:]:
            stats.push(value)

        self.assertAlmostEqual(stats.mean, float(np.mean(values)), places=12)
        self.assertAlmostEqual(stats.std, float(np.std(values)), places=12)

    def test_running_stats_2(self):
        """Test #2: Test that a window only remembers the latest values."""
        stats = train.RunningStats(window=3)

        for value in (100.0, 1.0, 2.0, 3.0):
            stats.push(value)

        self.assertEqual(stats.count, 3)
        self.assertAlmostEqual(stats.mean, 2.0, places=12)
        self.assertAlmostEqual(stats.std, float(np.std([1.0, 2.0, 3.0])), places=12)

class TestStepBaseline(unittest.TestCase):
    def test_step_baseline_1(self):
        """Test #1: Test that an episode played again has a zero advantage at every step."""
        baseline = train.StepBaseline()
        np.testing.assert_array_equal(baseline.baselines(3), np.zeros(3))
        self.assertEqual(baseline.scale, 1.0)

        baseline.push([0.9, 0.5, 0.1])
        np.testing.assert_allclose(baseline.baselines(3), [0.9, 0.5, 0.1], rtol=1e-12)

        trace = make_trace([[0.4, 0.7, 0.2]] * 3, [[1, 1, 0], [0, 1, 1], [1, 0, 0]])
        loss, _ = train.policy_loss(trace, [0.9, 0.5, 0.1], baseline.baselines(3),
                                    scale=baseline.scale)
        self.assertEqual(loss, 0.0)

    def test_step_baseline_2(self):
        """Test #2: Test that each step index keeps its own mean and the scale comes from the residuals."""
        baseline = train.StepBaseline()
        baseline.push([1.0, 0.2])
        baseline.push([0.6, 0.3, 0.5])

        np.testing.assert_allclose(baseline.baselines(4), [0.8, 0.25, 0.5, 0.0], rtol=1e-12)

        #Residuals -0.4 and 0.1; the third step had nothing to compare with.
        self.assertEqual(baseline.residuals.count, 2)
        self.assertAlmostEqual(baseline.scale, 0.25, places=12)

    def test_step_baseline_3(self):
        """Test #3: Test that a window forgets old episodes."""
        baseline = train.StepBaseline(window=2)

        for value in (1.0, 2.0, 3.0):
            baseline.push([value])

        np.testing.assert_allclose(baseline.baselines(1), [2.5], rtol=1e-12)

    def test_step_baseline_4(self):
        """Test #4: Test that late steps are not punished for having smaller returns than early ones."""
        baseline = train.StepBaseline()

        for _ in range(3):
            baseline.push(train.returns([0.3, 0.3, 0.3], 0.99))

        episode_returns = train.returns([0.3, 0.3, 0.3], 0.99)
        trace = make_trace([[0.5, 0.5]] * 3, [[1, 0]] * 3)
        loss, dprobs = train.policy_loss(trace, episode_returns, baseline.baselines(3),
                                         scale=baseline.scale)

        self.assertAlmostEqual(loss, 0.0, places=12)

        for grad in dprobs:
            np.testing.assert_allclose(grad, np.zeros(2), atol=1e-9)

class TestEpisodes(unittest.TestCase):
    def setUp(self):
        self.order = data.return_six_size_order()
        self.params = neuro.PolicyParams.init(6, 16, 6, np.random.default_rng(3))
        self.config = explore.ExploreConfig()

    def tearDown(self):
        del self.order
        del self.params
        del self.config

    def test_run_episode_1(self):
        """Test #1: Test that pure exploration still fulfils the order in at most six steps."""
        rng = np.random.default_rng(0)

        for _ in range(20):
            trace = train.run_episode(self.order, self.params, self.config, 1.0, rng)
            self.assertLessEqual(len(trace), 6)
            self.assertTrue(trace.fulfilled)
            self.assertTrue(all(step.mode == "explore" for step in trace.steps))
            self.assertTrue(core.validate_plan(trace.plan, self.order).feasible_exact)
            self.assertAlmostEqual(trace.total_reward, sum(trace.rewards), places=12)

    def test_run_episode_2(self):
        """Test #2: Test that an order with no demand gives an empty episode."""
        order = data.return_small_order([0, 0, 0, 0, 0, 0])
        trace = train.run_episode(order, self.params, self.config, 0.5,
                                  np.random.default_rng(0))
        self.assertEqual(len(trace), 0)
        self.assertTrue(trace.fulfilled)
        self.assertEqual(trace.total_reward, 0.0)

    def test_run_episode_3(self):
        """Test #3: Test that a seed always gives the same episode."""
        first = train.run_episode(self.order, self.params, self.config, 0.5,
                                  np.random.default_rng(9))
        second = train.run_episode(self.order, self.params, self.config, 0.5,
                                   np.random.default_rng(9))

        self.assertEqual(first.plan, second.plan)
        self.assertEqual(first.rewards, second.rewards)

        for a, b in zip(first.steps, second.steps):
            np.testing.assert_array_equal(a.vector, b.vector)
            np.testing.assert_array_equal(a.probs, b.probs)

    def test_evaluate_1(self):
        """Test #1: Test that an untrained all-zero policy plans exactly like greedy."""
        params = neuro.PolicyParams.zeros(6, 8, 6)
        report = train.evaluate(params, self.order, episodes=3)
        greedy = baselines.greedy_plan(self.order)

        for rollout in report["rollouts"]:
            self.assertEqual(rollout["sections"], 6)
            self.assertEqual(rollout["status"], "FEASIBLE-EXACT")
            self.assertEqual([(s["plies"], tuple(s["counts"])) for s in rollout["plan"]],
                             [(s.plies, s.counts) for s in greedy])

        self.assertEqual(report["summary"]["feasible_exact_rate"], 1.0)
        self.assertEqual(report["summary"]["mean_waste"], 0.0)

    def test_evaluate_2(self):
        """Test #2: Test that evaluation is deterministic and always exact."""
        first = train.evaluate(self.params, self.order, episodes=5, seed=1)
        second = train.evaluate(self.params, self.order, episodes=5, seed=1)
        self.assertEqual(first, second)
        self.assertEqual(first["summary"]["feasible_exact_rate"], 1.0)
        self.assertLessEqual(first["summary"]["max_sections"], 6)

class TestTrain(unittest.TestCase):
    def setUp(self):
        self.order = data.return_six_size_order()
        self.config = train.TrainConfig(episodes=12, hidden=8, seed=7, log_every=5)
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()
        del self.order
        del self.config
        del self.tmpdir

    def test_train_config_1(self):
        """Test #1: Test that out of range settings are rejected."""
        self.assertRaises(ValueError, train.TrainConfig, gamma=1.5)
        self.assertRaises(ValueError, train.TrainConfig, episodes=0)
        self.assertRaises(ValueError, train.TrainConfig, lr=0.0)
        self.assertRaises(ValueError, train.TrainConfig, norm_window=-1)

    def test_train_1(self):
        """Test #1: Test that one episode gives one metrics row at epsilon 1."""
        result = train.train(replace(self.config, episodes=1), self.order)
        self.assertEqual(len(result.metrics), 1)
        self.assertEqual(result.metrics[0].epsilon, 1.0)
        self.assertEqual(result.metrics[0].episode, 0)

    def test_train_2(self):
        """Test #2: Test the metrics: one row per episode, the closed-form epsilon, at most six steps."""
        result = train.train(self.config, self.order)
        self.assertEqual(len(result.metrics), 12)

        for k, row in enumerate(result.metrics):
            self.assertEqual(row.episode, k)
            self.assertEqual(row.epsilon, explore.epsilon_at(self.config.explore.schedule, k))
            self.assertLessEqual(row.steps, 6)
            self.assertTrue(math.isfinite(row.loss))

        self.assertEqual(result.best.extra["total_reward"],
                         max(row.total_reward for row in result.metrics))
        self.assertEqual(result.summary["episodes"], 12)
        self.assertEqual(result.summary["seed"], 7)

    def test_train_3(self):
        """Test #3: Test that two runs with the same seed write byte-identical metrics."""
        first = os.path.join(self.tmpdir.name, "first")
        second = os.path.join(self.tmpdir.name, "second")

        train.train(self.config, self.order, out_dir=first)
        train.train(self.config, self.order, out_dir=second)

        for name in ("metrics.csv", "summary.json", "best.json", "final.json"):
            with open(os.path.join(first, name), "rb") as a, open(os.path.join(second, name), "rb") as b:
                self.assertEqual(a.read(), b.read(), name)

        with open(os.path.join(first, "metrics.csv"), "rb") as metrics_file:
            raw = metrics_file.read()

        self.assertTrue(raw.startswith(b"episode,total_reward,loss,epsilon,steps\n"))
        self.assertNotIn(b"\r\n", raw)
        self.assertEqual(raw.count(b"\n"), 13)

    def test_train_4(self):
        """Test #4: Test that the metrics file reads back exactly and the final checkpoint loads."""
        out_dir = os.path.join(self.tmpdir.name, "run")
        result = train.train(self.config, self.order, out_dir=out_dir)

        self.assertEqual(train.read_metrics(os.path.join(out_dir, "metrics.csv")),
                         result.metrics)

        final = neuro.load_checkpoint(os.path.join(out_dir, "final.json"),
                                      expected_dims={"input": 6, "hidden": 8, "output": 6})
        self.assertEqual(final.episode, 12)
        self.assertEqual(final.adam.t, 12)

        for name in result.params:
            np.testing.assert_array_equal(final.params[name], result.params[name])

    def test_train_5(self):
        """Test #5: Test that different seeds give different runs."""
        first = train.train(self.config, self.order)
        second = train.train(replace(self.config, seed=8), self.order)
        self.assertNotEqual([row.total_reward for row in first.metrics],
                            [row.total_reward for row in second.metrics])

    def test_train_6(self):
        """Test #6: Test that a non-finite loss aborts with a record of the episode and seed."""
        out_dir = os.path.join(self.tmpdir.name, "aborted")

        with mock.patch("cutplan.train.policy_loss", return_value=(float("nan"), [])):
            with self.assertRaises(TrainingAborted) as context:
                train.train(self.config, self.order, out_dir=out_dir)

        self.assertEqual(context.exception.episode, 0)
        self.assertEqual(context.exception.seed, 7)

        with open(os.path.join(out_dir, "abort.json"), "r", encoding="utf-8") as abort_file:
            record = json.load(abort_file)

        self.assertEqual(record["episode"], 0)
        self.assertEqual(record["seed"], 7)

    def test_train_7(self):
        """Test #7: Test that the ablation switches still train."""
        config = replace(self.config, onpolicy_logprob=False, norm_window=4,
                         explore=explore.ExploreConfig(ou_enabled=False, amplitude_enabled=False))
        result = train.train(config, self.order)
        self.assertEqual(len(result.metrics), 12)

    def test_train_8(self):
        """Test #8: Test that the best checkpoint holds the parameters that played the best episode."""
        played = []
        run_episode = train.run_episode

        def recording_run_episode(order, params, *args, **kwargs):
            played.append(params.copy())
            return run_episode(order, params, *args, **kwargs)

        out_dir = os.path.join(self.tmpdir.name, "best")

        with mock.patch("cutplan.train.run_episode", side_effect=recording_run_episode):
            result = train.train(self.config, self.order, out_dir=out_dir)

        self.assertEqual(len(played), 12)
        rewards = [row.total_reward for row in result.metrics]
        best_episode = rewards.index(max(rewards))
        self.assertEqual(result.best.episode, best_episode)
        self.assertEqual(result.best.extra["total_reward"], max(rewards))

        saved = neuro.load_checkpoint(os.path.join(out_dir, "best.json"),
                                      expected_dims={"input": 6, "hidden": 8, "output": 6})

        for name in played[best_episode]:
            np.testing.assert_array_equal(result.best.params[name], played[best_episode][name])
            np.testing.assert_array_equal(saved.params[name], played[best_episode][name])

        #The update after the best episode is not in the checkpoint.
        after = played[best_episode + 1] if best_episode + 1 < len(played) else result.params
        self.assertFalse(all(np.array_equal(result.best.params[name], after[name])
                             for name in after))

    def test_train_many_1(self):
        """Test #1: Test that a batch of seeds gives one summary each, in seed order."""
        out_dir = os.path.join(self.tmpdir.name, "batch")
        config = replace(self.config, episodes=3)
        summaries = train.train_many(config, self.order, [5, 2], out_dir, workers=2)

        self.assertEqual([summary["seed"] for summary in summaries], [2, 5])
        self.assertTrue(os.path.isfile(os.path.join(out_dir, "seed-2", "metrics.csv")))
        self.assertTrue(os.path.isfile(os.path.join(out_dir, "seed-5", "metrics.csv")))

        with open(os.path.join(out_dir, "seeds.json"), "r", encoding="utf-8") as seeds_file:
            self.assertEqual(json.load(seeds_file), summaries)

        #A batch run matches a run on its own.
        alone = train.train(replace(config, seed=5), self.order)
        self.assertEqual(summaries[1], alone.summary)

    def test_summarise_metrics_1(self):
        """Test #1: Test the first and last window means."""
        rows = [train.EpisodeMetrics(episode=k, total_reward=float(k), loss=1.0,
                                     epsilon=0.5, steps=3) for k in range(10)]
        summary = train.summarise_metrics(rows, window=3)
        self.assertEqual(summary["first_mean_reward"], 1.0)
        self.assertEqual(summary["last_mean_reward"], 8.0)
        self.assertEqual(summary["max_steps"], 3)
        self.assertEqual(summary["best_reward"], 9.0)

class TestGradcheck(unittest.TestCase):
    def test_gradcheck_1(self):
        """Test #1: Test BPTT against central differences on a seeded three step episode."""
        started = time.perf_counter()
        report = train.gradcheck(seed=0, probes=200)
        self.assertLess(time.perf_counter() - started, 30.0)

        self.assertEqual(report["steps"], 3)
        self.assertLess(report["max_relative_error"], 1e-4)
        self.assertTrue(report["passed"])

    def test_frozen_loss_fn_1(self):
        """Test #1: Test that zero advantages give a zero loss and zero gradients."""
        order = data.return_six_size_order()
        params = neuro.PolicyParams.init(6, 8, 6, np.random.default_rng(0))
        trace = train.run_episode(order, params, explore.ExploreConfig(), 1.0,
                                  np.random.default_rng(0),
                                  env_config=env.EnvConfig(max_steps=3))

        loss, grads = train.frozen_loss_fn(trace, np.zeros(len(trace)))(params)
        self.assertEqual(loss, 0.0)

        for name in params:
            np.testing.assert_array_equal(grads[name], np.zeros_like(params[name]))

@unittest.skipUnless(os.environ.get("CUTPLAN_SLOW_TESTS"),
                     "full training runs; set CUTPLAN_SLOW_TESTS=1 to run them")
class TestLearning(unittest.TestCase):
    def setUp(self):
        self.order = data.return_six_size_order()

    def tearDown(self):
        del self.order

    def test_learning_1(self):
        """Test #1: Test that the last hundred episodes beat the first hundred for seeds 1 to 5."""
        for seed in range(1, 6):
            summary = train.train(train.TrainConfig(seed=seed, log_every=0), self.order).summary

            with self.subTest(seed=seed):
                self.assertEqual(summary["episodes"], 1000)
                self.assertEqual(summary["final_epsilon"], 0.1)
                self.assertLessEqual(summary["max_steps"], 6)
                self.assertGreater(summary["last_mean_reward"], summary["first_mean_reward"])

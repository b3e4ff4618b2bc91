#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Policy Network Tests for CutPlan
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
import math
import os
import sys
import tempfile
import json

import numpy as np

#import test data and functions.
from . import cutplan_test_functions as functions

sys.path.insert(0, os.path.abspath('../'))
sys.path.insert(0, os.path.abspath('../..'))

import cutplan.neuro as neuro
from cutplan.errors import CheckpointError, DimensionError, NumericError

class TestForward(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1234)
        self.params = neuro.PolicyParams.init(3, 5, 3, self.rng)

        #Make every bias non-zero so the comparison exercises them.
        for name in self.params:
            if name.startswith("b_"):
                self.params[name][...] = self.rng.uniform(-0.5, 0.5, self.params[name].shape)

    def tearDown(self):
        del self.rng
        del self.params

    def test_param_count_1(self):
        """Test #1: Test the parameter count for six sizes and 64 hidden units."""
        self.assertEqual(neuro.param_count(6, 64, 6), 4 * (64 * 6 + 64 * 64 + 64) + (6 * 64 + 6))
        self.assertEqual(neuro.param_count(6, 64, 6), 18566)
        self.assertEqual(neuro.PolicyParams.init(6, 64, 6, self.rng).count(), 18566)

    def test_params_1(self):
        """Test #1: Test that arrays of the wrong shape or name are rejected."""
        arrays = {name: array.copy() for name, array in self.params.arrays.items()}
        arrays["W_i"] = np.zeros((5, 4))
        self.assertRaises(DimensionError, neuro.PolicyParams, arrays, 3, 5, 3)

        del arrays["W_i"]
        self.assertRaises(DimensionError, neuro.PolicyParams, arrays, 3, 5, 3)

    def test_params_2(self):
        """Test #2: Test the initialisation: bounded matrices, zero biases but the forget gate's."""
        params = neuro.PolicyParams.init(6, 64, 6, np.random.default_rng(0))
        limit = math.sqrt(6.0 / (64 + 6))
        self.assertTrue(np.all(np.abs(params["W_i"]) <= limit))
        np.testing.assert_array_equal(params["b_i"], np.zeros(64))
        np.testing.assert_array_equal(params["b_f"], np.ones(64))
        np.testing.assert_array_equal(params["b_out"], np.zeros(6))

    #------------------------------------ Tests for lstm_forward ------------------------------------
    def test_lstm_forward_1(self):
        """Test #1: Test that zero weights give half-open gates and a zero carry."""
        params = neuro.PolicyParams.zeros(3, 4, 3)
        state, cache = neuro.lstm_forward([0.3, 0.7, 1.0], neuro.NetState.zeros(4), params)

        for gate in (cache.i, cache.f, cache.o):
            np.testing.assert_array_equal(gate, np.full(4, 0.5))

        np.testing.assert_array_equal(cache.g, np.zeros(4))
        np.testing.assert_array_equal(state.c, np.zeros(4))
        np.testing.assert_array_equal(state.h, np.zeros(4))

    def test_lstm_forward_2(self):
        """Test #2: Test that a wide open output gate still gives h = 0 when the cell is empty."""
        params = neuro.PolicyParams.zeros(3, 4, 3)
        params["b_o"][...] = 50.0
        state, _ = neuro.lstm_forward(np.zeros(3), neuro.NetState.zeros(4), params)
        np.testing.assert_array_equal(state.h, np.zeros(4))

    def test_lstm_forward_3(self):
        """Test #3: Test the numpy cell against a plain loop version over several steps."""
        state = neuro.NetState(h=self.rng.uniform(-0.5, 0.5, 5), c=self.rng.uniform(-1, 1, 5))

        for _ in range(4):
            x = self.rng.random(3)
            expected_h, expected_c = functions.scalar_lstm_step(x, state.h.tolist(),
                                                                state.c.tolist(), self.params)
            state, _ = neuro.lstm_forward(x, state, self.params)

            np.testing.assert_allclose(state.h, expected_h, rtol=0, atol=1e-12)
            np.testing.assert_allclose(state.c, expected_c, rtol=0, atol=1e-12)
            self.assertLess(np.max(np.abs(state.h)), 1.0)

    def test_lstm_forward_4(self):
        """Test #4: Test that non-finite or wrongly sized inputs are refused."""
        state = neuro.NetState.zeros(5)
        self.assertRaises(NumericError, neuro.lstm_forward, [0.1, np.nan, 0.2], state, self.params)
        self.assertRaises(NumericError, neuro.lstm_forward, [0.1, np.inf, 0.2], state, self.params)
        self.assertRaises(DimensionError, neuro.lstm_forward, [0.1, 0.2], state, self.params)

    def test_lstm_forward_5(self):
        """Test #5: Test that the forward pass is deterministic."""
        x = self.rng.random(3)
        first, _ = neuro.lstm_forward(x, neuro.NetState.zeros(5), self.params)
        second, _ = neuro.lstm_forward(x, neuro.NetState.zeros(5), self.params)
        np.testing.assert_array_equal(first.h, second.h)
        np.testing.assert_array_equal(first.c, second.c)

    #------------------------------------ Tests for head_forward ------------------------------------
    def test_head_forward_1(self):
        """Test #1: Test that zero weights give 0.5 for every size."""
        params = neuro.PolicyParams.zeros(6, 64, 6)
        np.testing.assert_array_equal(neuro.head_forward(np.zeros(64), params), np.full(6, 0.5))

    def test_head_forward_2(self):
        """Test #2: Test that large biases saturate the sigmoid."""
        params = neuro.PolicyParams.zeros(2, 4, 2)
        params["b_out"][...] = [10.0, -10.0]
        np.testing.assert_allclose(neuro.head_forward(np.zeros(4), params), [1.0, 0.0],
                                   rtol=0, atol=5e-5)

    def test_head_forward_3(self):
        """Test #3: Test the head against a plain loop version."""
        h = self.rng.uniform(-1, 1, 5)
        np.testing.assert_allclose(neuro.head_forward(h, self.params),
                                   functions.scalar_head(h.tolist(), self.params),
                                   rtol=0, atol=1e-12)

    def test_sigmoid_1(self):
        """Test #1: Test that the sigmoid stays finite for huge inputs."""
        out = neuro.sigmoid(np.array([-1000.0, 0.0, 1000.0]))
        np.testing.assert_array_equal(out, [0.0, 0.5, 1.0])

class TestBackward(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(99)
        self.params = neuro.PolicyParams.init(3, 4, 3, self.rng)

    def tearDown(self):
        del self.rng
        del self.params

    def _episode(self, steps):
        state = neuro.NetState.zeros(4)
        caches = []

        for _ in range(steps):
            state, cache = neuro.policy_step(self.rng.random(3), state, self.params)
            caches.append(cache)

        return caches

    def test_episode_backward_1(self):
        """Test #1: Test that zero loss gradients give zero parameter gradients."""
        caches = self._episode(3)
        grads = neuro.episode_backward(caches, [np.zeros(3)] * 3, self.params)

        for name in self.params:
            np.testing.assert_array_equal(grads[name], np.zeros_like(self.params[name]))

    def test_episode_backward_2(self):
        """Test #2: Test a one unit network against the chain rule worked by hand."""
        params = neuro.PolicyParams.zeros(1, 1, 1)
        values = {"W_i": 0.3, "W_f": -0.2, "W_o": 0.5, "W_c": 0.7, "b_i": 0.1, "b_f": 1.0,
                  "b_o": -0.1, "b_c": 0.2, "W_out": 1.5, "b_out": -0.3,
                  "U_i": 0.4, "U_f": 0.4, "U_o": 0.4, "U_c": 0.4}

        for name, value in values.items():
            params[name][...] = value

        x = 0.8
        _, cache = neuro.policy_step(np.array([x]), neuro.NetState.zeros(1), params)
        grads = neuro.episode_backward([cache], [np.array([1.0])], params)

        sig = lambda z: 1.0 / (1.0 + math.exp(-z))
        i = sig(0.3 * x + 0.1)
        o = sig(0.5 * x - 0.1)
        g = math.tanh(0.7 * x + 0.2)
        c = i * g
        h = o * math.tanh(c)
        p = sig(1.5 * h - 0.3)

        dz = p * (1 - p)
        dh = dz * 1.5
        dc = dh * o * (1 - math.tanh(c) ** 2)

        expected = {
            "b_out": dz,
            "W_out": dz * h,
            "b_o": dh * math.tanh(c) * o * (1 - o),
            "b_c": dc * i * (1 - g ** 2),
            "b_i": dc * g * i * (1 - i),
            "W_i": dc * g * i * (1 - i) * x,
            "W_c": dc * i * (1 - g ** 2) * x,
            "b_f": 0.0,
            "U_i": 0.0,
        }

        for name, value in expected.items():
            self.assertAlmostEqual(float(grads[name].ravel()[0]), value, places=12, msg=name)

    def test_episode_backward_3(self):
        """Test #3: Test that a missing loss gradient is a dimension error."""
        caches = self._episode(3)
        self.assertRaises(DimensionError, neuro.episode_backward, caches, [np.zeros(3)] * 2,
                          self.params)

    def test_episode_backward_4(self):
        """Test #4: Test BPTT on a seeded three step episode against central differences."""
        inputs = [self.rng.random(3) for _ in range(3)]
        weights = [self.rng.standard_normal(3) for _ in range(3)]

        def loss_fn(params):
            state = neuro.NetState.zeros(4)
            caches = []
            loss = 0.0

            for x, w in zip(inputs, weights):
                state, cache = neuro.policy_step(x, state, params)
                caches.append(cache)
                loss += float(w @ cache.probs)

            return loss, neuro.episode_backward(caches, weights, params)

        self.assertLess(neuro.finite_diff_check(self.params, loss_fn, probes=200), 1e-4)

class TestFiniteDiff(unittest.TestCase):
    def setUp(self):
        self.params = neuro.PolicyParams.init(2, 3, 2, np.random.default_rng(5))

    def tearDown(self):
        del self.params

    def test_finite_diff_check_1(self):
        """Test #1: Test that half the squared norm checks out almost exactly."""
        def loss_fn(params):
            loss = 0.5 * sum(float(np.sum(params[name] ** 2)) for name in params)
            return loss, {name: params[name].copy() for name in params}

        self.assertLess(neuro.finite_diff_check(self.params, loss_fn, probes=100, eps=1e-3), 1e-9)

    def test_finite_diff_check_2(self):
        """Test #2: Test that a constant loss has zero error."""
        def loss_fn(params):
            return 0.0, params.zeros_like()

        self.assertEqual(neuro.finite_diff_check(self.params, loss_fn), 0.0)

    def test_finite_diff_check_3(self):
        """Test #3: Test that a wrong gradient is caught and the parameters are restored."""
        before = self.params.copy()

        def loss_fn(params):
            loss = 0.5 * sum(float(np.sum(params[name] ** 2)) for name in params)
            return loss, {name: 2.0 * params[name] + 1.0 for name in params}

        self.assertGreater(neuro.finite_diff_check(self.params, loss_fn, probes=20), 0.1)

        for name in self.params:
            np.testing.assert_array_equal(self.params[name], before[name])

class TestAdam(unittest.TestCase):
    def setUp(self):
        self.params = neuro.PolicyParams.init(2, 3, 2, np.random.default_rng(8))
        self.adam = neuro.AdamState.for_params(self.params)

    def tearDown(self):
        del self.params
        del self.adam

    def test_adam_step_1(self):
        """Test #1: Test that zero gradients leave the parameters alone but count the step."""
        before = self.params.copy()
        neuro.adam_step(self.params, self.params.zeros_like(), self.adam)
        self.assertEqual(self.adam.t, 1)

        for name in self.params:
            np.testing.assert_array_equal(self.params[name], before[name])

    def test_adam_step_2(self):
        """Test #2: Test that the first step moves by the learning rate against the gradient sign."""
        before = self.params.copy()
        grads = self.params.zeros_like()
        grads["b_out"][0] = 0.5
        grads["b_out"][1] = -2.0

        neuro.adam_step(self.params, grads, self.adam, lr=0.001)
        self.assertAlmostEqual(self.params["b_out"][0] - before["b_out"][0],
                               -0.001 * 0.5 / (0.5 + 1e-8), places=12)
        self.assertAlmostEqual(self.params["b_out"][1] - before["b_out"][1],
                               0.001 * 2.0 / (2.0 + 1e-8), places=12)

    def test_adam_step_3(self):
        """Test #3: Test that repeating a gradient keeps moving the same way."""
        grads = self.params.zeros_like()
        grads["W_out"][0, 0] = 1.0
        positions = [self.params["W_out"][0, 0]]

        for _ in range(3):
            neuro.adam_step(self.params, grads, self.adam)
            positions.append(self.params["W_out"][0, 0])

        self.assertTrue(all(b < a for a, b in zip(positions, positions[1:])))

    def test_adam_step_4(self):
        """Test #4: Test that a non-finite gradient changes nothing."""
        before = self.params.copy()
        grads = self.params.zeros_like()
        grads["b_i"][0] = np.nan

        self.assertRaises(NumericError, neuro.adam_step, self.params, grads, self.adam)
        self.assertEqual(self.adam.t, 0)

        for name in self.params:
            np.testing.assert_array_equal(self.params[name], before[name])

class TestCheckpoint(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmpdir.name, "ckpt", "policy.json")
        self.rng = np.random.default_rng(21)
        self.params = neuro.PolicyParams.init(6, 8, 6, self.rng)
        self.adam = neuro.AdamState.for_params(self.params)
        grads = {name: self.rng.standard_normal(array.shape)
                 for name, array in self.params.arrays.items()}
        neuro.adam_step(self.params, grads, self.adam)

    def tearDown(self):
        self.tmpdir.cleanup()
        del self.tmpdir
        del self.params
        del self.adam

    def test_checkpoint_1(self):
        """Test #1: Test that a checkpoint reads back exactly."""
        neuro.save_checkpoint(self.path, neuro.Checkpoint(
            params=self.params, adam=self.adam, rng_state=self.rng.bit_generator.state,
            episode=17, extra={"seed": 3}))

        loaded = neuro.load_checkpoint(self.path, expected_dims={"input": 6, "hidden": 8,
                                                                 "output": 6})
        self.assertEqual(loaded.episode, 17)
        self.assertEqual(loaded.extra, {"seed": 3})
        self.assertEqual(loaded.adam.t, 1)

        for name in self.params:
            np.testing.assert_array_equal(loaded.params[name], self.params[name])
            np.testing.assert_array_equal(loaded.adam.m[name], self.adam.m[name])
            np.testing.assert_array_equal(loaded.adam.v[name], self.adam.v[name])

        #The generator carries on where it left off.
        restored = np.random.default_rng()
        restored.bit_generator.state = loaded.rng_state
        self.assertEqual(restored.random(), self.rng.random())

    def test_checkpoint_2(self):
        """Test #2: Test that dimension mismatches are refused."""
        neuro.save_checkpoint(self.path, neuro.Checkpoint(params=self.params))

        with self.assertRaises(CheckpointError):
            neuro.load_checkpoint(self.path, expected_dims={"input": 6, "hidden": 64,
                                                            "output": 6})

    def test_checkpoint_3(self):
        """Test #3: Test that a missing file is a checkpoint error."""
        self.assertRaises(CheckpointError, neuro.load_checkpoint,
                          os.path.join(self.tmpdir.name, "missing.json"))

    def test_checkpoint_4(self):
        """Test #4: Test that files that aren't checkpoints are refused."""
        os.makedirs(os.path.dirname(self.path))

        with open(self.path, "w", encoding="utf-8") as bad_file:
            bad_file.write("not json")

        self.assertRaises(CheckpointError, neuro.load_checkpoint, self.path)

        with open(self.path, "w", encoding="utf-8") as bad_file:
            json.dump({"format": "something-else"}, bad_file)

        self.assertRaises(CheckpointError, neuro.load_checkpoint, self.path)

        with open(self.path, "w", encoding="utf-8") as bad_file:
            json.dump({"format": neuro.CHECKPOINT_FORMAT, "version": 99}, bad_file)

        self.assertRaises(CheckpointError, neuro.load_checkpoint, self.path)

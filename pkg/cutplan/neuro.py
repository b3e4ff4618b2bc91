#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Recurrent Policy Network For The Cut Order Planner
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
This is the part of the package that holds the policy network, written
directly in numpy: one LSTM cell feeding a sigmoid output layer, the
backward pass through time, the Adam optimiser, a central finite
difference gradient check, and the checkpoint file format.

The cell is the standard one:

    i = sigmoid(W_i x + U_i h + b_i)
    f = sigmoid(W_f x + U_f h + b_f)
    o = sigmoid(W_o x + U_o h + b_o)
    g = tanh(W_c x + U_c h + b_c)
    c' = f * c + i * g
    h' = o * tanh(c')

and the head is p = sigmoid(W_out h' + b_out). Everything is float64.

.. module: neuro.py
    :platform: Any
    :synopsis: LSTM policy network, BPTT, Adam, gradient checking,
               checkpoints.

"""

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import CheckpointError, DimensionError, NumericError

logger = logging.getLogger(__name__)

GATES = ("i", "f", "o", "c")

CHECKPOINT_FORMAT = "cutplan-checkpoint"
CHECKPOINT_VERSION = 1

def sigmoid(z):
    """Numerically stable logistic function."""
    out = np.empty_like(z, dtype=np.float64)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    expz = np.exp(z[~positive])
    out[~positive] = expz / (1.0 + expz)
    return out

def param_count(input_dim, hidden_dim, output_dim):
    """The number of scalars in a PolicyParams with these dimensions."""
    gates = 4 * (hidden_dim * input_dim + hidden_dim * hidden_dim + hidden_dim)
    return gates + output_dim * hidden_dim + output_dim

def param_shapes(input_dim, hidden_dim, output_dim):
    """Name -> shape for every array in PolicyParams."""
    shapes = {}

    for gate in GATES:
        shapes["W_"+gate] = (hidden_dim, input_dim)
        shapes["U_"+gate] = (hidden_dim, hidden_dim)
        shapes["b_"+gate] = (hidden_dim,)

    shapes["W_out"] = (output_dim, hidden_dim)
    shapes["b_out"] = (output_dim,)
    return shapes

class PolicyParams:
    """
    All of the network's weights, as a dict of float64 arrays keyed by
    name (W_i, U_i, b_i, ... W_out, b_out).

    Usage:

    >>> params = PolicyParams.init(6, 64, 6, np.random.default_rng(0))
    >>> params.count()
    18566
    """

    def __init__(self, arrays, input_dim, hidden_dim, output_dim):
        self.input_dim = int(input_dim)
        self.hidden_dim = int(hidden_dim)
        self.output_dim = int(output_dim)
        self.arrays = {}

        shapes = param_shapes(self.input_dim, self.hidden_dim, self.output_dim)

        if set(arrays) != set(shapes):
            raise DimensionError("parameter names don't match: "+str(sorted(arrays)))

        for name, shape in shapes.items():
            array = np.array(arrays[name], dtype=np.float64)

            if array.shape != shape:
                raise DimensionError(name+" has shape "+str(array.shape)+", expected "
                                     + str(shape))

            self.arrays[name] = array

        assert self.count() == param_count(self.input_dim, self.hidden_dim, self.output_dim)

    @classmethod
    def zeros(cls, input_dim, hidden_dim, output_dim):
        """All-zero parameters. The head then outputs exactly 0.5 everywhere."""
        shapes = param_shapes(input_dim, hidden_dim, output_dim)
        return cls({name: np.zeros(shape) for name, shape in shapes.items()},
                   input_dim, hidden_dim, output_dim)

    @classmethod
    def init(cls, input_dim, hidden_dim, output_dim, rng, forget_bias=1.0):
        """
        Random parameters: every matrix uniform in
        +-sqrt(6 / (fan_in + fan_out)), biases zero except the forget
        gate's, which start at forget_bias.

        Args:
            input_dim (int), hidden_dim (int), output_dim (int):  Dimensions.
            rng (numpy.random.Generator):                          Randomness.

        Kwargs:
            forget_bias (float):    Default 1.0.
        """

        arrays = {}

        for name, shape in param_shapes(input_dim, hidden_dim, output_dim).items():
            if len(shape) == 2:
                limit = np.sqrt(6.0 / (shape[0] + shape[1]))
                arrays[name] = rng.uniform(-limit, limit, size=shape)

            else:
                arrays[name] = np.zeros(shape)

        arrays["b_f"] += forget_bias
        return cls(arrays, input_dim, hidden_dim, output_dim)

    def dims(self):
        return {"input": self.input_dim, "hidden": self.hidden_dim, "output": self.output_dim}

    def count(self):
        return sum(array.size for array in self.arrays.values())

    def copy(self):
        return PolicyParams({name: array.copy() for name, array in self.arrays.items()},
                            self.input_dim, self.hidden_dim, self.output_dim)

    def zeros_like(self):
        """A dict of zero arrays shaped like the parameters, for gradients."""
        return {name: np.zeros_like(array) for name, array in self.arrays.items()}

    def __getitem__(self, name):
        return self.arrays[name]

    def __iter__(self):
        return iter(self.arrays)

@dataclass
class NetState:
    """The recurrent carry: hidden vector h and cell vector c."""
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim):
        return cls(h=np.zeros(hidden_dim), c=np.zeros(hidden_dim))

@dataclass
class StepCache:
    """Everything one forward step needs to keep for the backward pass."""
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray
    probs: np.ndarray = None

def lstm_forward(x, state, params):
    """
    Run one LSTM step.

    Args:
        x (array):              Input vector, length input_dim.
        state (NetState):       The carry from the previous step.
        params (PolicyParams):  The weights.

    Returns:
        tuple (NetState, StepCache).

    Raises:
        NumericError, if x has a NaN or infinity in it.
        DimensionError, if x has the wrong length.
    """

    x = np.asarray(x, dtype=np.float64)

    if x.shape != (params.input_dim,):
        raise DimensionError("input has shape "+str(x.shape)+", expected ("
                             + str(params.input_dim)+",)")

    if not np.all(np.isfinite(x)):
        raise NumericError("lstm_forward(): non-finite input "+str(x))

    h_prev, c_prev = state.h, state.c
    pre = {gate: params["W_"+gate] @ x + params["U_"+gate] @ h_prev + params["b_"+gate]
           for gate in GATES}

    i = sigmoid(pre["i"])
    f = sigmoid(pre["f"])
    o = sigmoid(pre["o"])
    g = np.tanh(pre["c"])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c

    cache = StepCache(x=x, h_prev=h_prev, c_prev=c_prev, i=i, f=f, o=o, g=g, c=c,
                      tanh_c=tanh_c, h=h)

    return NetState(h=h, c=c), cache

def head_forward(h, params):
    """The output layer: sigmoid(W_out h + b_out), one probability per size."""
    return sigmoid(params["W_out"] @ h + params["b_out"])

def policy_step(x, state, params):
    """
    lstm_forward() followed by head_forward(). The probabilities are kept
    on the cache so episode_backward() can use them.
    """

    state, cache = lstm_forward(x, state, params)
    cache.probs = head_forward(state.h, params)
    return state, cache

def episode_backward(caches, dprobs, params):
    """
    Backpropagate through a whole episode.

    Args:
        caches (list of StepCache):     From policy_step(), in time order.
        dprobs (list of arrays):        dLoss/dprobs at every step.
        params (PolicyParams):          The weights used going forward.

    Returns:
        dict name -> gradient array, shaped like the parameters.

    Raises:
        DimensionError, if there isn't one gradient per cached step.
    """

    if len(caches) != len(dprobs):
        raise DimensionError("episode_backward(): "+str(len(caches))+" cached steps but "
                             + str(len(dprobs))+" loss gradients")

    grads = params.zeros_like()
    dh_next = np.zeros(params.hidden_dim)
    dc_next = np.zeros(params.hidden_dim)

    for cache, dp in zip(reversed(caches), reversed(dprobs)):
        dp = np.asarray(dp, dtype=np.float64)

        if cache.probs is None:
            raise DimensionError("episode_backward(): cache has no head output")

        #Head.
        dz = dp * cache.probs * (1.0 - cache.probs)
        grads["W_out"] += np.outer(dz, cache.h)
        grads["b_out"] += dz
        dh = params["W_out"].T @ dz + dh_next

        #Cell.
        do = dh * cache.tanh_c
        dc = dc_next + dh * cache.o * (1.0 - cache.tanh_c ** 2)

        dpre = {
            "i": dc * cache.g * cache.i * (1.0 - cache.i),
            "f": dc * cache.c_prev * cache.f * (1.0 - cache.f),
            "o": do * cache.o * (1.0 - cache.o),
            "c": dc * cache.i * (1.0 - cache.g ** 2),
        }

        dh_next = np.zeros(params.hidden_dim)

        for gate in GATES:
            grads["W_"+gate] += np.outer(dpre[gate], cache.x)
            grads["U_"+gate] += np.outer(dpre[gate], cache.h_prev)
            grads["b_"+gate] += dpre[gate]
            dh_next += params["U_"+gate].T @ dpre[gate]

        dc_next = dc * cache.f

    return grads

@dataclass
class AdamState:
    """First and second moment estimates, and the step counter."""
    m: dict
    v: dict
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params):
        return cls(m=params.zeros_like(), v=params.zeros_like())

def adam_step(params, grads, adam, lr=0.001):
    """
    Apply one bias-corrected Adam update to params, in place.

    Args:
        params (PolicyParams):  Updated in place.
        grads (dict):           Gradient arrays by parameter name.
        adam (AdamState):       Updated in place.

    Kwargs:
        lr (float):     The learning rate. Default 0.001.

    Returns:
        tuple (params, adam), the same objects that were passed in.

    Raises:
        NumericError, if any gradient isn't finite. Nothing is changed.
    """

    for name in params:
        if grads[name].shape != params[name].shape:
            raise DimensionError("gradient for "+name+" has shape "+str(grads[name].shape))

        if not np.all(np.isfinite(grads[name])):
            raise NumericError("adam_step(): non-finite gradient for "+name)

    adam.t += 1
    bc1 = 1.0 - adam.beta1 ** adam.t
    bc2 = 1.0 - adam.beta2 ** adam.t

    for name in params:
        g = grads[name]
        adam.m[name] *= adam.beta1
        adam.m[name] += (1.0 - adam.beta1) * g
        adam.v[name] *= adam.beta2
        adam.v[name] += (1.0 - adam.beta2) * (g * g)

        m_hat = adam.m[name] / bc1
        v_hat = adam.v[name] / bc2
        params[name][...] -= lr * m_hat / (np.sqrt(v_hat) + adam.eps)

    return params, adam

def finite_diff_check(params, loss_fn, probes=200, eps=1e-5, rng=None):
    """
    Compare analytic gradients against central differences at randomly
    chosen coordinates.

    Args:
        params (PolicyParams):  The point to check at. Coordinates are
                                nudged in place and restored.
        loss_fn (callable):     loss_fn(params) -> (loss, grads dict).
                                Must be deterministic.

    Kwargs:
        probes (int):           How many coordinates to check. Default 200.
        eps (float):            The nudge. Default 1e-5.
        rng (Generator):        Picks the coordinates. Default seed 0.

    Returns:
        float. The largest |analytic - numeric| / max(1e-8, |analytic| + |numeric|).

    Usage:

    >>> error = finite_diff_check(params, loss_fn)
    >>> error < 1e-4
    True
    """

    if rng is None:
        rng = np.random.default_rng(0)

    _, grads = loss_fn(params)
    names = sorted(params)
    worst = 0.0

    for _ in range(probes):
        #Pick the array first so the small head and bias arrays get probed too.
        name = names[rng.integers(len(names))]
        index = np.unravel_index(rng.integers(params[name].size), params[name].shape)

        original = params[name][index]

        params[name][index] = original + eps
        plus, _ = loss_fn(params)

        params[name][index] = original - eps
        minus, _ = loss_fn(params)

        params[name][index] = original

        numeric = (plus - minus) / (2.0 * eps)
        analytic = grads[name][index]
        error = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))

        if error > worst:
            logger.debug("finite_diff_check(): %s%s analytic=%r numeric=%r", name,
                         index, analytic, numeric)
            worst = error

    return float(worst)

#------------------------------------ Checkpoints ------------------------------------
@dataclass
class Checkpoint:
    """What a checkpoint file holds."""
    params: PolicyParams
    adam: AdamState = None
    rng_state: dict = None
    episode: int = 0
    extra: dict = field(default_factory=dict)

def _array_record(array):
    return {"shape": list(array.shape), "data": array.ravel(order="C").tolist()}

def _array_from_record(record):
    return np.array(record["data"], dtype=np.float64).reshape(record["shape"])

def save_checkpoint(path, checkpoint):
    """
    Write a checkpoint as JSON: dimensions, every array row-major, the
    Adam state, the generator state and the episode counter. Floats are
    written in shortest round-trip form, so loading gives back the exact
    same numbers.
    """

    record = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dims": checkpoint.params.dims(),
        "params": {name: _array_record(array) for name, array in checkpoint.params.arrays.items()},
        "episode": checkpoint.episode,
        "rng_state": checkpoint.rng_state,
        "extra": checkpoint.extra,
        "adam": None,
    }

    if checkpoint.adam is not None:
        adam = checkpoint.adam
        record["adam"] = {
            "t": adam.t, "beta1": adam.beta1, "beta2": adam.beta2, "eps": adam.eps,
            "m": {name: _array_record(array) for name, array in adam.m.items()},
            "v": {name: _array_record(array) for name, array in adam.v.items()},
        }

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="\n") as checkpoint_file:
        json.dump(record, checkpoint_file)

def load_checkpoint(path, expected_dims=None):
    """
    Read a checkpoint written by save_checkpoint().

    Kwargs:
        expected_dims (dict):   If given, {"input", "hidden", "output"} the
                                checkpoint must match.

    Raises:
        CheckpointError, if the file is missing, isn't a checkpoint, has an
        unknown version, or has the wrong dimensions.
    """

    try:
        with open(path, "r", encoding="utf-8") as checkpoint_file:
            record = json.load(checkpoint_file)

    except OSError as err:
        raise CheckpointError("neuro.load_checkpoint(): can't read "+str(path)+": "
                              + str(err)) from err

    except ValueError as err:
        raise CheckpointError("neuro.load_checkpoint(): "+str(path)+" is not valid JSON: "
                              + str(err)) from err

    if not isinstance(record, dict) or record.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("neuro.load_checkpoint(): "+str(path)+" is not a checkpoint")

    if record.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError("neuro.load_checkpoint(): unsupported checkpoint version "
                              + str(record.get("version")))

    dims = record["dims"]

    if expected_dims is not None and dict(dims) != dict(expected_dims):
        raise CheckpointError("neuro.load_checkpoint(): checkpoint dimensions "+str(dims)
                              + " don't match "+str(expected_dims))

    try:
        params = PolicyParams({name: _array_from_record(rec)
                               for name, rec in record["params"].items()},
                              dims["input"], dims["hidden"], dims["output"])

    except (DimensionError, KeyError, ValueError) as err:
        raise CheckpointError("neuro.load_checkpoint(): bad parameters: "+str(err)) from err

    adam = None

    if record.get("adam") is not None:
        rec = record["adam"]
        adam = AdamState(m={name: _array_from_record(a) for name, a in rec["m"].items()},
                         v={name: _array_from_record(a) for name, a in rec["v"].items()},
                         t=rec["t"], beta1=rec["beta1"], beta2=rec["beta2"], eps=rec["eps"])

    return Checkpoint(params=params, adam=adam, rng_state=record.get("rng_state"),
                      episode=record.get("episode", 0), extra=record.get("extra") or {})

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Configuration For The Cut Order Planner
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
This is the part of the package that reads configuration. A config
file is flat text, one dotted key per line:

    # Exploration.
    ou.sigma = 0.2
    eps.decay = 0.995
    train.episodes = 1000

Every key has a default; a file overrides the defaults and command line
flags override the file. If no file is named on the command line the
CUTPLAN_CONFIG environment variable is tried.

.. module: config.py
    :platform: Any
    :synopsis: RunConfig and the key = value config file.

"""

import logging
import os
from dataclasses import dataclass, field, replace

from .baselines import OracleLimits
from .env import EnvConfig
from .explore import ExploreConfig
from .train import TrainConfig
from .errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "CUTPLAN_CONFIG"

#Diagnostics from the last parse, in the "module.function(): message" form.
ERRORS = []

def _bool(text):
    lowered = text.strip().lower()

    if lowered in ("1", "true", "yes", "on"):
        return True

    if lowered in ("0", "false", "no", "off"):
        return False

    raise ValueError("not a boolean: "+text)

def _optional_int(text):
    if text.strip().lower() in ("", "none"):
        return None

    return int(text)

#key -> (section, field, parser)
KEYS = {
    "seed": ("run", "seed", int),
    "env.max_steps": ("env", "max_steps", int),
    "env.overproduction_weight": ("env", "overproduction_weight", float),
    "env.max_plies": ("env", "max_plies", _optional_int),
    "ou.mu": ("explore", "ou_mu", float),
    "ou.theta": ("explore", "ou_theta", float),
    "ou.sigma": ("explore", "ou_sigma", float),
    "ou.dt": ("explore", "ou_dt", float),
    "eps.start": ("eps", "eps0", float),
    "eps.decay": ("eps", "decay", float),
    "eps.floor": ("eps", "floor", float),
    "sampler.amplitude_enabled": ("explore", "amplitude_enabled", _bool),
    "sampler.measure_shots": ("explore", "measure_shots", int),
    "explore.ou_enabled": ("explore", "ou_enabled", _bool),
    "explore.epsilon_enabled": ("explore", "epsilon_enabled", _bool),
    "train.episodes": ("train", "episodes", int),
    "train.gamma": ("train", "gamma", float),
    "train.lr": ("train", "lr", float),
    "train.hidden": ("train", "hidden", int),
    "train.norm_window": ("train", "norm_window", int),
    "train.log_every": ("train", "log_every", int),
    "train.onpolicy_logprob": ("train", "onpolicy_logprob", _bool),
    "oracle.max_states": ("oracle", "max_states", int),
    "oracle.node_budget": ("oracle", "node_budget", _optional_int),
    "oracle.binary_counts": ("oracle", "binary_counts", _bool),
    "io.order": ("io", "order", str),
    "io.format": ("io", "format", str),
    "io.board_len": ("io", "board_len", float),
    "io.out": ("io", "out", str),
    "io.checkpoint": ("io", "checkpoint", str),
}

@dataclass(frozen=True)
class IOConfig:
    """Input and output paths."""
    order: str = None
    format: str = None
    board_len: float = None
    out: str = None
    checkpoint: str = None

@dataclass(frozen=True)
class RunConfig:
    """The merged settings for one command."""
    seed: int = 0
    env: EnvConfig = field(default_factory=EnvConfig)
    explore: ExploreConfig = field(default_factory=ExploreConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    oracle: OracleLimits = field(default_factory=OracleLimits)
    io: IOConfig = field(default_factory=IOConfig)

    def train_config(self):
        """The TrainConfig with this run's seed, env and exploration settings."""
        return replace(self.train, seed=self.seed, env=self.env, explore=self.explore)

def parse_config_text(text, source="<config>"):
    """
    Parse config file text into a dict of dotted key -> typed value.

    Raises:
        ConfigError, naming every bad line.
    """

    del ERRORS[:]
    values = {}

    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()

        if not line:
            continue

        if "=" not in line:
            ERRORS.append("config.parse_config_text(): "+source+" line "+str(number)
                          + ": expected 'key = value'\n")
            continue

        key, value = (part.strip() for part in line.split("=", 1))

        if key not in KEYS:
            ERRORS.append("config.parse_config_text(): "+source+" line "+str(number)
                          + ": unknown key '"+key+"'\n")
            continue

        try:
            values[key] = KEYS[key][2](value)

        except ValueError as err:
            ERRORS.append("config.parse_config_text(): "+source+" line "+str(number)
                          + ": bad value for "+key+": "+str(err)+"\n")

    if ERRORS:
        raise ConfigError("".join(ERRORS).strip())

    return values

def apply_values(config, values):
    """
    Return config with the dotted key -> value overrides applied.

    Raises:
        ConfigError, if the result breaks a constraint (e.g. theta * dt >= 1).
    """

    sections = {"run": {}, "env": {}, "explore": {}, "eps": {}, "train": {}, "oracle": {},
                "io": {}}

    for key, value in values.items():
        if key not in KEYS:
            raise ConfigError("unknown config key '"+key+"'")

        section, name, _ = KEYS[key]
        sections[section][name] = value

    try:
        schedule = replace(config.explore.schedule, **sections["eps"])
        return replace(
            config,
            seed=sections["run"].get("seed", config.seed),
            env=replace(config.env, **sections["env"]),
            explore=replace(config.explore, schedule=schedule, **sections["explore"]),
            train=replace(config.train, **sections["train"]),
            oracle=replace(config.oracle, **sections["oracle"]),
            io=replace(config.io, **sections["io"]),
        )

    except ValueError as err:
        raise ConfigError("invalid configuration: "+str(err)) from err

def config_path(flag_path=None):
    """The config file to read: the flag, else $CUTPLAN_CONFIG, else None."""
    if flag_path:
        return flag_path

    return os.environ.get(CONFIG_ENV_VAR) or None

def load_config(path=None, overrides=None):
    """
    Build a RunConfig: defaults, then the file (if any), then overrides.

    Args:
        path (str):         Config file, or None to try $CUTPLAN_CONFIG.
        overrides (dict):   Dotted key -> value from command line flags.
                            None values are ignored.

    Returns:
        RunConfig.

    Raises:
        ConfigError.

    Usage:

    >>> config = load_config("run.cfg", {"seed": 7, "train.episodes": 200})
    """

    config = RunConfig()
    path = config_path(path)

    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as config_file:
                text = config_file.read()

        except OSError as err:
            raise ConfigError("can't read config file "+path+": "+str(err)) from err

        logger.debug("load_config(): reading %s", path)
        config = apply_values(config, parse_config_text(text, source=path))

    if overrides:
        config = apply_values(config, {key: value for key, value in overrides.items()
                                       if value is not None})

    return config

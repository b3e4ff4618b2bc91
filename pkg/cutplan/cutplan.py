#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Cut Order Planner
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
This is the part of the package that you would normally run. It reads
an order and a configuration, and runs one of these commands:

    plan          plan an order with one planner and print the allocation table
    train         train the policy network (one seed, or several in parallel)
    evaluate      roll out a trained policy with exploration switched off
    compare       run several planners on one order side by side
    gradcheck     check the policy gradients against finite differences
    noise-stats   check the OU noise against its closed-form moments

For example:

    $ python3 -m cutplan plan --planner greedy
    $ python3 -m cutplan train --episodes 1000 --seed 7 --out runs/seed-7
    $ python3 -m cutplan compare --checkpoint runs/seed-7/best.json

With no --order the bundled six-size order is used. Every table printed
is also available as JSON, with --json on stdout or in --out.

Exit status is 0 on success, 1 for a validation or domain error, 2 for
a usage or configuration error, and 3 for a numeric failure (including
gradcheck and noise-stats missing their tolerances).

.. module: cutplan.py
    :platform: Any
    :synopsis: The command line front end of the CutPlan package.

"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import baselines
from . import config as configuration
from . import core
from . import explore
from . import neuro
from . import orders
from . import train
from .errors import CheckpointError, ConfigError, CutPlanError, NumericError, OracleRefusal

#Declare version; useful for users of the module.
VERSION = "1.0.0"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s: %(message)s'
LOG_DATEFMT = '%d/%m/%Y %I:%M:%S %p'

PLANNERS = ("greedy", "largest", "random", "oracle", "agent")

#Where train writes when neither --out nor io.out is set.
DEFAULT_TRAIN_OUT = "cutplan-train"

logger = logging.getLogger(__name__)

def _seed_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]

    except ValueError as err:
        raise argparse.ArgumentTypeError("expected comma separated seeds, got "+text) from err

def _planner_list(text):
    names = [part.strip() for part in text.split(",") if part.strip()]

    for name in names:
        if name not in PLANNERS:
            raise argparse.ArgumentTypeError("unknown planner '"+name+"'")

    return names

def build_parser():
    """
    The argument parser: one sub-command per command, all sharing the
    input, config and logging flags.
    """

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", help="order file (default: the bundled six-size order)")
    common.add_argument("--format", choices=("json", "csv"),
                        help="order file format (default: from the extension)")
    common.add_argument("--board-len", type=float, help="board length, required for CSV orders")
    common.add_argument("--config", help="config file (default: $"
                        + configuration.CONFIG_ENV_VAR+")")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")
    common.add_argument("-D", "--debug", action="store_true",
                        help="show all logging messages")
    common.add_argument("-q", "--quiet", action="store_true",
                        help="show only critical logging messages")

    parser = argparse.ArgumentParser(prog="cutplan",
                                     description="Cut order planning with a learned policy.")
    parser.add_argument("--version", action="version", version="%(prog)s "+VERSION)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    plan = commands.add_parser("plan", parents=[common], help="plan an order")
    plan.add_argument("--planner", choices=PLANNERS, default="greedy")
    plan.add_argument("--checkpoint", help="checkpoint for the agent planner")
    plan.set_defaults(func=cmd_plan)

    trainer = commands.add_parser("train", parents=[common], help="train the policy")
    trainer.add_argument("--episodes", type=int, help="training episodes")
    trainer.add_argument("--seeds", type=_seed_list,
                         help="comma separated seeds to train in parallel")
    trainer.add_argument("--workers", type=int, help="worker processes for --seeds")
    trainer.set_defaults(func=cmd_train)

    evaluator = commands.add_parser("evaluate", parents=[common],
                                    help="evaluate a trained policy")
    evaluator.add_argument("--checkpoint", help="checkpoint to evaluate")
    evaluator.add_argument("--episodes", type=int, default=50, help="rollouts (default 50)")
    evaluator.set_defaults(func=cmd_evaluate)

    compare = commands.add_parser("compare", parents=[common], help="compare planners")
    compare.add_argument("--planners", type=_planner_list,
                         help="comma separated planners (default: all that apply)")
    compare.add_argument("--seeds", type=_seed_list, help="seeds for the random planner")
    compare.add_argument("--checkpoint", help="checkpoint for the agent planner")
    compare.set_defaults(func=cmd_compare)

    gradcheck = commands.add_parser("gradcheck", parents=[common],
                                    help="finite difference gradient check")
    gradcheck.add_argument("--probes", type=int, default=200)
    gradcheck.add_argument("--steps", type=int, default=3)
    gradcheck.set_defaults(func=cmd_gradcheck)

    noise = commands.add_parser("noise-stats", parents=[common], help="OU noise statistics")
    noise.add_argument("--n", type=int, default=100000, help="steps per lane")
    noise.add_argument("--lanes", type=int, default=256)
    noise.set_defaults(func=cmd_noise_stats)

    return parser

def setup_logging(args):
    """Configure the root logger from -D and -q."""
    level = logging.WARNING

    if args.debug:
        level = logging.DEBUG

    elif args.quiet:
        level = logging.CRITICAL

    logging.basicConfig(format=LOG_FORMAT, datefmt=LOG_DATEFMT, level=level, force=True)

def load_run_config(args):
    """Defaults, then the config file, then the flags."""
    overrides = {
        "seed": args.seed,
        "io.order": args.order,
        "io.format": args.format,
        "io.board_len": args.board_len,
        "io.out": args.out,
        "io.checkpoint": getattr(args, "checkpoint", None),
    }

    if args.command == "train":
        overrides["train.episodes"] = args.episodes

    return configuration.load_config(args.config, overrides)

def load_order(config):
    path = config.io.order or orders.bundled_order_path()
    return orders.ingest_order(path, fmt=config.io.format, board_len=config.io.board_len)

def load_policy(config, order):
    """
    Load the checkpoint named in the config and check it fits the order.

    Raises:
        CheckpointError, if no checkpoint was given or it doesn't fit.
    """

    if not config.io.checkpoint:
        raise CheckpointError("the agent planner needs --checkpoint")

    params = neuro.load_checkpoint(config.io.checkpoint).params

    if params.input_dim != order.n or params.output_dim != order.n:
        raise CheckpointError("checkpoint "+config.io.checkpoint+" was trained on "
                              + str(params.input_dim)+" sizes, the order has "+str(order.n))

    return params

def _write_json(path, record):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="\n") as json_file:
        json.dump(record, json_file, indent=2)
        json_file.write("\n")

def make_plan(planner, order, config, seed=None):
    """
    Plan an order with the named planner.

    Returns:
        tuple (CutPlan, dict of planner-specific details).

    Raises:
        OracleRefusal, for the oracle on an instance beyond its limits.
        CheckpointError, for the agent without a usable checkpoint.
    """

    max_plies = config.env.max_plies
    seed = config.seed if seed is None else seed

    if planner == "greedy":
        return baselines.greedy_plan(order, max_plies=max_plies), {}

    if planner == "largest":
        return baselines.largest_remaining_plan(order, max_plies=max_plies), {}

    if planner == "random":
        result = baselines.random_plan(order, seed, max_plies=max_plies)
        return result.plan, {"seed": seed, "complete": result.complete}

    if planner == "oracle":
        result = baselines.oracle_min_sections(order, replace(config.oracle, max_plies=max_plies))
        return result.witness, {"min_sections": result.min_sections,
                                "nodes_explored": result.nodes_explored}

    params = load_policy(config, order)
    trace = train.run_episode(order, params, config.explore.exploit_only(), 0.0,
                              np.random.default_rng(seed), env_config=config.env)
    return trace.plan, {"checkpoint": config.io.checkpoint, "fulfilled": trace.fulfilled,
                        "total_reward": trace.total_reward}

#------------------------------------ Commands ------------------------------------
def cmd_plan(args, config):
    """Plan the order and print the allocation table (or its JSON)."""
    order = load_order(config)
    plan, extra = make_plan(args.planner, order, config)
    record = orders.plan_to_dict(plan, order, planner=args.planner, extra=extra)
    table = orders.format_plan_table(plan, order)

    if config.io.out:
        os.makedirs(config.io.out, exist_ok=True)
        _write_json(os.path.join(config.io.out, "plan.json"), record)

        with open(os.path.join(config.io.out, "plan.txt"), "w", encoding="utf-8",
                  newline="\n") as table_file:
            table_file.write(table)

    if args.json:
        print(json.dumps(record, indent=2))

    else:
        print(table, end="")
        print("Status: "+record["validation"]["status"]+", sections: "+str(len(plan))
              + ", waste: "+str(core.waste(plan, order)))

    return 0

def cmd_train(args, config):
    """Train one seed, or several with --seeds, and print the summaries."""
    order = load_order(config)
    train_config = config.train_config()

    try:
        train_config.env.check_order(order)

    except ValueError as err:
        raise ConfigError(str(err)) from err

    out_dir = config.io.out or DEFAULT_TRAIN_OUT

    if args.seeds:
        summaries = train.train_many(train_config, order, args.seeds, out_dir,
                                     workers=args.workers)

    else:
        summaries = [train.train(train_config, order, out_dir=out_dir).summary]

    if args.json:
        print(json.dumps(summaries, indent=2, sort_keys=True))

    else:
        for summary in summaries:
            print("seed "+str(summary["seed"])+": "+str(summary["episodes"])+" episodes, "
                  + "last mean reward "+format(summary["last_mean_reward"], ".4f")
                  + ", final epsilon "+format(summary["final_epsilon"], ".4f")
                  + ", max steps "+str(summary["max_steps"]))

        print("Output written to "+out_dir)

    return 0

def cmd_evaluate(args, config):
    """Evaluate a checkpoint with exploration off."""
    order = load_order(config)
    params = load_policy(config, order)
    report = train.evaluate(params, order, episodes=args.episodes, env_config=config.env,
                            explore_config=config.explore, seed=config.seed)

    if config.io.out:
        _write_json(os.path.join(config.io.out, "evaluation.json"), report)

    print(json.dumps(report if args.json else report["summary"], indent=2, sort_keys=True))
    return 0

def compare_planners(order, config, planners, seeds):
    """
    Run every planner on the order, in the order given, and collect one
    row each: sections, fabric used, waste, board utilisation, status and
    runtime. The random planner gets one row per seed. An oracle refusal
    becomes a row with status REFUSED rather than an error.

    Returns:
        list of dict.
    """

    rows = []
    jobs = []

    for planner in planners:
        if planner == "random":
            jobs.extend(("random", seed) for seed in seeds)

        else:
            jobs.append((planner, config.seed))

    for planner, seed in jobs:
        started = time.perf_counter()

        try:
            plan, extra = make_plan(planner, order, config, seed=seed)

        except OracleRefusal as err:
            logger.warning("compare_planners(): %s", err)
            rows.append({"planner": planner, "seed": seed, "sections": None,
                         "fabric_used": None, "waste": None, "utilisation": None,
                         "status": "REFUSED", "error": str(err),
                         "runtime": time.perf_counter() - started})
            continue

        runtime = time.perf_counter() - started
        summary = core.plan_summary(plan, order)
        row = {"planner": planner, "seed": seed, "runtime": runtime}
        row.update(summary)
        row.update({key: value for key, value in extra.items() if key not in row})
        rows.append(row)

    return rows

def format_compare_table(rows):
    """The compare rows as an aligned text table."""
    columns = ("planner", "seed", "sections", "fabric_used", "waste", "utilisation",
               "status", "runtime")
    table = [list(columns)]

    for row in rows:
        cells = []

        for column in columns:
            value = row.get(column)

            if value is None:
                cells.append("--")

            elif column == "runtime":
                cells.append(format(value, ".4f"))

            elif column == "utilisation":
                cells.append(format(value, ".4f"))

            elif isinstance(value, float):
                cells.append(format(value, "g"))

            else:
                cells.append(str(value))

        table.append(cells)

    widths = [max(len(line[col]) for line in table) for col in range(len(columns))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
             for line in table]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines)+"\n"

def cmd_compare(args, config):
    """Compare planners on one order. greedy is always included."""
    order = load_order(config)
    planners = args.planners

    if planners is None:
        planners = ["greedy", "largest", "random", "oracle"]

        if config.io.checkpoint:
            planners.append("agent")

    if "greedy" not in planners:
        planners = ["greedy"] + planners

    rows = compare_planners(order, config, planners, args.seeds or [config.seed])
    record = {"order": orders.order_to_dict(order), "rows": rows}

    if config.io.out:
        _write_json(os.path.join(config.io.out, "compare.json"), record)

    if args.json:
        print(json.dumps(record, indent=2))

    else:
        print(format_compare_table(rows), end="")

    return 0

def cmd_gradcheck(args, config):
    """Exit 0 only if the largest relative error is below 1e-4."""
    order = load_order(config)
    report = train.gradcheck(seed=config.seed, probes=args.probes, steps=args.steps,
                             order=order, hidden=config.train.hidden)

    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["passed"] else NumericError.exit_code

def cmd_noise_stats(args, config):
    """Exit 0 only if mean, spread and lag-1 correlation are within tolerance."""
    ou = config.explore
    report = explore.noise_stats(n=args.n, seed=config.seed, lanes=args.lanes, mu=ou.ou_mu,
                                 theta=ou.ou_theta, sigma=ou.ou_sigma, dt=ou.ou_dt)

    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["passed"] else NumericError.exit_code

def run(argv=None):
    """
    Parse the command line, run the command, and return the exit status.

    Usage:

    >>> status = run(["plan", "--planner", "greedy"])
    """

    parser = build_parser()

    try:
        args = parser.parse_args(argv)

    except SystemExit as err:
        #argparse exits 2 on usage errors and 0 after --help and --version.
        return err.code

    setup_logging(args)

    try:
        config = load_run_config(args)
        return args.func(args, config)

    except CutPlanError as err:
        logger.debug("run(): %s failed", args.command, exc_info=True)
        sys.stderr.write("cutplan "+args.command+": "+str(err)+"\n")
        return err.exit_code

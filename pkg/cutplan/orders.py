#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Order And Plan Files For The Cut Order Planner
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
This is the part of the package that reads orders and writes plans.

Orders come as JSON:

    {"board_len": 9.0,
     "sizes": [{"label": "XS", "marker_len": 3.0, "consumption": 3.0}, ...],
     "demands": [78, 151, 214, 188, 172, 36]}

or as CSV with the header label,marker_len,consumption,demand, in which
case the board length has to be given separately.

Plans are written as JSON (the machine-readable contract) and as an
aligned text table with two rows per section, counts then garments,
followed by Total Produce and Balance rows.

.. module: orders.py
    :platform: Any
    :synopsis: Order ingestion, plan JSON, and the allocation table.

"""

import csv
import io
import json
import logging
import os

from . import core
from .errors import DimensionError, OrderFormatError

logger = logging.getLogger(__name__)

#Diagnostics from the last ingestion, in the "module.function(): message" form.
ERRORS = []

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")

CSV_HEADER = ("label", "marker_len", "consumption", "demand")

def bundled_order_path(name="six_sizes.json"):
    """The path of an order file shipped with the package."""
    return os.path.join(DATA_DIR, name)

def _number(value, where, field_name, integer=False):
    """Parse a number, appending a diagnostic and returning None on failure."""
    try:
        if isinstance(value, bool) or value is None:
            raise ValueError("missing or not a number")

        if not integer:
            number = float(value)

        elif isinstance(value, str):
            number = int(value.strip())

        elif isinstance(value, float) and value.is_integer():
            number = int(value)

        elif isinstance(value, int):
            number = value

        else:
            raise ValueError("not a whole number")

    except (TypeError, ValueError):
        ERRORS.append("orders.ingest_order(): "+where+": field '"+field_name
                      + "' is not a valid number: "+repr(value)+"\n")
        return None

    return number

def _build_order(labels, markers, consumptions, demands, board_len, where_rows):
    """Check the pieces and assemble an Order; diagnostics go to ERRORS."""
    if not labels:
        ERRORS.append("orders.ingest_order(): the order has no sizes\n")

    for where, demand in zip(where_rows, demands):
        if demand is not None and demand < 0:
            ERRORS.append("orders.ingest_order(): "+where+": negative demand "+str(demand)+"\n")

    for label, marker, consumption in zip(labels, markers, consumptions):
        if marker is not None and marker <= 0:
            ERRORS.append("orders.ingest_order(): size "+label+": marker_len must be positive\n")

        if consumption is not None and consumption <= 0:
            ERRORS.append("orders.ingest_order(): size "+label+": consumption must be positive\n")

    if board_len is None:
        ERRORS.append("orders.ingest_order(): no board length given\n")

    elif board_len <= 0:
        ERRORS.append("orders.ingest_order(): board_len must be positive, got "
                      + str(board_len)+"\n")

    if ERRORS:
        raise OrderFormatError("".join(ERRORS).strip(), diagnostics=ERRORS)

    try:
        sizes = tuple(core.SizeSpec(label, marker, consumption)
                      for label, marker, consumption in zip(labels, markers, consumptions))
        return core.Order(sizes, tuple(demands), board_len)

    except ValueError as err:
        ERRORS.append("orders.ingest_order(): "+str(err)+"\n")
        raise OrderFormatError(str(err), diagnostics=ERRORS) from err

def parse_order_json(text, board_len=None):
    """
    Parse JSON order text. board_len, if given, overrides the file's.

    Raises:
        OrderFormatError.
    """

    del ERRORS[:]

    try:
        record = json.loads(text)

    except ValueError as err:
        ERRORS.append("orders.ingest_order(): not valid JSON: "+str(err)+"\n")
        raise OrderFormatError(ERRORS[-1].strip(), diagnostics=ERRORS) from err

    if not isinstance(record, dict):
        ERRORS.append("orders.ingest_order(): expected a JSON object at the top level\n")
        raise OrderFormatError(ERRORS[-1].strip(), diagnostics=ERRORS)

    sizes = record.get("sizes")
    demands = record.get("demands")

    if not isinstance(sizes, list):
        ERRORS.append("orders.ingest_order(): field 'sizes' must be a list\n")
        sizes = []

    if not isinstance(demands, list):
        ERRORS.append("orders.ingest_order(): field 'demands' must be a list\n")
        demands = []

    if len(sizes) != len(demands):
        ERRORS.append("orders.ingest_order(): "+str(len(sizes))+" sizes but "
                      + str(len(demands))+" demands\n")

    labels, markers, consumptions, where_rows = [], [], [], []

    for index, spec in enumerate(sizes):
        where = "sizes["+str(index)+"]"
        where_rows.append(where)

        if not isinstance(spec, dict):
            ERRORS.append("orders.ingest_order(): "+where+": expected an object\n")
            spec = {}

        labels.append(str(spec.get("label", "size"+str(index))))
        markers.append(_number(spec.get("marker_len"), where, "marker_len"))
        consumptions.append(_number(spec.get("consumption", spec.get("marker_len")), where,
                                    "consumption"))

    parsed_demands = [_number(d, "demands["+str(i)+"]", "demand", integer=True)
                      for i, d in enumerate(demands)]

    if board_len is None:
        board_len = _number(record.get("board_len"), "top level", "board_len")

    return _build_order(labels, markers, consumptions, parsed_demands, board_len,
                        ["demands["+str(i)+"]" for i in range(len(parsed_demands))])

def parse_order_csv(text, board_len):
    """
    Parse CSV order text with the header label,marker_len,consumption,demand.

    Raises:
        OrderFormatError, naming the row at fault.
    """

    del ERRORS[:]
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if any(cell.strip() for cell in row)]

    if not rows:
        ERRORS.append("orders.ingest_order(): the CSV file is empty\n")
        raise OrderFormatError(ERRORS[-1].strip(), diagnostics=ERRORS)

    header = tuple(cell.strip().lower() for cell in rows[0])

    if header != CSV_HEADER:
        ERRORS.append("orders.ingest_order(): row 1: expected header "+",".join(CSV_HEADER)
                      + ", got "+",".join(header)+"\n")
        raise OrderFormatError(ERRORS[-1].strip(), diagnostics=ERRORS)

    labels, markers, consumptions, demands, where_rows = [], [], [], [], []

    for number, row in enumerate(rows[1:], start=2):
        where = "row "+str(number)

        if len(row) != len(CSV_HEADER):
            ERRORS.append("orders.ingest_order(): "+where+": expected "+str(len(CSV_HEADER))
                          + " fields, got "+str(len(row))+"\n")
            continue

        where_rows.append(where)
        labels.append(row[0].strip())
        markers.append(_number(row[1], where, "marker_len"))
        consumptions.append(_number(row[2], where, "consumption"))
        demands.append(_number(row[3], where, "demand", integer=True))

    if board_len is not None:
        board_len = _number(board_len, "command line", "board_len")

    return _build_order(labels, markers, consumptions, demands, board_len, where_rows)

def ingest_order(path, fmt=None, board_len=None):
    """
    Read and validate an order file.

    Args:
        path (str):     The file.

    Kwargs:
        fmt (str):          "json" or "csv". Default: from the extension.
        board_len (float):  Board length; required for CSV, overrides JSON.

    Returns:
        Order.

    Raises:
        OrderFormatError, with one diagnostic per problem in .diagnostics
        (also left in orders.ERRORS).

    Usage:

    >>> order = ingest_order(bundled_order_path())
    """

    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "json"

    if fmt not in ("json", "csv"):
        raise OrderFormatError("unknown order format '"+str(fmt)+"', use json or csv")

    try:
        with open(path, "r", encoding="utf-8") as order_file:
            text = order_file.read()

    except OSError as err:
        del ERRORS[:]
        ERRORS.append("orders.ingest_order(): can't read "+str(path)+": "+str(err)+"\n")
        raise OrderFormatError(ERRORS[-1].strip(), diagnostics=ERRORS) from err

    if fmt == "csv":
        order = parse_order_csv(text, board_len)

    else:
        order = parse_order_json(text, board_len=board_len)

    logger.debug("ingest_order(): %s: %d sizes, %d garments, board %s", path, order.n,
                 order.total_demand, order.board_len)

    return order

def order_to_dict(order):
    return {
        "board_len": float(order.board_len),
        "sizes": [{"label": s.label, "marker_len": float(s.marker_len),
                   "consumption": float(s.consumption)} for s in order.sizes],
        "demands": list(order.demands),
    }

#------------------------------------ Plans ------------------------------------
def plan_to_dict(plan, order, planner=None, extra=None):
    """
    The JSON form of a plan: the sections, the validation report and
    the accounting summary.
    """

    report = core.validate_plan(plan, order)
    record = {
        "planner": planner,
        "labels": list(order.labels),
        "sections": [{"iteration": index + 1, "plies": s.plies, "counts": list(s.counts)}
                     for index, s in enumerate(plan)],
        "validation": report.to_dict(),
        "summary": core.plan_summary(plan, order),
    }

    if extra:
        record.update(extra)

    return record

def plan_from_dict(record, order):
    """
    Rebuild a CutPlan from plan_to_dict() output.

    Raises:
        DimensionError, if a section doesn't match the order's sizes.
    """

    sections = []

    for entry in record["sections"]:
        if len(entry["counts"]) != order.n:
            raise DimensionError("plan section "+str(entry.get("iteration"))+" has "
                                 + str(len(entry["counts"]))+" counts, order has "
                                 + str(order.n)+" sizes")

        sections.append(core.Section(plies=int(entry["plies"]), counts=tuple(entry["counts"])))

    return core.CutPlan(tuple(sections))

def write_plan_json(path, plan, order, planner=None, extra=None):
    with open(path, "w", encoding="utf-8", newline="\n") as plan_file:
        json.dump(plan_to_dict(plan, order, planner=planner, extra=extra), plan_file, indent=2)

def read_plan_json(path, order):
    with open(path, "r", encoding="utf-8") as plan_file:
        return plan_from_dict(json.load(plan_file), order)

def format_plan_table(plan, order):
    """
    Render a plan as the allocation table: for every section a counts
    row (iteration, plies, markers per size, markers in total) and a
    garments row (plies times counts, garments in total), then the Total
    Produce and Balance rows.

    Returns:
        str.
    """

    produced = core.production(plan, order)
    rows = [["Iteration", "Plies"] + list(order.labels) + ["Total"]]

    for index, section in enumerate(plan, start=1):
        garments = [section.plies * c for c in section.counts]
        rows.append([str(index), str(section.plies)] + [str(c) for c in section.counts]
                    + [str(sum(section.counts))])
        rows.append(["", ""] + [str(g) for g in garments] + [str(sum(garments))])

    balance = [d - p for d, p in zip(order.demands, produced)]
    rows.append(["Total Produce", "--"] + [str(p) for p in produced] + [str(sum(produced))])
    rows.append(["Balance", "--"] + [str(b) for b in balance] + [str(sum(balance))])

    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    rule = "-+-".join("-" * w for w in widths)
    lines = []

    for number, row in enumerate(rows):
        lines.append(" | ".join(cell.rjust(w) if col else cell.ljust(w)
                                for col, (cell, w) in enumerate(zip(row, widths))).rstrip())

        #Rule under the header, after each section's pair, and before the totals.
        if number == 0 or (number % 2 == 0 and number <= 2 * len(plan)):
            lines.append(rule)

    return "\n".join(lines)+"\n"

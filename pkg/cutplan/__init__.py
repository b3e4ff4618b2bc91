#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Cut Order Planner Package
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
The CutPlan package.
"""

from . import cutplan
from . import baselines
from . import core
from . import orders

VERSION = cutplan.VERSION

def ingest_order(path, fmt=None, board_len=None):
    """Wrapper for orders.ingest_order()"""
    return orders.ingest_order(path, fmt=fmt, board_len=board_len)

def greedy_plan(order, max_plies=None):
    """Wrapper for baselines.greedy_plan()"""
    return baselines.greedy_plan(order, max_plies=max_plies)

def validate_plan(plan, order, max_plies=None):
    """Wrapper for core.validate_plan()"""
    return core.validate_plan(plan, order, max_plies=max_plies)

def run(argv=None):
    """Wrapper for cutplan.run()"""
    return cutplan.run(argv)

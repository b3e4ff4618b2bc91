#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Cut Order Planner Package default executable
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
Run the CutPlan command line with python3 -m cutplan.
"""

import sys

from . import cutplan
sys.exit(cutplan.run())

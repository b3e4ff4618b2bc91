#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Unit tests for CutPlan
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

#Import modules.
import unittest
import logging
import getopt
import sys

#Global vars.
VERSION = "1.0.0"

from tests import cutplan_tests_core
from tests import cutplan_tests_env
from tests import cutplan_tests_baselines
from tests import cutplan_tests_neuro
from tests import cutplan_tests_explore
from tests import cutplan_tests_train
from tests import cutplan_tests_cli

TEST_MODULES = {
    "core": cutplan_tests_core,
    "env": cutplan_tests_env,
    "baselines": cutplan_tests_baselines,
    "neuro": cutplan_tests_neuro,
    "explore": cutplan_tests_explore,
    "train": cutplan_tests_train,
    "cli": cutplan_tests_cli,
}

def usage():
    print("\nUsage: tests.py [OPTION]\n\n")
    print("Options:\n")
    print("       -h, --help:                   Display this help text.")
    print("       -D, --debug:                  Set logging level to debug, to show all logging messages. Default: show only critical logging messages.")
    print("       -m, --module <name>:          Run only the tests for one module: "+", ".join(TEST_MODULES)+".")
    print("CutPlan "+VERSION+" is released under the GNU GPL Version 3")
    print("Copyright (C) The CutPlan Developers 2024-2026")

#Check all cmdline options are valid.
try:
    OPTS, ARGS = getopt.getopt(sys.argv[1:], "hDm:", ["help", "debug", "module="])

except getopt.GetoptError as err:
    #Invalid option. Show the help message and then exit.
    #Show the error.
    print(str(err))
    usage()
    sys.exit(2)

#Log only critical messages by default.
LOGGER_LEVEL = logging.CRITICAL
SELECTED = list(TEST_MODULES)

for o, a in OPTS:
    if o in ["-D", "--debug"]:
        LOGGER_LEVEL = logging.DEBUG
    elif o in ["-m", "--module"]:
        if a not in TEST_MODULES:
            print("Unknown test module: "+a)
            usage()
            sys.exit(2)

        SELECTED = [a]
    elif o in ["-h", "--help"]:
        usage()
        sys.exit()
    else:
        assert False, "unhandled option"

#Set up the logger (silence all except critical logging messages).
logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s: %(message)s', datefmt='%d/%m/%Y %I:%M:%S %p', level=LOGGER_LEVEL)
logger = logging

if __name__ == "__main__":
    SUITE = unittest.TestSuite()

    for name in SELECTED:
        SUITE.addTests(unittest.TestLoader().loadTestsFromModule(TEST_MODULES[name]))

    RESULT = unittest.TextTestRunner(verbosity=2).run(SUITE)
    sys.exit(0 if RESULT.wasSuccessful() else 1)

# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Unit tests for the logger wrapper and the environment variable loading."""

import logging
import os
import unittest
from unittest import mock

from tools.exceptions import PreconditionError, SimulatorError
from tools.tools import FullLogger, LOG_LEVEL_VARIABLE, load_environmental_variables


class TestLoadEnvironmentalVariables(unittest.TestCase):
    """Unit tests for load_environmental_variables."""

    def test_values_and_defaults(self):
        """Set variables are converted and missing ones fall back to the default."""
        environment = {"LAB_INT": "12", "LAB_FLOAT": "0.25", "LAB_BOOL": "yes", "LAB_EMPTY": ""}
        with mock.patch.dict(os.environ, environment, clear=False):
            values = load_environmental_variables(
                ("LAB_INT", int, 1),
                ("LAB_FLOAT", float, 1.0),
                ("LAB_BOOL", bool, False),
                ("LAB_EMPTY", str, "fallback"),
                ("LAB_MISSING", int, 7)
            )
        self.assertEqual(values, {"LAB_INT": 12, "LAB_FLOAT": 0.25, "LAB_BOOL": True,
                                  "LAB_EMPTY": "fallback", "LAB_MISSING": 7})

    def test_unconvertible_value_uses_default(self):
        """A value of the wrong type is replaced by the default."""
        with mock.patch.dict(os.environ, {"LAB_INT": "twelve", "LAB_BOOL": "maybe"}, clear=False):
            values = load_environmental_variables(("LAB_INT", int, 3), ("LAB_BOOL", bool, True))
        self.assertEqual(values, {"LAB_INT": 3, "LAB_BOOL": True})


class TestFullLogger(unittest.TestCase):
    """Unit tests for the FullLogger wrapper."""

    def test_level_from_environment(self):
        """The level comes from the environment and records do not propagate."""
        with mock.patch.dict(os.environ, {LOG_LEVEL_VARIABLE: "warning"}, clear=False):
            full_logger = FullLogger("tests.tools.environment_level")
        self.assertEqual(full_logger.level, logging.WARNING)
        self.assertFalse(full_logger.logger.propagate)
        self.assertEqual(len(full_logger.logger.handlers), 1)

    def test_explicit_level_and_unknown_name(self):
        """An explicit level wins and an unknown level name falls back to INFO."""
        self.assertEqual(FullLogger("tests.tools.explicit", "debug").level, logging.DEBUG)
        self.assertEqual(FullLogger("tests.tools.unknown", "chatty").level, logging.INFO)

    def test_handlers_are_not_duplicated(self):
        """Creating the same logger twice keeps a single stream handler."""
        FullLogger("tests.tools.shared")
        full_logger = FullLogger("tests.tools.shared")
        self.assertEqual(len(full_logger.logger.handlers), 1)


class TestExceptions(unittest.TestCase):
    """Unit tests for the exception hierarchy."""

    def test_hierarchy(self):
        """Every project error derives from SimulatorError."""
        self.assertTrue(issubclass(PreconditionError, SimulatorError))


if __name__ == '__main__':
    unittest.main()

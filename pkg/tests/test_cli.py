"""
Tests for the alq command line
"""

import unittest
import io
import os
import sys
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from scripts.alq import EXIT_ERROR, EXIT_MISMATCH, EXIT_OK, main

ROOT = os.path.join(os.path.dirname(__file__), '..')
CONFIG = os.path.join(ROOT, 'config', 'config.yaml')
SANDBOX = os.path.join(ROOT, 'data', 'sandbox')
PUBLISHED = os.path.join(ROOT, 'data', 'published')
EXPECTED = os.path.join(ROOT, 'data', 'expected', 'published_statuses.json')


def run_cli(*argv):
    """Run main with captured output; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    environ = {k: v for k, v in os.environ.items() if not k.startswith("ALQ_")}
    with mock.patch.dict(os.environ, environ, clear=True), redirect_stdout(out), redirect_stderr(err):
        code = main(["--config", CONFIG, "-q", *argv])
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    """Test cases for the alq subcommands."""

    def test_subgroups(self):
        """Test listing subgroups of order 4."""
        code, out, _ = run_cli("subgroups", "--level", "130", "--order", "4")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(out.split()), 7)
        self.assertIn("130:[5,13]", out.split())

    def test_bad_order(self):
        """Test that an impossible order exits with 2."""
        code, _, err = run_cli("subgroups", "--level", "130", "--order", "3")
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("error:", err)

    def test_count(self):
        """Test a point count over F_9."""
        code, out, _ = run_cli("count", "--level", "22", "--group", "2", "--q", "9", "--data", SANDBOX)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("#X(F_9) = 15", out)

    def test_validate(self):
        """Test validating the sandbox."""
        code, out, _ = run_cli("validate", "--data", SANDBOX)
        self.assertEqual(code, EXIT_OK)
        self.assertIn('"checked"', out)

    def test_missing_config(self):
        """Test that a missing config file exits with 2."""
        err = io.StringIO()
        with redirect_stderr(err):
            code = main(["--config", os.path.join(ROOT, "absent.yaml"), "validate"])
        self.assertEqual(code, EXIT_ERROR)

    def test_classify_diff(self):
        """Test classify with a matching and a mismatching expected file."""
        code, out, _ = run_cli("classify", "--data", PUBLISHED, "--diff", EXPECTED)
        self.assertEqual(code, EXIT_OK)
        self.assertIn('"rows"', out)

        code, _, _ = run_cli("classify", "--data", PUBLISHED, "--diff", os.path.join(ROOT, "data", "sandbox",
                                                                                   "certificates.json"))
        self.assertEqual(code, EXIT_ERROR)

    def test_explain_unknown(self):
        """Test that explaining an unknown curve exits with 2."""
        code, _, err = run_cli("explain", "131:[5,13]", "--data", PUBLISHED)
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("131:[5,13]", err)


class TestExitCodes(unittest.TestCase):
    """Test cases for the exit code constants."""

    def test_values(self):
        """Test the documented exit codes."""
        self.assertEqual((EXIT_OK, EXIT_MISMATCH, EXIT_ERROR), (0, 1, 2))


if __name__ == '__main__':
    unittest.main()

"""
Integration tests for the command-line entry point.
"""
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

import numpy as np

from tests.test_config import EXAMPLE_ATOMS, write_csv

from formats import read_pgm
from main import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, build_parser, cli_main
from utils.init_logger import init_logger

COMMANDS = ("gauge", "support", "expose", "decompose", "align", "solve", "bench", "demix", "selftest")


class TestCli(unittest.TestCase):
    """Subcommands, exit codes and output determinism."""

    def setUp(self):
        """Temporary directory with a 1-norm recipe and the non-uniqueness recipe."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name
        self.one_norm = self._write("one_norm.json", {"variant": "SignedBasis", "params": {"shape": [3]}})
        self.finite = self._write("finite.json", {"variant": "FiniteAtoms",
                                                  "params": {"atoms": [a.tolist() for a in EXAMPLE_ATOMS]}})

    def tearDown(self):
        """Remove the temporary directory and point logging back at stderr."""
        self.tmp.cleanup()
        init_logger()

    def _write(self, name, recipe):
        path = os.path.join(self.dir, name)
        with open(path, 'w') as f:
            json.dump(recipe, f)
        return path

    def _path(self, name):
        return os.path.join(self.dir, name)

    def run_cli(self, *argv):
        """(exit code, stdout, stderr) of one invocation."""
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = cli_main(["--log-level", "ERROR"] + list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_help_lists_commands(self):
        """--help exits 0 and names every subcommand."""
        code, out, _ = self.run_cli("--help")
        self.assertEqual(code, EXIT_OK)
        for name in COMMANDS:
            self.assertIn(name, out)
        self.assertEqual(build_parser().prog, "atomkit")

    def test_usage_errors(self):
        """Unknown flags, missing inputs and missing subcommands exit 1."""
        code, _, err = self.run_cli("gauge", "--set", self.one_norm, "--bogus", "1")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("--bogus", err)
        code, _, _ = self.run_cli("gauge", "--set", self.one_norm, "--input", self._path("missing.csv"))
        self.assertEqual(code, EXIT_USAGE)
        code, _, _ = self.run_cli()
        self.assertEqual(code, EXIT_USAGE)

    def test_align_example(self):
        """x = (1, 0, 0), z = (5, 3, 3) under the 1-norm are aligned."""
        x = write_csv(self._path("x.csv"), [1.0, 0.0, 0.0])
        z = write_csv(self._path("z.csv"), [5.0, 3.0, 3.0])
        code, out, _ = self.run_cli("align", "--set", self.one_norm, "--x", x, "--z", z)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), '{"aligned": true, "residual": 0.0}')

    def test_gauge_example(self):
        """x = (0, 0, 2) has gauge 2 over the four atoms (+-1, +-1, 1)."""
        x = write_csv(self._path("x.csv"), [0.0, 0.0, 2.0])
        code, out, _ = self.run_cli("gauge", "--set", self.finite, "--input", x)
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(float(out), 2.0, places=10)

    def test_support_and_expose(self):
        """Support is the infinity norm; the face holds the largest coordinate."""
        z = write_csv(self._path("z.csv"), [1.0, -4.0, 2.0])
        code, out, _ = self.run_cli("support", "--set", self.one_norm, "--input", z)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(float(out), 4.0)
        code, out, _ = self.run_cli("expose", "--set", self.one_norm, "--input", z, "--k", "2")
        self.assertEqual(code, EXIT_OK)
        face = json.loads(out)
        self.assertEqual(len(face["atoms"]), 1)
        code, _, _ = self.run_cli("expose", "--set", self.one_norm, "--input", z, "--k", "0")
        self.assertEqual(code, EXIT_USAGE)

    def test_unbounded_support_is_numeric(self):
        """A TV gauge with a non-centred direction exits 2."""
        tv = self._write("tv.json", {"variant": "TVAtoms", "params": {"n": 3}})
        z = write_csv(self._path("z.csv"), [1.0, 0.0, 0.0])
        code, _, _ = self.run_cli("expose", "--set", tv, "--input", z)
        self.assertEqual(code, EXIT_NUMERIC)

    def test_library_errors_map_to_exit_codes(self):
        """LinAlgError exits 2 and a stray ValueError exits 1, both with a message."""
        z = write_csv(self._path("z.csv"), [1.0, 0.0, 0.0])
        with mock.patch("main.load_recipe", side_effect=np.linalg.LinAlgError("SVD did not converge")):
            code, _, err = self.run_cli("support", "--set", self.one_norm, "--input", z)
        self.assertEqual(code, EXIT_NUMERIC)
        self.assertIn("LinAlgError", err)
        with mock.patch("main.load_recipe", side_effect=ValueError("bad literal")):
            code, _, err = self.run_cli("support", "--set", self.one_norm, "--input", z)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("bad literal", err)

    def test_solve_lasso(self):
        """Primal and dual runs report their gaps; the trace file is written."""
        trace = self._path("trace.csv")
        code, out, _ = self.run_cli("--seed", "0", "solve", "--problem", "lasso", "--iters", "20",
                                    "--trace", trace)
        self.assertEqual(code, EXIT_OK)
        result = json.loads(out)
        self.assertEqual(result["solver"], "primal")
        self.assertEqual(len(result["x"]), 20)
        self.assertTrue(os.path.exists(trace))
        code, out, _ = self.run_cli("--seed", "0", "solve", "--problem", "lasso", "--solver", "dual",
                                    "--iters", "20")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("z_star", json.loads(out))

    def test_custom_needs_inputs(self):
        """--problem custom without its files is a usage error."""
        code, _, _ = self.run_cli("solve", "--problem", "custom")
        self.assertEqual(code, EXIT_USAGE)

    def test_bench_deterministic(self):
        """Identical seeded runs without timing are byte-identical."""
        args = ("--seed", "4", "bench", "matcomp", "--sizes", "20,30", "--iters", "3", "--no-time")
        first = self.run_cli(*args)
        second = self.run_cli(*args)
        self.assertEqual(first[0], EXIT_OK)
        self.assertEqual(first[1], second[1])
        self.assertEqual(len(first[1].splitlines()), 3)
        code, _, _ = self.run_cli("bench", "matcomp", "--sizes", "20,abc")
        self.assertEqual(code, EXIT_USAGE)

    def test_demix_out(self):
        """Images and metrics land in the output directory."""
        out_dir = self._path("demix")
        code, out, _ = self.run_cli("--seed", "1", "demix", "--size", "16", "--iters", "20", "--out", out_dir)
        self.assertEqual(code, EXIT_OK)
        metrics = json.loads(out)
        self.assertIn("tau", metrics)
        for name in ("observed", "sparse", "lowrank", "dct", "residual"):
            self.assertEqual(read_pgm(os.path.join(out_dir, f"{name}.pgm")).shape, (16, 16))
        with open(os.path.join(out_dir, "metrics.json")) as f:
            self.assertEqual(json.load(f), metrics)

    def test_selftest_filter(self):
        """A passing suite exits 0; a filter matching nothing is a usage error."""
        code, out, _ = self.run_cli("selftest", "--filter", "non_uniqueness")
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(list(report), ["non_uniqueness"])
        self.assertEqual(report["non_uniqueness"]["failed"], 0)
        code, _, _ = self.run_cli("selftest", "--filter", "no_such_suite")
        self.assertEqual(code, EXIT_USAGE)


if __name__ == '__main__':
    unittest.main()

"""
Unit tests for file formats.
"""
import json
import os
import tempfile
import unittest

import numpy as np

from apps.matcomp import BenchRow
from elements import MaskedMatrix
from errors import UsageError
from formats import (element_text, json_text, read_element, read_masked, read_pgm, rows_text,
                     write_element, write_masked, write_pgm)


class TestFormats(unittest.TestCase):
    """CSV, JSON and PGM."""

    def setUp(self):
        """Set up each test case."""
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        """Clean up each test case."""
        self._tmp.cleanup()

    def test_element_csv(self):
        """Matrices keep their shape; single rows and columns read back as vectors."""
        M = np.array([[1.0, 2.5], [-3.0, 0.1]])
        path = os.path.join(self.tmp, "m.csv")
        write_element(path, M)
        np.testing.assert_array_equal(read_element(path), M)
        path = os.path.join(self.tmp, "v.csv")
        with open(path, 'w') as f:
            f.write("1,0,0\n")
        np.testing.assert_array_equal(read_element(path), [1.0, 0.0, 0.0])
        self.assertEqual(element_text(np.array([0.1])), "0.10000000000000001\n")

    def test_bad_element(self):
        """Unreadable files are usage errors."""
        with self.assertRaises(UsageError):
            read_element(os.path.join(self.tmp, "missing.csv"))

    def test_masked_triples(self):
        """Triples keep the header and lexicographic order."""
        mask = MaskedMatrix((3, 3), [2, 0], [1, 2], [5.0, -1.0])
        path = os.path.join(self.tmp, "b.csv")
        write_masked(path, mask)
        with open(path) as f:
            self.assertEqual(f.readline().strip(), "i,j,value")
        back = read_masked(path, (3, 3))
        self.assertEqual(back.triples(), [(0, 2, -1.0), (2, 1, 5.0)])
        with open(path, 'w') as f:
            f.write("row,col,v\n0,0,1\n")
        with self.assertRaises(UsageError):
            read_masked(path)

    def test_rows_without_time(self):
        """Timing columns disappear when excluded."""
        row = BenchRow(100, 1.5, 2, 0.25, 1.5, 1, 0.5, 1.4)
        text = rows_text([row], include_time=False)
        self.assertEqual(text.splitlines()[0],
                         "size,residual_primal,rank_primal,residual_dual,rank_dual,residual_recovered")
        self.assertIn("time_primal_s", rows_text([row]))

    def test_json_infinities(self):
        """Non-finite floats become strings; keys are sorted."""
        text = json_text({"b": np.inf, "a": np.float64(0.5), "c": np.arange(2)})
        self.assertEqual(json.loads(text), {"a": 0.5, "b": "inf", "c": [0, 1]})
        self.assertTrue(text.startswith('{"a"'))

    def test_pgm(self):
        """PGM pixels span 0..255 and read back with the same shape."""
        image = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])
        path = os.path.join(self.tmp, "img.pgm")
        write_pgm(path, image)
        pixels = read_pgm(path)
        self.assertEqual(pixels.shape, (2, 3))
        self.assertEqual(int(pixels.min()), 0)
        self.assertEqual(int(pixels.max()), 255)
        with self.assertRaises(UsageError):
            write_pgm(path, np.zeros(3))


if __name__ == '__main__':
    unittest.main()

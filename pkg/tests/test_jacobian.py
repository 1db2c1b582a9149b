"""
Tests for Jacobian decompositions and point counts
"""

import unittest
import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from fractions import Fraction

from sympy import divisors

from src.arithmetic import prime_power
from src.atkin_lehner import generate, trivial_group
from src.exceptions import DecompositionError, GroupError
from src.jacobian import (
    UNRELIABLE, count_bound, decompose, decompose_group, excluded_degree, invariant_multiplicity,
    old_block_trace, point_count,
)
from src.modform_data import Dataset, KnownLists, NewformOrbit, load_dataset

SANDBOX = os.path.join(os.path.dirname(__file__), '..', 'data', 'sandbox')
CACHE = os.path.join(os.path.dirname(__file__), '..', 'data', 'cache', 'newforms.json')

# (N, generators, q, #X(F_q)) for curves excluded from gonality 4 by point counts.
PUBLISHED_COUNTS = [
    (340, [5, 17], 3, 18),
    (350, [7, 25], 9, 44),
    (410, [5, 41], 9, 42),
    (504, [7, 9], 25, 112),
    (585, [9, 65], 4, 30),
    (770, [2, 7, 55], 9, 43),
]


class TestOldBlockTrace(unittest.TestCase):
    """Test cases for traces of w_Q on old blocks."""

    def setUp(self):
        """Set up test fixtures."""
        self.orbit_85 = NewformOrbit("85.2.a.a", 85, 1, {5: -1, 17: 1}, {})
        self.orbit_22 = NewformOrbit("22.2.a.x", 22, 1, {2: 1, 11: 1}, {})

    def test_tame_block(self):
        """Test the trace 3 * lambda_5 at level 340."""
        self.assertEqual(old_block_trace(self.orbit_85, 340, 5), Fraction(-3))
        self.assertEqual(old_block_trace(self.orbit_85, 340, 1), Fraction(3))

    def test_non_hall(self):
        """Test that Q must be a Hall divisor."""
        with self.assertRaises(GroupError):
            old_block_trace(self.orbit_85, 340, 2)

    def test_wild_block(self):
        """Test that a wild prime leaves the trace undetermined."""
        self.assertIs(old_block_trace(self.orbit_22, 264, 8), UNRELIABLE)

    def test_level_must_divide(self):
        """Test that the orbit level divides the ambient level."""
        with self.assertRaises(DecompositionError):
            old_block_trace(self.orbit_85, 330, 1)


class TestDecomposition(unittest.TestCase):
    """Test cases for decompositions of the sandbox quotients."""

    def setUp(self):
        """Set up test fixtures."""
        self.dataset = load_dataset(SANDBOX)

    def test_multiplicities(self):
        """Test multiplicities of the old and new parts."""
        self.assertEqual(decompose(self.dataset.record("44:[4]"), self.dataset).parts, (("11.2.a.a", 2),))
        self.assertEqual(decompose(self.dataset.record("22:[2]"), self.dataset).parts, (("11.2.a.a", 1),))
        self.assertEqual(decompose(self.dataset.record("44:[11]"), self.dataset).parts, (("44.2.a.a", 1),))
        self.assertEqual(decompose(self.dataset.record("22:[]"), self.dataset).parts, (("11.2.a.a", 2),))

    def test_genus_sums_match_records(self):
        """Test that every sandbox record has the genus of its decomposition."""
        for record in self.dataset.records:
            decomposition = decompose(record, self.dataset)
            self.assertTrue(decomposition.reliable)
            self.assertEqual(decomposition.genus_sum, record.genus, record.label)

    def test_invariant_multiplicity(self):
        """Test the averaged trace over a group."""
        orbit = self.dataset.orbit("11.2.a.a")
        self.assertEqual(invariant_multiplicity(orbit, generate(44, [4])), 2)
        self.assertEqual(invariant_multiplicity(orbit, generate(44, [4, 11])), 0)

    def test_missing_levels(self):
        """Test that a level without complete data is refused."""
        with self.assertRaises(DecompositionError):
            decompose_group(generate(33, [3]), self.dataset)

    def test_json(self):
        """Test the serialized decomposition."""
        data = decompose(self.dataset.record("44:[4]"), self.dataset).to_json()
        self.assertEqual(data["parts"], [{"orbit": "11.2.a.a", "mult": 2}])
        self.assertFalse(data["from_override"])


class TestUnreliableBlocks(unittest.TestCase):
    """Test cases for wild old blocks and overrides."""

    def setUp(self):
        """Set up test fixtures."""
        orbit = NewformOrbit("22.2.a.x", 22, 1, {2: 1, 11: 1}, {})
        self.dataset = Dataset((orbit,), frozenset(int(d) for d in divisors(88)), (), KnownLists(), ())
        self.group = generate(88, [8])

    def test_unreliable(self):
        """Test that a wild block marks the decomposition unreliable."""
        decomposition = decompose_group(self.group, self.dataset)
        self.assertFalse(decomposition.reliable)
        self.assertEqual(decomposition.unreliable_orbits, ("22.2.a.x",))
        with self.assertRaises(DecompositionError):
            point_count(self.group, 3, 1, self.dataset)

    def test_override(self):
        """Test that an override wins and is reliable."""
        decomposition = decompose_group(self.group, self.dataset, override=(("22.2.a.x", 1),))
        self.assertTrue(decomposition.reliable)
        self.assertTrue(decomposition.from_override)
        self.assertEqual(decomposition.genus_sum, 1)

    def test_override_unknown_orbit(self):
        """Test that an override must name known orbits."""
        with self.assertRaises(DecompositionError):
            decompose_group(self.group, self.dataset, override=(("37.2.a.a", 1),))


class TestPointCounts(unittest.TestCase):
    """Test cases for point counts over finite fields."""

    def setUp(self):
        """Set up test fixtures."""
        self.dataset = load_dataset(SANDBOX)

    def test_x0_11(self):
        """Test the elliptic curve X0(11)."""
        self.assertEqual(point_count(trivial_group(11), 2, 1, self.dataset), 5)
        self.assertEqual(point_count(trivial_group(11), 3, 1, self.dataset), 5)

    def test_quotients(self):
        """Test counts of sandbox quotients, including extension fields."""
        record = self.dataset.record("22:[2]")
        self.assertEqual(point_count(record, 3, 1, self.dataset), 5)
        self.assertEqual(point_count(record, 5, 1, self.dataset), 5)
        self.assertEqual(point_count(record, 3, 2, self.dataset), 15)
        self.assertEqual(point_count(self.dataset.record("22:[]"), 3, 1, self.dataset), 6)
        self.assertEqual(point_count(self.dataset.record("44:[4]"), 3, 1, self.dataset), 6)
        self.assertEqual(point_count(self.dataset.record("44:[4]"), 3, 2, self.dataset), 20)
        self.assertEqual(point_count(self.dataset.record("14:[2]"), 3, 1, self.dataset), 6)
        self.assertEqual(point_count(self.dataset.record("14:[2]"), 3, 2, self.dataset), 12)

    def test_genus_zero(self):
        """Test that a genus-0 quotient has q + 1 points."""
        self.assertEqual(point_count(self.dataset.record("44:[4,11]"), 5, 2, self.dataset), 26)

    def test_errors(self):
        """Test bad reduction, composite p and missing Hecke data."""
        record = self.dataset.record("22:[2]")
        with self.assertRaises(DecompositionError):
            point_count(record, 11, 1, self.dataset)
        with self.assertRaises(DecompositionError):
            point_count(record, 4, 1, self.dataset)
        with self.assertRaises(DecompositionError):
            point_count(record, 3, 0, self.dataset)
        with self.assertRaises(DecompositionError):
            point_count(self.dataset.record("44:[11]"), 3, 1, self.dataset)

    def test_count_bound(self):
        """Test the point count exclusion of degree-d maps."""
        self.assertTrue(count_bound(18, 3, 4))
        self.assertTrue(count_bound(44, 9, 4))
        self.assertFalse(count_bound(40, 9, 4))

    def test_excluded_degree(self):
        """Test the largest excluded degree."""
        self.assertEqual(excluded_degree(18, 3), 4)
        self.assertEqual(excluded_degree(20, 9), 1)
        self.assertEqual(excluded_degree(112, 25), 4)
        self.assertEqual(excluded_degree(4, 3), 0)


@unittest.skipUnless(os.path.exists(CACHE), "no fetched newform cache")
class TestFetchedCounts(unittest.TestCase):
    """Test cases for point counts from fetched newform data."""

    def setUp(self):
        """Set up test fixtures."""
        self.dataset = load_dataset(SANDBOX, newforms_path=CACHE)

    def test_published_counts(self):
        """Test counts for every level the cache covers."""
        covered = [row for row in PUBLISHED_COUNTS if self.dataset.has_complete_data(row[0])]
        if not covered:
            self.skipTest("cache covers none of the levels")
        for level, gens, q, expected in covered:
            p, k = prime_power(q)
            count = point_count(generate(level, gens), p, k, self.dataset)
            self.assertEqual(count, expected, (level, gens, q))
            self.assertTrue(count_bound(count, q, 4))


if __name__ == '__main__':
    unittest.main()

"""
Tests for Atkin-Lehner groups, labels and isomorphism rewrites
"""

import unittest
import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.atkin_lehner import (
    ALElement, ALSubgroup, canonical_label, canonicalize_label, enumerate_subgroups, epsilon,
    full_group, generate, index2_supergroups, normalize_generators, parse_label, rewrite_4m,
    rewrite_9, trivial_group,
)
from src.exceptions import GroupError, LabelError


class TestGroupLaw(unittest.TestCase):
    """Test cases for composing involutions and generating subgroups."""

    def test_compose(self):
        """Test w_d * w_e = w_{de/gcd(d,e)^2}."""
        self.assertEqual((ALElement(30, 6) * ALElement(30, 10)).d, 15)
        self.assertEqual((ALElement(340, 4) * ALElement(340, 5)).d, 20)
        self.assertTrue((ALElement(210, 2) * ALElement(210, 2)).is_identity)

    def test_element_requires_hall_divisor(self):
        """Test that w_2 does not exist at level 12."""
        with self.assertRaises(GroupError):
            ALElement(12, 2)

    def test_compose_across_levels(self):
        """Test that involutions of different levels do not compose."""
        with self.assertRaises(GroupError):
            ALElement(30, 2) * ALElement(42, 2)

    def test_generate(self):
        """Test subgroup closure."""
        self.assertEqual(generate(30, [6, 10]).elements, frozenset({1, 6, 10, 15}))
        self.assertEqual(generate(210, [2, 15, 21]).elements,
                         frozenset({1, 2, 15, 21, 30, 42, 35, 70}))
        self.assertEqual(generate(30, []).elements, frozenset({1}))

    def test_generate_ignores_redundancy(self):
        """Test that repeated generators and the identity do not change the group."""
        self.assertEqual(generate(30, [6, 10, 15, 1, 6]), generate(30, [6, 10]))

    def test_not_closed(self):
        """Test that a non-closed element set is rejected."""
        with self.assertRaises(GroupError):
            ALSubgroup(30, frozenset({1, 2, 3}))
        with self.assertRaises(GroupError):
            ALSubgroup(30, frozenset({2}))

    def test_subgroup_properties(self):
        """Test order, rank, membership and inclusion."""
        w = generate(210, [2, 15, 21])
        self.assertEqual(w.order, 8)
        self.assertEqual(w.rank, 3)
        self.assertIn(35, w)
        self.assertNotIn(3, w)
        self.assertTrue(generate(210, [2]).issubgroup(w))
        self.assertFalse(w.is_full)
        self.assertTrue(full_group(210).is_full)
        self.assertEqual(trivial_group(210).order, 1)


class TestEnumeration(unittest.TestCase):
    """Test cases for subgroup enumeration."""

    def test_counts(self):
        """Test counts against the Gaussian binomials."""
        self.assertEqual(len(enumerate_subgroups(105, 4)), 7)
        self.assertEqual(len(enumerate_subgroups(210, 8)), 15)
        self.assertEqual(len(enumerate_subgroups(210, 4)), 35)
        self.assertEqual(len(enumerate_subgroups(210, 2)), 15)
        self.assertEqual(len(enumerate_subgroups(2310, 4)), 155)
        self.assertEqual(len(enumerate_subgroups(2310, 8)), 155)

    def test_extremes(self):
        """Test the trivial and full subgroups."""
        self.assertEqual(enumerate_subgroups(210, 1), [trivial_group(210)])
        self.assertEqual(enumerate_subgroups(210, 16), [full_group(210)])

    def test_no_duplicates_and_sorted(self):
        """Test canonical order without duplicates."""
        groups = enumerate_subgroups(330, 4)
        self.assertEqual(len({g.elements for g in groups}), len(groups))
        self.assertEqual(groups, sorted(groups, key=ALSubgroup.sort_key))

    def test_invalid_order(self):
        """Test that orders outside the powers of two dividing |B(N)| are rejected."""
        with self.assertRaises(GroupError):
            enumerate_subgroups(210, 3)
        with self.assertRaises(GroupError):
            enumerate_subgroups(210, 32)


class TestLabels(unittest.TestCase):
    """Test cases for canonical labels."""

    def test_canonical_label(self):
        """Test labels from lexicographically minimal generators."""
        self.assertEqual(canonical_label(generate(306, [2, 34])), "306:[2,17]")
        self.assertEqual(canonical_label(trivial_group(30)), "30:[]")
        self.assertEqual(canonical_label(generate(210, [30, 35])), "210:[30,35]")

    def test_parse_label(self):
        """Test that cosmetically different labels parse to the same group."""
        self.assertEqual(parse_label("306:[2,34]"), parse_label("306:[2,17]"))
        self.assertEqual(parse_label(" 130 : [ 5 , 13 ] ").elements, frozenset({1, 5, 13, 65}))
        self.assertEqual(canonicalize_label("114:[3,57]"), "114:[3,19]")

    def test_parse_errors(self):
        """Test malformed labels and non-Hall generators."""
        for text in ("abc", "30:", "30:[x]", "", "30:[4]"):
            with self.assertRaises(LabelError):
                parse_label(text)

    def test_normalize_generators(self):
        """Test flagging of source rows instead of guessing."""
        group, issues = normalize_generators(306, [2, 34])
        self.assertEqual(canonical_label(group), "306:[2,17]")
        self.assertEqual(issues, [])

        group, issues = normalize_generators(210, [2, 3, 6])
        self.assertEqual(group.order, 4)
        self.assertEqual(len(issues), 1)

        group, issues = normalize_generators(210, [2, 11])
        self.assertIsNone(group)
        self.assertTrue(issues)

        group, issues = normalize_generators(210, [2, 3, 6], expected_order=8)
        self.assertIsNone(group)


class TestRewrites(unittest.TestCase):
    """Test cases for the X0(4M) and w_9 identifications."""

    def test_rewrite_4m(self):
        """Test the halving of the level and of the group."""
        level, image = rewrite_4m(228, generate(228, [3, 4]))
        self.assertEqual((level, canonical_label(image)), (114, "114:[3]"))
        level, image = rewrite_4m(340, generate(340, [4, 5]))
        self.assertEqual((level, canonical_label(image)), (170, "170:[5]"))

    def test_rewrite_4m_not_applicable(self):
        """Test levels and groups outside the rewrite."""
        self.assertIsNone(rewrite_4m(330, generate(330, [2, 3])))
        self.assertIsNone(rewrite_4m(340, generate(340, [5, 17])))
        self.assertIsNone(rewrite_4m(120, generate(120, [3, 8])))

    def test_epsilon(self):
        """Test the twisting exponent."""
        self.assertEqual(epsilon(34), 0)
        self.assertEqual(epsilon(18), 1)
        self.assertEqual(epsilon(5), 1)
        self.assertEqual(epsilon(1), 0)
        with self.assertRaises(GroupError):
            epsilon(0)

    def test_rewrite_9(self):
        """Test twisting by w_9."""
        self.assertEqual(canonical_label(rewrite_9(306, generate(306, [18, 34]))), "306:[2,17]")
        self.assertEqual(canonical_label(rewrite_9(342, generate(342, [18, 19]))), "342:[2,19]")
        self.assertEqual(canonical_label(rewrite_9(630, generate(630, [5, 7, 18]))), "630:[2,7,45]")

    def test_rewrite_9_is_involution(self):
        """Test that twisting twice gives back the group."""
        w = generate(306, [18, 34])
        self.assertEqual(rewrite_9(306, rewrite_9(306, w)), w)

    def test_rewrite_9_not_applicable(self):
        """Test groups containing w_9 and levels without 9 || N."""
        self.assertIsNone(rewrite_9(306, generate(306, [9, 34])))
        self.assertIsNone(rewrite_9(330, generate(330, [2, 3])))


class TestSupergroups(unittest.TestCase):
    """Test cases for index-2 supergroups."""

    def test_supergroups_of_order_4(self):
        """Test the three supergroups of <w_2, w_3> at level 330."""
        sups = index2_supergroups(generate(330, [2, 3]))
        self.assertEqual(len(sups), 3)
        self.assertIn("330:[2,3,11]", [canonical_label(s) for s in sups])
        for sup in sups:
            self.assertEqual(sup.order, 8)

    def test_supergroups_of_trivial(self):
        """Test the seven involutions of level 105."""
        self.assertEqual(len(index2_supergroups(trivial_group(105))), 7)

    def test_full_group(self):
        """Test that B(N) has no index-2 supergroup."""
        with self.assertRaises(GroupError):
            index2_supergroups(full_group(210))


if __name__ == '__main__':
    unittest.main()

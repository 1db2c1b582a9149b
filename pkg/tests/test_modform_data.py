"""
Tests for the dataset layer
"""

import unittest
import json
import os
import shutil
import sys
import tempfile
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.arithmetic import genus_x0
from src.exceptions import DatasetError
from src.modform_data import (
    QUOTIENTS_FILE, Interval, KnownLists, cusp_space_dimension, dumps, fingerprint,
    load_dataset, parse_certificates, parse_known, parse_newforms, parse_quotients, serialize,
    to_json, with_certificates,
)

SANDBOX = os.path.join(os.path.dirname(__file__), '..', 'data', 'sandbox')
PUBLISHED = os.path.join(os.path.dirname(__file__), '..', 'data', 'published')


def _records(*records):
    return {"schema_version": 1, "records": list(records)}


def _certificates(*certificates):
    return {"schema_version": 1, "certificates": list(certificates)}


class TestLoadDataset(unittest.TestCase):
    """Test cases for loading the sandbox dataset."""

    def setUp(self):
        """Set up test fixtures."""
        self.dataset = load_dataset(SANDBOX)
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_summary(self):
        """Test the counts of the loaded files."""
        summary = self.dataset.summary()
        self.assertEqual(summary["orbits"], 3)
        self.assertEqual(summary["quotients"], 12)
        self.assertEqual(summary["certificates"], 1)
        self.assertEqual(summary["complete_levels"], 8)

    def test_lookups(self):
        """Test record, orbit and certificate lookups."""
        self.assertEqual(self.dataset.record("22:[2]").genus, 1)
        self.assertIsNone(self.dataset.record("22:[3]"))
        self.assertEqual(len(self.dataset.records_at(44)), 4)
        self.assertEqual([o.label for o in self.dataset.orbits_dividing(44)], ["11.2.a.a", "44.2.a.a"])
        self.assertEqual(len(self.dataset.certificates_for("22:[2]")), 1)

    def test_atkin_lehner_signs(self):
        """Test signs of composite Hall divisors."""
        self.assertEqual(self.dataset.orbit("11.2.a.a").sign(11), -1)
        self.assertEqual(self.dataset.orbit("14.2.a.a").sign(14), -1)
        self.assertEqual(self.dataset.orbit("14.2.a.a").sign(2), 1)
        self.assertEqual(self.dataset.orbit("44.2.a.a").sign(1), 1)

    def test_complete_levels(self):
        """Test divisor-closed completeness."""
        self.assertTrue(self.dataset.has_complete_data(44))
        self.assertEqual(self.dataset.missing_levels(33), [3, 33])

    def test_flags(self):
        """Test that list membership sets the hyperelliptic flag."""
        self.assertEqual(self.dataset.flags(self.dataset.record("22:[]")), (True, None))
        self.assertEqual(self.dataset.flags(self.dataset.record("22:[2]")), (None, None))

    def test_cusp_space_dimension(self):
        """Test that the orbits account for the genus of X0(N)."""
        for n in (11, 14, 22, 44):
            self.assertEqual(cusp_space_dimension(self.dataset, n), genus_x0(n))

    def test_serialization_is_deterministic(self):
        """Test that serializing and reloading keeps the fingerprint."""
        serialize(self.dataset, self.temp_dir)
        reloaded = load_dataset(self.temp_dir)
        self.assertEqual(fingerprint(reloaded), fingerprint(self.dataset))
        self.assertEqual(to_json(reloaded), to_json(self.dataset))

        with open(os.path.join(self.temp_dir, QUOTIENTS_FILE), encoding="utf-8") as f:
            first = f.read()
        serialize(reloaded, self.temp_dir)
        with open(os.path.join(self.temp_dir, QUOTIENTS_FILE), encoding="utf-8") as f:
            self.assertEqual(f.read(), first)

    def test_fingerprint_tracks_certificates(self):
        """Test that the fingerprint changes with the certificate set."""
        stripped = with_certificates(self.dataset, [])
        self.assertEqual(len(stripped.certificates), 0)
        self.assertNotEqual(fingerprint(stripped), fingerprint(self.dataset))

    def test_dumps(self):
        """Test canonical JSON text."""
        self.assertEqual(dumps({"b": 1, "a": [2]}), '{\n  "a": [\n    2\n  ],\n  "b": 1\n}\n')

    def test_published_dataset_loads(self):
        """Test that the shipped published dataset parses."""
        published = load_dataset(PUBLISHED)
        self.assertIn(130, published.known.star)
        self.assertGreater(published.summary()["certificates"], 0)

    def test_missing_directory(self):
        """Test that a missing file names the file."""
        with self.assertRaises(DatasetError) as ctx:
            load_dataset(os.path.join(self.temp_dir, "nowhere"))
        self.assertIn("newforms.json", ctx.exception.file)

    def test_contradicting_flags(self):
        """Test that a record may not contradict the hyperelliptic list."""
        serialize(self.dataset, self.temp_dir)
        with open(os.path.join(self.temp_dir, QUOTIENTS_FILE), "w", encoding="utf-8") as f:
            json.dump(_records({"N": 22, "W": [], "genus": 2, "hyperelliptic": False, "source": "test"}), f)
        with self.assertRaises(DatasetError) as ctx:
            load_dataset(self.temp_dir)
        self.assertEqual(ctx.exception.field, "hyperelliptic")


class TestParseQuotients(unittest.TestCase):
    """Test cases for quotient record validation."""

    def test_genus_cap(self):
        """Test that a genus above the Riemann-Hurwitz cap is rejected."""
        with self.assertRaises(DatasetError) as ctx:
            parse_quotients(_records({"N": 22, "W": [2], "genus": 2, "source": "test"}))
        self.assertEqual(ctx.exception.index, 0)
        self.assertEqual(ctx.exception.field, "genus")

    def test_non_hall_generator(self):
        """Test that a non-Hall generator is flagged, not guessed."""
        with self.assertRaises(DatasetError) as ctx:
            parse_quotients(_records({"N": 12, "W": [2], "genus": 0, "source": "test"}))
        self.assertEqual(ctx.exception.field, "W")

    def test_missing_genus(self):
        """Test that every record carries a genus."""
        with self.assertRaises(DatasetError) as ctx:
            parse_quotients(_records({"N": 22, "W": [2], "source": "test"}))
        self.assertEqual(ctx.exception.field, "genus")

    def test_unknown_field(self):
        """Test that unknown fields are rejected."""
        with self.assertRaises(DatasetError):
            parse_quotients(_records({"N": 22, "W": [2], "genus": 1, "source": "test", "gon": 2}))

    def test_duplicate_records(self):
        """Test that two spellings of one group are duplicates."""
        with self.assertRaises(DatasetError):
            parse_quotients(_records(
                {"N": 30, "W": [6, 10], "genus": 0, "source": "test"},
                {"N": 30, "W": [6, 15], "genus": 0, "source": "test"},
            ))

    def test_canonical_order(self):
        """Test that records come back in canonical order with canonical generators."""
        records = parse_quotients(_records(
            {"N": 306, "W": [2, 34], "genus": 5, "source": "test"},
            {"N": 22, "W": [2], "genus": 1, "source": "test"},
        ))
        self.assertEqual([r.label for r in records], ["22:[2]", "306:[2,17]"])
        self.assertEqual(records[1].to_json()["W"], [2, 17])

    def test_schema_version(self):
        """Test that the schema version is checked."""
        with self.assertRaises(DatasetError) as ctx:
            parse_quotients({"schema_version": 2, "records": []})
        self.assertEqual(ctx.exception.field, "schema_version")

    def test_decomposition_override(self):
        """Test that overrides are read and sorted."""
        records = parse_quotients(_records({
            "N": 44, "W": [4], "genus": 2, "source": "test",
            "decomposition": [{"orbit": "11.2.a.a", "mult": 2}],
        }))
        self.assertEqual(records[0].decomposition_override, (("11.2.a.a", 2),))


class TestParseOtherFiles(unittest.TestCase):
    """Test cases for newforms, known lists and certificates."""

    def test_newform_signs_required(self):
        """Test that signs must cover every prime power of the level."""
        data = {"schema_version": 1, "levels": [14], "orbits": [
            {"label": "14.2.a.a", "level": 14, "dim": 1, "al": {"2": 1}, "hecke": {}}]}
        with self.assertRaises(DatasetError) as ctx:
            parse_newforms(data)
        self.assertEqual(ctx.exception.field, "al")

    def test_newform_bad_prime(self):
        """Test that Hecke data at a bad prime is rejected."""
        data = {"schema_version": 1, "levels": [14], "orbits": [
            {"label": "14.2.a.a", "level": 14, "dim": 1, "al": {"2": 1, "7": -1}, "hecke": {"7": [1, 1]}}]}
        with self.assertRaises(DatasetError):
            parse_newforms(data)

    def test_newform_degree(self):
        """Test that Hecke polynomials have degree equal to the orbit dimension."""
        data = {"schema_version": 1, "levels": [11], "orbits": [
            {"label": "11.2.a.a", "level": 11, "dim": 1, "al": {"11": -1}, "hecke": {"2": [1, 0, 1]}}]}
        with self.assertRaises(DatasetError):
            parse_newforms(data)

    def test_known_lists(self):
        """Test literature intervals and list resolution."""
        known = parse_known({
            "schema_version": 1,
            "lists_complete": True,
            "hyperelliptic_quotients": ["22:[]"],
            "trigonal_C_quotients": ["130:[5,13]"],
            "star": {"130": {"genus": 2, "gon_Q": 2, "gon_C": 2, "source": "test"}},
            "gonality": {"114:[57]": {"genus": None, "gon_Q": [5, None], "gon_C": [5, None], "source": "test"}},
        })
        self.assertEqual(known.star[130].label, "130:[2,5,13]")
        self.assertEqual(known.gonality["114:[57]"].gon_q, Interval(5, None))
        self.assertEqual(known.flags_for("22:[]"), (True, False))
        self.assertEqual(known.flags_for("130:[5,13]"), (False, True))
        self.assertEqual(set(known.literature()), {"130:[2,5,13]", "114:[57]"})

    def test_literature_entry_unknown_field(self):
        """Test that a stray key in a star entry names the entry."""
        with self.assertRaises(DatasetError) as ctx:
            parse_known({"schema_version": 1,
                         "star": {"130": {"genus": 2, "gon_Q": 2, "gon_C": 2, "source": "test", "note": "x"}}})
        self.assertEqual(ctx.exception.field, "star.130")
        self.assertIn("note", str(ctx.exception))

    def test_incomplete_lists_leave_flags_unknown(self):
        """Test that absence from an incomplete list proves nothing."""
        self.assertEqual(KnownLists().flags_for("22:[2]"), (None, None))

    def test_known_conflict(self):
        """Test that a label cannot be both hyperelliptic and trigonal."""
        with self.assertRaises(DatasetError):
            parse_known({"schema_version": 1, "hyperelliptic_quotients": ["22:[]"],
                         "trigonal_C_quotients": ["22:[]"]})

    def test_interval_json(self):
        """Test compact interval serialization."""
        self.assertEqual(Interval(4, 4).to_json(), 4)
        self.assertEqual(Interval(5, None).to_json(), [5, None])

    def test_certificate_kinds(self):
        """Test certificate payload validation."""
        certs = parse_certificates(_certificates(
            {"kind": "betti22", "target": "228:[3,76]", "value": 4, "source": "test"},
            {"kind": "fq_point_count", "target": "22:[2]", "q": 9, "count": 15, "source": "test"},
        ))
        self.assertEqual([c.kind for c in certs], ["fq_point_count", "betti22"])
        self.assertEqual(certs[0].get("count"), 15)

        with self.assertRaises(DatasetError) as ctx:
            parse_certificates(_certificates({"kind": "magic", "target": "22:[2]", "source": "test"}))
        self.assertEqual(ctx.exception.field, "kind")

        with self.assertRaises(DatasetError):
            parse_certificates(_certificates(
                {"kind": "trigonal_map_field", "target": "130:[5,13]", "field": "cubic", "source": "test"}))
        with self.assertRaises(DatasetError):
            parse_certificates(_certificates(
                {"kind": "fq_point_count", "target": "22:[2]", "q": 12, "count": 3, "source": "test"}))
        with self.assertRaises(DatasetError):
            parse_certificates(_certificates({"kind": "betti22", "target": "22:[2]", "source": "test"}))

    def test_certificate_min_genus(self):
        """Test the optional genus floor carried by any certificate kind."""
        certs = parse_certificates(_certificates(
            {"kind": "fp_gonality_lower", "target": "340:[5,17]", "p": 3, "bound": 5, "min_genus": 10,
             "source": "test"},
        ))
        self.assertEqual(certs[0].get("min_genus"), 10)
        with self.assertRaises(DatasetError) as ctx:
            parse_certificates(_certificates(
                {"kind": "betti22", "target": "228:[3,76]", "value": 4, "min_genus": -1, "source": "test"}))
        self.assertEqual(ctx.exception.field, "min_genus")
        with self.assertRaises(DatasetError):
            parse_certificates(_certificates(
                {"kind": "betti22", "target": "228:[3,76]", "value": 4, "min_genus": "10", "source": "test"}))

    def test_literature_min_genus(self):
        """Test a literature entry that only bounds the genus from below."""
        known = parse_known({"schema_version": 1, "gonality": {
            "506:[2,11]": {"genus": None, "min_genus": 10, "gon_Q": [1, None], "gon_C": [1, None],
                           "source": "test"}}})
        entry = known.gonality["506:[2,11]"]
        self.assertIsNone(entry.genus)
        self.assertEqual(entry.min_genus, 10)
        self.assertEqual(entry.to_json()["min_genus"], 10)
        for bad in ({"genus": 8, "min_genus": 10}, {"genus": None, "min_genus": -2}):
            with self.assertRaises(DatasetError) as ctx:
                parse_known({"schema_version": 1, "gonality": {
                    "506:[2,11]": dict(bad, gon_Q=[1, None], gon_C=[1, None], source="test")}})
            self.assertEqual(ctx.exception.field, "gonality.506:[2,11]")


if __name__ == '__main__':
    unittest.main()

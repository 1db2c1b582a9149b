"""
Modular Form Data Module

This module provides the data model for newform orbits, quotient curve
records, known gonality lists and certificates, together with strict
loading from the four JSON files of a dataset directory, canonical
serialization and a content fingerprint.
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from sympy import divisors, isprime

from .arithmetic import IntegerPolynomial, Level, genus_x0
from .atkin_lehner import ALSubgroup, canonical_label, full_group, normalize_generators, parse_label
from .exceptions import DatasetError, LabelError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

NEWFORMS_FILE = "newforms.json"
QUOTIENTS_FILE = "quotients.json"
KNOWN_FILE = "known.json"
CERTIFICATES_FILE = "certificates.json"

# kind -> {payload field: type}
CERTIFICATE_PAYLOADS: Dict[str, Dict[str, type]] = {
    "betti22": {"value": int},
    "fp_gonality_lower": {"p": int, "bound": int},
    "fq_point_count": {"q": int, "count": int},
    "rational_g14_divisor": {},
    "gonal_map": {"degree": int, "field": str},
    "trigonal_map_field": {"field": str},
}

# Accepted by every certificate kind: a lower bound on the target genus.
OPTIONAL_PAYLOAD: Dict[str, type] = {"min_genus": int}

TRIGONAL_FIELDS = ("Q", "quadratic")


@dataclass(frozen=True)
class Interval:
    """Closed integer interval [lo, hi]; hi None means unbounded."""

    lo: int = 1
    hi: Optional[int] = None

    def to_json(self):
        if self.hi is not None and self.hi == self.lo:
            return self.lo
        return [self.lo, self.hi]


@dataclass(frozen=True)
class NewformOrbit:
    """Galois orbit of weight-2 newforms of trivial character."""

    label: str
    level: int
    dim: int
    al_signs: Dict[int, int]
    hecke: Dict[int, IntegerPolynomial]

    def sign(self, q: int) -> int:
        """Atkin-Lehner eigenvalue of w_q for a Hall divisor q of the level."""
        result = 1
        for qq, s in self.al_signs.items():
            if q % qq == 0:
                result *= s
        return result

    def to_json(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "level": self.level,
            "dim": self.dim,
            "al": {str(q): s for q, s in sorted(self.al_signs.items())},
            "hecke": {str(p): poly.to_list() for p, poly in sorted(self.hecke.items())},
        }


@dataclass(frozen=True)
class QuotientRecord:
    """A quotient curve X0(N)/W with ingested genus and provenance."""

    level: int
    group: ALSubgroup
    genus: int
    source: str
    hyperelliptic: Optional[bool] = None
    trigonal_c: Optional[bool] = None
    decomposition_override: Optional[Tuple[Tuple[str, int], ...]] = None

    @property
    def label(self) -> str:
        return canonical_label(self.group)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "N": self.level,
            "W": self.group.generators,
            "genus": self.genus,
            "source": self.source,
        }
        if self.hyperelliptic is not None:
            data["hyperelliptic"] = self.hyperelliptic
        if self.trigonal_c is not None:
            data["trigonal_C"] = self.trigonal_c
        if self.decomposition_override is not None:
            data["decomposition"] = [{"orbit": o, "mult": m} for o, m in self.decomposition_override]
        return data


@dataclass(frozen=True)
class LiteratureEntry:
    """Gonality of a curve taken from the literature."""

    label: str
    gon_q: Interval
    gon_c: Interval
    source: str
    genus: Optional[int] = None
    min_genus: Optional[int] = None

    def to_json(self) -> Dict[str, Any]:
        data = {
            "genus": self.genus,
            "gon_Q": self.gon_q.to_json(),
            "gon_C": self.gon_c.to_json(),
            "source": self.source,
        }
        if self.min_genus is not None:
            data["min_genus"] = self.min_genus
        return data


@dataclass(frozen=True)
class KnownLists:
    """Hyperelliptic and trigonal lists plus literature gonalities."""

    hyperelliptic_quotients: FrozenSet[str] = frozenset()
    trigonal_c_quotients: FrozenSet[str] = frozenset()
    star: Dict[int, LiteratureEntry] = field(default_factory=dict)
    gonality: Dict[str, LiteratureEntry] = field(default_factory=dict)
    lists_complete: bool = False

    @property
    def star_gonality_q(self) -> Dict[int, Interval]:
        return {n: e.gon_q for n, e in self.star.items()}

    @property
    def star_gonality_c(self) -> Dict[int, Interval]:
        return {n: e.gon_c for n, e in self.star.items()}

    @property
    def star_genus(self) -> Dict[int, Optional[int]]:
        return {n: e.genus for n, e in self.star.items()}

    def literature(self) -> Dict[str, LiteratureEntry]:
        """All literature entries keyed by canonical label."""
        entries = dict(self.gonality)
        for entry in self.star.values():
            entries[entry.label] = entry
        return entries

    def flags_for(self, label: str, hyperelliptic: Optional[bool] = None,
                  trigonal_c: Optional[bool] = None) -> Tuple[Optional[bool], Optional[bool]]:
        """Resolve tri-state flags: explicit values win, lists add positives."""
        if hyperelliptic is None:
            if label in self.hyperelliptic_quotients:
                hyperelliptic = True
            elif self.lists_complete:
                hyperelliptic = False
        if trigonal_c is None:
            if label in self.trigonal_c_quotients:
                trigonal_c = True
            elif self.lists_complete:
                trigonal_c = False
        return hyperelliptic, trigonal_c

    def to_json(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "lists_complete": self.lists_complete,
            "hyperelliptic_quotients": sorted(self.hyperelliptic_quotients, key=_label_key),
            "trigonal_C_quotients": sorted(self.trigonal_c_quotients, key=_label_key),
            "star": {str(n): self.star[n].to_json() for n in sorted(self.star)},
            "gonality": {k: self.gonality[k].to_json() for k in sorted(self.gonality, key=_label_key)},
        }


@dataclass(frozen=True)
class Certificate:
    """Externally computed fact about one curve."""

    kind: str
    target: str
    payload: Dict[str, Any]
    source: str

    def get(self, key: str, default=None):
        return self.payload.get(key, default)

    def to_json(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "target": self.target, "source": self.source}
        data.update(self.payload)
        return data


@dataclass(frozen=True)
class Dataset:
    """Immutable in-memory dataset."""

    orbits: Tuple[NewformOrbit, ...]
    complete_levels: FrozenSet[int]
    records: Tuple[QuotientRecord, ...]
    known: KnownLists
    certificates: Tuple[Certificate, ...]
    root: str = ""

    def orbits_at(self, level: int) -> List[NewformOrbit]:
        return [o for o in self.orbits if o.level == level]

    def orbits_dividing(self, n: int) -> List[NewformOrbit]:
        return [o for o in self.orbits if n % o.level == 0]

    def orbit(self, label: str) -> Optional[NewformOrbit]:
        for o in self.orbits:
            if o.label == label:
                return o
        return None

    def missing_levels(self, n: int) -> List[int]:
        return [int(m) for m in divisors(n) if int(m) not in self.complete_levels]

    def has_complete_data(self, n: int) -> bool:
        return not self.missing_levels(n)

    def record(self, label: str) -> Optional[QuotientRecord]:
        return self._record_index().get(label)

    def records_at(self, level: int) -> List[QuotientRecord]:
        return [r for r in self.records if r.level == level]

    def certificates_for(self, label: str) -> List[Certificate]:
        return [c for c in self.certificates if c.target == label]

    def flags(self, record: QuotientRecord) -> Tuple[Optional[bool], Optional[bool]]:
        return self.known.flags_for(record.label, record.hyperelliptic, record.trigonal_c)

    def _record_index(self) -> Dict[str, QuotientRecord]:
        return {r.label: r for r in self.records}

    def summary(self) -> Dict[str, int]:
        return {
            "orbits": len(self.orbits),
            "complete_levels": len(self.complete_levels),
            "quotients": len(self.records),
            "star_entries": len(self.known.star),
            "literature_entries": len(self.known.gonality),
            "certificates": len(self.certificates),
        }


def _label_key(label: str):
    try:
        return parse_label(label).sort_key()
    except LabelError:
        return (0, 0, (label,))


class _Reader:
    """Strict field access with file/record coordinates in every error."""

    def __init__(self, file: str):
        self.file = file

    def fail(self, message: str, index: Optional[int] = None, field_name: Optional[str] = None):
        raise DatasetError(message, file=self.file, index=index, field=field_name)

    def object(self, value, index=None, field_name=None) -> Dict[str, Any]:
        if not isinstance(value, dict):
            self.fail("expected a JSON object", index, field_name)
        return value

    def only(self, obj: Dict[str, Any], allowed: Iterable[str], index=None, field_name=None) -> None:
        unknown = sorted(set(obj) - set(allowed))
        if unknown:
            self.fail(f"unknown field(s) {unknown}", index, field_name)

    def require(self, obj: Dict[str, Any], key: str, kind, index=None, optional=False):
        if key not in obj or obj[key] is None:
            if optional:
                return None
            self.fail("missing required field", index, key)
        value = obj[key]
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            self.fail(f"expected an integer, got {value!r}", index, key)
        if kind is not int and not isinstance(value, kind):
            self.fail(f"expected {kind.__name__}, got {value!r}", index, key)
        return value

    def header(self, data, body_key: str) -> List[Any]:
        obj = self.object(data)
        if obj.get("schema_version") != SCHEMA_VERSION:
            self.fail(f"schema_version must be {SCHEMA_VERSION}", field_name="schema_version")
        body = obj.get(body_key)
        if not isinstance(body, list):
            self.fail("expected a list", field_name=body_key)
        return body

    def label(self, text, index=None, field_name=None) -> ALSubgroup:
        if not isinstance(text, str):
            self.fail(f"expected a label string, got {text!r}", index, field_name)
        try:
            return parse_label(text)
        except LabelError as exc:
            self.fail(str(exc), index, field_name)

    def interval(self, value, index=None, field_name=None) -> Interval:
        if value is None:
            return Interval()
        if isinstance(value, int) and not isinstance(value, bool):
            lo, hi = value, value
        elif isinstance(value, list) and len(value) == 2:
            lo, hi = value
            if isinstance(lo, bool) or not isinstance(lo, int) or \
                    (hi is not None and (isinstance(hi, bool) or not isinstance(hi, int))):
                self.fail(f"malformed interval {value!r}", index, field_name)
        else:
            self.fail(f"expected an integer or [lo, hi] interval, got {value!r}", index, field_name)
        if lo < 1 or (hi is not None and hi < lo):
            self.fail(f"gonality interval out of range: {value!r}", index, field_name)
        return Interval(lo, hi)


def _read_json(root: str, name: str) -> Any:
    path = os.path.join(root, name)
    if not os.path.exists(path):
        raise DatasetError("file not found", file=path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON: {exc}", file=path)


def parse_newforms(data: Any, file: str = NEWFORMS_FILE) -> Tuple[Tuple[NewformOrbit, ...], FrozenSet[int]]:
    """Parse the newforms file body into orbits and complete levels."""
    reader = _Reader(file)
    orbits_raw = reader.header(data, "orbits")
    levels_raw = data.get("levels", [])
    if not isinstance(levels_raw, list) or any(isinstance(m, bool) or not isinstance(m, int) or m < 1
                                               for m in levels_raw):
        reader.fail("levels must be a list of positive integers", field_name="levels")
    reader.only(data, ("schema_version", "levels", "orbits"))

    orbits: List[NewformOrbit] = []
    seen = set()
    for i, raw in enumerate(orbits_raw):
        obj = reader.object(raw, i)
        reader.only(obj, ("label", "level", "dim", "al", "hecke"), i)
        label = reader.require(obj, "label", str, i)
        level = reader.require(obj, "level", int, i)
        dim = reader.require(obj, "dim", int, i)
        if level < 1 or dim < 1:
            reader.fail("level and dim must be positive", i)
        if label in seen:
            reader.fail(f"duplicate orbit label {label}", i, "label")
        seen.add(label)

        al_raw = reader.object(obj.get("al", {}), i, "al")
        signs: Dict[int, int] = {}
        for key, sign in al_raw.items():
            try:
                q = int(key)
            except ValueError:
                reader.fail(f"prime power key {key!r} is not an integer", i, "al")
            if sign not in (1, -1) or isinstance(sign, bool):
                reader.fail(f"sign for {key} must be +1 or -1", i, "al")
            signs[q] = sign
        expected = set(Level(level).prime_powers)
        if set(signs) != expected:
            reader.fail(f"signs must be given exactly for {sorted(expected)}, got {sorted(signs)}", i, "al")

        hecke_raw = reader.object(obj.get("hecke", {}), i, "hecke")
        hecke: Dict[int, IntegerPolynomial] = {}
        for key, coeffs in hecke_raw.items():
            try:
                p = int(key)
            except ValueError:
                reader.fail(f"prime key {key!r} is not an integer", i, "hecke")
            if not isprime(p) or level % p == 0:
                reader.fail(f"Hecke data at {p} must be at a prime not dividing {level}", i, "hecke")
            if not isinstance(coeffs, list) or any(isinstance(c, bool) or not isinstance(c, int) for c in coeffs):
                reader.fail(f"coefficients at {p} must be a list of integers", i, "hecke")
            poly = IntegerPolynomial.from_list(coeffs)
            if not poly.is_monic or poly.degree != dim:
                reader.fail(f"Hecke polynomial at {p} must be monic of degree {dim}", i, "hecke")
            hecke[p] = poly

        orbits.append(NewformOrbit(label, level, dim, signs, hecke))

    orbits.sort(key=lambda o: (o.level, o.label))
    return tuple(orbits), frozenset(levels_raw)


def parse_quotients(data: Any, file: str = QUOTIENTS_FILE) -> Tuple[QuotientRecord, ...]:
    """Parse quotient records, normalizing generator lists."""
    reader = _Reader(file)
    body = reader.header(data, "records")
    reader.only(data, ("schema_version", "records"))
    records: List[QuotientRecord] = []
    seen = set()
    for i, raw in enumerate(body):
        obj = reader.object(raw, i)
        reader.only(obj, ("N", "W", "genus", "hyperelliptic", "trigonal_C", "decomposition", "source"), i)
        level = reader.require(obj, "N", int, i)
        if level < 1:
            reader.fail("level must be positive", i, "N")
        gens = reader.require(obj, "W", list, i)
        if any(isinstance(d, bool) or not isinstance(d, int) for d in gens):
            reader.fail("generators must be integers", i, "W")
        group, issues = normalize_generators(level, gens)
        if group is None:
            reader.fail("; ".join(issues), i, "W")
        for issue in issues:
            logger.warning("%s record %d (%s): %s", file, i, canonical_label(group), issue)

        genus = reader.require(obj, "genus", int, i)
        if genus < 0:
            reader.fail("genus must be non-negative", i, "genus")
        cap = 1 + (genus_x0(level) - 1) // group.order
        if genus > cap:
            reader.fail(f"{canonical_label(group)}: genus {genus} exceeds the Riemann-Hurwitz cap {cap}",
                        i, "genus")
        source = reader.require(obj, "source", str, i)
        if not source.strip():
            reader.fail("source must be non-empty", i, "source")
        hyperelliptic = reader.require(obj, "hyperelliptic", bool, i, optional=True)
        trigonal = reader.require(obj, "trigonal_C", bool, i, optional=True)

        override = None
        if obj.get("decomposition") is not None:
            parts = reader.require(obj, "decomposition", list, i)
            override_list = []
            for part in parts:
                part = reader.object(part, i, "decomposition")
                reader.only(part, ("orbit", "mult"), i)
                orbit = reader.require(part, "orbit", str, i)
                mult = reader.require(part, "mult", int, i)
                if mult < 1:
                    reader.fail("multiplicities must be positive", i, "decomposition")
                override_list.append((orbit, mult))
            override = tuple(sorted(override_list))

        record = QuotientRecord(level, group, genus, source, hyperelliptic, trigonal, override)
        if record.label in seen:
            reader.fail(f"duplicate record {record.label}", i)
        seen.add(record.label)
        records.append(record)
    records.sort(key=lambda r: r.group.sort_key())
    return tuple(records)


def _literature_entry(reader: _Reader, obj: Dict[str, Any], label: str, key: str) -> LiteratureEntry:
    reader.only(obj, ("genus", "min_genus", "gon_Q", "gon_C", "source"), field_name=key)
    genus = obj.get("genus")
    min_genus = obj.get("min_genus")
    for name, value in (("genus", genus), ("min_genus", min_genus)):
        if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 0):
            reader.fail(f"{name} must be a non-negative integer or null, got {value!r}", field_name=key)
    if genus is not None and min_genus is not None and genus < min_genus:
        reader.fail(f"genus {genus} is below min_genus {min_genus}", field_name=key)
    source = obj.get("source")
    if not isinstance(source, str) or not source.strip():
        reader.fail("source must be a non-empty string", field_name=key)
    return LiteratureEntry(
        label=label,
        gon_q=reader.interval(obj.get("gon_Q"), field_name=f"{key}.gon_Q"),
        gon_c=reader.interval(obj.get("gon_C"), field_name=f"{key}.gon_C"),
        source=source,
        genus=genus,
        min_genus=min_genus,
    )


def parse_known(data: Any, file: str = KNOWN_FILE) -> KnownLists:
    """Parse known hyperelliptic/trigonal lists and literature gonalities."""
    reader = _Reader(file)
    obj = reader.object(data)
    if obj.get("schema_version") != SCHEMA_VERSION:
        reader.fail(f"schema_version must be {SCHEMA_VERSION}", field_name="schema_version")
    reader.only(obj, ("schema_version", "lists_complete", "hyperelliptic_quotients",
                      "trigonal_C_quotients", "star", "gonality"))

    def label_set(key: str) -> FrozenSet[str]:
        values = obj.get(key, [])
        if not isinstance(values, list):
            reader.fail("expected a list of labels", field_name=key)
        return frozenset(canonical_label(reader.label(v, i, key)) for i, v in enumerate(values))

    hyperelliptic = label_set("hyperelliptic_quotients")
    trigonal = label_set("trigonal_C_quotients")
    both = hyperelliptic & trigonal
    if both:
        reader.fail(f"labels listed as both hyperelliptic and trigonal: {sorted(both)}")

    star: Dict[int, LiteratureEntry] = {}
    for key, entry in reader.object(obj.get("star", {}), field_name="star").items():
        try:
            level = int(key)
        except ValueError:
            reader.fail(f"star key {key!r} is not a level", field_name="star")
        star[level] = _literature_entry(reader, reader.object(entry, field_name=f"star.{key}"),
                                        canonical_label(full_group(level)), f"star.{key}")

    gonality: Dict[str, LiteratureEntry] = {}
    for key, entry in reader.object(obj.get("gonality", {}), field_name="gonality").items():
        label = canonical_label(reader.label(key, field_name="gonality"))
        if label in gonality:
            reader.fail(f"duplicate literature entry {label}", field_name="gonality")
        gonality[label] = _literature_entry(reader, reader.object(entry, field_name=f"gonality.{key}"),
                                            label, f"gonality.{key}")

    complete = obj.get("lists_complete", False)
    if not isinstance(complete, bool):
        reader.fail("lists_complete must be a boolean", field_name="lists_complete")
    return KnownLists(hyperelliptic, trigonal, star, gonality, complete)


def _check_payload(reader: _Reader, kind: str, payload: Dict[str, Any], index: int) -> None:
    for key, kind_type in CERTIFICATE_PAYLOADS[kind].items():
        reader.require(payload, key, kind_type, index)
    if reader.require(payload, "min_genus", int, index, optional=True) is not None and payload["min_genus"] < 0:
        reader.fail("min_genus must be non-negative", index, "min_genus")
    if kind == "betti22" and payload["value"] < 0:
        reader.fail("Betti number must be non-negative", index, "value")
    if kind == "fp_gonality_lower":
        if not isprime(payload["p"]):
            reader.fail(f"{payload['p']} is not prime", index, "p")
        if payload["bound"] < 1:
            reader.fail("bound must be positive", index, "bound")
    if kind == "fq_point_count":
        q = payload["q"]
        if q < 2 or len({int(p) for p in divisors(q) if isprime(p)}) != 1:
            reader.fail(f"{q} is not a prime power", index, "q")
        if payload["count"] < 0:
            reader.fail("count must be non-negative", index, "count")
    if kind == "gonal_map":
        if payload["degree"] < 1:
            reader.fail("degree must be positive", index, "degree")
        if not payload["field"].strip():
            reader.fail("field must be non-empty", index, "field")
    if kind == "trigonal_map_field" and payload["field"] not in TRIGONAL_FIELDS:
        reader.fail(f"field must be one of {TRIGONAL_FIELDS}", index, "field")


def parse_certificates(data: Any, file: str = CERTIFICATES_FILE) -> Tuple[Certificate, ...]:
    """Parse certificates; targets are canonicalized."""
    reader = _Reader(file)
    body = reader.header(data, "certificates")
    reader.only(data, ("schema_version", "certificates"))
    certificates: List[Certificate] = []
    for i, raw in enumerate(body):
        obj = reader.object(raw, i)
        kind = reader.require(obj, "kind", str, i)
        if kind not in CERTIFICATE_PAYLOADS:
            reader.fail(f"unknown certificate kind {kind!r}", i, "kind")
        allowed = ("kind", "target", "source", "note") + tuple(CERTIFICATE_PAYLOADS[kind]) + tuple(OPTIONAL_PAYLOAD)
        reader.only(obj, allowed, i)
        target = canonical_label(reader.label(reader.require(obj, "target", str, i), i, "target"))
        source = reader.require(obj, "source", str, i)
        if not source.strip():
            reader.fail("source must be non-empty", i, "source")
        payload = {k: obj[k] for k in obj if k not in ("kind", "target", "source")}
        _check_payload(reader, kind, payload, i)
        certificates.append(Certificate(kind, target, payload, source))
    certificates.sort(key=lambda c: (_label_key(c.target), c.kind, json.dumps(c.payload, sort_keys=True)))
    return tuple(certificates)


def load_dataset(root: str, newforms_path: Optional[str] = None) -> Dataset:
    """
    Load and check a dataset directory.

    Args:
        root: Directory holding newforms.json, quotients.json, known.json
            and certificates.json
        newforms_path: Alternative newforms file (e.g. a fetch cache aggregate)

    Returns:
        Dataset with canonical ordering everywhere

    Raises:
        DatasetError: with file and record coordinates
    """
    newforms_file = newforms_path or os.path.join(root, NEWFORMS_FILE)
    orbits, levels = parse_newforms(_read_json(*os.path.split(newforms_file)), newforms_file)
    records = parse_quotients(_read_json(root, QUOTIENTS_FILE), os.path.join(root, QUOTIENTS_FILE))
    known = parse_known(_read_json(root, KNOWN_FILE), os.path.join(root, KNOWN_FILE))
    certificates = parse_certificates(_read_json(root, CERTIFICATES_FILE),
                                      os.path.join(root, CERTIFICATES_FILE))

    for i, record in enumerate(records):
        hyp, trig = known.flags_for(record.label)
        if record.hyperelliptic is False and hyp:
            raise DatasetError(f"{record.label} is flagged non-hyperelliptic but listed as hyperelliptic",
                               file=QUOTIENTS_FILE, index=i, field="hyperelliptic")
        if record.trigonal_c is False and trig:
            raise DatasetError(f"{record.label} is flagged non-trigonal but listed as trigonal",
                               file=QUOTIENTS_FILE, index=i, field="trigonal_C")
        if record.hyperelliptic and record.trigonal_c:
            raise DatasetError(f"{record.label} cannot be both hyperelliptic and trigonal",
                               file=QUOTIENTS_FILE, index=i)

    dataset = Dataset(orbits, levels, records, known, certificates, root)
    logger.info("Loaded dataset %s: %s", root, dataset.summary())
    return dataset


def to_json(dataset: Dataset) -> Dict[str, Dict[str, Any]]:
    """Canonical JSON documents of a dataset, keyed by file name."""
    return {
        NEWFORMS_FILE: {
            "schema_version": SCHEMA_VERSION,
            "levels": sorted(dataset.complete_levels),
            "orbits": [o.to_json() for o in dataset.orbits],
        },
        QUOTIENTS_FILE: {
            "schema_version": SCHEMA_VERSION,
            "records": [r.to_json() for r in dataset.records],
        },
        KNOWN_FILE: dataset.known.to_json(),
        CERTIFICATES_FILE: {
            "schema_version": SCHEMA_VERSION,
            "certificates": [c.to_json() for c in dataset.certificates],
        },
    }


def dumps(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize(dataset: Dataset, root: str) -> List[str]:
    """Write the canonical form of a dataset into root; returns written paths."""
    os.makedirs(root, exist_ok=True)
    paths = []
    for name, document in to_json(dataset).items():
        path = os.path.join(root, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(dumps(document))
        paths.append(path)
    return paths


def fingerprint(dataset: Dataset) -> str:
    """SHA-256 of the canonical serialization."""
    canonical = json.dumps(to_json(dataset), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def cusp_space_dimension(dataset: Dataset, n: int) -> int:
    """Dimension of S_2(Gamma0(n)) from the orbits: sum of sigma0(n/M) * dim."""
    return sum(len(divisors(n // o.level)) * o.dim for o in dataset.orbits_dividing(n))


def with_certificates(dataset: Dataset, certificates: Iterable[Certificate]) -> Dataset:
    """Copy of the dataset with a different certificate set."""
    return replace(dataset, certificates=tuple(certificates))

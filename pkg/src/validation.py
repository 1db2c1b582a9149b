"""
Dataset Validation Module

This module cross-checks a loaded dataset: record genera against the
Jacobian decomposition, Hecke polynomials against the Weil bound,
certificate targets against known and candidate curves, point-count
certificates against computed counts, certificate genus floors against
recorded genera, and genus_x0 against the dimension of the cusp space on
levels with complete newform data.
"""

import logging
from dataclasses import dataclass, field
from math import sqrt
from typing import Any, Dict, List, Sequence

import numpy as np
from sympy import divisors

from .arithmetic import genus_x0, omega, prime_power
from .atkin_lehner import parse_label
from .classifier import candidate_levels
from .exceptions import DecompositionError
from .jacobian import decompose, point_count
from .modform_data import Dataset, cusp_space_dimension

logger = logging.getLogger(__name__)

WEIL_TOLERANCE = 1e-9


@dataclass
class ValidationReport:
    """Machine-readable validation findings; empty sections mean consistent."""

    genus_mismatch: List[Dict[str, Any]] = field(default_factory=list)
    weil_violation: List[Dict[str, Any]] = field(default_factory=list)
    dangling_certificate: List[Dict[str, Any]] = field(default_factory=list)
    unreliable_without_override: List[Dict[str, Any]] = field(default_factory=list)
    count_mismatch: List[Dict[str, Any]] = field(default_factory=list)
    genus_formula_mismatch: List[Dict[str, Any]] = field(default_factory=list)
    genus_below_floor: List[Dict[str, Any]] = field(default_factory=list)
    checked: Dict[str, int] = field(default_factory=dict)

    SECTIONS = ("genus_mismatch", "weil_violation", "dangling_certificate",
                "unreliable_without_override", "count_mismatch", "genus_formula_mismatch",
                "genus_below_floor")

    @property
    def is_empty(self) -> bool:
        return not any(getattr(self, name) for name in self.SECTIONS)

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in self.SECTIONS}
        data["checked"] = dict(self.checked)
        return data


def weil_violations(dataset: Dataset) -> List[Dict[str, Any]]:
    """Hecke polynomials with a root of modulus greater than 2 sqrt(p)."""
    violations = []
    for orbit in dataset.orbits:
        for p, poly in sorted(orbit.hecke.items()):
            roots = np.roots(list(reversed(poly.to_list())))
            largest = float(np.max(np.abs(roots))) if len(roots) else 0.0
            if largest > 2 * sqrt(p) + WEIL_TOLERANCE:
                violations.append({"orbit": orbit.label, "p": p, "max_root": round(largest, 6),
                                   "bound": round(2 * sqrt(p), 6)})
    return violations


def _is_candidate(label: str, levels: Sequence[int]) -> bool:
    w = parse_label(label)
    return w.level in levels and 4 <= w.order <= 2 ** (omega(w.level) - 1)


def dangling_certificates(dataset: Dataset, candidate_exceptions: Sequence[int] = (378,)) -> List[Dict[str, Any]]:
    """Certificates whose target is neither a record, a literature curve nor a candidate curve."""
    levels = set(candidate_levels(dataset.known, candidate_exceptions))
    known = {r.label for r in dataset.records} | set(dataset.known.literature())
    return [{"target": c.target, "kind": c.kind, "source": c.source}
            for c in dataset.certificates if c.target not in known and not _is_candidate(c.target, levels)]


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """
    Cross-check a loaded dataset.

    Args:
        dataset: Loaded dataset

    Returns:
        ValidationReport listing every inconsistency found
    """
    report = ValidationReport()
    report.weil_violation = weil_violations(dataset)
    report.dangling_certificate = dangling_certificates(dataset)

    decompositions = {}
    for record in dataset.records:
        if record.decomposition_override is None and not dataset.has_complete_data(record.level):
            continue
        try:
            decomposition = decompose(record, dataset)
        except DecompositionError as exc:
            report.genus_mismatch.append({"curve": record.label, "genus": record.genus, "error": str(exc)})
            continue
        if not decomposition.reliable:
            report.unreliable_without_override.append(
                {"curve": record.label, "orbits": list(decomposition.unreliable_orbits)})
            continue
        decompositions[record.label] = decomposition
        if decomposition.genus_sum != record.genus:
            report.genus_mismatch.append({"curve": record.label, "genus": record.genus,
                                          "genus_sum": decomposition.genus_sum})

    for cert in dataset.certificates:
        if cert.kind != "fq_point_count" or cert.target not in decompositions:
            continue
        record = dataset.record(cert.target)
        p, k = prime_power(cert.get("q"))
        try:
            computed = point_count(record, p, k, dataset, decompositions[cert.target])
        except DecompositionError as exc:
            logger.debug("Skipping count check for %s at q=%s: %s", cert.target, cert.get("q"), exc)
            continue
        if computed != cert.get("count"):
            report.count_mismatch.append({"curve": cert.target, "q": cert.get("q"),
                                          "certificate": cert.get("count"), "computed": computed})

    genera = {r.label: r.genus for r in dataset.records}
    for label, entry in dataset.known.gonality.items():
        if entry.genus is not None:
            genera.setdefault(label, entry.genus)
    for cert in dataset.certificates:
        floor = cert.get("min_genus")
        if floor is not None and cert.target in genera and genera[cert.target] < floor:
            report.genus_below_floor.append({"curve": cert.target, "kind": cert.kind,
                                             "genus": genera[cert.target], "min_genus": floor})

    levels = sorted(n for n in dataset.complete_levels
                    if all(int(m) in dataset.complete_levels for m in divisors(n)))
    for n in levels:
        expected = genus_x0(n)
        dimension = cusp_space_dimension(dataset, n)
        if expected != dimension:
            report.genus_formula_mismatch.append({"level": n, "genus_x0": expected, "dimension": dimension})

    report.checked = {
        "orbits": len(dataset.orbits),
        "records_decomposed": len(decompositions),
        "certificates": len(dataset.certificates),
        "levels": len(levels),
    }
    if report.is_empty:
        logger.info("Dataset %s is consistent (%s)", dataset.root, report.checked)
    else:
        logger.warning("Dataset %s has validation findings", dataset.root)
    return report

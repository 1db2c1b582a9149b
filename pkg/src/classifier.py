"""
Classifier Module

This module runs the full classification of quotient curves X0(N)/W of
candidate levels, builds the canonical JSON report and its Markdown
rendering, diffs a report against an expected-status file and explains
the proof trace of a single curve.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .arithmetic import omega
from .atkin_lehner import ALSubgroup, canonical_label, canonicalize_label, enumerate_subgroups, parse_label
from .exceptions import LabelError, ReportSchemaError
from .gonality import RULES, GonalityEngine, GonalityState, replay
from .modform_data import Dataset, KnownLists, dumps, fingerprint, load_dataset

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

TRIGONAL_Q = "trigonal_Q"
TETRAGONAL_Q = "tetragonal_Q"
GONALITY_GE_5 = "gonality_ge_5"
UNDETERMINED = "undetermined"
STATUSES = (TRIGONAL_Q, TETRAGONAL_Q, GONALITY_GE_5, UNDETERMINED)

MAX_SUGGESTIONS = 5


def status_of(state: GonalityState) -> str:
    """Status derived from the final bounds alone."""
    if state.lower_q == state.upper_q == 3:
        return TRIGONAL_Q
    if state.lower_q == state.upper_q == 4:
        return TETRAGONAL_Q
    if state.lower_c >= 5:
        return GONALITY_GE_5
    return UNDETERMINED


def candidate_levels(known: KnownLists, exceptions: Sequence[int] = (378,)) -> List[int]:
    """
    Levels whose quotients can be tetragonal.

    A level qualifies when omega(N) >= 3 and the star quotient has C-gonality
    at most 4, or when it is listed in exceptions.
    """
    levels = set()
    for n, entry in known.star.items():
        if omega(n) >= 3 and entry.gon_c.hi is not None and entry.gon_c.hi <= 4:
            levels.add(n)
    levels.update(n for n in exceptions if omega(n) >= 3)
    return sorted(levels)


def candidate_subgroups(level: int) -> List[ALSubgroup]:
    """Subgroups with 4 <= |W| <= 2^(omega-1), in canonical order."""
    groups: List[ALSubgroup] = []
    order = 4
    while order <= 2 ** (omega(level) - 1):
        groups.extend(enumerate_subgroups(level, order))
        order *= 2
    return groups


@dataclass
class ClassificationReport:
    """One row per candidate curve; missing names the rows built without any record or isomorphic copy."""

    fingerprint: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    missing: List[str] = field(default_factory=list)
    states: Dict[str, GonalityState] = field(default_factory=dict, repr=False)
    engine: Optional[GonalityEngine] = field(default=None, repr=False)

    @property
    def summary(self) -> Dict[str, Any]:
        counts = {status: 0 for status in STATUSES}
        for row in self.rows:
            counts[row["status"]] += 1
        return {
            "levels": len({row["level"] for row in self.rows}),
            "curves": len(self.rows),
            "missing": len(self.missing),
            "statuses": counts,
        }

    def status(self, label: str) -> Optional[str]:
        for row in self.rows:
            if row["label"] == label:
                return row["status"]
        return None

    def statuses(self) -> Dict[str, str]:
        return {row["label"]: row["status"] for row in self.rows}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "fingerprint": self.fingerprint,
            "summary": self.summary,
            "rows": self.rows,
            "missing": self.missing,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def traces(self) -> Dict[str, Any]:
        """Full proof traces of every node the engine saturated."""
        labels = sorted(self.states, key=lambda label: parse_label(label).sort_key())
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "fingerprint": self.fingerprint,
            "traces": {label: self.states[label].to_dict() for label in labels},
        }


def run_classification(config: Dict[str, Any], dataset: Optional[Dataset] = None,
                       rule_order: Optional[Sequence[str]] = None) -> ClassificationReport:
    """
    Classify every candidate quotient curve.

    Args:
        config: Full configuration dict
        dataset: Loaded dataset (loaded from config["data"]["dataset_dir"] when None)
        rule_order: Rule application order passed to the engine

    Returns:
        ClassificationReport with rows in canonical label order
    """
    if dataset is None:
        dataset = load_dataset(config["data"]["dataset_dir"])
    engine_config = config.get("engine", {})

    levels = candidate_levels(dataset.known, engine_config.get("candidate_exceptions", [378]))
    candidates = [w for n in levels for w in candidate_subgroups(n)]
    logger.info("Classifying %d candidate curves at %d levels", len(candidates), len(levels))

    engine = GonalityEngine(dataset, engine_config, rule_order)
    bare = engine.add_candidate_nodes(candidates)
    states = engine.saturate()

    report = ClassificationReport(fingerprint(dataset), missing=bare, states=states, engine=engine)
    for w in candidates:
        label = canonical_label(w)
        node = engine.nodes[label]
        state = states[label]
        report.rows.append({
            "label": label,
            "level": w.level,
            "order": w.order,
            "genus": node.genus,
            "bounds": list(state.bounds),
            "status": status_of(state),
            "source": node.source,
            "trace_ref": label,
        })
    logger.info("Report summary: %s", report.summary["statuses"])
    return report


def format_group(w: ALSubgroup) -> str:
    return "<" + ", ".join(f"w_{d}" for d in w.generators) + ">"


def to_markdown(report: ClassificationReport) -> str:
    """Tetragonal curves per level, followed by the full status table."""
    rows = pd.DataFrame(report.rows, columns=["label", "level", "order", "genus", "bounds", "status"])
    parts = ["# Quotient curve classification", ""]

    tetragonal = rows[rows["status"] == TETRAGONAL_Q]
    parts += ["## Q-tetragonal curves", ""]
    if tetragonal.empty:
        parts.append("None.")
    else:
        table = (tetragonal.assign(group=tetragonal["label"].map(lambda label: format_group(parse_label(label))))
                 .groupby("level", sort=True)["group"].agg(", ".join).reset_index()
                 .rename(columns={"level": "N", "group": "W_N"}))
        parts.append(table.to_markdown(index=False))

    trigonal = rows[rows["status"] == TRIGONAL_Q]
    parts += ["", "## Q-trigonal curves", ""]
    if trigonal.empty:
        parts.append("None.")
    else:
        parts.append(trigonal[["level", "label", "genus"]].to_markdown(index=False))

    parts += ["", "## All candidate curves", ""]
    if rows.empty:
        parts.append("None.")
    else:
        full = rows.assign(bounds=rows["bounds"].map(
            lambda b: f"Q [{b[0]}, {b[1] if b[1] is not None else 'inf'}], "
                      f"C [{b[2]}, {b[3] if b[3] is not None else 'inf'}]"))
        parts.append(full.to_markdown(index=False))
    if report.missing:
        parts += ["", f"Candidates without a record: {len(report.missing)}"]
    return "\n".join(parts) + "\n"


def write_report(report: ClassificationReport, out_dir: str, report_config: Optional[Dict[str, Any]] = None,
                 formats: Sequence[str] = ("json",)) -> List[str]:
    """Write the report (and traces) into out_dir; returns written paths."""
    report_config = report_config or {}
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "json" in formats:
        path = os.path.join(out_dir, report_config.get("report_file", "report.json"))
        with open(path, "w", encoding="utf-8") as f:
            f.write(report.to_json())
        written.append(path)
        path = os.path.join(out_dir, report_config.get("traces_file", "traces.json"))
        with open(path, "w", encoding="utf-8") as f:
            f.write(dumps(report.traces()))
        written.append(path)
    if "md" in formats:
        path = os.path.join(out_dir, report_config.get("markdown_file", "report.md"))
        with open(path, "w", encoding="utf-8") as f:
            f.write(to_markdown(report))
        written.append(path)
    return written


@dataclass
class DiffResult:
    """Outcome of comparing a report with an expected-status file."""

    exit_code: int
    additions: List[str] = field(default_factory=list)
    changes: List[str] = field(default_factory=list)
    lines: List[str] = field(default_factory=list)

    @property
    def matches(self) -> bool:
        return self.exit_code == 0


def load_expected(path: str) -> Dict[str, str]:
    """
    Read an expected-status file {"schema_version": 1, "statuses": {label: status}}.

    Raises:
        ReportSchemaError: for a missing file, bad schema, bad label or unknown status
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ReportSchemaError(f"expected-status file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ReportSchemaError(f"{path}: invalid JSON: {exc}")
    if not isinstance(data, dict) or data.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ReportSchemaError(f"{path}: expected schema_version {REPORT_SCHEMA_VERSION}")
    statuses = data.get("statuses")
    if not isinstance(statuses, dict):
        raise ReportSchemaError(f"{path}: 'statuses' must map labels to statuses")

    expected = {}
    for label, status in statuses.items():
        try:
            canonical = canonicalize_label(label)
        except LabelError as exc:
            raise ReportSchemaError(f"{path}: {exc}")
        if status not in STATUSES:
            raise ReportSchemaError(f"{path}: unknown status {status!r} for {label}")
        expected[canonical] = status
    return expected


def diff_report(report: ClassificationReport, expected_path: str) -> DiffResult:
    """
    Compare report statuses with an expected-status file.

    Returns:
        DiffResult with exit code 0 on a full match and 1 otherwise

    Raises:
        ReportSchemaError: when the file is malformed or names a curve that is
            not a candidate
    """
    expected = load_expected(expected_path)
    actual = report.statuses()
    unknown = sorted(label for label in expected if label not in actual)
    if unknown:
        raise ReportSchemaError(f"{expected_path}: unknown curves {unknown}")

    result = DiffResult(0)
    order = sorted(actual, key=lambda label: parse_label(label).sort_key())
    for label in order:
        if label not in expected:
            result.additions.append(label)
            result.lines.append(f"+ {label}: {actual[label]}")
        elif actual[label] != expected[label]:
            result.changes.append(label)
            result.lines.append(f"~ {label}: expected {expected[label]}, got {actual[label]}")
    if result.lines:
        result.exit_code = 1
    return result


def nearest_labels(label: str, known: Sequence[str], limit: int = MAX_SUGGESTIONS) -> List[str]:
    """Known labels closest to label, by level then by edit similarity."""
    level_text = label.split(":", 1)[0].strip()
    level = int(level_text) if level_text.isdigit() else None

    def key(candidate: str):
        candidate_level = parse_label(candidate).level
        distance = abs(candidate_level - level) if level is not None else 0
        return (distance, -SequenceMatcher(None, label, candidate).ratio(), candidate)

    return sorted(known, key=key)[:limit]


def explain(label: str, report: ClassificationReport) -> str:
    """
    Formatted, replayed proof trace of one curve.

    Raises:
        LabelError: for labels that are not nodes of the report's run
    """
    try:
        canonical = canonicalize_label(label)
    except LabelError:
        canonical = label
    state = report.states.get(canonical)
    if state is None:
        raise LabelError(f"unknown curve {label}", nearest_labels(label, sorted(report.states)))

    node = report.engine.nodes[canonical] if report.engine is not None else None
    if state.genus is not None:
        genus = str(state.genus)
    else:
        genus = "unknown" if state.min_genus is None else f">= {state.min_genus}"
    lq, uq, lc, uc = state.bounds
    lines = [
        f"{canonical}  genus {genus}  status {status_of(state)}",
        f"gon_Q in [{lq}, {uq if uq is not None else 'inf'}]   gon_C in [{lc}, {uc if uc is not None else 'inf'}]",
    ]
    if node is not None and node.source:
        lines.append(f"source: {node.source}")

    related = []
    for i, step in enumerate(state.trace, 1):
        mark = "" if replay(step) else "  [REPLAY FAILED]"
        lines.append(f"{i:3d}. [{RULES[step.rule].title}] {step.conclusion}  ({step.bound} = {step.value}){mark}")
        for key in ("target", "partner"):
            other = step.inputs.get(key)
            if other and other not in related:
                related.append(other)
    if related:
        lines.append("see also: " + ", ".join(related))
    return "\n".join(lines)

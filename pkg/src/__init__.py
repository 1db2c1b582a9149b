"""
Atkin-Lehner Quotient Gonality Package

This package decides which quotient curves X0(N)/W of the modular curve
X0(N) by groups of Atkin-Lehner involutions are trigonal or tetragonal
over Q, with a replayable proof trace for every bound.
"""

__version__ = "0.1.0"

from .atkin_lehner import ALSubgroup, canonical_label, enumerate_subgroups, generate
from .classifier import ClassificationReport, diff_report, explain, run_classification
from .config import load_config
from .gonality import GonalityEngine, GonalityState
from .modform_data import Dataset, load_dataset

__all__ = [
    "ALSubgroup",
    "ClassificationReport",
    "Dataset",
    "GonalityEngine",
    "GonalityState",
    "canonical_label",
    "diff_report",
    "enumerate_subgroups",
    "explain",
    "generate",
    "load_config",
    "load_dataset",
    "run_classification",
]

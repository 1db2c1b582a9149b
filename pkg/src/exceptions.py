"""
Exceptions Module

This module defines the error hierarchy shared by the arithmetic kernel,
the dataset layer, the gonality engine and the command line driver.
"""

from typing import Iterable, List, Optional


class AlqError(Exception):
    """Base class for every error raised by the package."""


class ArithmeticInputError(AlqError):
    """Raised for invalid arithmetic input (bad level, non-monic polynomial)."""


class GroupError(AlqError):
    """Raised for invalid Atkin-Lehner group input."""


class LabelError(AlqError):
    """Raised when a curve label cannot be parsed or resolved."""

    def __init__(self, message: str, suggestions: Optional[Iterable[str]] = None):
        self.suggestions: List[str] = list(suggestions or [])
        if self.suggestions:
            message = f"{message} (nearest: {', '.join(self.suggestions)})"
        super().__init__(message)


class DatasetError(AlqError):
    """Raised when a data file is missing or violates its schema."""

    def __init__(self, message: str, file: Optional[str] = None,
                 index: Optional[int] = None, field: Optional[str] = None):
        self.file = file
        self.index = index
        self.field = field
        location = []
        if file:
            location.append(file)
        if index is not None:
            location.append(f"record {index}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{': '.join(location)}: {message}"
        super().__init__(message)


class FetchError(AlqError):
    """Raised when newform data cannot be fetched or served from cache."""

    def __init__(self, message: str, missing_levels: Optional[Iterable[int]] = None):
        self.missing_levels = sorted(missing_levels or [])
        if self.missing_levels:
            message = f"{message}; missing levels: {self.missing_levels}"
        super().__init__(message)


class DecompositionError(AlqError):
    """Raised when a Jacobian decomposition or point count cannot be computed."""


class GonalityInconsistency(AlqError):
    """Raised when a lower bound crosses an upper bound during saturation."""

    def __init__(self, curve: str, lower_step=None, upper_step=None,
                 message: Optional[str] = None):
        self.curve = curve
        self.lower_step = lower_step
        self.upper_step = upper_step
        if message is None:
            parts = [f"inconsistent gonality bounds for {curve}"]
            if lower_step is not None:
                parts.append(f"lower bound from {lower_step.rule}: {lower_step.conclusion}")
            if upper_step is not None:
                parts.append(f"upper bound from {upper_step.rule}: {upper_step.conclusion}")
            message = "; ".join(parts)
        super().__init__(message)


class SchreyerMismatch(AlqError):
    """Raised when a Betti number matches none of the Schreyer columns."""

    def __init__(self, curve: str, genus: int, value: int, columns: dict):
        self.curve = curve
        self.genus = genus
        self.value = value
        self.columns = dict(columns)
        listing = ", ".join(f"{name}={v}" for name, v in self.columns.items())
        super().__init__(
            f"{curve}: beta_22={value} at genus {genus} matches no Schreyer column ({listing})"
        )


class ReportSchemaError(AlqError):
    """Raised when an expected-status file does not match the report schema."""


class CertificateError(AlqError):
    """Raised when a certificate is applied to the wrong curve or lacks context."""


class ConfigError(AlqError):
    """Raised when the configuration file is missing or malformed."""

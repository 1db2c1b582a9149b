"""
Jacobian Trace Module

This module decomposes the Jacobian of a quotient curve X0(N)/W into
newform orbits with multiplicities and counts points over finite fields
from the Frobenius characteristic polynomials of those orbits.

Multiplicities come from averaging the trace of each w_Q over the old
block of an orbit. Blocks where the Atkin-Lehner action is not determined
by the newform signs (a prime of Q/gcd(Q, M) also divides M) are reported
as UNRELIABLE and must be supplied as a dataset override.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Tuple, Union

from sympy import isprime

from .arithmetic import frobenius_charpoly, is_hall_divisor, newton_power_sums, Level
from .atkin_lehner import ALSubgroup, canonical_label
from .exceptions import DecompositionError, GroupError
from .modform_data import Dataset, NewformOrbit, QuotientRecord

logger = logging.getLogger(__name__)


class Unreliable:
    """Marker for an old-block trace the tame model does not determine."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNRELIABLE"


UNRELIABLE = Unreliable()


@dataclass(frozen=True)
class Decomposition:
    """Jacobian of a quotient curve as orbits with multiplicities."""

    curve: str
    parts: Tuple[Tuple[str, int], ...]
    reliable: bool
    genus_sum: int
    unreliable_orbits: Tuple[str, ...] = ()
    from_override: bool = False

    def to_json(self) -> Dict:
        return {
            "curve": self.curve,
            "parts": [{"orbit": o, "mult": m} for o, m in self.parts],
            "reliable": self.reliable,
            "genus_sum": self.genus_sum,
            "unreliable_orbits": list(self.unreliable_orbits),
            "from_override": self.from_override,
        }


def old_block_trace(orbit: NewformOrbit, n: int, q: int) -> Union[Fraction, Unreliable]:
    """
    Trace of w_Q on the old block of an orbit inside level n.

    Args:
        orbit: Newform orbit of level M dividing n
        n: Ambient level
        q: Hall divisor Q of n

    Returns:
        lambda_{gcd(Q,M)} times, for each prime p of n/M, either v_p(n/M)+1
        when p does not divide Q/gcd(Q,M), or the number of degeneracy
        indices fixed by w_{p^v} (1 for even v, 0 for odd v) when it does;
        UNRELIABLE when a prime of Q/gcd(Q,M) divides M
    """
    m = orbit.level
    if n % m:
        raise DecompositionError(f"orbit {orbit.label} of level {m} does not divide {n}")
    if not is_hall_divisor(q, n):
        raise GroupError(f"{q} is not a Hall divisor of {n}")

    q_m = gcd(q, m)
    q_e = q // q_m
    if q_e > 1 and any(m % p == 0 for p in Level(q_e).primes):
        return UNRELIABLE

    trace = orbit.sign(q_m)
    for p, e in Level(n // m).factorization.items():
        if q_e % p == 0:
            trace *= 1 if e % 2 == 0 else 0
        else:
            trace *= e + 1
    return Fraction(trace)


def invariant_multiplicity(orbit: NewformOrbit, w: ALSubgroup) -> Union[int, Unreliable]:
    """
    Multiplicity of an orbit in the Jacobian of X0(N)/W.

    Averages old_block_trace over the elements of W. A non-integral or
    negative average is an error, never rounded.
    """
    if w.level % orbit.level:
        raise DecompositionError(f"orbit {orbit.label} (level {orbit.level}) does not divide {w.level}")
    total = Fraction(0)
    for q in sorted(w.elements):
        trace = old_block_trace(orbit, w.level, q)
        if trace is UNRELIABLE:
            return UNRELIABLE
        total += trace
    multiplicity = total / w.order
    if multiplicity.denominator != 1 or multiplicity < 0:
        raise DecompositionError(
            f"multiplicity of {orbit.label} in {canonical_label(w)} is {multiplicity}, not a non-negative integer"
        )
    return int(multiplicity)


def decompose_group(w: ALSubgroup, dataset: Dataset,
                    override: Optional[Tuple[Tuple[str, int], ...]] = None) -> Decomposition:
    """Decomposition of X0(N)/W from the dataset orbits, or from an override."""
    label = canonical_label(w)
    if override is not None:
        genus_sum = 0
        for orbit_label, mult in override:
            orbit = dataset.orbit(orbit_label)
            if orbit is None:
                raise DecompositionError(f"{label}: override names unknown orbit {orbit_label}")
            if w.level % orbit.level:
                raise DecompositionError(f"{label}: override orbit {orbit_label} does not divide {w.level}")
            genus_sum += mult * orbit.dim
        return Decomposition(label, tuple(override), True, genus_sum, from_override=True)

    missing = dataset.missing_levels(w.level)
    if missing:
        raise DecompositionError(f"{label}: missing orbit data at levels {missing}")

    parts: List[Tuple[str, int]] = []
    unreliable: List[str] = []
    genus_sum = 0
    for orbit in dataset.orbits_dividing(w.level):
        mult = invariant_multiplicity(orbit, w)
        if mult is UNRELIABLE:
            unreliable.append(orbit.label)
            continue
        if mult:
            parts.append((orbit.label, mult))
            genus_sum += mult * orbit.dim
    if unreliable:
        logger.debug("%s: wild old blocks for %s", label, unreliable)
    return Decomposition(label, tuple(parts), not unreliable, genus_sum, tuple(unreliable))


def decompose(curve: QuotientRecord, dataset: Dataset) -> Decomposition:
    """
    Decompose the Jacobian of a quotient record.

    An override in the record always wins and is marked reliable; otherwise
    wild blocks leave the decomposition unreliable.
    """
    return decompose_group(curve.group, dataset, curve.decomposition_override)


def point_count(curve: Union[QuotientRecord, ALSubgroup], p: int, k: int, dataset: Dataset,
                decomposition: Optional[Decomposition] = None) -> int:
    """
    Number of F_{p^k}-points of a quotient curve.

    Args:
        curve: Quotient record (or bare subgroup)
        p: Prime of good reduction
        k: Extension degree
        dataset: Dataset holding the orbits and Hecke data
        decomposition: Precomputed decomposition, if any

    Returns:
        p^k + 1 - sum over parts of mult * (k-th power sum of Frobenius roots)
    """
    group = curve.group if isinstance(curve, QuotientRecord) else curve
    label = canonical_label(group)
    if k < 1:
        raise DecompositionError(f"extension degree must be positive, got {k}")
    if not isprime(p):
        raise DecompositionError(f"{p} is not prime")
    if group.level % p == 0:
        raise DecompositionError(f"{label}: {p} is a prime of bad reduction")

    if decomposition is None:
        decomposition = decompose(curve, dataset) if isinstance(curve, QuotientRecord) \
            else decompose_group(group, dataset)
    if not decomposition.reliable:
        raise DecompositionError(f"{label}: decomposition is unreliable and has no override")

    total = 0
    for orbit_label, mult in decomposition.parts:
        orbit = dataset.orbit(orbit_label)
        if orbit is None or p not in orbit.hecke:
            raise DecompositionError(f"{label}: missing Hecke data for {orbit_label} at p={p}")
        total += mult * newton_power_sums(frobenius_charpoly(orbit.hecke[p], p), k)

    count = p ** k + 1 - total
    if count < 0:
        raise DecompositionError(f"{label}: negative point count {count} over F_{p}^{k}")
    return count


def count_bound(count: int, q: int, d: int) -> bool:
    """True iff count > d(q+1), i.e. the F_q-count forces gon_Q >= d+1."""
    return count > d * (q + 1)


def excluded_degree(count: int, q: int) -> int:
    """Largest d with count > d(q+1); 0 when none."""
    return max(0, (count - 1) // (q + 1))

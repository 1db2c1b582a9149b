"""
Atkin-Lehner Group Module

This module provides the group B(N) of Atkin-Lehner involutions as GF(2)
bit vectors over the prime powers exactly dividing N, together with
subgroup generation and enumeration, canonical labels and the two
isomorphism rewrites used to identify quotient curves across levels.

Elements are stored as Hall divisors; bit i of an element's mask is set
when the i-th prime power of N divides it.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .arithmetic import hall_divisors, is_hall_divisor, omega, Level
from .exceptions import GroupError, LabelError

logger = logging.getLogger(__name__)

LABEL_PATTERN = re.compile(r"^\s*(\d+)\s*:\s*\[\s*([\d\s,]*)\]\s*$")


@lru_cache(maxsize=None)
def _basis(level: int) -> Tuple[int, ...]:
    return tuple(Level(level).prime_powers)


def to_mask(level: int, d: int) -> int:
    """Bit vector of a Hall divisor."""
    mask = 0
    for i, q in enumerate(_basis(level)):
        if d % q == 0:
            mask |= 1 << i
    return mask


def from_mask(level: int, mask: int) -> int:
    """Hall divisor of a bit vector."""
    d = 1
    for i, q in enumerate(_basis(level)):
        if mask >> i & 1:
            d *= q
    return d


def _check_hall(level: int, d: int) -> None:
    if not is_hall_divisor(d, level):
        raise GroupError(f"{d} is not a Hall divisor of {level}")


def _span(masks: Iterable[int]) -> FrozenSet[int]:
    span = {0}
    for m in masks:
        if m not in span:
            span |= {s ^ m for s in span}
    return frozenset(span)


@dataclass(frozen=True)
class ALElement:
    """The Atkin-Lehner involution w_d of level N."""

    level: int
    d: int

    def __post_init__(self):
        _check_hall(self.level, self.d)

    @property
    def is_identity(self) -> bool:
        return self.d == 1

    def __mul__(self, other: "ALElement") -> "ALElement":
        return compose(self, other)

    def __str__(self) -> str:
        return f"w_{self.d}"


def compose(a: ALElement, b: ALElement) -> ALElement:
    """
    Group law w_d * w_e = w_{de/gcd(d,e)^2}.

    Args:
        a: First involution
        b: Second involution of the same level

    Returns:
        The composed involution
    """
    if a.level != b.level:
        raise GroupError(f"cannot compose involutions of levels {a.level} and {b.level}")
    g = gcd(a.d, b.d)
    return ALElement(a.level, a.d * b.d // (g * g))


@dataclass(frozen=True)
class ALSubgroup:
    """A subgroup W of B(N), stored as its set of Hall divisors."""

    level: int
    elements: FrozenSet[int]

    def __post_init__(self):
        elements = frozenset(self.elements)
        object.__setattr__(self, "elements", elements)
        if 1 not in elements:
            raise GroupError(f"subgroup of B({self.level}) must contain 1")
        for d in elements:
            _check_hall(self.level, d)
        masks = {to_mask(self.level, d) for d in elements}
        if any(a ^ b not in masks for a in masks for b in masks):
            raise GroupError(f"{sorted(elements)} is not closed in B({self.level})")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def rank(self) -> int:
        return self.order.bit_length() - 1

    @property
    def masks(self) -> FrozenSet[int]:
        return frozenset(to_mask(self.level, d) for d in self.elements)

    @property
    def generators(self) -> List[int]:
        """Lexicographically minimal generating set."""
        gens: List[int] = []
        span = {0}
        for d in sorted(self.elements):
            m = to_mask(self.level, d)
            if m not in span:
                gens.append(d)
                span |= {s ^ m for s in span}
        return gens

    @property
    def label(self) -> str:
        return canonical_label(self)

    @property
    def is_full(self) -> bool:
        return self.order == 1 << omega(self.level)

    def sort_key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.level, self.order, tuple(self.generators))

    def __contains__(self, d: int) -> bool:
        return d in self.elements

    def issubgroup(self, other: "ALSubgroup") -> bool:
        return self.level == other.level and self.elements <= other.elements

    def __str__(self) -> str:
        return self.label


def _from_masks(level: int, masks: Iterable[int]) -> ALSubgroup:
    return ALSubgroup(level, frozenset(from_mask(level, m) for m in _span(masks)))


def generate(level: int, gens: Sequence[int]) -> ALSubgroup:
    """
    Subgroup of B(level) generated by Hall divisors.

    Args:
        level: Level N
        gens: Generators as Hall divisors; repeats and the identity are allowed

    Returns:
        Closure of the generators under composition
    """
    for d in gens:
        _check_hall(level, d)
    return _from_masks(level, (to_mask(level, d) for d in gens))


def full_group(level: int) -> ALSubgroup:
    return ALSubgroup(level, frozenset(hall_divisors(level)))


def trivial_group(level: int) -> ALSubgroup:
    return ALSubgroup(level, frozenset([1]))


def _echelon_bases(r: int, k: int):
    """Yield each k-dimensional subspace of GF(2)^r once, by its reduced echelon basis."""
    for pivots in itertools.combinations(range(r), k):
        pivot_set = set(pivots)
        slots = [(row, col) for row, p in enumerate(pivots)
                 for col in range(p + 1, r) if col not in pivot_set]
        for bits in itertools.product((0, 1), repeat=len(slots)):
            rows = [1 << p for p in pivots]
            for (row, col), bit in zip(slots, bits):
                if bit:
                    rows[row] |= 1 << col
            yield rows


def enumerate_subgroups(level: int, order: int) -> List[ALSubgroup]:
    """
    All subgroups of B(level) of the given order.

    Args:
        level: Level N
        order: Power of two dividing 2^omega(N)

    Returns:
        Subgroups in canonical order, without duplicates
    """
    r = omega(level)
    if order < 1 or order & (order - 1) or order > 1 << r:
        raise GroupError(f"order {order} is not a power of two dividing |B({level})| = {1 << r}")
    k = order.bit_length() - 1
    groups = [_from_masks(level, rows) for rows in _echelon_bases(r, k)]
    return sorted(groups, key=ALSubgroup.sort_key)


def canonical_label(w: ALSubgroup) -> str:
    """Label "<N>:[d1,...]" built from the lexicographically minimal generators."""
    return f"{w.level}:[{','.join(str(d) for d in w.generators)}]"


def parse_label(text: str) -> ALSubgroup:
    """
    Parse a label "<N>:[d1,...]" into a subgroup.

    The generator list need not be minimal; the returned subgroup is the
    closure, so cosmetically different labels of one group parse equal.
    """
    match = LABEL_PATTERN.match(text or "")
    if not match:
        raise LabelError(f"cannot parse curve label {text!r}")
    level = int(match.group(1))
    if level < 1:
        raise LabelError(f"level must be positive in {text!r}")
    body = match.group(2).strip()
    try:
        gens = [int(tok) for tok in body.split(",") if tok.strip()] if body else []
    except ValueError:
        raise LabelError(f"cannot parse generators in {text!r}")
    try:
        return generate(level, gens)
    except GroupError as exc:
        raise LabelError(f"{text!r}: {exc}")


def canonicalize_label(text: str) -> str:
    return canonical_label(parse_label(text))


def normalize_generators(level: int, gens: Sequence[int],
                         expected_order: Optional[int] = None) -> Tuple[Optional[ALSubgroup], List[str]]:
    """
    Normalize a generator list read from a table row.

    Args:
        level: Level N
        gens: Generators as written in the source row
        expected_order: Order the row claims, if any

    Returns:
        (subgroup or None, list of issues); None when a generator is not a
        Hall divisor or the order does not match, so the row is flagged
        instead of guessed
    """
    issues: List[str] = []
    bad = [d for d in gens if not is_hall_divisor(d, level)]
    if bad:
        issues.append(f"non-Hall generator(s) {bad} at level {level}")
        return None, issues
    if 1 in gens:
        issues.append("identity listed as a generator")
    span = {0}
    for d in gens:
        m = to_mask(level, d)
        if m in span and d != 1:
            issues.append(f"redundant generator {d}")
        span |= {s ^ m for s in span}
    group = generate(level, gens)
    if expected_order is not None and group.order != expected_order:
        issues.append(f"generators span a group of order {group.order}, expected {expected_order}")
        return None, issues
    return group, issues


def rewrite_4m(level: int, w: ALSubgroup) -> Optional[Tuple[int, ALSubgroup]]:
    """
    Identify X0(4M)/W with a quotient of X0(2M) when M is odd and w_4 is in W.

    Args:
        level: Level N = 4M
        w: Subgroup of B(N)

    Returns:
        (2M, image generated by the odd parts of the elements of W), or None
        when the rewrite does not apply; the image has half the order of W
    """
    if level % 4 or (level // 4) % 2 == 0 or w.level != level or 4 not in w:
        return None
    odd_parts = sorted({d // 4 if d % 4 == 0 else d for d in w.elements})
    return level // 2, generate(level // 2, odd_parts)


def epsilon(m: int) -> int:
    """0 if m = 1 mod 3, or 9 || m and m/9 = 1 mod 3; 1 otherwise."""
    if m < 1:
        raise GroupError(f"epsilon needs a positive integer, got {m}")
    core = m
    if m % 9 == 0 and (m // 9) % 3:
        core = m // 9
    return 0 if core % 3 == 1 else 1


def _twist_by_9(level: int, d: int) -> int:
    if epsilon(d) == 0:
        return d
    return compose(ALElement(level, 9), ALElement(level, d)).d


def rewrite_9(level: int, w: ALSubgroup) -> Optional[ALSubgroup]:
    """
    Twist every element w_d of W by w_9^epsilon(d) when 9 || N.

    The twist is a character of B(N), so the image of W is again a subgroup
    of the same order and the rewrite is an involution. The identification
    holds over Q(sqrt(-3)) only.

    Returns:
        Image subgroup, or None when 9 does not exactly divide N or w_9 is in W
    """
    if level % 9 or (level // 9) % 3 == 0 or w.level != level or 9 in w:
        return None
    return ALSubgroup(level, frozenset(_twist_by_9(level, d) for d in w.elements))


def index2_supergroups(w: ALSubgroup) -> List[ALSubgroup]:
    """
    All W' containing W with [W' : W] = 2.

    Raises:
        GroupError: when W is already all of B(N)
    """
    if w.is_full:
        raise GroupError(f"{w.label} is the full group B({w.level})")
    seen = {}
    for d in hall_divisors(w.level):
        if d in w:
            continue
        sup = generate(w.level, w.generators + [d])
        seen.setdefault(sup.elements, sup)
    return sorted(seen.values(), key=ALSubgroup.sort_key)

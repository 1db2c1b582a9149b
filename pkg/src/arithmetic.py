"""
Arithmetic Module

This module provides the exact integer and polynomial arithmetic the rest of
the package is built on: factorizations of levels, Hall divisors, the genus
of X0(N), Newton power sums and the lift of Hecke polynomials to Frobenius
characteristic polynomials.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, List, Tuple, Union

import sympy
from sympy import divisor_count, divisors, factorint, isprime, jacobi_symbol, totient

from .exceptions import ArithmeticInputError


@lru_cache(maxsize=None)
def _factor(n: int) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted((int(p), int(e)) for p, e in factorint(n).items()))


def _as_int(n: Union[int, "Level"]) -> int:
    value = n.N if isinstance(n, Level) else n
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ArithmeticInputError(f"level must be a positive integer, got {n!r}")
    return value


@dataclass(frozen=True)
class Level:
    """A modular level N with its cached prime factorization."""

    N: int

    def __post_init__(self):
        _as_int(self.N)

    @property
    def factorization(self) -> Dict[int, int]:
        return dict(_factor(self.N))

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in _factor(self.N)]

    @property
    def prime_powers(self) -> List[int]:
        """Prime powers exactly dividing N, in increasing order of the prime."""
        return [p ** e for p, e in _factor(self.N)]

    @property
    def omega(self) -> int:
        return len(_factor(self.N))

    def __int__(self) -> int:
        return self.N


def omega(n: Union[int, Level]) -> int:
    """Number of distinct primes dividing n; omega(1) = 0."""
    return len(_factor(_as_int(n)))


def valuation(n: int, p: int) -> int:
    """Exponent of the prime p in n."""
    return dict(_factor(_as_int(n))).get(p, 0)


def sigma0(n: int) -> int:
    """Number of positive divisors of n."""
    return int(divisor_count(_as_int(n)))


def is_hall_divisor(d: int, n: int) -> bool:
    """True when d | n and gcd(d, n/d) = 1."""
    if not isinstance(d, int) or d < 1 or n % d:
        return False
    return gcd(d, n // d) == 1


@lru_cache(maxsize=None)
def _hall_divisors(n: int) -> Tuple[int, ...]:
    result = [1]
    for p, e in _factor(n):
        q = p ** e
        result += [d * q for d in result]
    return tuple(sorted(result))


def hall_divisors(n: Union[int, Level]) -> List[int]:
    """
    All Hall divisors of n in ascending order.

    Args:
        n: Level (positive integer or Level)

    Returns:
        Sorted list of d | n with gcd(d, n/d) = 1; it has 2^omega(n) entries
    """
    return list(_hall_divisors(_as_int(n)))


def kronecker(a: int, p: int) -> int:
    """Kronecker symbol (a|p) for a prime p."""
    if p == 2:
        if a % 2 == 0:
            return 0
        return 1 if a % 8 in (1, 7) else -1
    return int(jacobi_symbol(a % p, p))


@lru_cache(maxsize=None)
def _genus_x0(n: int) -> int:
    primes = [p for p, _ in _factor(n)]
    mu = Fraction(n)
    for p in primes:
        mu *= Fraction(p + 1, p)

    nu2 = 0
    if n % 4:
        nu2 = 1
        for p in primes:
            nu2 *= 1 + kronecker(-4, p)

    nu3 = 0
    if n % 9:
        nu3 = 1
        for p in primes:
            nu3 *= 1 + kronecker(-3, p)

    nu_inf = sum(int(totient(gcd(d, n // d))) for d in divisors(n))

    genus = 1 + mu / 12 - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(nu_inf, 2)
    if genus.denominator != 1 or genus < 0:
        raise ArithmeticInputError(f"genus formula produced {genus} at level {n}")
    return int(genus)


def genus_x0(n: Union[int, Level]) -> int:
    """
    Genus of the modular curve X0(N).

    Uses g = 1 + mu/12 - nu2/4 - nu3/3 - nu_inf/2 in exact arithmetic, with
    the elliptic point counts taken from the Kronecker symbols (-4|p) and
    (-3|p).

    Args:
        n: Level N

    Returns:
        Non-negative integer genus
    """
    return _genus_x0(_as_int(n))


@dataclass(frozen=True)
class IntegerPolynomial:
    """Polynomial with exact integer coefficients in ascending degree order."""

    coefficients: Tuple[int, ...]

    def __post_init__(self):
        coeffs = list(self.coefficients)
        for c in coeffs:
            if isinstance(c, bool) or not isinstance(c, int):
                raise ArithmeticInputError(f"non-integer coefficient {c!r}")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_list(cls, coefficients: Iterable[int]) -> "IntegerPolynomial":
        return cls(tuple(coefficients))

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "IntegerPolynomial":
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    @property
    def is_monic(self) -> bool:
        return bool(self.coefficients) and self.coefficients[-1] == 1

    def coefficient(self, i: int) -> int:
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return 0

    def to_list(self) -> List[int]:
        return list(self.coefficients)

    def __call__(self, x):
        value = 0
        for c in reversed(self.coefficients):
            value = value * x + c
        return value

    def __str__(self) -> str:
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coefficients[i]
            if c == 0:
                continue
            monomial = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if monomial and abs(c) == 1:
                terms.append(("-" if c < 0 else "+") + monomial)
            else:
                terms.append(f"{c:+d}{monomial}")
        if not terms:
            return "0"
        return " ".join(terms).lstrip("+")


def newton_power_sums(poly: IntegerPolynomial, k: int) -> int:
    """
    k-th power sum of the roots of a monic integer polynomial.

    Args:
        poly: Monic polynomial of degree >= 1
        k: Positive exponent

    Returns:
        Sum of alpha^k over the complex roots alpha, computed exactly
    """
    if poly.degree < 1 or not poly.is_monic:
        raise ArithmeticInputError(f"power sums need a monic polynomial of degree >= 1, got {poly}")
    if k < 1:
        raise ArithmeticInputError(f"power sum index must be positive, got {k}")

    n = poly.degree
    sums = [n]
    for m in range(1, k + 1):
        total = m * poly.coefficient(n - m)
        for i in range(1, m):
            total += poly.coefficient(n - i) * sums[m - i]
        sums.append(-total)
    return sums[k]


@lru_cache(maxsize=4096)
def frobenius_charpoly(h: IntegerPolynomial, p: int) -> IntegerPolynomial:
    """
    Lift a Hecke polynomial to the Frobenius characteristic polynomial.

    Computes x^n * h((x^2 + p)/x), which equals the product of
    x^2 - a*x + p over the roots a of h.

    Args:
        h: Monic characteristic polynomial of T_p on a newform orbit
        p: Prime

    Returns:
        Monic integer polynomial of degree 2n
    """
    if h.degree < 1 or not h.is_monic:
        raise ArithmeticInputError(f"Hecke polynomial must be monic of degree >= 1, got {h}")
    if not isprime(p):
        raise ArithmeticInputError(f"{p} is not prime")
    x = sympy.Symbol("x")
    n = h.degree
    expr = sum(c * (x ** 2 + p) ** i * x ** (n - i) for i, c in enumerate(h.coefficients))
    return IntegerPolynomial.from_sympy(sympy.Poly(sympy.expand(expr), x))


def prime_power(q: int) -> Tuple[int, int]:
    """Split a prime power q = p^k into (p, k)."""
    fac = _factor(_as_int(q))
    if len(fac) != 1:
        raise ArithmeticInputError(f"{q} is not a prime power")
    return fac[0]


"""Arithmetic in the localization Z_(p) and a few modular helpers.

Everything here is exact: scalars are reduced fractions whose denominators
are prime to ``p``.  The prime is always passed explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

INFINITY = math.inf

Rational = Union[int, Fraction]


def is_prime(p: int) -> bool:
    if not isinstance(p, int) or p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


def require_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"{p!r} is not a prime")
    return p


def require_odd_prime(p: int) -> int:
    """Validate the ambient prime of a computation.

    The computation is only meaningful for p > 2; p = 2 is refused here so
    that no downstream routine ever has to think about it.
    """
    require_prime(p)
    if p == 2:
        raise ValueError("p = 2 is not supported: the computation assumes p > 2 is an odd prime")
    return p


@dataclass(frozen=True)
class PLocalScalar:
    """A reduced fraction ``numerator / denominator`` with ``p`` not dividing the denominator."""

    numerator: int
    denominator: int
    p: int

    def __post_init__(self):
        require_prime(self.p)
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(self.numerator, self.denominator)
        if g != 1:
            # normalise in place; the dataclass is frozen
            object.__setattr__(self, "numerator", self.numerator // g)
            object.__setattr__(self, "denominator", self.denominator // g)
        if self.numerator == 0:
            object.__setattr__(self, "denominator", 1)
        if self.denominator % self.p == 0:
            raise ValueError(f"{self.numerator}/{self.denominator} is not {self.p}-local")

    @classmethod
    def of(cls, x: Rational | PLocalScalar, p: int) -> PLocalScalar:
        if isinstance(x, PLocalScalar):
            if x.p != p:
                raise ValueError(f"scalar lives over p={x.p}, not p={p}")
            return x
        x = Fraction(x)
        return cls(x.numerator, x.denominator, p)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def _coerce(self, other) -> PLocalScalar:
        return PLocalScalar.of(other, self.p)

    def __add__(self, other):
        return PLocalScalar.of(self.to_fraction() + self._coerce(other).to_fraction(), self.p)

    __radd__ = __add__

    def __neg__(self):
        return PLocalScalar(-self.numerator, self.denominator, self.p)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return PLocalScalar.of(self.to_fraction() * self._coerce(other).to_fraction(), self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if not is_unit(other, self.p):
            raise ZeroDivisionError(f"{other} is not a unit of Z_({self.p})")
        return PLocalScalar.of(self.to_fraction() / other.to_fraction(), self.p)

    def __eq__(self, other):
        if isinstance(other, PLocalScalar):
            return self.p == other.p and self.to_fraction() == other.to_fraction()
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.numerator, self.denominator, self.p))

    def residue(self, modulus: int | None = None) -> int:
        """The integer in ``[0, modulus)`` congruent to this scalar (default modulus p)."""
        modulus = self.p if modulus is None else modulus
        return self.numerator * pow(self.denominator, -1, modulus) % modulus

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


def vp(x: Rational | PLocalScalar, p: int) -> float | int:
    """Exponent of ``p`` in ``x``; ``math.inf`` for zero.

    >>> vp(Fraction(12, 5), 3)
    1
    """
    require_prime(p)
    if isinstance(x, PLocalScalar):
        if x.p != p:
            raise ValueError(f"scalar lives over p={x.p}, not p={p}")
        num, den = x.numerator, x.denominator
    else:
        x = Fraction(x)
        num, den = x.numerator, x.denominator
        if den % p == 0:
            raise ValueError(f"{x} is not {p}-local")
    if num == 0:
        return INFINITY
    k = 0
    while num % p == 0:
        num //= p
        k += 1
    return k


def is_unit(x: Rational | PLocalScalar, p: int) -> bool:
    return vp(x, p) == 0


def residue_mod(x: Rational, modulus: int) -> int:
    """Reduce a rational with denominator prime to ``modulus``."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def base_p_digits(n: int, p: int) -> list[int]:
    digits = []
    while n:
        n, d = divmod(n, p)
        digits.append(d)
    return digits


def binom_mod_p(n: int, k: int, p: int) -> int:
    """C(n, k) mod p by Lucas' theorem."""
    if n < 0 or k < 0:
        raise ValueError("binom_mod_p needs nonnegative arguments")
    if k > n:
        return 0
    result = 1
    while n or k:
        n, ni = divmod(n, p)
        k, ki = divmod(k, p)
        if ki > ni:
            return 0
        result = result * math.comb(ni, ki) % p
    return result


def split_prime_power(n: int, p: int) -> tuple[int, int]:
    """Write ``n = p**r * m`` with ``p`` not dividing ``m``; returns ``(r, m)``."""
    if n <= 0:
        raise ValueError("n must be positive")
    r = 0
    while n % p == 0:
        n //= p
        r += 1
    return r, n

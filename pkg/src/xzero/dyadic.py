"""Directed rounding helpers: square roots of rationals enclosed by dyadic rationals."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

DEFAULT_BITS = 64


def floor_scaled(q: Fraction, bits: int) -> int:
    """floor(q * 2^bits)."""
    q = Fraction(q)
    return (q.numerator << bits) // q.denominator


def ceil_scaled(q: Fraction, bits: int) -> int:
    q = Fraction(q)
    return -((-q.numerator << bits) // q.denominator)


def isqrt_ceil(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def sqrt_lo(q, bits: int = DEFAULT_BITS) -> Fraction:
    """Dyadic lower bound of sqrt(q)."""
    q = Fraction(q)
    if q <= 0:
        return Fraction(0)
    return Fraction(isqrt(floor_scaled(q, 2 * bits)), 1 << bits)


def sqrt_hi(q, bits: int = DEFAULT_BITS) -> Fraction:
    """Dyadic upper bound of sqrt(q)."""
    q = Fraction(q)
    if q <= 0:
        return Fraction(0)
    return Fraction(isqrt_ceil(ceil_scaled(q, 2 * bits)), 1 << bits)


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi

    def scale(self, a) -> "Enclosure":
        a = Fraction(a)
        if a >= 0:
            return Enclosure(self.lo * a, self.hi * a)
        return Enclosure(self.hi * a, self.lo * a)

    def to_json(self) -> dict:
        return {"lo": frac_str(self.lo), "hi": frac_str(self.hi),
                "lo_float": float(self.lo), "hi_float": float(self.hi)}


def frac_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        raise TypeError("floats are not accepted as exact rationals; use 'p/q' strings")
    return Fraction(str(s).strip())

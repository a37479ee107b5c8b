"""Parameter sequences (m_j), (n_j), (s_j) and the index classes for odd/even blocks.

Two modes exist. In paper mode every quantity is a power of two and is kept as a
base-2 exponent, so nothing astronomically large is ever materialized unless a
caller explicitly asks for it. Surrogate mode holds small explicit integer
sequences for desk-scale experiments.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .dyadic import sqrt_hi


class ParameterError(ValueError):
    """Raised when a parameter system violates one of its invariants."""


# Paper-mode exponent recursion --------------------------------------------------

@lru_cache(maxsize=None)
def _paper_m_log2(j: int) -> int:
    return 8 * 5 ** (j - 1)


@lru_cache(maxsize=None)
def _paper_n_log2(j: int) -> int:
    if j == 1:
        return 7
    # n_j = (2 n_{j-1})^{s_j}, so log2 n_j = s_j * (1 + log2 n_{j-1})
    return _paper_s(j) * (1 + _paper_n_log2(j - 1))


@lru_cache(maxsize=None)
def _paper_s(j: int) -> int:
    # s_j = log2(m_j^4)
    return 4 * _paper_m_log2(j)


@dataclass(frozen=True)
class PaperValues:
    j: int
    m_log2: int
    n_log2: int
    s: int | None

    def to_dict(self) -> dict:
        return {"j": self.j, "m_log2": self.m_log2, "n_log2": self.n_log2, "s": self.s}


def paper_parameters(j: int) -> PaperValues:
    """Exact exponents of m_j, n_j (and s_j for j >= 2) for the full-scale recursion."""
    if not isinstance(j, int) or j < 1:
        raise ParameterError(f"domain error: j must be a positive integer, got {j!r}")
    return PaperValues(j, _paper_m_log2(j), _paper_n_log2(j), _paper_s(j) if j >= 2 else None)


def paper_parameters_bigint(j: int) -> tuple[int, int]:
    """Independent path: materialize m_j and n_j as Python integers (small j only).

    Uses integer arithmetic with no exponent bookkeeping: m_{j+1} = m_j ** 5 and
    n_{j+1} = (2 n_j) ** s_{j+1} with s read off as a bit length.
    """
    if j < 1:
        raise ParameterError(f"domain error: j must be a positive integer, got {j!r}")
    if j > 3:
        raise ParameterError("bigint path is only practical for j <= 3")
    m, n = 2 ** 8, 2 ** 7
    for _ in range(1, j):
        m = m ** 5
        s = (m ** 4).bit_length() - 1
        n = (2 * n) ** s
    return m, n


# Index classes -----------------------------------------------------------------

@dataclass(frozen=True)
class ResidueClass:
    """Infinite set {j >= 1 : j = residue mod modulus}."""
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ParameterError("residue class modulus must be >= 1")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def __contains__(self, j: int) -> bool:
        return j >= 1 and j % self.modulus == self.residue

    def iter_from(self, start: int = 1) -> Iterator[int]:
        j = max(start, 1)
        j += (self.residue - j) % self.modulus
        if j == 0:
            j = self.modulus
        while True:
            yield j
            j += self.modulus

    def disjoint(self, other: "ResidueClass") -> bool:
        g = math.gcd(self.modulus, other.modulus)
        return (self.residue - other.residue) % g != 0

    def to_json(self) -> list[int]:
        return [self.modulus, self.residue]

    @classmethod
    def parse(cls, spec) -> "ResidueClass":
        if isinstance(spec, ResidueClass):
            return spec
        if isinstance(spec, str):
            key = spec.strip().lower()
            if key in ("odd", "odds"):
                return cls(2, 1)
            if key in ("even", "evens"):
                return cls(2, 0)
            a, _, b = key.partition("mod")
            return cls(int(b), int(a))
        mod, res = spec
        return cls(int(mod), int(res))


ODD = ResidueClass(2, 1)
EVEN = ResidueClass(2, 0)


# Parameter system --------------------------------------------------------------

@dataclass(frozen=True)
class ParameterSystem:
    mode: str
    m_head: tuple[int, ...] = ()
    n_head: tuple[int, ...] = ()
    omega1: ResidueClass = ODD
    omega2: ResidueClass = EVEN
    weight_tail_cutoff: int = 24
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    # sequence access

    def _extend(self, head: tuple[int, ...], j: int) -> int:
        # geometric continuation past the explicit head
        L = len(head)
        if j <= L:
            return head[j - 1]
        q = max(2, head[-1] // head[-2]) if L >= 2 else 2
        return head[-1] * q ** (j - L)

    def m(self, j: int) -> int:
        if j < 1:
            raise ParameterError(f"m_j undefined for j={j}")
        if self.mode == "paper":
            e = _paper_m_log2(j)
            if e > 1 << 22:
                raise ParameterError(f"m_{j} = 2^{e} is too large to materialize")
            return 1 << e
        return self._extend(self.m_head, j)

    def m_log2(self, j: int) -> float:
        if self.mode == "paper":
            return float(_paper_m_log2(j))
        return math.log2(self.m(j))

    def n(self, j: int) -> int:
        if j < 1:
            raise ParameterError(f"n_j undefined for j={j}")
        if self.mode == "paper":
            e = _paper_n_log2(j)
            if e > 1 << 22:
                raise ParameterError(f"n_{j} = 2^{e} is too large to materialize")
            return 1 << e
        return self._extend(self.n_head, j)

    def n_capped(self, j: int, cap: int) -> int:
        """min(n_j, cap) without materializing huge n_j."""
        if self.mode == "paper":
            e = _paper_n_log2(j)
            if e >= cap.bit_length():
                return cap
            return min(1 << e, cap)
        return min(self.n(j), cap)

    def s(self, j: int) -> int:
        if j < 2:
            raise ParameterError("s_j is defined for j >= 2")
        if self.mode == "paper":
            return _paper_s(j)
        return max(1, round(4 * math.log2(self.m(j))))

    # tails

    def inverse_square_tail(self, J: int) -> Fraction:
        """Exact sum_{j > J} 1/m_{2j}^2 (surrogate mode only)."""
        if self.mode == "paper":
            raise ParameterError("exact tail not available in paper mode; use weight_tail_bound")
        key = ("T", J)
        if key in self._cache:
            return self._cache[key]
        L = len(self.m_head)
        # terms with 2j inside the explicit head, then a geometric series
        total = Fraction(0)
        j = J + 1
        while 2 * j <= L:
            total += Fraction(1, self.m(2 * j) ** 2)
            j += 1
        # for 2j > L: m_{2j} = m_L q^{2j-L}; ratio between consecutive terms q^-4
        q = max(2, self.m_head[-1] // self.m_head[-2]) if L >= 2 else 2
        first = Fraction(1, self.m(2 * j) ** 2)
        total += first / (1 - Fraction(1, q ** 4))
        self._cache[key] = total
        return total

    def omega_contains(self, which: int, j: int) -> bool:
        return j in (self.omega1 if which == 1 else self.omega2)

    def describe(self) -> str:
        if self.mode == "paper":
            return "paper"
        return self.name or f"surrogate(m={list(self.m_head)}, n={list(self.n_head)})"

    # serialization

    def to_json(self) -> dict:
        if self.mode == "paper":
            k = max(4, len(self.m_head))
            m = [{"log2": _paper_m_log2(j)} for j in range(1, k + 1)]
            n = [{"log2": _paper_n_log2(j)} for j in range(1, k + 1)]
        else:
            m, n = list(self.m_head), list(self.n_head)
        return {
            "mode": self.mode,
            "m": m,
            "n": n,
            "omega1": self.omega1.to_json(),
            "omega2": self.omega2.to_json(),
            "weight_tail_cutoff": self.weight_tail_cutoff,
        }

    def digest(self) -> str:
        import hashlib
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_json(cls, doc: dict) -> "ParameterSystem":
        if doc.get("mode") == "paper":
            return paper_system()
        if doc.get("mode") != "surrogate":
            raise ParameterError(f"unknown mode {doc.get('mode')!r}")
        return make_surrogate(doc["m"], doc["n"], doc.get("omega1", "odd"), doc.get("omega2", "even"),
                              weight_tail_cutoff=doc.get("weight_tail_cutoff", 24))


def paper_system() -> ParameterSystem:
    return ParameterSystem(mode="paper", name="paper")


def make_surrogate(m_list: Sequence[int], n_list: Sequence[int], omega1_spec="odd", omega2_spec="even",
                   weight_tail_cutoff: int = 24, name: str = "") -> ParameterSystem:
    """Validated surrogate system; sequences continue geometrically past the lists."""
    m_head, n_head = tuple(int(v) for v in m_list), tuple(int(v) for v in n_list)
    if len(m_head) < 2 or len(n_head) < 2:
        raise ParameterError("need at least two explicit values of m and of n")
    if m_head[0] < 2:
        raise ParameterError(f"invariant m_1 >= 2 fails (m_1={m_head[0]})")
    if n_head[0] < 2:
        raise ParameterError(f"invariant n_1 >= 2 fails (n_1={n_head[0]})")
    for name_, seq in (("m", m_head), ("n", n_head)):
        for a, b in zip(seq, seq[1:]):
            if b <= a:
                raise ParameterError(f"invariant {name_} strictly increasing fails ({a} then {b})")
    o1, o2 = ResidueClass.parse(omega1_spec), ResidueClass.parse(omega2_spec)
    if not o1.disjoint(o2):
        raise ParameterError("invariant omega1 and omega2 disjoint fails")
    if weight_tail_cutoff < 1:
        raise ParameterError("weight_tail_cutoff must be >= 1")
    p = ParameterSystem("surrogate", m_head, n_head, o1, o2, weight_tail_cutoff, name)
    if p.inverse_square_tail(0) >= 1:
        raise ParameterError("invariant sum 1/m_{2j}^2 < 1 fails")
    return p


TINY = make_surrogate((2, 4, 8, 16), (2, 4, 8, 16), "odd", "even", name="TINY")

# Wide surrogate: n grows much faster than m, so long flat averages keep a
# weight-m_2 lower bound of 1/m_2. Used for the averaging-bound experiments.
WIDE = make_surrogate((2, 4, 8, 16), (2 ** 8, 2 ** 16, 2 ** 24, 2 ** 32), "odd", "even", name="WIDE")

NAMED = {"tiny": TINY, "wide": WIDE, "paper": paper_system()}


def load_parameters(ref: str | None) -> ParameterSystem:
    if ref is None:
        return TINY
    if ref.lower() in NAMED:
        return NAMED[ref.lower()]
    with open(ref) as fh:
        return ParameterSystem.from_json(json.load(fh))


def weight_tail_bound(p: ParameterSystem, x_l1, J: int) -> Fraction:
    """Upper bound for (sum_{j>J} (x_l1/m_{2j})^2)^{1/2}, rounded outward."""
    if J < 1:
        raise ParameterError("J must be >= 1")
    x_l1 = Fraction(x_l1)
    if x_l1 == 0:
        return Fraction(0)
    if p.mode == "paper":
        # sum_{j>J} m_{2j}^-2 <= 2 m_{2J+2}^-2 because the terms decay super-geometrically
        e = _paper_m_log2(2 * J + 2)
        tail = Fraction(2, 1 << (2 * e)) if e < 4096 else Fraction(1, 1 << 8191)
    else:
        tail = p.inverse_square_tail(J)
    v = x_l1 * x_l1 * tail
    # keep 64 significant bits however small the tail is
    bits = 64 + max(0, (v.denominator.bit_length() - v.numerator.bit_length()) // 2)
    return sqrt_hi(v, bits)

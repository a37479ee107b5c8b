"""Separation of block sequences by odd-weight functionals.

A functional phi = (1/m) * (f_1 + ... + f_q) with successive G0 components
separates a block sequence at level delta when three blocks d1 < d2 < d3 and
strictly ordered component intervals E1 < E2 < E3 exist with
sum_{p in E_i} f_p(x_{d_i}) > delta for each i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .core import Functional, Special, Vector, evaluate, restrict, successive, vsum
from .dyadic import frac_str, sqrt_hi
from .norm import best_special_value, norm_G0, quick_lower_bound
from .params import ParameterSystem


class SeparationError(ValueError):
    pass


@dataclass(frozen=True)
class Phi:
    """(1/m) * sum of successive components."""
    m: int
    components: tuple[Functional, ...]

    @classmethod
    def coerce(cls, phi) -> "Phi":
        if isinstance(phi, Phi):
            return phi
        if isinstance(phi, Special):
            comps = phi.components
            if phi.E is not None:
                comps = tuple(restrict(c, phi.E) for c in comps)
            if phi.sign == -1:
                comps = tuple(c.negate() for c in comps)
            return cls(phi.m, tuple(comps))
        raise TypeError(f"cannot read {type(phi).__name__} as an odd-weight functional")

    @property
    def q(self) -> int:
        return len(self.components)

    def __call__(self, x: Vector) -> Fraction:
        return sum((evaluate(f, x) for f in self.components), Fraction(0)) / self.m


def _overlap(r1, r2) -> bool:
    return r1 is not None and r2 is not None and r1[0] <= r2[1] and r2[0] <= r1[1]


def coverage_sets(phi, xs: Sequence[Vector]) -> list[tuple[int, ...]]:
    """For each block, the 1-based component indices whose range meets the block's range."""
    phi = Phi.coerce(phi)
    ranges = [f.range for f in phi.components]
    return [tuple(i + 1 for i, r in enumerate(ranges) if _overlap(r, x.range)) for x in xs]


def value_table(phi, xs: Sequence[Vector]) -> list[list[Fraction]]:
    """vals[d][p] = f_{p+1}(x_{d+1})."""
    phi = Phi.coerce(phi)
    return [[evaluate(f, x) for f in phi.components] for x in xs]


def _good_intervals(row: list[Fraction], delta: Fraction) -> list[tuple[int, int]]:
    """Component intervals (0-based, inclusive) whose sum exceeds delta, shortest-leftmost first."""
    q = len(row)
    pre = [Fraction(0)]
    for v in row:
        pre.append(pre[-1] + v)
    out = [(a, b) for a in range(q) for b in range(a, q) if pre[b + 1] - pre[a] > delta]
    out.sort(key=lambda t: (t[1], -t[0]))
    return out


@dataclass
class SeparationVerdict:
    separated: bool
    blocks: tuple[int, ...] = ()
    intervals: tuple[tuple[int, int], ...] = ()
    sums: tuple[Fraction, ...] = ()

    def __bool__(self):
        return self.separated

    def to_json(self):
        return {"separated": self.separated, "blocks": list(self.blocks),
                "intervals": [list(E) for E in self.intervals], "sums": [frac_str(s) for s in self.sums]}


def is_separated(xs: Sequence[Vector], phi, delta) -> SeparationVerdict:
    """Exact decision by a three-stage chain DP over blocks; indices in the witness are 1-based.

    Stage s keeps, per block, the earliest possible right end of the s-th
    interval; ties go to the leftmost shortest interval.
    """
    delta = Fraction(delta)
    vals = value_table(phi, xs)
    k = len(xs)
    good = [_good_intervals(row, delta) for row in vals]
    # stage[d] = (right end, block, interval, back) for the earliest finishing chain ending at block d
    stage: list = [None] * k
    for s in range(3):
        nxt: list = [None] * k
        run = None  # earliest finishing chain of the previous stage over blocks < d
        for d in range(k):
            if s == 0:
                limit, back = -1, None
            elif run is None:
                limit = None
            else:
                limit, back = run[0], run
            if limit is not None:
                for a, b in good[d]:
                    if a > limit:
                        nxt[d] = (b, d, (a, b), back)
                        break
            if s > 0 and stage[d] is not None and (run is None or stage[d][0] < run[0]):
                run = stage[d]
        stage = nxt
    end = next((c for c in stage if c is not None), None)
    if end is None:
        return SeparationVerdict(False)
    chain = []
    while end is not None:
        chain.append(end)
        end = end[3]
    chain.reverse()
    blocks = tuple(c[1] + 1 for c in chain)
    intervals = tuple((c[2][0] + 1, c[2][1] + 1) for c in chain)
    sums = tuple(sum(vals[c[1]][c[2][0]:c[2][1] + 1], Fraction(0)) for c in chain)
    return SeparationVerdict(True, blocks, intervals, sums)


def is_separated_bruteforce(xs: Sequence[Vector], phi, delta) -> bool:
    delta = Fraction(delta)
    vals = value_table(phi, xs)
    good = [_good_intervals(row, delta) for row in vals]
    for d1, d2, d3 in combinations(range(len(xs)), 3):
        for E1 in good[d1]:
            for E2 in good[d2]:
                if E2[0] <= E1[1]:
                    continue
                for E3 in good[d3]:
                    if E3[0] > E2[1]:
                        return True
    return False


# Decomposition of non-separated sequences ---------------------------------------

@dataclass
class Decomposition:
    d: tuple[int, ...]
    i: tuple[int | None, ...]
    I: tuple[tuple[int, ...], ...]
    lhs: Fraction
    rhs: Fraction
    literal_rhs: Fraction
    multi_covered: tuple[int, ...]

    @property
    def identity_holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def literal_identity_holds(self) -> bool:
        return self.lhs == self.literal_rhs

    def to_json(self):
        return {"d": list(self.d), "i": list(self.i), "I": [list(s) for s in self.I],
                "phi_sum": frac_str(self.lhs), "reconstruction": frac_str(self.rhs),
                "identity_holds": self.identity_holds,
                "literal_form": {"value": frac_str(self.literal_rhs), "holds": self.literal_identity_holds,
                                 "asserted": False},
                "multi_covered_blocks": list(self.multi_covered)}


def decompose(xs: Sequence[Vector], phi, delta) -> Decomposition:
    """At most four pivot blocks (first and last included) such that every block
    strictly between consecutive pivots is seen by one fixed component.

    Asserted identity (exact):
        phi(sum x) = (1/m) sum_s f_{i_s}(sum_{n in I_s} x_n) + sum_{distinct pivots d} phi(x_d).
    The variant with f_{i_s} applied to the whole sum is reported, not asserted:
    it double counts whenever f_{i_s} also meets a pivot block.
    """
    phi = Phi.coerce(phi)
    delta = Fraction(delta)
    k = len(xs)
    if k == 0:
        raise SeparationError("empty block sequence")
    if not successive(x.range for x in xs):
        raise SeparationError("blocks are not successive")
    if delta <= 0:
        raise SeparationError("delta must be positive")
    vals = value_table(phi, xs)
    for n, row in enumerate(vals, 1):
        if not sum(row, Fraction(0)) > delta:
            raise SeparationError(f"hypothesis (2) fails: (sum f_i)(x_{n}) <= delta")
    if is_separated(xs, phi, delta):
        raise SeparationError("hypothesis (1) fails: the sequence is separated")
    cov = coverage_sets(phi, xs)
    multi = tuple(n + 1 for n in range(k) if len(cov[n]) >= 2)
    if len(multi) > 4:
        raise AssertionError(f"{len(multi)} blocks meet two or more components")
    found = None
    for d2 in range(1, k + 1):
        for d3 in range(d2, k + 1):
            pivots = sorted({1, d2, d3, k})
            gaps, comps, ok = [], [], True
            for a, b in zip(pivots, pivots[1:]):
                gap = tuple(range(a + 1, b))
                ids = {cov[n - 1][0] for n in gap if len(cov[n - 1]) == 1}
                if any(len(cov[n - 1]) != 1 for n in gap) or len(ids) > 1:
                    ok = False
                    break
                gaps.append(gap)
                comps.append(ids.pop() if ids else None)
            nonempty = [c for c in comps if c is not None]
            if ok and all(a < b for a, b in zip(nonempty, nonempty[1:])):
                found = (tuple(pivots), tuple(comps), tuple(gaps))
                break
        if found:
            break
    if found is None:
        raise SeparationError("no decomposition with at most four pivots exists for this instance")
    pivots, comps, gaps = found
    lhs = phi(vsum(xs))
    rhs = sum((phi(xs[d - 1]) for d in pivots), Fraction(0))
    literal = rhs
    total = vsum(xs)
    for i_s, gap in zip(comps, gaps):
        if i_s is None:
            continue
        f = phi.components[i_s - 1]
        rhs += evaluate(f, vsum(xs[n - 1] for n in gap)) / phi.m
        literal += evaluate(f, total) / phi.m
    dec = Decomposition(pivots, comps, gaps, lhs, rhs, literal, multi)
    for i_s, gap in zip(comps, gaps):
        for n in gap:
            if phi(xs[n - 1]) != evaluate(phi.components[i_s - 1], xs[n - 1]) / phi.m:
                raise AssertionError(f"block {n} is not seen by component {i_s} alone")
    if not dec.identity_holds:
        raise AssertionError("reconstruction identity fails")
    return dec


# Averaging bound ---------------------------------------------------------------

@dataclass
class AverageBoundReport:
    evaluated: bool
    preconditions: dict
    phi_avg: Fraction | None = None
    norm_lo: Fraction | None = None
    bound_lo: Fraction | None = None
    holds: bool | None = None

    def to_json(self):
        out = {"evaluated": self.evaluated,
               "preconditions": {k: v for k, v in self.preconditions.items()}}
        if self.evaluated:
            out.update(phi_avg=frac_str(self.phi_avg), norm_lo=frac_str(self.norm_lo),
                       bound_lo=frac_str(self.bound_lo), holds=self.holds)
        return out


def _norm_lower(x: Vector, p: ParameterSystem, exact_limit: int = 48) -> Fraction:
    if len(x) <= exact_limit:
        return norm_G0(x, p).lo
    return quick_lower_bound(x, p)[0]


def check_average_bound(xs: Sequence[Vector], phi, delta, p: ParameterSystem, reg=None,
                        m_override: int | None = None) -> AverageBoundReport:
    """phi(avg) <= (4/m + 1/(2 sqrt k)) ||avg||_G0 under the stated preconditions.

    The right side is rounded down (sqrt k up, norm replaced by a certified
    lower bound), so a pass is a proof of the instance.
    """
    phi = Phi.coerce(phi)
    delta = Fraction(delta)
    k = len(xs)
    pre = {}
    pre["sqrt_k_gt_4_over_delta"] = k * delta * delta > 16
    # ||x||_W0 <= ||x||_l1 since every norming functional has sup-norm <= 1
    pre["blocks_W0_at_most_1"] = all(x.l1 <= 1 for x in xs)
    avg = vsum(xs).scale(Fraction(1, k)) if k else Vector()
    if not all(pre.values()):
        return AverageBoundReport(False, pre)
    nlo = _norm_lower(avg, p)
    pre["two_delta_lt_avg_norm"] = 2 * delta < nlo
    pre["not_separated"] = not is_separated(xs, phi, delta)
    if not all(pre.values()):
        return AverageBoundReport(False, pre)
    m = m_override or phi.m
    val = phi(avg)
    bound = (Fraction(4, m) + 1 / (2 * sqrt_hi(k))) * nlo
    return AverageBoundReport(True, pre, val, nlo, bound, val <= bound)


# Equal-norm average search -----------------------------------------------------

@dataclass
class EqualNormResult:
    found: bool
    subset: tuple[int, ...]
    g0_lo: Fraction
    g0_hi: Fraction
    special_value: Fraction
    tried: int
    diagnostics: list = field(default_factory=list)

    def to_json(self):
        return {"found": self.found, "subset": list(self.subset), "g0_lo": frac_str(self.g0_lo),
                "g0_hi": frac_str(self.g0_hi), "special_value": frac_str(self.special_value),
                "tried": self.tried, "diagnostics": self.diagnostics}


def search_equal_norm_average(xs: Sequence[Vector], k: int, p: ParameterSystem, reg=None,
                              budget: int = 200) -> EqualNormResult:
    """First k-subset (lexicographic) whose average has W0 norm equal to its G0
    norm relative to the registry: no registered special functional beats the
    certified G0 upper bound."""
    if k < 1 or k > len(xs):
        raise SeparationError(f"cannot pick {k} of {len(xs)} blocks")
    best = None
    diags = []
    tried = 0
    for subset in combinations(range(len(xs)), k):
        if tried >= budget:
            break
        tried += 1
        avg = vsum(xs[i] for i in subset).scale(Fraction(1, k))
        cert = norm_G0(avg, p)
        sv, sf = best_special_value(avg, reg)
        gap = sv - cert.hi
        if gap <= 0:
            return EqualNormResult(True, tuple(i + 1 for i in subset), cert.lo, cert.hi, sv, tried, diags)
        # a beating special functional separates the blocks at any delta < ||avg||/2
        delta = cert.lo / 2
        sep = is_separated([xs[i] for i in subset], sf, delta)
        diags.append({"subset": [i + 1 for i in subset], "excess": frac_str(gap),
                      "seq_id": sf.seq_id, "separated_at_half_norm": sep.separated})
        if best is None or gap < best[0]:
            best = (gap, subset, cert, sv)
    gap, subset, cert, sv = best
    return EqualNormResult(False, tuple(i + 1 for i in subset), cert.lo, cert.hi, sv, tried, diags)

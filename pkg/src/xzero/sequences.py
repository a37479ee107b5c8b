"""Derived objects built from block sequences: l1 averages, rapidly increasing
sequences, exact pairs, dependent sequences, c0 witnesses and norm-gap witnesses.

At desk scale a pair x = (m/d) sum y_r cannot average over n_{2j} blocks, so
each pair uses a small number d of averages and the constant C of the exact
pair clauses is measured (certified) instead of fixed. The nominal constant 15
is reported next to it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .coding import SigmaRegistry, SpecialSequence, first_weight_index, validate_special_sequence
from .core import (ZERO, EllTwo, Functional, Leaf, Verdict, Vector, Weighted, evaluate, successive,
                   to_json, vsum)
from .dyadic import Enclosure, frac_str
from .norm import (NormCertificate, best_special_value, norm_G0, norm_W0, weight_profile)
from .params import ParameterSystem

NOMINAL_C = 15


class ConstructionError(RuntimeError):
    pass


# Sources -----------------------------------------------------------------------

class BlockSource:
    """Deterministic stream of successive normalized blocks.

    kind 'basis': e_n; kind 'signed': +-e_n with seeded signs; kind 'pairs':
    e_n + e_{n+1}. All have G0 and W0 norm exactly 1.
    """

    def __init__(self, kind: str = "basis", seed: int = 0, start: int = 1):
        if kind not in ("basis", "signed", "pairs"):
            raise ValueError(f"unknown source kind {kind!r}")
        self.kind, self.seed, self.pos = kind, seed, start
        self.rng = random.Random(seed)
        self.level_hint: dict[int, int] = {}

    def skip_to(self, n: int) -> None:
        self.pos = max(self.pos, n)

    def next(self) -> Vector:
        n = self.pos
        if self.kind == "pairs":
            self.pos += 2
            return Vector.sum_basis([n, n + 1])
        self.pos += 1
        s = self.rng.choice((1, -1)) if self.kind == "signed" else 1
        return Vector.basis(n, s)

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}


# l1 averages -------------------------------------------------------------------

@dataclass
class L1Average:
    y: Vector
    parts: tuple[Vector, ...]
    k: int
    level: int
    cert: NormCertificate
    special_value: Fraction

    @property
    def w0_equals_g0(self) -> bool:
        return self.special_value <= self.cert.hi

    def to_json(self):
        return {"y": self.y.to_json(), "k": self.k, "level": self.level, "G0": self.cert.to_json(witness=False),
                "special_value": frac_str(self.special_value), "w0_equals_g0": self.w0_equals_g0}


def _next_level(source: BlockSource, level: int, k: int, p: ParameterSystem) -> Vector:
    if level == 0:
        return source.next()
    s = vsum(_next_level(source, level - 1, k, p) for _ in range(k))
    hi = norm_G0(s, p).hi
    return s if hi <= 1 else s.scale(1 / hi)


def build_l1_average(source: BlockSource, k: int, p: ParameterSystem, reg=None, max_level: int = 4) -> L1Average:
    """y = (1/k)(y_1 + ... + y_k) with ||y_i|| <= 1 and ||y||_G0 = ||y||_W0 > 1/2.

    If the plain average of source blocks is too small, the blocks are first
    replaced by normalized sums of k blocks, repeatedly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    start = source.level_hint.get(k, 0)
    best = None
    for level in range(start, max_level + 1):
        parts = tuple(_next_level(source, level, k, p) for _ in range(k))
        y = vsum(parts).scale(Fraction(1, k))
        cert = norm_G0(y, p)
        sv, _ = best_special_value(y, reg)
        if cert.lo > Fraction(1, 2) and sv <= cert.hi:
            source.level_hint[k] = level
            return L1Average(y, parts, k, level, cert, sv)
        if best is None or cert.lo > best[0]:
            best = (cert.lo, level)
    raise ConstructionError(f"no l1 average above 1/2 up to level {max_level}; best lower bound "
                            f"{float(best[0]):.4f} at level {best[1]}")


def is_l1_average(y: Vector, M, k: int, parts: Sequence[Vector], p: ParameterSystem, reg=None) -> Verdict:
    M = Fraction(M)
    if len(parts) != k:
        return Verdict(False, f"expected {k} constituents, got {len(parts)}")
    if not successive(x.range for x in parts):
        return Verdict(False, "constituents are not successive blocks")
    if vsum(parts).scale(Fraction(1, k)) != y:
        return Verdict(False, "y is not the average of its constituents")
    for i, x in enumerate(parts, 1):
        c = norm_G0(x, p)
        sv, _ = best_special_value(x, reg)
        if max(c.hi, sv) > M:
            return Verdict(False, f"constituent {i} has W0 norm above {M}")
    c = norm_G0(y, p)
    if not c.lo > Fraction(1, 2):
        return Verdict(False, f"||y||_G0 lower bound {c.lo} is not above 1/2")
    sv, _ = best_special_value(y, reg)
    if sv > c.hi:
        return Verdict(False, "a registered special functional exceeds the G0 norm")
    return Verdict(True)


# RIS ---------------------------------------------------------------------------

@dataclass
class RISCertificate:
    C: Fraction
    eps: Fraction
    js: tuple[int, ...]
    cond1: list
    cond2: list
    cond3: list

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.cond1 + self.cond2 + self.cond3)

    def failures(self) -> list:
        return [c for c in self.cond1 + self.cond2 + self.cond3 if not c["ok"]]

    def to_json(self):
        return {"C": frac_str(self.C), "eps": frac_str(self.eps), "js": list(self.js), "ok": self.ok,
                "condition1": self.cond1, "condition2": self.cond2, "condition3": self.cond3}


def check_RIS(xs: Sequence[Vector], C, eps, js: Sequence[int] | None, p: ParameterSystem, reg=None,
              weight_window: int | None = None) -> RISCertificate:
    """Conditions of a (C, eps) RIS; missing associated indices are chosen minimally."""
    C, eps = Fraction(C), Fraction(eps)
    xs = list(xs)
    js = list(js or [])
    if any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("associated indices must be strictly increasing")
    if not js:
        js = [1]
    while len(js) < len(xs) + 1:
        n = len(js) - 1
        j = js[-1] + 1
        while not Fraction(len(xs[n]), p.m(j)) < eps:
            j += 1
        js.append(j)
    c1, c2, c3 = [], [], []
    for n, x in enumerate(xs):
        cert = norm_G0(x, p)
        sv, _ = best_special_value(x, reg)
        hi = max(cert.hi, sv)
        c1.append({"n": n + 1, "ok": hi <= C, "norm_hi": float(hi)})
        ratio = Fraction(len(x), p.m(js[n + 1]))
        c2.append({"n": n + 1, "ok": ratio < eps, "ratio": frac_str(ratio)})
        # even weights m_{2i} < m_{j_n} via b-values; odd weights via registered specials
        top = js[n] - 1 if weight_window is None else min(js[n] - 1, weight_window)
        evens = [i for i in range(1, top // 2 + 1)]
        prof = weight_profile(x, p, evens) if evens else {}
        worst = None
        for i, enc in prof.items():
            bound = C / p.m(2 * i)
            if enc.hi > bound and (worst is None or enc.hi * p.m(2 * i) > worst[1]):
                worst = (2 * i, enc.hi * p.m(2 * i))
        for phi in (reg.special_functionals() if reg is not None else []):
            wi = 2 * phi.j + 1
            if wi <= top:
                v = abs(evaluate(phi, x))
                if v > C / phi.m and (worst is None or v * phi.m > worst[1]):
                    worst = (wi, v * phi.m)
        c3.append({"n": n + 1, "ok": worst is None, "weights_checked": top,
                   "worst": None if worst is None else {"i": worst[0], "m_i_times_value": float(worst[1])}})
    return RISCertificate(C, eps, tuple(js), c1, c2, c3)


def ris_from_averages(source: BlockSource, count: int, k: int, delta, p: ParameterSystem, reg=None):
    """Successive l1 averages with associated indices chosen so |supp y_n|/m_{j_{n+1}} < delta."""
    ys = [build_l1_average(source, k, p, reg) for _ in range(count)]
    cert = check_RIS([a.y for a in ys], 3, delta, None, p, reg)
    return ys, cert


# Exact pairs -------------------------------------------------------------------

def scale_functional(f: Functional, t: Fraction) -> Functional | None:
    """t*f inside G0 for 0 < t <= 1, by shrinking l2 coefficients; None if impossible."""
    if t == 1:
        return f
    if isinstance(f, EllTwo):
        return EllTwo(tuple((a * t, c) for a, c in f.terms))
    if isinstance(f, Weighted):
        kids = [scale_functional(c, t) for c in f.children]
        if any(k is None for k in kids):
            return None
        return Weighted(f.j, f.m, tuple(kids))
    return None


@dataclass
class ExactPair:
    x: Vector
    f: Weighted
    j: int
    theta: Fraction
    averages: tuple[Vector, ...] = ()

    def to_json(self):
        return {"j": self.j, "theta": frac_str(self.theta), "x_support": len(self.x),
                "x_range": list(self.x.range), "f_range": list(self.f.range)}


@dataclass
class PairCheck:
    ok: bool
    C_measured: Fraction
    clauses: dict
    nominal_ok: bool

    def to_json(self):
        return {"ok": self.ok, "C_measured": frac_str(self.C_measured), "C_measured_float": float(self.C_measured),
                "nominal_C": NOMINAL_C, "nominal_C_holds": self.nominal_ok, "clauses": self.clauses}


def _component(avg: L1Average, theta: Fraction) -> Functional:
    g, v = avg.cert.witness, avg.cert.lo
    if v < theta:
        raise ConstructionError(f"average witness value {v} below target {theta}")
    h = scale_functional(g, theta / v)
    if h is None:
        raise ConstructionError("witness cannot be scaled inside G0 (try a smaller delta_theta or more averaging)")
    return h


def common_theta(avgs: Sequence[L1Average], delta_theta) -> Fraction:
    cap = Fraction(1, 2) + Fraction(delta_theta) / 2
    return min([a.cert.lo for a in avgs] + [cap])


def make_exact_pair(avgs: Sequence[L1Average], j: int, theta: Fraction, p: ParameterSystem) -> ExactPair:
    d = len(avgs)
    if d > p.n_capped(2 * j, d):
        raise ConstructionError(f"{d} averages exceed n_{2 * j}")
    m = p.m(2 * j)
    x = vsum(a.y for a in avgs).scale(Fraction(m, d))
    f = Weighted(j, m, tuple(_component(a, theta) for a in avgs))
    val = evaluate(f, x)
    if val != theta:
        raise AssertionError(f"pair value {val} differs from target {theta}")
    return ExactPair(x, f, j, theta, tuple(a.y for a in avgs))


def build_exact_pair(source: BlockSource, j: int, p: ParameterSystem, reg=None, delta_theta=Fraction(1, 16),
                     k: int = 2, blocks_per_pair: int | None = None) -> ExactPair:
    """x = (m_{2j}/d) sum y_r, f = (1/m_{2j}) sum f_r with f_r(y_r) = theta in [1/2, 1/2 + delta_theta]."""
    d = blocks_per_pair or p.n_capped(2 * j, 8)
    avgs = [build_l1_average(source, k, p, reg) for _ in range(d)]
    theta = common_theta(avgs, delta_theta)
    if theta < Fraction(1, 2):
        raise ConstructionError("an average fell below 1/2")
    return make_exact_pair(avgs, j, theta, p)


def check_exact_pair(pair: ExactPair, p: ParameterSystem, reg=None, C=None, window: int = 24) -> PairCheck:
    """Check the norm, weight, value and weight-sweep clauses; C=None measures the least constant that works."""
    x, f, j = pair.x, pair.f, pair.j
    clauses = {}
    cert = norm_G0(x, p)
    sv, _ = best_special_value(x, reg)
    clauses["norm_at_least_half"] = cert.lo >= Fraction(1, 2)
    clauses["w0_equals_g0"] = sv <= cert.hi
    clauses["weight"] = isinstance(f, Weighted) and f.j == j and f.m == p.m(2 * j)
    clauses["value"] = evaluate(f, x) == pair.theta
    # smallest C for the norm clause and the weight sweep
    need = cert.hi
    js = list(range(1, window + 1))
    prof = weight_profile(x, p, js)
    for i, enc in prof.items():
        wi = 2 * i
        if wi < 2 * j:
            need = max(need, enc.hi * p.m(wi))
        elif wi > 2 * j:
            need = max(need, enc.hi * p.m(2 * j))
    for phi in (reg.special_functionals() if reg is not None else []):
        wi = 2 * phi.j + 1
        v = abs(evaluate(phi, x))
        need = max(need, v * phi.m if wi < 2 * j else v * p.m(2 * j))
    # weights beyond the window: |g(x)| <= ||x||_1/m_i
    tail = x.l1 * p.m(2 * j) / p.m(2 * window + 1)
    need = max(need, tail)
    C_meas = need if C is None else Fraction(C)
    clauses["norm_at_most_C"] = cert.hi <= C_meas
    clauses["weight_sweep"] = need <= C_meas
    ok = all(clauses.values())
    return PairCheck(ok, need, {k: bool(v) for k, v in clauses.items()}, need <= NOMINAL_C)


# Dependent sequences -----------------------------------------------------------

@dataclass
class DependentSequence:
    j0: int
    mode: str
    pairs: list
    special: SpecialSequence
    theta: Fraction
    sources: list = field(default_factory=list)

    @property
    def xs(self):
        return [pp.x for pp in self.pairs]

    @property
    def fs(self):
        return [pp.f for pp in self.pairs]

    def functional(self, p):
        return self.special.functional(p)

    def to_json(self):
        return {"j0": self.j0, "mode": self.mode, "length": len(self.pairs), "theta": frac_str(self.theta),
                "seq_id": self.special.seq_id, "weights": [pp.j for pp in self.pairs],
                "sources": self.sources, "pairs": [pp.to_json() for pp in self.pairs]}


def build_dependent_sequence(sourceA: BlockSource, sourceB: BlockSource | None, j0: int, mode: str,
                             p: ParameterSystem, reg: SigmaRegistry, delta_theta=Fraction(1, 16), k: int = 2,
                             blocks_per_pair: int = 2) -> DependentSequence:
    """Pairs (x_i, f_i), i <= n_{2j0+1}, threaded along a sigma special sequence.

    mode 'half': f_i(x_i) = theta > 1/2, one common exact theta.
    mode 'zero': f_i(x_i) = 0, x_i sits on coordinates that f_i skips.
    With two sources, odd i draw from sourceA and even i from sourceB.
    """
    if mode not in ("half", "zero"):
        raise ValueError(f"unknown mode {mode!r}")
    if j0 < 1:
        raise ConstructionError("j0 must be >= 1")
    N = p.n(2 * j0 + 1)
    d = blocks_per_pair
    pairs: list[ExactPair] = []
    jw = first_weight_index(j0, p)
    comps: list[Functional] = []
    used = []
    if mode == "half":
        # build all averages first so theta is common and exact
        groups = []
        for i in range(N):
            src = sourceA if (sourceB is None or i % 2 == 0) else sourceB
            used.append("A" if src is sourceA else "B")
            if groups:
                # keep pairs interleaved: the next group starts right of the last one
                last = groups[-1][-1].y.range[1]
                for s in (sourceA, sourceB):
                    if s is not None:
                        s.skip_to(last + 1)
            groups.append([build_l1_average(src, k, p, reg) for _ in range(d)])
        theta = common_theta([a for g in groups for a in g], delta_theta)
        if not theta > Fraction(1, 2):
            raise ConstructionError("common theta is not above 1/2")
        for i, g in enumerate(groups):
            pair = make_exact_pair(g, jw, theta, p)
            pairs.append(pair)
            comps.append(pair.f)
            if i + 1 < N:
                jw = reg.assign(comps) // 2
    else:
        theta = Fraction(0)
        src = sourceA
        for i in range(N):
            m = p.m(2 * jw)
            if d > p.n_capped(2 * jw, d):
                raise ConstructionError(f"{d} blocks exceed n_{2 * jw}")
            a = src.pos
            # f_i = (1/m)(e_a^* + e_{a+d+1}^*) and x_i = (m/d) sum of the d coordinates in between
            f = Weighted(jw, m, (Leaf(1, a), Leaf(1, a + d + 1)))
            x = Vector.sum_basis(range(a + 1, a + d + 1), Fraction(m, d))
            src.skip_to(a + d + 2)
            if sourceB is not None:
                sourceB.skip_to(a + d + 2)
            used.append("A")
            pair = ExactPair(x, f, jw, theta)
            if evaluate(f, x) != 0:
                raise AssertionError("zero-mode pair does not vanish")
            pairs.append(pair)
            comps.append(f)
            if i + 1 < N:
                jw = reg.assign(comps) // 2
    seq = reg.register_sequence(comps, j0)
    dep = DependentSequence(j0, mode, pairs, seq, theta, used)
    v = check_dependent_sequence(dep, p, reg)
    if not v:
        raise ConstructionError(f"built dependent sequence fails validation: {v.reason}")
    return dep


def check_dependent_sequence(dep: DependentSequence, p: ParameterSystem, reg: SigmaRegistry,
                             C=None, pair_checks: bool = False) -> Verdict:
    """Special-sequence clause, values, interleaving and the support-size hypothesis.

    pair_checks=True also runs the exact-pair clauses (norm certificates) with
    the given C, or the measured one when C is None.
    """
    N = p.n(2 * dep.j0 + 1)
    if len(dep.pairs) != N:
        return Verdict(False, f"length {len(dep.pairs)} != n_{2 * dep.j0 + 1}")
    v = validate_special_sequence(dep.special, reg, p)
    if not v:
        return Verdict(False, f"special sequence: {v.reason}")
    for i, (pair, f) in enumerate(zip(dep.pairs, dep.special.components), 1):
        if pair.f is not f and pair.f.coefficients != f.coefficients:
            return Verdict(False, f"pair {i} functional differs from special component {i}")
        if evaluate(pair.f, pair.x) != pair.theta:
            return Verdict(False, f"pair {i}: f(x) != theta")
        if 2 * pair.j != 2 * f.j:
            return Verdict(False, f"pair {i}: weight mismatch")
        if max(pair.f.coefficients) < len(pair.x):
            return Verdict(False, f"pair {i}: maxsupp(f_i) < #supp(x_i)")
    spans = []
    for pair in dep.pairs:
        lo = min(pair.x.range[0], pair.f.range[0])
        hi = max(pair.x.range[1], pair.f.range[1])
        spans.append((lo, hi))
    if not successive(spans):
        return Verdict(False, "interleaving: ran(f_i) u ran(x_i) are not successive")
    if pair_checks:
        for i, pair in enumerate(dep.pairs, 1):
            c = check_exact_pair(pair, p, reg, C)
            if not c.ok:
                bad = [k for k, ok in c.clauses.items() if not ok]
                return Verdict(False, f"pair {i}: exact-pair clauses fail: {', '.join(bad)}")
    return Verdict(True)


def dependent_average_identity(dep: DependentSequence, p: ParameterSystem) -> tuple[Fraction, Fraction]:
    """(Phi(plain average), mean(theta_i)/m_{2j0+1}); equal by linearity."""
    N = len(dep.pairs)
    avg = vsum(dep.xs).scale(Fraction(1, N))
    phi = dep.functional(p)
    mean = sum((pp.theta for pp in dep.pairs), Fraction(0)) / N
    return evaluate(phi, avg), mean / p.m(2 * dep.j0 + 1)


def alternating_average_report(dep: DependentSequence, p: ParameterSystem, reg, C=None) -> dict:
    """Certified registry-relative norm of the alternating (half) or plain (zero)
    average next to 8C/m_{2j0+1}^2; report only."""
    N = len(dep.pairs)
    sgn = [(-1) ** (i + 1) for i in range(1, N + 1)] if dep.mode == "half" else [1] * N
    z = vsum(x.scale(s) for x, s in zip(dep.xs, sgn)).scale(Fraction(1, N))
    cert = norm_W0(z, p, reg)
    if C is None:
        C = max(check_exact_pair(pp, p, reg).C_measured for pp in dep.pairs)
    bound = 8 * Fraction(C) / p.m(2 * dep.j0 + 1) ** 2
    return {"measured": cert.enclosure.to_json(), "registry_relative": True,
            "paper_bound": {"value": frac_str(bound), "float": float(bound), "C": frac_str(C),
                            "nominal_C_bound": float(Fraction(8 * NOMINAL_C, p.m(2 * dep.j0 + 1) ** 2))},
            "asserted": False}


# Gap witness -------------------------------------------------------------------

@dataclass
class GapWitness:
    w: Vector
    f: Functional
    value: Fraction
    g0: NormCertificate
    w0: NormCertificate
    j: int

    @property
    def ratio(self) -> Fraction:
        return self.w0.lo / self.g0.hi

    def to_json(self, p: ParameterSystem | None = None):
        out = {"f_of_w": frac_str(self.value), "f_of_w_float": float(self.value),
               "G0": self.g0.enclosure.to_json(), "W0_registry": self.w0.enclosure.to_json(),
               "ratio": float(self.ratio), "asserted": {"f_of_w_gt_half": self.value > Fraction(1, 2),
                                                         "w0_at_least_f_of_w": self.w0.lo >= self.value}}
        if p is not None:
            bound = Fraction(45, p.m(2 * self.j + 1))
            out["paper_bound"] = {"value": frac_str(bound), "form": "45/m_{2j+1}", "asserted": False,
                                  "measured": frac_str(self.g0.hi), "measured_within": self.g0.hi <= bound}
        return out


def build_gap_witness(dep: DependentSequence, p: ParameterSystem, reg) -> GapWitness:
    """w = (m_{2j+1}/n_{2j+1}) sum x_i and f the special functional of the sequence."""
    if dep.mode != "half":
        raise ConstructionError("gap witness needs a half-mode dependent sequence")
    j = dep.j0
    N = len(dep.pairs)
    w = vsum(dep.xs).scale(Fraction(p.m(2 * j + 1), N))
    f = dep.functional(p)
    val = evaluate(f, w)
    if not val > Fraction(1, 2):
        raise AssertionError(f"f(w) = {val} is not above 1/2")
    g0 = norm_G0(w, p)
    w0 = norm_W0(w, p, reg)
    if not w0.lo >= val:
        raise AssertionError("registry-relative W0 norm below f(w)")
    return GapWitness(w, f, val, g0, w0, j)


# c0 witnesses ------------------------------------------------------------------

@dataclass
class C0Witness:
    zs: list
    picked: list
    js: list
    eps_schedule: list
    complete: bool
    blocking: dict | None = None
    g0_norms: list = field(default_factory=list)
    g0_decays: bool = True

    def to_json(self):
        return {"picked": self.picked, "js": self.js, "eps": [frac_str(e) for e in self.eps_schedule],
                "complete": self.complete, "blocking": self.blocking, "g0_norms": self.g0_norms,
                "g0_decays": self.g0_decays}


class PreconditionError(ValueError):
    pass


def _default_norms(p, reg):
    def g0(x):
        return norm_G0(x, p).enclosure

    def w0(x):
        return norm_W0(x, p, reg).enclosure
    return g0, w0


def extract_c0_witness(xs: Sequence[Vector], eps, p: ParameterSystem, reg=None, want: int | None = None,
                       norms: tuple[Callable, Callable] | None = None) -> C0Witness:
    """Greedy subsequence z_k with even j_k such that ||z_k||_W0 = 1, |supp z_k|/m_{j_k} < eps_k and
    ||z_{k+1}||_G0 <= eps_k/n_{j_k}, with eps_k = eps/2^{k+1}. Comparisons are certified; W0 is registry relative."""
    eps = Fraction(eps)
    g0, w0 = norms or _default_norms(p, reg)
    xs = list(xs)
    if not xs:
        raise PreconditionError("empty sequence")
    g = [g0(x) for x in xs]
    for i, x in enumerate(xs):
        e = w0(x)
        if not (e.lo <= 1 <= e.hi and e.width <= Fraction(1, 10 ** 6)):
            raise PreconditionError(f"x_{i + 1} is not normalized in W0 ({float(e.lo)}..{float(e.hi)})")
    decays = len(xs) < 2 or g[-1].hi < g[0].lo
    want = want or len(xs)
    sched = [eps / 2 ** (k + 1) for k in range(1, want + 1)]
    picked, js = [0], []

    def pick_j(x, k, floor):
        j = floor + 2 - floor % 2 if floor else 2
        while not Fraction(len(x), p.m(j)) < sched[k]:
            j += 2
        return j

    js.append(pick_j(xs[0], 0, 0))
    blocking = None
    while len(picked) < want:
        k = len(picked) - 1
        thr = sched[k] / p.n(js[-1])
        nxt = next((i for i in range(picked[-1] + 1, len(xs)) if g[i].hi <= thr), None)
        if nxt is None:
            cand = picked[-1] + 1
            blocking = {"index": cand + 1 if cand < len(xs) else None, "threshold": frac_str(thr),
                        "G0_lo": frac_str(g[cand].lo) if cand < len(xs) else None,
                        "G0_lo_float": float(g[cand].lo) if cand < len(xs) else None,
                        "reason": "no later vector has G0 norm below eps_k/n_{j_k}"}
            break
        picked.append(nxt)
        js.append(pick_j(xs[nxt], len(picked) - 1, js[-1]))
    zs = [xs[i] for i in picked]
    return C0Witness(zs, [i + 1 for i in picked], js, sched[:len(picked)], blocking is None, blocking,
                     [g[i].to_json() for i in range(len(xs))], decays)


def check_c0_equivalence(zs: Sequence[Vector], eps, trials: int, p: ParameterSystem, reg=None,
                         seed: int = 0, grid: int = 8) -> dict:
    """Ratios ||sum a_i z_i||_W0 / max|a_i| over seeded rational coefficient vectors."""
    eps = Fraction(eps)
    rng = random.Random(seed)
    rows = []
    for t in range(trials):
        a = [Fraction(rng.randint(-grid, grid), grid) for _ in zs]
        i = rng.randrange(len(zs))
        a[i] = Fraction(rng.choice((1, -1)))
        v = vsum(z.scale(c) for z, c in zip(zs, a))
        cert = norm_W0(v, p, reg)
        rows.append((cert.lo, cert.hi))
    lo = min(r[0] for r in rows)
    hi = max(r[1] for r in rows)
    return {"trials": trials, "min_lo": frac_str(lo), "max_hi": frac_str(hi), "min_float": float(lo),
            "max_float": float(hi), "lower_ok": lo >= 1, "upper_ok": hi <= 1 + eps,
            "ok": lo >= 1 and hi <= 1 + eps, "registry_relative": True}


def normalized_gap_family(count: int, p: ParameterSystem, reg: SigmaRegistry, seed: int = 0):
    """Best available attempt at a W0-normalized family with small G0 norms:
    gap witnesses scaled to registry-relative W0 norm one."""
    fam = []
    src = BlockSource("basis", seed)
    for _ in range(count):
        dep = build_dependent_sequence(src, None, 1, "half", p, reg)
        gw = build_gap_witness(dep, p, reg)
        # scale by the exact witness value so the W0 lower bound is 1
        fam.append(gw.w.scale(1 / gw.w0.lo))
        src.skip_to(gw.w.range[1] + 1)
    return fam

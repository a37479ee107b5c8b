"""Random instance generators and the verification suites.

Randomness contract: every stream is a ``random.Random`` seeded from
``numpy.random.SeedSequence(seed, spawn_key=(crc32(name),))``, so streams are
independent by name and stable for a given (seed, name).
"""
from __future__ import annotations

import random
import time
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .coding import SigmaRegistry, build_special_sequence, chain_factory, growth_bound
from .core import (EllTwo, FamilyTag, Functional, Leaf, OddWeighted, SignSum, Special, Vector, Weighted,
                   evaluate, restrict, to_json, validate)
from .dyadic import frac_str
from .norm import norm_G0, norm_G0_oracle, norm_W0
from .params import ParameterSystem, TINY, WIDE
from .separation import (Phi, SeparationError, check_average_bound, decompose, is_separated,
                         is_separated_bruteforce)

SUITES = ("axioms", "hygiene", "oracle", "coding", "witnesses", "separation", "aux")


def stream(seed: int, name: str) -> random.Random:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))
    return random.Random(int(ss.generate_state(2, dtype=np.uint64)[0]))


# Generators --------------------------------------------------------------------

def random_vector(rng: random.Random, max_supp: int = 6, span: int = 12, start: int = 1,
                  denom: int = 4, signed: bool = True) -> Vector:
    k = rng.randint(1, max_supp)
    idx = rng.sample(range(start, start + max(span, k)), k)
    d = {}
    for n in idx:
        v = Fraction(rng.randint(1, 2 * denom), denom)
        d[n] = -v if signed and rng.random() < 0.5 else v
    return Vector.from_dict(d)


def _split(rng, a: int, b: int, parts: int) -> list[tuple[int, int]]:
    """Successive non-empty sub-intervals of [a, b], at most `parts` of them."""
    L = b - a + 1
    parts = max(1, min(parts, L))
    cuts = sorted(rng.sample(range(a + 1, b + 1), parts - 1)) if parts > 1 else []
    bounds = [a] + cuts + [b + 1]
    return [(bounds[i], bounds[i + 1] - 1) for i in range(parts)]


def _l2_coeffs(rng, k: int) -> list[Fraction]:
    r = 1
    while r * r < k:
        r += 1
    return [Fraction(rng.choice((1, -1)) * rng.randint(1, r), r * r) for _ in range(k)]


class TreeGenerator:
    """Random valid trees of a family. Sizes stay small so evaluation is cheap."""

    def __init__(self, p: ParameterSystem, tag: FamilyTag, reg: SigmaRegistry | None = None, max_j: int = 3):
        self.p, self.tag, self.reg, self.max_j = p, tag, reg, max_j
        self.aux = tag.kind in ("Fj0", "Fj0Prime")

    def leaf(self, rng, a, b) -> Functional:
        if self.aux and b > a and rng.random() < 0.4:
            cap = self.p.n(self.tag.j0 - 1)
            idx = sorted(rng.sample(range(a, b + 1), min(cap, b - a + 1, rng.randint(1, 4))))
            return SignSum(tuple((rng.choice((1, -1)), n) for n in idx))
        return Leaf(rng.choice((1, -1)), rng.randint(a, b))

    def weighted(self, rng, a, b, depth, j=None) -> Weighted:
        p = self.p
        j = j or rng.randint(1, self.max_j)
        cap = p.n_capped(2 * j, 6) * (2 if self.aux else 1)
        kids = [self.node(rng, lo, hi, depth - 1) for lo, hi in _split(rng, a, b, rng.randint(1, cap))]
        return Weighted(j, p.m(2 * j), tuple(kids))

    def elltwo(self, rng, a, b, depth) -> Functional:
        k = rng.randint(1, min(3, self.max_j))
        js = rng.sample(range(1, self.max_j + 1), k)
        ivs = _split(rng, a, b, k)
        kids = []
        for (lo, hi), j in zip(ivs, js):
            if self.aux and rng.random() < 0.3:
                kids.append(Leaf(rng.choice((1, -1)), rng.randint(lo, hi)))
            else:
                kids.append(self.weighted(rng, lo, hi, depth - 1, j))
        cs = _l2_coeffs(rng, len(kids))
        return EllTwo(tuple(zip(cs, kids)))

    def node(self, rng, a, b, depth) -> Functional:
        r = rng.random()
        if depth <= 1 or r < 0.35:
            return self.leaf(rng, a, b)
        if r < 0.75:
            return self.weighted(rng, a, b, depth)
        return self.elltwo(rng, a, b, depth)

    def __call__(self, rng: random.Random, span: int = 12, depth: int = 3, start: int = 1) -> Functional:
        a, b = start, start + span - 1
        if self.tag.kind == "W0" and self.reg is not None and self.reg.sequences() and rng.random() < 0.3:
            phi = rng.choice(self.reg.special_functionals())
            lo, hi = phi.range
            u, v = sorted((rng.randint(lo, hi), rng.randint(lo, hi)))
            return phi.with_interval((u, v), rng.choice((1, -1)))
        if self.tag.kind == "Fj0Prime" and rng.random() < 0.3:
            j = rng.randint(1, 2)
            cap = 2 * self.p.n_capped(2 * j + 1, 6)
            kids = [self.node(rng, lo, hi, depth - 1) for lo, hi in _split(rng, a, b, rng.randint(1, cap))]
            return OddWeighted(j, self.p.m(2 * j + 1), tuple(kids))
        return self.node(rng, a, b, depth)


def random_phi(rng, k: int, q: int) -> tuple[list[Vector], Phi]:
    """Successive blocks and an odd-weight functional with q successive components."""
    pos, xs = 1, []
    for _ in range(k):
        L = rng.randint(1, 3)
        xs.append(Vector.from_dict({pos + i: Fraction(rng.randint(-3, 5), 2) or Fraction(1) for i in range(L)}))
        pos += L
    N = pos - 1
    cuts = sorted(rng.sample(range(1, N + 1), min(q, N)))
    comps, start = [], 1
    for c in cuts:
        kids = [Leaf(rng.choice((1, 1, -1)), n) for n in range(start, c + 1) if rng.random() < 0.8] or [Leaf(1, c)]
        kids = kids[:4]
        comps.append(Weighted(1, 4, tuple(kids)) if rng.random() < 0.5 else kids[0])
        start = c + 1
    return xs, Phi(8, tuple(comps))


def sample_registry(p: ParameterSystem) -> SigmaRegistry:
    """Registry holding one special sequence on small coordinates, so W0 checks see a special."""
    reg = SigmaRegistry(p)
    build_special_sequence(1, chain_factory(p), reg, p)
    return reg


# Suite plumbing ----------------------------------------------------------------

@dataclass
class SuiteResult:
    suite: str
    ok: bool
    checks: dict = field(default_factory=dict)
    counterexample: dict | None = None
    reports: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self, timing: bool = False):
        out = {"suite": self.suite, "ok": self.ok, "checks": self.checks, "counterexample": self.counterexample,
               "reports": self.reports}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


class _Fail(Exception):
    def __init__(self, check: str, instance: dict):
        super().__init__(check)
        self.check, self.instance = check, instance


def _vec(x: Vector) -> dict:
    return x.to_json()


def axioms(p: ParameterSystem, seed: int, count: int = 200, restrictions: int = 20) -> dict:
    rng = stream(seed, "axioms")
    reg = sample_registry(p)
    stats = {"vectors": 0, "restrictions": 0, "intervals": 0}
    for _ in range(count):
        x = random_vector(rng)
        c = norm_G0(x, p)
        if not (x.linf <= c.lo and c.hi <= x.l1):
            raise _Fail("l_inf <= G0 <= l_1", {"x": _vec(x), "lo": frac_str(c.lo), "hi": frac_str(c.hi)})
        for _ in range(restrictions):
            A = frozenset(n for n in x.support if rng.random() < 0.5)
            flips = {n: rng.choice((1, -1)) for n in x.support}
            y = Vector.from_dict({n: flips[n] * v for n, v in x.coords if n in A})
            cy = norm_G0(y, p)
            if cy.lo > c.hi:
                raise _Fail("G0 1-unconditional", {"x": _vec(x), "y": _vec(y)})
            stats["restrictions"] += 1
        w = norm_W0(x, p, reg)
        if w.lo < c.lo:
            raise _Fail("W0 >= G0", {"x": _vec(x)})
        sup = x.support
        for i in range(len(sup)):
            for k in range(i, len(sup)):
                z = x.restrict((sup[i], sup[k]))
                if norm_W0(z, p, reg).lo > w.hi:
                    raise _Fail("W0 bimonotone", {"x": _vec(x), "E": [sup[i], sup[k]]})
                stats["intervals"] += 1
        stats["vectors"] += 1
    return stats


def hygiene(p: ParameterSystem, seed: int, count: int = 500) -> dict:
    rng = stream(seed, "hygiene")
    reg = sample_registry(p)
    tags = [FamilyTag("G0"), FamilyTag("W0"), FamilyTag("Fj0", 2), FamilyTag("Fj0Prime", 2)]
    stats = {}
    for tag in tags:
        gen = TreeGenerator(p, tag, reg)
        made = 0
        while made < count:
            f = gen(rng)
            v = validate(f, tag, p, reg)
            if not v:
                raise _Fail("generator produced an invalid tree", {"tag": str(tag), "reason": v.reason,
                                                                    "f": to_json(f)})
            if f.sup_norm > 1:
                raise _Fail("|f|_inf <= 1", {"tag": str(tag), "f": to_json(f)})
            x = random_vector(rng, span=12)
            a, b = sorted((rng.randint(1, 12), rng.randint(1, 12)))
            if evaluate(restrict(f, (a, b)), x) != evaluate(f, x.restrict((a, b))):
                raise _Fail("evaluate/restrict commute", {"tag": str(tag), "f": to_json(f), "x": _vec(x),
                                                          "E": [a, b]})
            if not isinstance(f, Special):
                S = frozenset(n for n in range(1, 13) if rng.random() < 0.5)
                if evaluate(restrict(f, S), x) != evaluate(f, x.restrict(S)):
                    raise _Fail("evaluate/restrict commute (set)", {"tag": str(tag), "f": to_json(f),
                                                                    "x": _vec(x), "E": sorted(S)})
            made += 1
        stats[str(tag)] = made
    return stats


def oracle(p: ParameterSystem, seed: int, count: int = 50, deep: int = 10,
           corrupt: Callable | None = None) -> dict:
    """corrupt, if given, maps a certificate's (lo, hi) to a damaged pair (harness self-test)."""
    rng = stream(seed, "oracle")
    inst = []
    for _ in range(count):
        x = random_vector(rng)
        c = norm_G0(x, p)
        lo, hi = (c.lo, c.hi) if corrupt is None else corrupt(c.lo, c.hi)
        o = norm_G0_oracle(x, p, depth=3, grid_bits=6)
        if o.value > hi:
            raise _Fail("oracle <= hi", {"x": _vec(x), "oracle": frac_str(o.value), "hi": frac_str(hi)})
        if hi - lo > Fraction(1, 10 ** 9):
            raise _Fail("hi - lo <= 1e-9", {"x": _vec(x), "width": float(hi - lo)})
        inst.append((len(x), x.l1, x, o.value, hi))
    inst.sort(key=lambda t: (t[0], t[1]))
    worst = Fraction(0)
    for _, _, x, v3, hi in inst[:deep]:
        v4 = norm_G0_oracle(x, p, depth=4, grid_bits=6).value
        if not (v4 >= v3 and v4 <= hi and v4 - v3 < Fraction(1, 1000)):
            raise _Fail("depth-4 refinement", {"x": _vec(x), "depth3": frac_str(v3), "depth4": frac_str(v4),
                                               "hi": frac_str(hi)})
        worst = max(worst, v4 - v3)
    return {"instances": count, "deepened": min(deep, count), "max_depth_change": float(worst)}


def _random_prefix(rng, p, gen, pos):
    fs = []
    for _ in range(rng.randint(1, 3)):
        span = rng.randint(1, 6)
        f = gen(rng, span=span, depth=2, start=pos)
        fs.append(f)
        pos = f.range[1] + 1 + rng.randint(0, 2)
    return fs, pos


def coding(p: ParameterSystem, seed: int, count: int = 1000) -> dict:
    rng = stream(seed, "coding")
    reg = SigmaRegistry(p)
    gen = TreeGenerator(p, FamilyTag("G0"), max_j=2)
    pos, seen = 1, {}
    for _ in range(count):
        if seen and rng.random() < 0.1:
            prefix = rng.choice(list(seen.values()))[0]
        else:
            prefix, pos = _random_prefix(rng, p, gen, pos if rng.random() < 0.5 else 1)
        v = reg.assign(prefix)
        if reg.assign(prefix) != v:
            raise _Fail("sigma deterministic", {"prefix": [to_json(f) for f in prefix]})
        if not p.m(v) > growth_bound(prefix):
            raise _Fail("growth condition", {"prefix": [to_json(f) for f in prefix], "value": v})
        seen[id(prefix)] = (prefix, v)
    audit = reg.audit()
    if not audit:
        raise _Fail("global audit", {"reason": audit.reason})
    text = reg.journal_text()
    again = SigmaRegistry.replay(text, p, None)
    if again.journal_text() != text or again.assignments() != reg.assignments():
        raise _Fail("journal replay byte-identical", {})
    return {"prefixes": count, "distinct": len(reg.assignments()), "audit": True, "replay_identical": True}


def witnesses(p: ParameterSystem, seed: int, j0: int = 1) -> dict:
    from .sequences import (BlockSource, alternating_average_report, build_dependent_sequence,
                            build_gap_witness, check_dependent_sequence, dependent_average_identity)
    reg = SigmaRegistry(p)
    src = BlockSource("basis", seed)
    dep = build_dependent_sequence(src, None, j0, "half", p, reg)
    v = check_dependent_sequence(dep, p, reg, pair_checks=True)
    if not v:
        raise _Fail("dependent sequence validates", {"reason": v.reason})
    lhs, rhs = dependent_average_identity(dep, p)
    m3 = p.m(2 * j0 + 1)
    if lhs != rhs:
        raise _Fail("special(average) = mean(theta)/m", {"lhs": frac_str(lhs), "rhs": frac_str(rhs)})
    if not lhs >= Fraction(1, 2 * m3):
        raise _Fail("special(average) >= 1/(2m)", {"lhs": frac_str(lhs)})
    gw = build_gap_witness(dep, p, reg)
    return {"dependent": dep.to_json(), "identity": {"value": frac_str(lhs), "at_least": frac_str(Fraction(1, 2 * m3))},
            "alternating_average": alternating_average_report(dep, p, reg),
            "gap_witness": gw.to_json(p)}


def separation(p: ParameterSystem, seed: int, count: int = 200, decomps: int = 100, bound_instances: int = 2) -> dict:
    rng = stream(seed, "separation")
    for _ in range(count):
        xs, phi = random_phi(rng, rng.randint(1, 6), rng.randint(1, 8))
        delta = Fraction(rng.randint(1, 6), 8)
        a = bool(is_separated(xs, phi, delta))
        b = is_separated_bruteforce(xs, phi, delta)
        if a != b:
            raise _Fail("is_separated = exhaustive", {"xs": [_vec(x) for x in xs], "delta": frac_str(delta),
                                                      "phi": [to_json(f) for f in phi.components]})
    done = tried = 0
    while done < decomps:
        tried += 1
        if tried > 100 * decomps:
            raise _Fail("enough decomposable instances", {"found": done})
        xs, phi = random_phi(rng, rng.randint(2, 6), rng.randint(1, 8))
        delta = Fraction(rng.randint(1, 6), 8)
        try:
            d = decompose(xs, phi, delta)
        except SeparationError:
            continue
        if not d.identity_holds:
            raise _Fail("decomposition identity", {"xs": [_vec(x) for x in xs], "delta": frac_str(delta)})
        done += 1
    bounds = average_bound_instances(seed, bound_instances)
    for r in bounds:
        if not r.holds:
            raise _Fail("average bound", r.to_json())
    return {"agreements": count, "decompositions": done, "decompose_tries": tried,
            "average_bound": [r.to_json() for r in bounds]}


def average_bound_instances(seed: int, count: int = 2, k: int = 1300, delta=Fraction(1, 9)):
    """WIDE instances that meet every precondition: k signed unit blocks and an
    odd-weight functional whose components each touch a few blocks weakly."""
    from .sequences import BlockSource
    p = WIDE
    rng = stream(seed, "average-bound")
    out = []
    for _ in range(count):
        src = BlockSource("signed", rng.randrange(1 << 30))
        xs = [src.next() for _ in range(k)]
        # blocks are +-e_n; phi has one component per few blocks, too weak to separate
        q = rng.randint(2, 40)
        comps = []
        for lo, hi in _split(rng, 1, min(k, 4 * q), q):
            # weight m_4 keeps each block's value at 1/16 < delta, so no block is good
            kids = tuple(Leaf(int(xs[n - 1][n]), n) for n in range(lo, min(hi, lo + 2) + 1))
            comps.append(Weighted(2, p.m(4), kids))
        phi = Phi(p.m(3), tuple(comps))
        r = check_average_bound(xs, phi, delta, p)
        if not r.evaluated:
            raise _Fail("average bound preconditions", r.to_json())
        out.append(r)
    return out


def aux(p: ParameterSystem, seed: int, j0: int = 2, depth: int = 3) -> dict:
    from .auxiliary import measure_average_bounds
    a = measure_average_bounds(j0, p, depth=depth).to_json()
    b = measure_average_bounds(j0, p, depth=depth).to_json()
    if a != b:
        raise _Fail("deterministic across runs", {})
    for row in a["rows"]:
        if not row["cap_l1_over_m_i"]["holds"]:
            raise _Fail("value <= 1/m_i", row)
    return {"table": a}


_RUNNERS = {"axioms": axioms, "hygiene": hygiene, "oracle": oracle, "coding": coding, "witnesses": witnesses,
            "separation": separation, "aux": aux}


def verify_suite(suite: str, p: ParameterSystem = TINY, seed: int = 0, **kw) -> SuiteResult:
    if suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    t = time.perf_counter()
    try:
        reports = _RUNNERS[suite](p, seed, **kw)
        res = SuiteResult(suite, True, {"passed": True}, None, reports)
    except _Fail as e:
        res = SuiteResult(suite, False, {"failed": e.check}, {"check": e.check, "seed": seed,
                                                              "params": p.digest(), "instance": e.instance})
    res.seconds = time.perf_counter() - t
    return res

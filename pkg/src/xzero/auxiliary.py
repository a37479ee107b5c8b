"""Auxiliary families F_{j0} and F'_{j0}: membership, averaging bounds on
basis averages, the basic-inequality witness search and the RIS average bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (ZERO, FamilyTag, Functional, Leaf, OddWeighted, SignSum, Verdict, Vector, Weighted,
                   evaluate, validate, vsum)
from .dyadic import Enclosure, frac_str, sqrt_hi, sqrt_lo
from .params import ParameterSystem


def validate_aux(f: Functional, j0: int, tag: str, p: ParameterSystem) -> Verdict:
    """tag 'F' for F_{j0}, "F'" for F'_{j0}."""
    kind = {"F": "Fj0", "F'": "Fj0Prime", "Fprime": "Fj0Prime"}.get(tag)
    if kind is None:
        raise ValueError(f"unknown auxiliary tag {tag!r}")
    return validate(f, FamilyTag(kind, j0), p)


# Averaging bounds --------------------------------------------------------------

@dataclass
class AverageBoundsTable:
    j0: int
    mode: str
    depth: int
    length: int
    rows: list = field(default_factory=list)
    m_meas: Enclosure | None = None
    shapes: int = 0

    def to_json(self):
        return {"j0": self.j0, "mode": self.mode, "depth": self.depth, "average_length": self.length,
                "shapes_evaluated": self.shapes,
                "M_meas": self.m_meas.to_json() if self.m_meas else None,
                "rows": self.rows}


class _AuxDP:
    """Best value of sum of coefficients over a window of N equal coordinates.

    The enumerated set: sign-sum leaves, weighted nodes over successive
    children, mixed l2 nodes over successive children (weighted children of
    distinct weights up to jmax, basis terms), all with nonnegative signs,
    which is no loss on a positive vector. The l2 supremum over a fixed child
    list is the Euclidean norm of the children's values, kept as an enclosure.
    """

    def __init__(self, p: ParameterSystem, N: int, leaf_cap: int, jmax: int, bits: int = 64):
        self.p, self.N, self.leaf_cap, self.jmax, self.bits = p, N, leaf_cap, jmax, bits
        self.count = 0

    def _partition(self, V, a: int, e: int, cap: int, side: int) -> Fraction:
        # best sum of V over at most cap successive parts covering sub-intervals of [a, e]
        best = {a - 1: [Fraction(0)] * (cap + 1)}
        for t in range(a, e + 1):
            row = [Fraction(0)] * (cap + 1)
            for c in range(1, cap + 1):
                v = best[t - 1][c]
                for s in range(a, t + 1):
                    self.count += 1
                    cand = best[s - 1][c - 1] + V[(s, t)][side]
                    if cand > v:
                        v = cand
                row[c] = v
            best[t] = row
        return best[e][cap]

    def run(self, depth: int):
        N, p = self.N, self.p
        V = {}
        for a in range(N):
            for e in range(a, N):
                v = Fraction(min(e - a + 1, self.leaf_cap))
                V[(a, e)] = (v, v)
        W = {}
        for d in range(2, depth + 1):
            newW = {}
            for j in range(1, self.jmax + 1):
                cap = min(2 * p.n_capped(2 * j, N), N)
                m = p.m(2 * j)
                for a in range(N):
                    for e in range(a, N):
                        lo = self._partition(V, a, e, cap, 0) / m
                        hi = self._partition(V, a, e, cap, 1) / m
                        newW[(j, a, e)] = (lo, hi)
            newV = dict(V)
            for (j, a, e), (lo, hi) in newW.items():
                o = newV[(a, e)]
                newV[(a, e)] = (max(o[0], lo), max(o[1], hi))
            for a in range(N):
                for e in range(a, N):
                    lo, hi = self._mixed(W, a, e)
                    o = newV[(a, e)]
                    newV[(a, e)] = (max(o[0], lo), max(o[1], hi))
            # weighted nodes built at this depth feed mixed nodes one level up
            for key, val in newW.items():
                o = W.get(key, (Fraction(0), Fraction(0)))
                W[key] = (max(o[0], val[0]), max(o[1], val[1]))
            V = newV
        self.V, self.W = V, W
        return V, W

    def _mixed(self, W, a: int, e: int):
        if not W:
            # basis terms only: sqrt(L)
            L = e - a + 1
            return sqrt_lo(L, self.bits), sqrt_hi(L, self.bits)
        out = []
        for side in (0, 1):
            # state (position, used weight mask) -> best sum of squares
            best = {(a - 1, 0): Fraction(0)}
            for t in range(a, e + 1):
                for (pos, mask), val in list(best.items()):
                    if pos != t - 1:
                        continue
                    # skip coordinate t
                    key = (t, mask)
                    if best.get(key, -1) < val:
                        best[key] = val
                    # basis term at t
                    if best.get(key, -1) < val + 1:
                        best[key] = val + 1
                    # weighted child on [t, s]
                    for j in range(1, self.jmax + 1):
                        if mask >> j & 1:
                            continue
                        for s in range(t, e + 1):
                            self.count += 1
                            c = W[(j, t, s)][side]
                            k2 = (s, mask | 1 << j)
                            if best.get(k2, -1) < val + c * c:
                                best[k2] = val + c * c
            top = max(v for (pos, _), v in best.items() if pos == e)
            out.append(sqrt_lo(top, self.bits) if side == 0 else sqrt_hi(top, self.bits))
        return out[0], out[1]


def measure_average_bounds(j0: int, p: ParameterSystem, depth: int = 3, mode: str = "F'",
                           imax: int | None = None, jmax: int = 4) -> AverageBoundsTable:
    """Per weight class m_i: sup |f(avg)| over the enumerated F' functionals of
    weight m_i and depth <= depth, where avg is the average of n_J basis vectors
    (J = j0 in mode F', J = 2j0+1 in mode F'_{2j0+1})."""
    if j0 < 2:
        raise ValueError("j0 must be >= 2")
    if mode == "F'":
        J, fam = j0, j0
    elif mode in ("F'_{2j0+1}", "odd"):
        J, fam = 2 * j0 + 1, 2 * j0 + 1
        mode = "F'_{2j0+1}"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    N = p.n(J)
    if N > 64:
        raise ValueError(f"average length n_{J}={N} too large for exhaustive evaluation")
    leaf_cap = p.n(fam - 1)
    imax = imax or max(2 * jmax + 1, J + 2)
    dp = _AuxDP(p, N, leaf_cap, jmax)
    V, W = dp.run(max(depth - 1, 1))
    table = AverageBoundsTable(j0, mode, depth, N)
    mm = None
    for i in range(2, imax + 1):
        m_i = p.m(i)
        if i % 2 == 0:
            j = i // 2
            cap = min(2 * p.n_capped(i, N), N)
            lo = dp._partition(V, 0, N - 1, cap, 0) / m_i
            hi = dp._partition(V, 0, N - 1, cap, 1) / m_i
        else:
            cap = min(2 * p.n_capped(i, N), N)
            lo = dp._partition(V, 0, N - 1, cap, 0) / m_i
            hi = dp._partition(V, 0, N - 1, cap, 1) / m_i
        sup = Enclosure(lo / N, hi / N)
        cap_l1 = Fraction(1, m_i)
        if mode == "F'":
            small = i < j0
            full_scale = Fraction(4, m_i * p.m(j0)) if small else None
        else:
            if i == 2 * j0 + 1:
                continue
            small = i < 2 * j0 + 1
            full_scale = Fraction(4, m_i * p.m(2 * j0 + 1) ** 2) if small else None
        row = {"i": i, "m_i": m_i, "sup": sup.to_json(),
               "cap_l1_over_m_i": {"value": frac_str(cap_l1), "asserted": True, "holds": sup.hi <= cap_l1}}
        if full_scale is not None:
            row["paper_bound"] = {"value": frac_str(full_scale), "asserted": False,
                                  "measured_within": sup.hi <= full_scale}
        else:
            row["paper_bound"] = {"value": "M/m_i", "asserted": False}
            enc = Enclosure(sup.lo * m_i, sup.hi * m_i)
            mm = enc if mm is None else Enclosure(max(mm.lo, enc.lo), max(mm.hi, enc.hi))
        table.rows.append(row)
    table.m_meas = mm
    table.shapes = dp.count
    return table


# Basic inequality --------------------------------------------------------------

@dataclass
class BasicInequalityWitness:
    found: bool
    g: Functional
    eps_f: Fraction
    lhs: Fraction
    rhs: Fraction
    kind: str
    side_condition: bool | None
    tried: int

    def to_json(self):
        from .core import to_json
        return {"found": self.found, "g": to_json(self.g), "g_kind": self.kind,
                "eps_f": frac_str(self.eps_f), "lhs": frac_str(self.lhs), "rhs": frac_str(self.rhs),
                "side_condition": self.side_condition, "tried": self.tried}


def _side_ok(f: Functional, g: Functional, eps_f: Fraction, eps: Fraction) -> bool | None:
    """Extra clause when w(f) = m_{2j}: g = 0, g = +-e_n^*, or w(g) = w(f) with eps_f <= eps/w(f)."""
    if not isinstance(f, Weighted):
        return None
    if g.is_zero() or isinstance(g, Leaf):
        return True
    gw = g.m if isinstance(g, (Weighted, OddWeighted)) else None
    return gw == f.m and eps_f <= eps / f.m


def search_basic_inequality_witness(f: Functional, xs: Sequence[Vector], lams, I, j0: int, C, eps,
                                    p: ParameterSystem, budget: int = 10_000) -> BasicInequalityWitness:
    """Look for g in F'_{j0} and eps_f <= eps with
    |f(sum_{k in I} lam_k x_k)| <= C (g(sum |lam_k| e_k) + eps_f sum |lam_k|).

    Candidates: 0, basis functionals, sign-sum leaves on the largest |lam_k|,
    weighted functionals mirroring w(f), and odd-weight tops. The smallest
    admissible eps_f is computed exactly for each candidate.
    """
    C, eps = Fraction(C), Fraction(eps)
    lams = [Fraction(v) for v in lams]
    I = list(I)
    z = vsum(xs[k - 1].scale(lams[k - 1]) for k in I)
    lhs = abs(evaluate(f, z))
    u = Vector.from_dict({k: abs(lams[k - 1]) for k in I})
    total = u.l1
    order = sorted((k for k in I if lams[k - 1] != 0), key=lambda k: (-abs(lams[k - 1]), k))
    cands: list[tuple[str, Functional]] = [("zero", ZERO)]
    for k in order[:8]:
        cands.append(("basis", Leaf(1, k)))
    if order:
        top = sorted(order[:p.n_capped(j0 - 1, len(order))])
        cands.append(("leaf", SignSum(tuple((1, k) for k in top))))
    wj = None
    if isinstance(f, Weighted):
        wj = f.j
    weights = ([wj] if wj else []) + [j for j in range(1, 7) if j != wj]
    for j in weights:
        cap = 2 * p.n_capped(2 * j, max(len(order), 1))
        chosen = sorted(order[:cap])
        if chosen:
            cands.append(("weighted", Weighted(j, p.m(2 * j), tuple(Leaf(1, k) for k in chosen))))
    for j in range(1, 4):
        cap = 2 * p.n_capped(2 * j + 1, max(len(order), 1))
        chosen = sorted(order[:cap])
        if chosen:
            cands.append(("odd", OddWeighted(j, p.m(2 * j + 1), tuple(Leaf(1, k) for k in chosen))))
    best = None
    tried = 0
    for kind, g in cands[:budget]:
        tried += 1
        if not g.is_zero() and not validate_aux(g, j0, "F'", p):
            continue
        gv = evaluate(g, u)
        need = Fraction(0) if total == 0 else max(Fraction(0), (lhs / C - gv) / total)
        side = _side_ok(f, g, need, eps)
        ok = need <= eps and side is not False
        key = (not ok, need)
        if best is None or key < best[0]:
            best = (key, kind, g, need, gv, side, ok)
    _, kind, g, need, gv, side, ok = best
    rhs = C * (gv + need * total)
    if ok and not lhs <= rhs:
        raise AssertionError("basic inequality witness does not re-verify")
    return BasicInequalityWitness(ok, g, need, lhs, rhs, kind, side, tried)


# Average bounds for RIS --------------------------------------------------------

@dataclass
class PropBoundReport:
    kind: str
    measured: Enclosure
    bound: Fraction
    hypotheses: dict
    asserted: bool
    holds: bool

    def to_json(self):
        return {"kind": self.kind, "measured": self.measured.to_json(), "paper_bound": frac_str(self.bound),
                "paper_bound_float": float(self.bound), "hypotheses": self.hypotheses,
                "asserted": self.asserted, "holds": self.holds}


def check_prop_bounds(xs: Sequence[Vector], j0: int, kind: str, p: ParameterSystem, reg=None, *, C, eps,
                      js: Sequence[int], ris_ok: bool = True, ks: Sequence[int] | None = None,
                      signs: Sequence[int] | None = None) -> PropBoundReport:
    """kind 'avg_W0': ||(1/n_{j0}) sum x_{k_r}||_W0 <= 3C/m_{j0}.
    kind 'signed_avg_G0': ||(1/n_{2j0+1}) sum a_r x_{k_r}||_G0 <= 3C/m_{2j0+1}^2."""
    from .norm import norm_G0, norm_W0
    C, eps = Fraction(C), Fraction(eps)
    if kind == "avg_W0":
        L, lev = p.n(j0), j0
        bound = 3 * C / p.m(j0)
    elif kind == "signed_avg_G0":
        L, lev = p.n(2 * j0 + 1), 2 * j0 + 1
        bound = 3 * C / p.m(2 * j0 + 1) ** 2
    else:
        raise ValueError(f"unknown kind {kind!r}")
    ks = list(ks) if ks is not None else list(range(1, L + 1))
    hyp = {"ris_certified": bool(ris_ok), "enough_blocks": len(ks) == L and max(ks, default=0) <= len(xs),
           "eps_small": eps < Fraction(2, p.m(lev) ** 2),
           "first_index_large": bool(js) and js[0] > lev}
    if not hyp["enough_blocks"]:
        raise ValueError(f"need {L} block indices within the sequence")
    signs = list(signs) if signs is not None else [1] * L
    if any(abs(s) > 1 for s in signs):
        raise ValueError("coefficients must satisfy |a_i| <= 1")
    y = vsum(xs[k - 1].scale(Fraction(s)) for k, s in zip(ks, signs)).scale(Fraction(1, L))
    cert = norm_W0(y, p, reg) if kind == "avg_W0" else norm_G0(y, p)
    asserted = all(hyp.values())
    holds = cert.hi <= bound
    return PropBoundReport(kind, cert.enclosure, bound, hyp, asserted, holds)

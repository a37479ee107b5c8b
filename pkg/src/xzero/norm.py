"""Certified G0 norms by an interval dynamic program, a brute-force oracle, and
the registry-relative W0 norm.

For a vector x and an interval E of its support positions let u(E) = ||E x||_G0.
Then

    u(E) = max( ||E x||_inf , ( sum_j b_j(E)^2 )^{1/2} ),
    b_j(E) = (1/m_{2j}) * max over partitions of E into at most n_{2j}
             successive intervals of sum u(part).

The single-part partition contributes u(E)/m_{2j}; by the triangle inequality
any split of E into two nonempty pieces does at least as well, so for intervals
with two or more support points only partitions into >= 2 parts are needed and
the equation is a plain recursion on shorter intervals. All weights j with
n_{2j} >= #E share the same best partition, so their contribution is the exact
geometric tail (sum_{j >= j*} m_{2j}^-2) * Q(E)^2.

Upper bounds are computed in fixed point with upward rounding. Lower bounds
come from an explicit witness tree whose value is evaluated exactly.
"""
from __future__ import annotations

import math

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterable

import numpy as np

from .core import (ZERO, EllTwo, Functional, Leaf, Special, Vector, Weighted, evaluate, to_json,
                   tree_size)
from .dyadic import Enclosure, ceil_scaled, floor_scaled, frac_str, isqrt_ceil, sqrt_hi
from .params import ParameterError, ParameterSystem, weight_tail_bound

DEFAULT_TOL = Fraction(1, 10 ** 9)


class NonConvergence(RuntimeError):
    def __init__(self, msg: str, last: "NormCertificate | None" = None):
        super().__init__(msg)
        self.last = last


@dataclass
class NormCertificate:
    lo: Fraction
    hi: Fraction
    witness: Functional
    tail: Fraction = Fraction(0)
    iterations: int = 1
    registry_relative: bool = False
    source: str = "G0"
    bits: int = 64

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(self.lo, self.hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def to_json(self, witness: bool = True) -> dict:
        doc = {
            "lo": frac_str(self.lo),
            "hi": frac_str(self.hi),
            "lo_float": float(self.lo),
            "hi_float": float(self.hi),
            "tail": frac_str(self.tail),
            "iterations": self.iterations,
            "registry_relative": self.registry_relative,
            "source": self.source,
        }
        if witness:
            if tree_size(self.witness) <= 5000:
                doc["witness"] = to_json(self.witness)
            else:
                doc["witness"] = {"omitted": True, "tree_size": tree_size(self.witness)}
        return doc


def _require_surrogate(p: ParameterSystem):
    if p.mode != "surrogate":
        raise ParameterError("norm computation needs a surrogate parameter system (full scale is symbolic only)")


# Interval dynamic program ------------------------------------------------------

class _Tables:
    """Fixed-point lower/upper tables over intervals of support positions."""

    def __init__(self, x: Vector, p: ParameterSystem, bits: int):
        _require_surrogate(p)
        self.x, self.p, self.B = x, p, bits
        self.idx = [n for n, _ in x.coords]
        self.absv = [abs(v) for _, v in x.coords]
        N = self.N = len(self.idx)
        scale = x.linf
        self.scale = scale
        self.vlo = [floor_scaled(v / scale, bits) for v in self.absv]
        self.vhi = [ceil_scaled(v / scale, bits) for v in self.absv]
        # weight classes with a binding arity bound
        self.classes = []  # (j, n_{2j}, m_{2j}) with n_{2j} < N
        j = 1
        while True:
            n = p.n(2 * j)
            if n >= N:
                break
            self.classes.append((j, n, p.m(2 * j)))
            j += 1
        self.K = max((n for _, n, _ in self.classes), default=1)
        self.tails = {}
        self._build()

    def jstar(self, L: int) -> int:
        j = 1
        for jj, n, _ in self.classes:
            if n >= L:
                return jj
            j = jj + 1
        return j

    def tail(self, js: int) -> Fraction:
        if js not in self.tails:
            self.tails[js] = self.p.inverse_square_tail(js - 1)
        return self.tails[js]

    def _build(self):
        N, K = self.N, self.K
        self.ulo = [[0] * N for _ in range(N)]
        self.uhi = [[0] * N for _ in range(N)]
        self.leafwin = [[True] * N for _ in range(N)]
        # P[a][e] = list for k = 1..min(L, K) (at most k parts), Pfull = any number of parts
        self.Plo = [[None] * N for _ in range(N)]
        self.Phi = [[None] * N for _ in range(N)]
        self.Parg = [[None] * N for _ in range(N)]  # split point per k (lo table), -1 = single part
        self.Flo = [[0] * N for _ in range(N)]
        self.Fhi = [[0] * N for _ in range(N)]
        self.Farg = [[-1] * N for _ in range(N)]
        self.Qlo = {}
        for a in range(N):
            self.ulo[a][a] = self.vlo[a]
            self.uhi[a][a] = self.vhi[a]
            self.Plo[a][a] = [self.vlo[a]]
            self.Phi[a][a] = [self.vhi[a]]
            self.Parg[a][a] = [-1]
            self.Flo[a][a] = self.vlo[a]
            self.Fhi[a][a] = self.vhi[a]
        mx_lo = [[0] * N for _ in range(N)]
        mx_hi = [[0] * N for _ in range(N)]
        for a in range(N):
            ml = mh = 0
            for e in range(a, N):
                ml = max(ml, self.vlo[e])
                mh = max(mh, self.vhi[e])
                mx_lo[a][e], mx_hi[a][e] = ml, mh
        ulo, uhi, Plo, Phi, Flo, Fhi = self.ulo, self.uhi, self.Plo, self.Phi, self.Flo, self.Fhi
        for L in range(2, N + 1):
            js = self.jstar(L)
            T = self.tail(js)
            Tn, Td = T.numerator, T.denominator
            kmax = min(L, K)
            binding = [(j, n, m) for j, n, m in self.classes if n < L]
            for a in range(0, N - L + 1):
                e = a + L - 1
                # Q_k for k = 2..kmax (k parts at most, >= 2), and the unbounded version
                qlo = [0] * (kmax + 1)
                qhi = [0] * (kmax + 1)
                qarg = [-1] * (kmax + 1)
                flo = fhi = -1
                farg = -1
                for c in range(a, e):
                    r_lo, r_hi = ulo[c + 1][e], uhi[c + 1][e]
                    Lc = c - a + 1
                    pl, ph = Plo[a][c], Phi[a][c]
                    vl = Flo[a][c] + r_lo
                    vh = Fhi[a][c] + r_hi
                    if vl > flo:
                        flo, farg = vl, c
                    if vh > fhi:
                        fhi = vh
                    for k in range(2, kmax + 1):
                        if k - 1 >= Lc:
                            sl = Flo[a][c] + r_lo
                            sh = Fhi[a][c] + r_hi
                        else:
                            sl = pl[k - 2] + r_lo
                            sh = ph[k - 2] + r_hi
                        if sl > qlo[k]:
                            qlo[k], qarg[k] = sl, c
                        if sh > qhi[k]:
                            qhi[k] = sh
                # u(E)
                sq_lo = sq_hi = 0
                for j, n, m in binding:
                    bl = qlo[n] // m
                    bh = -((-qhi[n]) // m)
                    sq_lo += bl * bl
                    sq_hi += bh * bh
                sq_lo += (flo * flo * Tn) // Td
                sq_hi += -((-fhi * fhi * Tn) // Td)
                el_lo, el_hi = isqrt(sq_lo), isqrt_ceil(sq_hi)
                lin_lo, lin_hi = mx_lo[a][e], mx_hi[a][e]
                self.leafwin[a][e] = lin_lo >= el_lo
                u_l = max(lin_lo, el_lo)
                u_h = max(lin_hi, el_hi)
                ulo[a][e], uhi[a][e] = u_l, u_h
                Flo[a][e] = max(u_l, flo)
                Fhi[a][e] = max(u_h, fhi)
                self.Farg[a][e] = farg if flo > u_l else -1
                pl_new = [u_l]
                ph_new = [u_h]
                pa_new = [-1]
                for k in range(2, kmax + 1):
                    if k >= L:
                        break
                    if qlo[k] > u_l:
                        pl_new.append(qlo[k])
                        pa_new.append(qarg[k])
                    else:
                        pl_new.append(u_l)
                        pa_new.append(-1)
                    ph_new.append(max(u_h, qhi[k]))
                Plo[a][e], Phi[a][e], self.Parg[a][e] = pl_new, ph_new, pa_new
                self.Qlo[(a, e)] = (qlo, qarg, flo, farg, fhi, qhi)

    # partition reconstruction from the lower table

    def parts_at_most(self, a: int, e: int, k: int) -> list[tuple[int, int]]:
        """Best partition of [a, e] into at most k parts (k=None: unbounded)."""
        out = []
        while True:
            L = e - a + 1
            if k is None or k >= L:
                c = self.Farg[a][e]
            else:
                c = self.Parg[a][e][k - 1] if k - 1 < len(self.Parg[a][e]) else self.Farg[a][e]
            if c == -1 or L == 1:
                out.append((a, e))
                break
            # last part is (c+1, e), the rest goes into at most k-1 parts
            out.append((c + 1, e))
            e = c
            if k is not None:
                k -= 1
        out.reverse()
        return out

    def best_split(self, a: int, e: int, n: int | None) -> list[tuple[int, int]]:
        """Best partition with >= 2 parts (at most n parts; None = unbounded)."""
        qlo, qarg, flo, farg, _, _ = self.Qlo[(a, e)]
        L = e - a + 1
        if n is None or n >= L:
            c = farg
            head = self.parts_at_most(a, c, None)
        else:
            c = qarg[n]
            head = self.parts_at_most(a, c, n - 1)
        return head + [(c + 1, e)]


class _WitnessBuilder:
    def __init__(self, T: _Tables, tol: Fraction, grid_bits: int):
        self.T = T
        self.p = T.p
        self.g = grid_bits
        self.tol = tol
        self.memo: dict[tuple[int, int], tuple[Functional, Fraction]] = {}
        self.signs = [1 if v > 0 else -1 for _, v in T.x.coords]

    def extra_weights(self, L: int, js: int) -> int:
        """Last weight index to include explicitly so the omitted tail is below tol/8."""
        T = self.T
        l1 = sum(T.absv)
        J = max(js, 1)
        while weight_tail_bound(self.p, l1, J) > self.tol / 8:
            J += 1
        return J

    def build(self, a: int, e: int) -> tuple[Functional, Fraction]:
        key = (a, e)
        if key in self.memo:
            return self.memo[key]
        T = self.T
        L = e - a + 1
        # best leaf
        i = max(range(a, e + 1), key=lambda t: T.absv[t])
        leaf_f = Leaf(self.signs[i], T.idx[i])
        leaf_v = T.absv[i]
        if L == 1 or T.leafwin[a][e]:
            self.memo[key] = (leaf_f, leaf_v)
            return self.memo[key]
        js = T.jstar(L)
        Jw = self.extra_weights(L, js)
        children: list[tuple[Functional, Fraction]] = []
        cache_parts: dict = {}
        for j in range(1, Jw + 1):
            n = self.p.n(2 * j)
            m = self.p.m(2 * j)
            kk = None if n >= L else n
            if kk not in cache_parts:
                parts = T.best_split(a, e, kk)
                built = [self.build(s, t) for s, t in parts]
                cache_parts[kk] = (tuple(f for f, _ in built), sum((v for _, v in built), Fraction(0)))
            kids, total = cache_parts[kk]
            children.append((Weighted(j, m, kids), total / m))
        sq = sum((v * v for _, v in children), Fraction(0))
        nhi = sqrt_hi(sq, self.g + 8)
        terms = []
        val = Fraction(0)
        for f, v in children:
            a_j = Fraction(floor_scaled(v / nhi, self.g), 1 << self.g)
            if a_j > 0:
                terms.append((a_j, f))
                val += a_j * v
        if val <= leaf_v or not terms:
            self.memo[key] = (leaf_f, leaf_v)
        else:
            self.memo[key] = (EllTwo(tuple(terms)), val)
        return self.memo[key]


def _certify(x: Vector, p: ParameterSystem, tol: Fraction, bits: int, grid_bits: int):
    T = _Tables(x, p, bits)
    W = _WitnessBuilder(T, tol, grid_bits)
    f, lo = W.build(0, T.N - 1)
    hi = Fraction(T.uhi[0][T.N - 1], 1 << bits) * T.scale
    l1 = x.l1
    tail = weight_tail_bound(p, l1, W.extra_weights(T.N, T.jstar(T.N)))
    return T, f, lo, hi, tail


def norm_G0(x: Vector, p: ParameterSystem, tol=DEFAULT_TOL, bits: int = 64, grid_bits: int = 48,
            attempts: int = 3) -> NormCertificate:
    """Certified enclosure of ||x||_G0 with width <= tol and an explicit witness."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    _require_surrogate(p)
    if not x:
        return NormCertificate(Fraction(0), Fraction(0), ZERO, Fraction(0), 0)
    # fixed point is relative to max|x_n|; widen it by the dynamic range of the coordinates
    spread = x.linf / min(abs(v) for _, v in x.coords)
    extra = math.ceil(spread).bit_length() - 1
    bits += extra
    grid_bits += extra
    last = None
    for attempt in range(attempts):
        T, f, lo, hi, tail = _certify(x, p, tol, bits, grid_bits)
        if hi < lo:
            # the tables are rounded outward, so this would be a defect
            raise AssertionError(f"upper bound {hi} below witness value {lo}")
        last = NormCertificate(lo, hi, f, tail, attempt + 1, bits=bits)
        if hi - lo <= tol:
            return last
        bits += 32
        grid_bits += 32
    raise NonConvergence(f"enclosure width {float(last.width):.3g} exceeds tol {float(tol):.3g}", last)


def weight_profile(x: Vector, p: ParameterSystem, js: Iterable[int], bits: int = 64) -> dict[int, Enclosure]:
    """Enclosures of b_j(ran x) for the requested weight indices j (weights m_{2j})."""
    js = list(js)
    out: dict[int, Enclosure] = {}
    if not x:
        return {j: Enclosure(Fraction(0), Fraction(0)) for j in js}
    _require_surrogate(p)
    T = _Tables(x, p, bits)
    W = _WitnessBuilder(T, DEFAULT_TOL, 48)
    N = T.N
    S = Fraction(1, 1 << bits) * T.scale
    for j in js:
        m, n = p.m(2 * j), p.n(2 * j)
        if N == 1:
            v = T.absv[0] / m
            out[j] = Enclosure(v, v)
            continue
        qlo, qarg, flo, farg, fhi, qhi = T.Qlo[(0, N - 1)]
        hi_q = fhi if n >= N else qhi[n]
        hi = max(Fraction(-((-hi_q) // m)) * S, Fraction(-((-T.uhi[0][N - 1]) // m)) * S)
        parts = T.best_split(0, N - 1, None if n >= N else n)
        lo = sum((W.build(s, t)[1] for s, t in parts), Fraction(0)) / m
        out[j] = Enclosure(min(lo, hi), hi)
    return out


def best_weighted_value(x: Vector, j: int, p: ParameterSystem, tol=DEFAULT_TOL) -> Enclosure:
    return weight_profile(x, p, [j])[j]


def best_weighted_witness(x: Vector, j: int, p: ParameterSystem) -> tuple[Weighted, Fraction]:
    """A weighted functional of weight m_{2j} with exact value close to b_j(ran x)."""
    _require_surrogate(p)
    T = _Tables(x, p, 64)
    W = _WitnessBuilder(T, DEFAULT_TOL, 48)
    N = T.N
    m, n = p.m(2 * j), p.n(2 * j)
    parts = [(0, 0)] if N == 1 else T.best_split(0, N - 1, None if n >= N else n)
    built = [W.build(s, t) for s, t in parts]
    f = Weighted(j, m, tuple(b[0] for b in built))
    return f, sum((b[1] for b in built), Fraction(0)) / m


def quick_lower_bound(x: Vector, p: ParameterSystem, max_j: int = 8) -> tuple[Fraction, Functional]:
    """Cheap certified lower bound: best of a leaf and flat weighted sums of top coordinates."""
    if not x:
        return Fraction(0), ZERO
    best_i = max(range(len(x.coords)), key=lambda t: abs(x.coords[t][1]))
    n, v = x.coords[best_i]
    best = (abs(v), Leaf(1 if v > 0 else -1, n))
    order = sorted(x.coords, key=lambda t: -abs(t[1]))
    for j in range(1, max_j + 1):
        k = p.n_capped(2 * j, len(order))
        chosen = sorted(order[:k])
        m = p.m(2 * j)
        val = sum((abs(c) for _, c in chosen), Fraction(0)) / m
        if val > best[0]:
            best = (val, Weighted(j, m, tuple(Leaf(1 if c > 0 else -1, i) for i, c in chosen)))
    return best


# Brute-force oracle ------------------------------------------------------------

@dataclass
class OracleResult:
    value: Fraction
    witness: Functional
    complete: bool
    evaluated: int = 0

    def to_json(self):
        return {"value": frac_str(self.value), "value_float": float(self.value), "complete": self.complete,
                "evaluated": self.evaluated, "witness": to_json(self.witness)}


def _grid_knapsack(vals: list[Fraction], g: int):
    """max sum k_i v_i / 2^g over integers 0 <= k_i with sum k_i^2 <= 4^g. Exact."""
    G = 1 << g
    cap = G * G
    if not vals:
        return Fraction(0), []
    den = 1
    for v in vals:
        den = den * v.denominator // _gcd(den, v.denominator)
    ints = [int(v * den) for v in vals]
    bound = sum(ints) * G
    use_np = bound < (1 << 62)
    if use_np:
        best = np.zeros(cap + 1, dtype=np.int64)
        neg = np.iinfo(np.int64).min // 4
    else:
        best = [0] * (cap + 1)
    choices = []
    for c in ints:
        if use_np:
            new = best.copy()
            arg = np.zeros(cap + 1, dtype=np.int16)
            for k in range(1, G + 1):
                k2 = k * k
                cand = np.full(cap + 1, neg, dtype=np.int64)
                cand[k2:] = best[:cap + 1 - k2] + k * c
                better = cand > new
                new[better] = cand[better]
                arg[better] = k
            best = new
        else:
            new = list(best)
            arg = [0] * (cap + 1)
            for b in range(cap + 1):
                k = 1
                while k <= G and k * k <= b:
                    cand = best[b - k * k] + k * c
                    if cand > new[b]:
                        new[b], arg[b] = cand, k
                    k += 1
            best = new
        choices.append(arg)
    bstar = int(np.argmax(best)) if use_np else max(range(cap + 1), key=lambda b: best[b])
    top = int(best[bstar])
    ks = []
    b = bstar
    for arg in reversed(choices):
        k = int(arg[b])
        ks.append(k)
        b -= k * k
    ks.reverse()
    return Fraction(top, den * G), ks


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def norm_G0_oracle(x: Vector, p: ParameterSystem, depth: int = 3, grid_bits: int = 6, max_j: int = 6,
                   budget: int = 10 ** 6) -> OracleResult:
    """Exhaustive maximum over norming trees of bounded depth with grid coefficients.

    Depth counts node levels: a leaf has depth 1, a weighted node over leaves
    depth 2, an l2 combination of those depth 3. Weighted nodes range over
    gapped families of disjoint successive sub-intervals, not just partitions.
    """
    _require_surrogate(p)
    if not x:
        return OracleResult(Fraction(0), ZERO, True)
    idx = [n for n, _ in x.coords]
    absv = [abs(v) for _, v in x.coords]
    sg = [1 if v > 0 else -1 for _, v in x.coords]
    N = len(idx)
    counter = [0]
    complete = True
    # V[(a,e)] -> (value, functional) best of depth <= d; Wj[(j,a,e)] best weighted of weight j
    V = {}
    for a in range(N):
        for e in range(a, N):
            i = max(range(a, e + 1), key=lambda t: absv[t])
            V[(a, e)] = (absv[i], Leaf(sg[i], idx[i]))
    Wbest: dict = {}
    for d in range(2, depth + 1):
        newW = {}
        for j in range(1, max_j + 1):
            m, n = p.m(2 * j), p.n_capped(2 * j, N)
            for a in range(N):
                # G[k][e] best gapped sum of at most k parts inside [a, e]
                for e in range(a, N):
                    newW[(j, a, e)] = None
            for a in range(N):
                prev = {e: (Fraction(0), ()) for e in range(a - 1, N)}
                best_any = {e: (Fraction(0), ()) for e in range(a - 1, N)}
                for k in range(1, n + 1):
                    cur = {a - 1: (Fraction(0), ())}
                    for e in range(a, N):
                        cand = cur[e - 1]
                        for c in range(a, e + 1):
                            counter[0] += 1
                            left = prev[c - 1] if c - 1 >= a - 1 else (Fraction(0), ())
                            val = left[0] + V[(c, e)][0]
                            if val > cand[0]:
                                cand = (val, left[1] + ((c, e),))
                        cur[e] = cand
                    prev = cur
                    for e in range(a, N):
                        if cur[e][0] > best_any[e][0]:
                            best_any[e] = cur[e]
                for e in range(a, N):
                    val, parts = best_any[e]
                    if parts:
                        f = Weighted(j, m, tuple(V[pp][1] for pp in parts))
                        newW[(j, a, e)] = (val / m, f)
            if counter[0] > budget:
                complete = False
        newV = dict(V)
        for (j, a, e), item in newW.items():
            if item is not None and item[0] > newV[(a, e)][0]:
                newV[(a, e)] = item
        if d >= 3:
            for a in range(N):
                for e in range(a, N):
                    kids = [Wbest.get((j, a, e)) for j in range(1, max_j + 1)]
                    kids = [k for k in kids if k is not None]
                    if not kids:
                        continue
                    val, ks = _grid_knapsack([k[0] for k in kids], grid_bits)
                    counter[0] += 1
                    if val > newV[(a, e)][0]:
                        G = 1 << grid_bits
                        terms = tuple((Fraction(kk, G), kid[1]) for kk, kid in zip(ks, kids) if kk > 0)
                        newV[(a, e)] = (val, EllTwo(terms))
        # weighted values of depth <= d feed l2 nodes of depth d+1
        for key, item in newW.items():
            if item is not None:
                old = Wbest.get(key)
                if old is None or item[0] > old[0]:
                    Wbest[key] = item
        V = newV
    val, f = V[(0, N - 1)]
    return OracleResult(val, f, complete, counter[0])


# Registry-relative W0 norm -----------------------------------------------------

def best_special_value(x: Vector, reg) -> tuple[Fraction, Functional | None]:
    """max over registered special functionals Phi, signs and intervals E of |E Phi (x)|."""
    best: tuple[Fraction, Functional | None] = (Fraction(0), None)
    if reg is None or not x:
        return best
    xm = x.mapping
    for phi in reg.special_functionals():
        coef = phi.coefficients
        pts = sorted(n for n in coef if n in xm)
        if not pts:
            continue
        run = Fraction(0)
        pmin, pmin_at = Fraction(0), 0
        pmax, pmax_at = Fraction(0), 0
        prefix = [Fraction(0)]
        for n in pts:
            run += coef[n] * xm[n]
            prefix.append(run)
        # max |prefix[t] - prefix[s]| over s < t
        lo_i = hi_i = 0
        for t in range(1, len(prefix)):
            if prefix[t] - prefix[lo_i] > best[0]:
                E = (pts[lo_i], pts[t - 1])
                best = (prefix[t] - prefix[lo_i], phi.with_interval(E, 1))
            if prefix[hi_i] - prefix[t] > best[0]:
                E = (pts[hi_i], pts[t - 1])
                best = (prefix[hi_i] - prefix[t], phi.with_interval(E, -1))
            if prefix[t] < prefix[lo_i]:
                lo_i = t
            if prefix[t] > prefix[hi_i]:
                hi_i = t
    return best


def norm_W0(x: Vector, p: ParameterSystem, reg, tol=DEFAULT_TOL) -> NormCertificate:
    """Registry-relative W0 norm: exact over instantiated special functionals."""
    cert = norm_G0(x, p, tol)
    sv, sf = best_special_value(x, reg)
    lo, hi, w, src = cert.lo, cert.hi, cert.witness, "G0"
    if sf is not None and sv > lo:
        lo, w, src = sv, sf, "special"
    hi = max(hi, sv)
    return NormCertificate(lo, hi, w, cert.tail, cert.iterations, registry_relative=True, source=src,
                           bits=cert.bits)


def w0_equals_g0(x: Vector, p: ParameterSystem, reg, cert: NormCertificate | None = None) -> tuple[bool, Fraction]:
    """True when no registered special functional exceeds the certified G0 upper bound."""
    cert = cert or norm_G0(x, p)
    sv, _ = best_special_value(x, reg)
    return sv <= cert.hi, sv

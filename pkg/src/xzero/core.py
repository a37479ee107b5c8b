"""Finitely supported vectors and functional trees over the norming-set grammars.

Functionals are immutable trees that may share subtrees (witness trees produced
by the norm engine are DAGs). Every derived quantity (coefficients, range,
validation) is cached per node so shared subtrees are processed once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .dyadic import frac_str, parse_frac
from .params import ParameterSystem


# Vectors -----------------------------------------------------------------------

@dataclass(frozen=True)
class Vector:
    """Finitely supported rational vector, stored as sorted (index, value) pairs."""
    coords: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        prev = 0
        for n, v in self.coords:
            if n <= prev:
                raise ValueError("vector indices must be positive and strictly increasing")
            if v == 0:
                raise ValueError("vectors never store zero coordinates")
            prev = n

    @classmethod
    def from_dict(cls, d: Mapping[int, object]) -> "Vector":
        items = []
        for n, v in d.items():
            q = parse_frac(v) if not isinstance(v, Fraction) else v
            if q != 0:
                items.append((int(n), q))
        items.sort()
        return cls(tuple(items))

    @classmethod
    def basis(cls, n: int, value=1) -> "Vector":
        return cls(((n, Fraction(value)),))

    @classmethod
    def sum_basis(cls, indices: Iterable[int], value=1) -> "Vector":
        return cls.from_dict({n: Fraction(value) for n in indices})

    @cached_property
    def mapping(self) -> dict[int, Fraction]:
        return dict(self.coords)

    def __getitem__(self, n: int) -> Fraction:
        return self.mapping.get(n, Fraction(0))

    def __len__(self) -> int:
        return len(self.coords)

    def __bool__(self) -> bool:
        return bool(self.coords)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.coords)

    @property
    def range(self) -> tuple[int, int] | None:
        if not self.coords:
            return None
        return self.coords[0][0], self.coords[-1][0]

    @cached_property
    def l1(self) -> Fraction:
        return sum((abs(v) for _, v in self.coords), Fraction(0))

    @cached_property
    def linf(self) -> Fraction:
        return max((abs(v) for _, v in self.coords), default=Fraction(0))

    def restrict(self, E) -> "Vector":
        return Vector(tuple((n, v) for n, v in self.coords if _in(E, n)))

    def scale(self, a) -> "Vector":
        a = Fraction(a)
        if a == 0:
            return Vector()
        return Vector(tuple((n, v * a) for n, v in self.coords))

    def __add__(self, other: "Vector") -> "Vector":
        d = dict(self.coords)
        for n, v in other.coords:
            d[n] = d.get(n, Fraction(0)) + v
        return Vector.from_dict(d)

    def __sub__(self, other: "Vector") -> "Vector":
        return self + other.scale(-1)

    def __neg__(self) -> "Vector":
        return self.scale(-1)

    def abs(self) -> "Vector":
        return Vector(tuple((n, abs(v)) for n, v in self.coords))

    def shift(self, k: int) -> "Vector":
        return Vector(tuple((n + k, v) for n, v in self.coords))

    def to_json(self) -> dict:
        return {"coords": {str(n): frac_str(v) for n, v in self.coords}}

    @classmethod
    def from_json(cls, doc) -> "Vector":
        if isinstance(doc, dict) and "coords" in doc:
            doc = doc["coords"]
        if isinstance(doc, dict):
            return cls.from_dict({int(k): parse_frac(v) for k, v in doc.items()})
        return cls.from_dict({int(n): parse_frac(v) for n, v in doc})


def vsum(vectors: Iterable[Vector]) -> Vector:
    d: dict[int, Fraction] = {}
    for x in vectors:
        for n, v in x.coords:
            d[n] = d.get(n, Fraction(0)) + v
    return Vector.from_dict(d)


def _in(E, n: int) -> bool:
    if E is None:
        return True
    if isinstance(E, tuple) and len(E) == 2 and not isinstance(E, frozenset):
        return E[0] <= n <= E[1]
    return n in E


def successive(ranges: Iterable[tuple[int, int] | None]) -> bool:
    last = 0
    for r in ranges:
        if r is None or r[0] <= last:
            return False
        last = r[1]
    return True


# Functional nodes --------------------------------------------------------------

class Functional:
    """Base class. Subclasses are frozen dataclasses."""

    @cached_property
    def coefficients(self) -> dict[int, Fraction]:
        raise NotImplementedError

    @cached_property
    def range(self) -> tuple[int, int] | None:
        c = self.coefficients
        if not c:
            return None
        return min(c), max(c)

    @cached_property
    def sup_norm(self) -> Fraction:
        return max((abs(v) for v in self.coefficients.values()), default=Fraction(0))

    def is_zero(self) -> bool:
        return not self.coefficients

    def negate(self) -> "Functional":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Zero(Functional):
    @cached_property
    def coefficients(self):
        return {}

    def negate(self):
        return self


ZERO = Zero()


@dataclass(frozen=True, eq=False)
class Leaf(Functional):
    sign: int
    n: int

    def __post_init__(self):
        if self.sign not in (1, -1) or self.n < 1:
            raise ValueError("leaf needs sign in {+1,-1} and index >= 1")

    @cached_property
    def coefficients(self):
        return {self.n: Fraction(self.sign)}

    def negate(self):
        return Leaf(-self.sign, self.n)


@dataclass(frozen=True, eq=False)
class Weighted(Functional):
    """(1/m) * sum(children); m = m_{2j}."""
    j: int
    m: int
    children: tuple[Functional, ...]

    @cached_property
    def coefficients(self):
        out: dict[int, Fraction] = {}
        for c in self.children:
            for n, v in c.coefficients.items():
                out[n] = out.get(n, Fraction(0)) + v
        return {n: v / self.m for n, v in out.items() if v != 0}

    def negate(self):
        return Weighted(self.j, self.m, tuple(c.negate() for c in self.children))


@dataclass(frozen=True, eq=False)
class EllTwo(Functional):
    """sum a_i * child_i with sum a_i^2 <= 1."""
    terms: tuple[tuple[Fraction, Functional], ...]

    @cached_property
    def coefficients(self):
        out: dict[int, Fraction] = {}
        for a, c in self.terms:
            if a == 0:
                continue
            for n, v in c.coefficients.items():
                out[n] = out.get(n, Fraction(0)) + a * v
        return {n: v for n, v in out.items() if v != 0}

    def negate(self):
        return EllTwo(tuple((-a, c) for a, c in self.terms))


@dataclass(frozen=True, eq=False)
class SignSum(Functional):
    """sum eps_i e_i^* over a finite set (the auxiliary leaves)."""
    terms: tuple[tuple[int, int], ...]

    @cached_property
    def coefficients(self):
        out = {}
        for s, n in self.terms:
            out[n] = out.get(n, Fraction(0)) + s
        return {n: v for n, v in out.items() if v != 0}

    def negate(self):
        return SignSum(tuple((-s, n) for s, n in self.terms))


@dataclass(frozen=True, eq=False)
class OddWeighted(Functional):
    """(1/m_{2j+1}) * sum(children), the top node of the primed auxiliary family."""
    j: int
    m: int
    children: tuple[Functional, ...]

    @cached_property
    def coefficients(self):
        out: dict[int, Fraction] = {}
        for c in self.children:
            for n, v in c.coefficients.items():
                out[n] = out.get(n, Fraction(0)) + v
        return {n: v / self.m for n, v in out.items() if v != 0}

    def negate(self):
        return OddWeighted(self.j, self.m, tuple(c.negate() for c in self.children))


@dataclass(frozen=True, eq=False)
class Special(Functional):
    """sign * E * (1/m_{2j+1}) * sum(components) for a registered special sequence."""
    j: int
    m: int
    seq_id: str
    components: tuple[Functional, ...]
    sign: int = 1
    E: tuple[int, int] | None = None

    @cached_property
    def coefficients(self):
        out: dict[int, Fraction] = {}
        for c in self.components:
            for n, v in c.coefficients.items():
                if _in(self.E, n):
                    out[n] = out.get(n, Fraction(0)) + v
        return {n: self.sign * v / self.m for n, v in out.items() if v != 0}

    def negate(self):
        return Special(self.j, self.m, self.seq_id, self.components, -self.sign, self.E)

    def with_interval(self, E, sign=None) -> "Special":
        return Special(self.j, self.m, self.seq_id, self.components, self.sign if sign is None else sign, E)


# Builders ----------------------------------------------------------------------

def leaf(n: int, sign: int = 1) -> Leaf:
    return Leaf(sign, n)


def weighted(p: ParameterSystem, j: int, children: Iterable[Functional]) -> Weighted:
    return Weighted(j, p.m(2 * j), tuple(children))


def elltwo(terms: Iterable[tuple[object, Functional]]) -> EllTwo:
    return EllTwo(tuple((Fraction(a), c) for a, c in terms))


def odd_weighted(p: ParameterSystem, j: int, children: Iterable[Functional]) -> OddWeighted:
    return OddWeighted(j, p.m(2 * j + 1), tuple(children))


def signsum(terms: Iterable[tuple[int, int]]) -> SignSum:
    return SignSum(tuple(sorted(((int(s), int(n)) for s, n in terms), key=lambda t: t[1])))


# Operations --------------------------------------------------------------------

def evaluate(f: Functional, x: Vector) -> Fraction:
    c = f.coefficients
    if len(c) < len(x.coords):
        m = x.mapping
        return sum((v * m[n] for n, v in c.items() if n in m), Fraction(0))
    return sum((c[n] * v for n, v in x.coords if n in c), Fraction(0))


def weight_of(f: Functional) -> int | None:
    if isinstance(f, (Weighted, Special, OddWeighted)):
        return f.m
    return None


def weight_index(f: Functional) -> int | None:
    """Index i with w(f) = m_i."""
    if isinstance(f, Weighted):
        return 2 * f.j
    if isinstance(f, (Special, OddWeighted)):
        return 2 * f.j + 1
    return None


def range_of(f: Functional) -> tuple[int, int] | None:
    return f.range


def restrict(f: Functional, E) -> Functional:
    """Push the restriction to E (interval tuple or finite set) down to the leaves."""
    memo: dict[int, Functional] = {}

    def go(g: Functional) -> Functional:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, Zero):
            out = g
        elif isinstance(g, Leaf):
            out = g if _in(E, g.n) else ZERO
        elif isinstance(g, SignSum):
            kept = tuple(t for t in g.terms if _in(E, t[1]))
            out = SignSum(kept) if kept else ZERO
        elif isinstance(g, (Weighted, OddWeighted)):
            kids = tuple(k for k in (go(c) for c in g.children) if not k.is_zero())
            out = type(g)(g.j, g.m, kids) if kids else ZERO
        elif isinstance(g, EllTwo):
            terms = tuple((a, k) for a, k in ((a, go(c)) for a, c in g.terms) if not k.is_zero())
            out = EllTwo(terms) if terms else ZERO
        elif isinstance(g, Special):
            if not (isinstance(E, tuple) and len(E) == 2):
                raise ValueError("special functionals can only be restricted to intervals")
            lo, hi = E
            if g.E is not None:
                lo, hi = max(lo, g.E[0]), min(hi, g.E[1])
            out = g.with_interval((lo, hi)) if lo <= hi else ZERO
            if not isinstance(out, Zero) and out.is_zero():
                out = ZERO
        else:
            raise TypeError(f"unknown node {type(g).__name__}")
        memo[key] = out
        return out

    return go(f)


# Family tags and validation ----------------------------------------------------

@dataclass(frozen=True)
class FamilyTag:
    kind: str  # G0, W0, Fj0, Fj0Prime
    j0: int | None = None

    def __post_init__(self):
        if self.kind not in ("G0", "W0", "Fj0", "Fj0Prime"):
            raise ValueError(f"unknown family {self.kind!r}")
        if self.kind in ("Fj0", "Fj0Prime") and (self.j0 is None or self.j0 < 2):
            raise ValueError("auxiliary families need j0 >= 2")

    @classmethod
    def parse(cls, s: str) -> "FamilyTag":
        s = s.strip()
        low = s.lower()
        if low in ("g0", "w0"):
            return cls(low.upper())
        for prefix, kind in (("fj0prime:", "Fj0Prime"), ("fprime:", "Fj0Prime"), ("f':", "Fj0Prime"), ("fj0:", "Fj0"),
                             ("f:", "Fj0")):
            if low.startswith(prefix):
                return cls(kind, int(low[len(prefix):]))
        raise ValueError(f"cannot parse family tag {s!r}")

    def __str__(self):
        return self.kind if self.j0 is None else f"{self.kind}({self.j0})"


G0 = FamilyTag("G0")
W0 = FamilyTag("W0")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "reason": self.reason}


PASS = Verdict(True)


class _Invalid(Exception):
    pass


def validate(f: Functional, tag: FamilyTag, p: ParameterSystem, reg=None) -> Verdict:
    """Structural membership check; the failure names the first violated clause."""
    if isinstance(f, Zero):
        return PASS
    try:
        if tag.kind in ("G0", "W0"):
            if isinstance(f, Special):
                if tag.kind != "W0":
                    raise _Invalid("special functional is not in G0")
                _check_special(f, p, reg)
            else:
                _Checker(p, "G0").check(f, top=True)
        else:
            aux = _Checker(p, "F", tag.j0)
            if isinstance(f, OddWeighted):
                if tag.kind != "Fj0Prime":
                    raise _Invalid("odd-weight top node only allowed in the primed family")
                aux.check_odd_top(f)
            else:
                aux.check(f, top=True)
    except _Invalid as e:
        return Verdict(False, str(e))
    return PASS


def _check_special(f: Special, p: ParameterSystem, reg) -> None:
    if f.sign not in (1, -1):
        raise _Invalid("special sign must be +1 or -1")
    if f.j < 1 or f.m != p.m(2 * f.j + 1):
        raise _Invalid(f"special weight {f.m} is not m_{2 * f.j + 1}")
    if f.E is not None and f.E[0] > f.E[1]:
        raise _Invalid("special restriction interval is empty")
    if reg is None:
        raise _Invalid("special functional cannot be validated without a registry")
    v = reg.check_registered(f.seq_id, f.j, f.components, p)
    if not v:
        raise _Invalid(v.reason)
    if f.sup_norm > 1:
        raise _Invalid(f"coordinate bound fails: |f|_inf = {f.sup_norm} > 1")


class _Checker:
    def __init__(self, p: ParameterSystem, grammar: str, j0: int | None = None):
        self.p = p
        self.grammar = grammar
        self.j0 = j0
        self.done: set[int] = set()

    def check(self, f: Functional, top: bool = False) -> None:
        if id(f) in self.done:
            return
        p = self.p
        if isinstance(f, Zero):
            if not top:
                raise _Invalid("zero functional inside a tree")
        elif isinstance(f, Leaf):
            pass
        elif isinstance(f, SignSum):
            if self.grammar != "F":
                raise _Invalid("sign-sum leaves belong to the auxiliary family only")
            idx = [n for _, n in f.terms]
            if len(set(idx)) != len(idx):
                raise _Invalid("sign-sum leaf repeats an index")
            if any(s not in (1, -1) for s, _ in f.terms):
                raise _Invalid("sign-sum leaf signs must be +1 or -1")
            cap = p.n(self.j0 - 1)
            if len(idx) > cap:
                raise _Invalid(f"leaf size #F={len(idx)} exceeds n_{self.j0 - 1}={cap}")
            if not idx:
                raise _Invalid("empty sign-sum leaf")
        elif isinstance(f, Weighted):
            if f.j < 1 or f.m != p.m(2 * f.j):
                raise _Invalid(f"weighted node weight {f.m} is not m_{2 * f.j}")
            d = len(f.children)
            if d < 1:
                raise _Invalid("weighted node has no children")
            cap = p.n_capped(2 * f.j, d)
            if self.grammar == "F":
                if d > 2 * p.n_capped(2 * f.j, d):
                    raise _Invalid(f"arity d={d} exceeds 2n_{2 * f.j}={2 * p.n(2 * f.j)}")
            elif d > cap:
                raise _Invalid(f"arity d={d} exceeds n_{2 * f.j}={p.n(2 * f.j)}")
            for c in f.children:
                if c.is_zero():
                    raise _Invalid("weighted node has a zero child")
            if not successive(c.range for c in f.children):
                raise _Invalid("children of a weighted node are not successive")
            for c in f.children:
                self.check(c)
        elif isinstance(f, EllTwo):
            if not f.terms:
                raise _Invalid("empty l2 combination")
            if sum((a * a for a, _ in f.terms), Fraction(0)) > 1:
                raise _Invalid("l2 coefficients violate sum a_i^2 <= 1")
            weights, idx = [], []
            for a, c in f.terms:
                if isinstance(c, Weighted):
                    weights.append(c.m)
                elif isinstance(c, Leaf) and self.grammar == "F":
                    idx.append(c.n)
                else:
                    raise _Invalid(f"l2 combination child of type {type(c).__name__} not allowed in "
                                   f"{'G0' if self.grammar == 'G0' else 'the auxiliary family'}")
            if len(set(weights)) != len(weights):
                raise _Invalid("l2 combination children must have pairwise distinct weights")
            if len(set(idx)) != len(idx):
                raise _Invalid("l2 combination basis terms must have distinct indices")
            for _, c in f.terms:
                self.check(c)
        elif isinstance(f, Special):
            raise _Invalid("special functional nested inside a tree")
        elif isinstance(f, OddWeighted):
            raise _Invalid("odd-weight node nested inside a tree")
        else:
            raise _Invalid(f"unknown node {type(f).__name__}")
        if f.sup_norm > 1:
            raise _Invalid(f"coordinate bound fails: |f|_inf = {f.sup_norm} > 1")
        self.done.add(id(f))

    def check_odd_top(self, f: OddWeighted) -> None:
        p = self.p
        if f.j < 1 or f.m != p.m(2 * f.j + 1):
            raise _Invalid(f"odd-weight node weight {f.m} is not m_{2 * f.j + 1}")
        d = len(f.children)
        if d < 1:
            raise _Invalid("odd-weight node has no children")
        if d > 2 * p.n_capped(2 * f.j + 1, d):
            raise _Invalid(f"arity d={d} exceeds 2n_{2 * f.j + 1}={2 * p.n(2 * f.j + 1)}")
        for c in f.children:
            if c.is_zero():
                raise _Invalid("odd-weight node has a zero child")
        if not successive(c.range for c in f.children):
            raise _Invalid("children of an odd-weight node are not successive")
        for c in f.children:
            self.check(c)
        if f.sup_norm > 1:
            raise _Invalid(f"coordinate bound fails: |f|_inf = {f.sup_norm} > 1")


# JSON --------------------------------------------------------------------------

def to_json(f: Functional, max_nodes: int = 200_000) -> dict:
    budget = [max_nodes]

    def go(g):
        budget[0] -= 1
        if budget[0] < 0:
            raise ValueError("functional tree too large to serialize")
        if isinstance(g, Zero):
            return {"zero": {}}
        if isinstance(g, Leaf):
            return {"leaf": {"sign": g.sign, "n": g.n}}
        if isinstance(g, SignSum):
            return {"signsum": {"terms": [[s, n] for s, n in g.terms]}}
        if isinstance(g, Weighted):
            return {"weighted": {"j": g.j, "children": [go(c) for c in g.children]}}
        if isinstance(g, OddWeighted):
            return {"oddweighted": {"j": g.j, "children": [go(c) for c in g.children]}}
        if isinstance(g, EllTwo):
            return {"elltwo": {"terms": [{"a": frac_str(a), "child": go(c)} for a, c in g.terms]}}
        if isinstance(g, Special):
            return {"special": {"j": g.j, "seq_id": g.seq_id, "sign": g.sign,
                                "E": list(g.E) if g.E is not None else None}}
        raise TypeError(type(g).__name__)

    return go(f)


def tree_size(f: Functional) -> int:
    """Node count of the expanded tree (shared subtrees counted per occurrence)."""
    memo: dict[int, int] = {}

    def go(g):
        if id(g) in memo:
            return memo[id(g)]
        if isinstance(g, (Weighted, OddWeighted)):
            s = 1 + sum(go(c) for c in g.children)
        elif isinstance(g, EllTwo):
            s = 1 + sum(go(c) for _, c in g.terms)
        else:
            s = 1
        memo[id(g)] = s
        return s

    return go(f)


def from_json(doc: dict, p: ParameterSystem, reg=None) -> Functional:
    (kind, body), = doc.items()
    if kind == "zero":
        return ZERO
    if kind == "leaf":
        return Leaf(int(body.get("sign", 1)), int(body["n"]))
    if kind == "signsum":
        return signsum((s, n) for s, n in body["terms"])
    if kind == "weighted":
        return weighted(p, int(body["j"]), [from_json(c, p, reg) for c in body["children"]])
    if kind == "oddweighted":
        return odd_weighted(p, int(body["j"]), [from_json(c, p, reg) for c in body["children"]])
    if kind == "elltwo":
        return elltwo((parse_frac(t["a"]), from_json(t["child"], p, reg)) for t in body["terms"])
    if kind == "special":
        if reg is None:
            raise ValueError("decoding a special functional needs a registry")
        base = reg.special_functional(body["seq_id"], p)
        E = tuple(body["E"]) if body.get("E") is not None else None
        return base.with_interval(E, int(body.get("sign", 1)))
    raise ValueError(f"unknown node kind {kind!r}")

"""The coding map sigma on prefixes of successive G0 functionals and the
special sequences it drives.

The registry is append-only and journaled as JSON lines. Replaying a journal
reproduces the registry, and dumping the replayed registry gives back the same
bytes.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import (G0, EllTwo, Functional, Leaf, Special, Verdict, Weighted, from_json, successive,
                   to_json, validate)
from .params import ParameterSystem


class CodingError(ValueError):
    pass


def _canonical(f: Functional):
    doc = to_json(f)

    def sort_terms(d):
        # l2 terms are ordered by the weight of their child
        if isinstance(d, dict):
            if "elltwo" in d:
                terms = [dict(t, child=sort_terms(t["child"])) for t in d["elltwo"]["terms"]]
                terms.sort(key=lambda t: json.dumps(t["child"], sort_keys=True))
                terms.sort(key=lambda t: next(iter(t["child"].values())).get("j", 0))
                return {"elltwo": {"terms": terms}}
            return {k: sort_terms(v) for k, v in d.items()}
        if isinstance(d, list):
            return [sort_terms(v) for v in d]
        return d

    return sort_terms(doc)


def encode(f: Functional) -> str:
    """Canonical syntactic encoding: equal trees encode equally."""
    return json.dumps(_canonical(f), sort_keys=True, separators=(",", ":"))


def prefix_hash(prefix: Sequence[Functional]) -> str:
    blob = "[" + ",".join(encode(f) for f in prefix) + "]"
    return hashlib.sha256(blob.encode()).hexdigest()


def growth_bound(prefix: Sequence[Functional]) -> Fraction:
    """max{1/|f_i(e_l)| : i <= d, l in supp f_i} * maxsupp(f_d)."""
    worst = Fraction(0)
    for f in prefix:
        c = f.coefficients
        if not c:
            raise CodingError("prefix contains a zero functional")
        worst = max(worst, 1 / min(abs(v) for v in c.values()))
    return worst * max(prefix[-1].coefficients)


@dataclass(frozen=True)
class SpecialSequence:
    seq_id: str
    j: int
    components: tuple[Functional, ...]

    def functional(self, p: ParameterSystem) -> Special:
        return Special(self.j, p.m(2 * self.j + 1), self.seq_id, self.components)

    def __len__(self):
        return len(self.components)


class SigmaRegistry:
    """Injective sigma plus the store of completed special sequences.

    Writes are serialized by a lock and appended to the journal before they
    become visible; reads never take the lock.
    """

    def __init__(self, p: ParameterSystem, path: str | None = None):
        self.p = p
        self.path = path
        self._lock = threading.Lock()
        self._value: dict[str, int] = {}
        self._owner: dict[int, str] = {}
        self._bound: dict[str, Fraction] = {}
        self._sequences: dict[str, SpecialSequence] = {}
        self._journal: list[str] = []

    # persistence

    def _append(self, rec: dict) -> None:
        line = json.dumps(rec, sort_keys=True, separators=(",", ":"))
        self._journal.append(line)
        if self.path:
            with open(self.path, "a") as fh:
                fh.write(line + "\n")

    def journal_text(self) -> str:
        return "".join(line + "\n" for line in self._journal)

    @property
    def position(self) -> int:
        return len(self._journal)

    @classmethod
    def replay(cls, text: str, p: ParameterSystem, path: str | None = None) -> "SigmaRegistry":
        reg = cls(p)
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["type"] == "sigma":
                prefix = [from_json(json.loads(e), p) for e in rec["prefix"]]
                got = reg.assign(prefix)
                if got != rec["value"] or reg._journal[-1] != line:
                    raise CodingError(f"journal replay diverged at assignment {rec['prefix_hash'][:12]}")
            elif rec["type"] == "sequence":
                comps = [from_json(json.loads(e), p) for e in rec["components"]]
                seq = reg.register_sequence(comps, rec["j"])
                if seq.seq_id != rec["seq_id"]:
                    raise CodingError(f"journal replay diverged at sequence {rec['seq_id']}")
            else:
                raise CodingError(f"unknown journal record {rec['type']!r}")
        reg.path = path
        return reg

    @classmethod
    def load(cls, path: str, p: ParameterSystem) -> "SigmaRegistry":
        try:
            with open(path) as fh:
                text = fh.read()
        except FileNotFoundError:
            text = ""
        return cls.replay(text, p, path)

    # sigma

    def lookup(self, prefix: Sequence[Functional]) -> int | None:
        return self._value.get(prefix_hash(prefix))

    def assign(self, prefix: Sequence[Functional]) -> int:
        prefix = list(prefix)
        check_prefix(prefix, self.p)
        h = prefix_hash(prefix)
        if h in self._value:
            return self._value[h]
        with self._lock:
            if h in self._value:
                return self._value[h]
            bound = growth_bound(prefix)
            value = self._smallest_free(bound)
            self._append({"type": "sigma", "prefix_hash": h, "prefix": [encode(f) for f in prefix],
                          "value": value})
            self._value[h] = value
            self._owner[value] = h
            self._bound[h] = bound
            return value

    def _smallest_free(self, bound: Fraction) -> int:
        p = self.p
        for j in p.omega2.iter_from(1):
            if p.m(2 * j) > bound and 2 * j not in self._owner:
                return 2 * j
        raise AssertionError("unreachable")

    def assignments(self) -> dict[str, int]:
        return dict(self._value)

    def audit(self) -> Verdict:
        """Global injectivity and growth audit with exact comparisons."""
        seen: dict[int, str] = {}
        for h, v in self._value.items():
            if v in seen:
                return Verdict(False, f"sigma not injective: value {v} used twice")
            seen[v] = h
            if v % 2 or not self.p.omega_contains(2, v // 2):
                return Verdict(False, f"sigma value {v} is not 2j with j in omega2")
            if not self.p.m(v) > self._bound[h]:
                return Verdict(False, f"growth condition fails for value {v}")
        return Verdict(True)

    # special sequences

    def register_sequence(self, components: Sequence[Functional], j: int) -> SpecialSequence:
        comps = tuple(components)
        enc = [encode(f) for f in comps]
        seq_id = "S" + hashlib.sha256(json.dumps([j, enc]).encode()).hexdigest()[:16]
        if seq_id in self._sequences:
            return self._sequences[seq_id]
        with self._lock:
            self._append({"type": "sequence", "seq_id": seq_id, "j": j,
                          "component_ids": [hashlib.sha256(e.encode()).hexdigest()[:16] for e in enc],
                          "components": enc})
            seq = SpecialSequence(seq_id, j, comps)
            self._sequences[seq_id] = seq
            return seq

    def sequence(self, seq_id: str) -> SpecialSequence:
        try:
            return self._sequences[seq_id]
        except KeyError:
            raise CodingError(f"unknown special sequence {seq_id!r}") from None

    def sequences(self) -> list[SpecialSequence]:
        return list(self._sequences.values())

    def special_functional(self, seq_id: str, p: ParameterSystem | None = None) -> Special:
        return self.sequence(seq_id).functional(p or self.p)

    def special_functionals(self) -> list[Special]:
        return [s.functional(self.p) for s in self._sequences.values()]

    def check_registered(self, seq_id: str, j: int, components, p: ParameterSystem) -> Verdict:
        seq = self._sequences.get(seq_id)
        if seq is None:
            return Verdict(False, f"special sequence {seq_id} is not registered")
        if seq.j != j:
            return Verdict(False, f"special sequence {seq_id} has j={seq.j}, node claims j={j}")
        if len(components) != p.n(2 * j + 1):
            return Verdict(False, f"special node has {len(components)} components, needs n_{2 * j + 1}")
        if (tuple(components) != seq.components
                and [encode(f) for f in components] != [encode(f) for f in seq.components]):
            return Verdict(False, f"components differ from registered sequence {seq_id}")
        return Verdict(True)


# Operations --------------------------------------------------------------------

def check_prefix(prefix: Sequence[Functional], p: ParameterSystem) -> None:
    if not prefix:
        raise CodingError("empty prefix")
    for i, f in enumerate(prefix, 1):
        if f.is_zero():
            raise CodingError(f"prefix entry {i} is the zero functional")
        v = validate(f, G0, p)
        if not v:
            raise CodingError(f"prefix entry {i} is not in G0: {v.reason}")
    if not successive(f.range for f in prefix):
        raise CodingError("prefix functionals are not successive")


def sigma_assign(prefix: Sequence[Functional], reg: SigmaRegistry, p: ParameterSystem | None = None) -> int:
    if p is not None and p is not reg.p and p != reg.p:
        raise CodingError("registry belongs to a different parameter system")
    return reg.assign(prefix)


def first_weight_index(j: int, p: ParameterSystem) -> int:
    """Smallest j_1 in omega1 with n_{2j+1}^2 < m_{2 j_1}."""
    target = p.n(2 * j + 1) ** 2
    for j1 in p.omega1.iter_from(1):
        if p.m(2 * j1) > target:
            return j1
    raise AssertionError("unreachable")


Factory = Callable[[int, int, int], Weighted]


def chain_factory(p: ParameterSystem) -> Factory:
    """Arity-one weighted functionals (1/m_{2j}) e_n^* placed right after a bound."""
    def make(jw: int, after: int, i: int) -> Weighted:
        return Weighted(jw, p.m(2 * jw), (Leaf(1, after + 1),))
    return make


def build_special_sequence(j: int, factory: Factory | None, reg: SigmaRegistry, p: ParameterSystem,
                           start: int = 0) -> SpecialSequence:
    """Components f_1 < ... < f_{n_{2j+1}} with weights dictated by sigma.

    factory(jw, after, i) must return a weighted G0 functional of weight
    m_{2 jw} whose range lies strictly right of `after`.
    """
    if j < 1:
        raise CodingError(f"odd-block index must be >= 1, got {j}")
    factory = factory or chain_factory(p)
    N = p.n(2 * j + 1)
    jw = first_weight_index(j, p)
    comps: list[Functional] = []
    after = start
    for i in range(N):
        f = factory(jw, after, i)
        if not isinstance(f, Weighted) or f.j != jw:
            raise CodingError(f"factory returned a functional of the wrong weight at i={i + 1}")
        if f.is_zero() or f.range[0] <= after:
            raise CodingError(f"factory output at i={i + 1} is zero or not right of {after}")
        comps.append(f)
        after = f.range[1]
        if i + 1 < N:
            jw = reg.assign(comps) // 2
    seq = reg.register_sequence(comps, j)
    v = validate_special_sequence(seq, reg, p)
    if not v:
        raise CodingError(f"built sequence fails validation: {v.reason}")
    return seq


def validate_special_sequence(seq, reg: SigmaRegistry, p: ParameterSystem, j: int | None = None) -> Verdict:
    """Check the defining clauses; the failure names the clause and the index."""
    if isinstance(seq, SpecialSequence):
        comps, j = list(seq.components), seq.j if j is None else j
    else:
        comps = list(seq)
        if j is None:
            return Verdict(False, "odd-block index j is required")
    N = p.n(2 * j + 1)
    if len(comps) != N:
        return Verdict(False, f"length: {len(comps)} components, need n_{2 * j + 1}={N}")
    for i, f in enumerate(comps, 1):
        if not isinstance(f, Weighted):
            return Verdict(False, f"weighted: component {i} is not a weighted functional")
        v = validate(f, G0, p)
        if not v:
            return Verdict(False, f"G0: component {i}: {v.reason}")
        if f.is_zero():
            return Verdict(False, f"nonzero: component {i} is zero")
    if not successive(f.range for f in comps):
        bad = next(i for i in range(1, len(comps)) if comps[i].range[0] <= comps[i - 1].range[1])
        return Verdict(False, f"successive: component {bad + 1} does not follow component {bad}")
    j1 = comps[0].j
    if not p.omega_contains(1, j1):
        return Verdict(False, f"condition 2: w(f_1)=m_{2 * j1} with j_1={j1} not in omega1")
    if not N * N < p.m(2 * j1):
        return Verdict(False, f"condition 2: n_{2 * j + 1}^2={N * N} >= m_{2 * j1}")
    for i in range(1, N):
        want = reg.assign(comps[:i])
        if 2 * comps[i].j != want:
            return Verdict(False, f"condition 3: w(f_{i + 1})=m_{2 * comps[i].j} but sigma dictates m_{want}")
    return Verdict(True)

from __future__ import annotations

from fractions import Fraction

import pytest

from xzero.coding import SigmaRegistry
from xzero.core import FamilyTag, Leaf, Vector, Weighted, evaluate, validate, vsum
from xzero.dyadic import Enclosure
from xzero.params import TINY
from xzero.sequences import (NOMINAL_C, BlockSource, ConstructionError, PreconditionError, build_dependent_sequence,
                             build_exact_pair, build_gap_witness, build_l1_average, check_c0_equivalence,
                             check_dependent_sequence, check_exact_pair, check_RIS, dependent_average_identity,
                             extract_c0_witness, is_l1_average, ris_from_averages, scale_functional)


def test_sources_are_deterministic():
    a = [BlockSource("signed", 7).next() for _ in range(1)]
    s1, s2 = BlockSource("signed", 7), BlockSource("signed", 7)
    assert [s1.next() for _ in range(6)] == [s2.next() for _ in range(6)]
    assert a
    with pytest.raises(ValueError):
        BlockSource("other")


def test_l1_average_k1_is_the_block():
    avg = build_l1_average(BlockSource(), 1, TINY)
    assert avg.y == Vector.basis(1)
    assert avg.cert.lo == 1


def test_l1_average_needs_repeated_averaging_at_tiny():
    # the plain average of two basis vectors has norm exactly 1/2, so one level of averaging is needed
    avg = build_l1_average(BlockSource(), 2, TINY)
    assert avg.level == 1
    assert avg.cert.lo > Fraction(1, 2)
    assert is_l1_average(avg.y, 1, 2, avg.parts, TINY)


def test_is_l1_average_rejections():
    parts = (Vector.basis(1), Vector.basis(2))
    y = vsum(parts).scale(Fraction(1, 2))
    v = is_l1_average(y, 1, 2, parts, TINY)
    assert not v and "1/2" in v.reason
    assert not is_l1_average(y, 1, 3, parts, TINY)
    assert not is_l1_average(y, 1, 2, parts[::-1], TINY)


def test_ris_single_basis_vector():
    cert = check_RIS([Vector.basis(5)], 1, Fraction(1, 2), [1, 3], TINY)
    assert cert.ok


def test_ris_condition_two_fails_with_index():
    cert = check_RIS([Vector.sum_basis(range(1, 9))], 3, Fraction(1, 4), [1, 2], TINY)
    bad = cert.failures()
    assert [c["n"] for c in bad] == [1]
    assert not cert.cond2[0]["ok"]


def test_ris_indices_must_increase():
    with pytest.raises(ValueError):
        check_RIS([Vector.basis(1)], 1, Fraction(1, 2), [3, 2], TINY)


def test_ris_from_averages_pipeline():
    ys, cert = ris_from_averages(BlockSource(), 4, 2, Fraction(1, 4), TINY)
    assert cert.ok
    assert list(cert.js) == sorted(set(cert.js))


def test_basis_pair_theta_is_one():
    x = Vector.sum_basis(range(1, 5))
    f = Weighted(1, 4, tuple(Leaf(1, n) for n in range(1, 5)))
    assert evaluate(f, x) == 1


def test_exact_pair_value_and_clauses():
    reg = SigmaRegistry(TINY)
    pair = build_exact_pair(BlockSource(), 1, TINY, reg)
    assert evaluate(pair.f, pair.x) == pair.theta
    assert Fraction(1, 2) < pair.theta <= Fraction(1, 2) + Fraction(1, 32)
    assert validate(pair.f, FamilyTag("G0"), TINY)
    chk = check_exact_pair(pair, TINY, reg)
    assert chk.ok
    assert chk.to_json()["nominal_C"] == NOMINAL_C


def test_exact_pair_fixed_constant_too_small():
    pair = build_exact_pair(BlockSource(), 1, TINY)
    chk = check_exact_pair(pair, TINY, None, C=1)
    assert not chk.ok and not chk.clauses["weight_sweep"]
    assert chk.C_measured > 1


def test_scale_functional_rejects_leaf():
    assert scale_functional(Leaf(1, 1), Fraction(1, 2)) is None
    assert scale_functional(Leaf(1, 1), Fraction(1)) is not None


@pytest.fixture(scope="module")
def half():
    reg = SigmaRegistry(TINY)
    dep = build_dependent_sequence(BlockSource(), None, 1, "half", TINY, reg)
    return reg, dep


def test_dependent_half_mode(half):
    reg, dep = half
    assert len(dep.pairs) == TINY.n(3) == 8
    assert check_dependent_sequence(dep, TINY, reg)
    lhs, rhs = dependent_average_identity(dep, TINY)
    assert lhs == rhs >= Fraction(1, 2 * TINY.m(3))


def test_dependent_sequence_is_registered(half):
    reg, dep = half
    phi = dep.functional(TINY)
    assert validate(phi, FamilyTag("W0"), TINY, reg)


def test_dependent_zero_mode():
    reg = SigmaRegistry(TINY)
    dep = build_dependent_sequence(BlockSource(), None, 1, "zero", TINY, reg)
    assert all(evaluate(pp.f, pp.x) == 0 for pp in dep.pairs)
    lhs, rhs = dependent_average_identity(dep, TINY)
    assert lhs == rhs == 0


def test_dependent_alternating_sources():
    reg = SigmaRegistry(TINY)
    dep = build_dependent_sequence(BlockSource("basis", 0), BlockSource("signed", 1), 1, "half", TINY, reg)
    assert dep.sources == ["A", "B"] * 4
    assert check_dependent_sequence(dep, TINY, reg)


def test_dependent_rejects_tampering(half):
    reg, dep = half
    swapped = type(dep)(dep.j0, dep.mode, dep.pairs[::-1], dep.special, dep.theta)
    assert not check_dependent_sequence(swapped, TINY, reg)


def test_dependent_bad_mode():
    with pytest.raises(ValueError):
        build_dependent_sequence(BlockSource(), None, 1, "third", TINY, SigmaRegistry(TINY))


def test_gap_witness(half):
    reg, dep = half
    gw = build_gap_witness(dep, TINY, reg)
    assert gw.value > Fraction(1, 2)
    assert gw.w0.lo >= gw.value
    assert gw.ratio >= gw.value / gw.g0.hi
    assert gw.to_json(TINY)["paper_bound"]["asserted"] is False


def test_gap_witness_needs_half_mode():
    reg = SigmaRegistry(TINY)
    dep = build_dependent_sequence(BlockSource(), None, 1, "zero", TINY, reg)
    with pytest.raises(ConstructionError):
        build_gap_witness(dep, TINY, reg)


def test_c0_rejects_unnormalized_input():
    with pytest.raises(PreconditionError):
        extract_c0_witness([Vector.basis(1, 2)], Fraction(1, 4), TINY)
    with pytest.raises(PreconditionError):
        extract_c0_witness([], Fraction(1, 4), TINY)


def test_c0_non_decaying_input_is_blocked():
    xs = [Vector.basis(n) for n in (1, 3, 5)]
    w = extract_c0_witness(xs, Fraction(1, 4), TINY)
    assert not w.complete and not w.g0_decays
    assert w.blocking["index"] == 2


def test_c0_greedy_with_decaying_norms():
    # norms supplied by a stand-in: W0 norm one, G0 norm 4^-k, the shape the extraction expects
    xs = [Vector.basis(10 * k) for k in range(1, 8)]
    g0 = {x: Fraction(1, 4 ** (k + 1)) for k, x in enumerate(xs)}

    def g(x):
        return Enclosure(g0[x], g0[x])

    def w(x):
        return Enclosure(Fraction(1), Fraction(1))
    res = extract_c0_witness(xs, Fraction(1, 4), TINY, norms=(g, w), want=3)
    assert res.complete
    assert all(b > a for a, b in zip(res.js, res.js[1:]))
    assert all(j % 2 == 0 for j in res.js)
    for k, (z, j) in enumerate(zip(res.zs, res.js)):
        assert Fraction(len(z), TINY.m(j)) < res.eps_schedule[k]
    for k in range(len(res.zs) - 1):
        assert g0[res.zs[k + 1]] <= res.eps_schedule[k] / TINY.n(res.js[k])
    assert sum(res.eps_schedule) < Fraction(1, 4)


def test_c0_equivalence_single_vector():
    r = check_c0_equivalence([Vector.basis(1)], Fraction(1, 4), 5, TINY)
    assert r["ok"] and r["min_float"] == r["max_float"] == 1.0


def test_c0_equivalence_two_basis_vectors():
    r = check_c0_equivalence([Vector.basis(1), Vector.basis(3)], Fraction(1, 4), 20, TINY, seed=3)
    assert r["lower_ok"]

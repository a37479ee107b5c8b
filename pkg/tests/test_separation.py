from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from xzero.core import Leaf, Vector, Weighted, evaluate, vsum
from xzero.params import TINY
from xzero.separation import (Phi, SeparationError, check_average_bound, coverage_sets, decompose, is_separated,
                              is_separated_bruteforce, search_equal_norm_average, value_table)
from xzero.verify import random_phi, sample_registry, stream


def blocks(k, width=1):
    return [Vector.sum_basis(range(1 + width * i, 1 + width * (i + 1))) for i in range(k)]


def test_coverage_disjoint_is_empty():
    phi = Phi(8, (Leaf(1, 50),))
    assert coverage_sets(phi, blocks(3)) == [(), (), ()]


def test_coverage_one_spanning_component():
    phi = Phi(8, (Weighted(1, 4, (Leaf(1, 1), Leaf(1, 3))),))
    assert coverage_sets(phi, blocks(3)) == [(1,), (1,), (1,)]


def test_nonpositive_values_never_separate():
    phi = Phi(8, tuple(Leaf(-1, n) for n in range(1, 4)))
    for d in (Fraction(1, 100), Fraction(1, 2)):
        assert not is_separated(blocks(3), phi, d)


def test_three_matched_components_separate():
    delta = Fraction(1, 4)
    phi = Phi(8, tuple(Leaf(1, n) for n in range(1, 4)))
    xs = [Vector.basis(n, 2 * delta) for n in range(1, 4)]
    v = is_separated(xs, phi, delta)
    assert v.separated
    assert v.blocks == (1, 2, 3)
    assert v.intervals == ((1, 1), (2, 2), (3, 3))


def test_value_table_shape():
    phi = Phi(8, (Leaf(1, 1), Leaf(1, 2)))
    t = value_table(phi, blocks(2))
    assert t == [[1, 0], [0, 1]]


def test_decompose_single_block():
    xs = [Vector.basis(1)]
    phi = Phi(8, (Leaf(1, 1),))
    d = decompose(xs, phi, Fraction(1, 2))
    assert d.identity_holds
    assert d.lhs == phi(xs[0])


def test_decompose_shared_component():
    xs = blocks(4)
    f = Weighted(1, 4, tuple(Leaf(1, n) for n in range(1, 5)))
    phi = Phi(8, (f,))
    d = decompose(xs, phi, Fraction(1, 8))
    assert d.identity_holds
    assert d.lhs == phi(vsum(xs))


def test_decompose_refuses_separated():
    delta = Fraction(1, 4)
    phi = Phi(8, tuple(Leaf(1, n) for n in range(1, 4)))
    xs = [Vector.basis(n, 2 * delta) for n in range(1, 4)]
    with pytest.raises(SeparationError, match="separated"):
        decompose(xs, phi, delta)


def test_decompose_refuses_small_block_value():
    phi = Phi(8, (Leaf(1, 1),))
    with pytest.raises(SeparationError):
        decompose(blocks(2), phi, Fraction(1, 2))


def test_average_bound_refuses_small_k():
    phi = Phi(8, (Leaf(1, 1),))
    r = check_average_bound(blocks(4), phi, Fraction(1, 2), TINY)
    assert not r.evaluated
    assert r.preconditions["sqrt_k_gt_4_over_delta"] is False


def test_average_bound_nonpositive_phi_holds():
    k = 300
    xs = [Vector.basis(n) for n in range(1, k + 1)]
    phi = Phi(TINY.m(3), (Leaf(-1, 1),))
    r = check_average_bound(xs, phi, Fraction(1, 4), TINY)
    if r.evaluated:
        assert r.holds
    else:
        assert not r.preconditions["two_delta_lt_avg_norm"]


def test_equal_norm_search_empty_registry():
    xs = blocks(4)
    r = search_equal_norm_average(xs, 2, TINY, None)
    assert r.found and r.subset == (1, 2)


def test_equal_norm_search_with_registry():
    reg = sample_registry(TINY)
    xs = [Vector.basis(n) for n in range(1, 9)]
    r = search_equal_norm_average(xs, 2, TINY, reg)
    assert r.found
    avg = vsum(xs[i - 1] for i in r.subset).scale(Fraction(1, 2))
    assert r.special_value <= r.g0_hi and r.g0_lo > 0 and avg


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 6), st.integers(1, 8), st.integers(1, 6))
def test_dp_matches_bruteforce(seed, k, q, dnum):
    xs, phi = random_phi(stream(seed, "sep"), k, q)
    delta = Fraction(dnum, 8)
    assert bool(is_separated(xs, phi, delta)) == is_separated_bruteforce(xs, phi, delta)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 6), st.integers(1, 8), st.integers(1, 6))
def test_decomposition_identity(seed, k, q, dnum):
    xs, phi = random_phi(stream(seed, "dec"), k, q)
    delta = Fraction(dnum, 8)
    try:
        d = decompose(xs, phi, delta)
    except SeparationError:
        return
    assert d.identity_holds
    assert d.lhs == phi(vsum(xs))
    assert len(d.multi_covered) <= 4


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 6), st.integers(1, 8))
def test_coverage_sets_are_intervals_and_monotone(seed, k, q):
    xs, phi = random_phi(stream(seed, "cov"), k, q)
    sets = coverage_sets(phi, xs)
    for s in sets:
        assert list(s) == list(range(s[0], s[-1] + 1)) if s else True
    nonempty = [s for s in sets if s]
    for a, b in zip(nonempty, nonempty[1:]):
        assert a[0] <= b[0] and a[-1] <= b[-1]
    for s, x in zip(sets, xs):
        for i, f in enumerate(phi.components, 1):
            hit = f.range[0] <= x.range[1] and x.range[0] <= f.range[1]
            assert (i in s) == hit

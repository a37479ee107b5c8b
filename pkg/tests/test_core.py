from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from xzero.core import (ZERO, EllTwo, FamilyTag, Leaf, OddWeighted, SignSum, Vector, Weighted, elltwo, evaluate,
                        from_json, leaf, restrict, signsum, to_json, validate, vsum, weighted, weight_of)
from xzero.params import TINY
from xzero.verify import TreeGenerator, random_vector, sample_registry

G0, W0 = FamilyTag("G0"), FamilyTag("W0")
F2, FP2 = FamilyTag("Fj0", 2), FamilyTag("Fj0Prime", 2)

coords = st.dictionaries(st.integers(1, 20), st.fractions(-4, 4, max_denominator=8).filter(lambda v: v != 0),
                         max_size=6)


def test_vector_basics():
    x = Vector.from_dict({3: Fraction(1, 2), 1: -2, 5: 0})
    assert x.support == (1, 3)
    assert x.range == (1, 3)
    assert x.l1 == Fraction(5, 2) and x.linf == 2
    assert (x + x) == x.scale(2)
    assert (x - x) == Vector()
    assert x.restrict((2, 9)) == Vector.basis(3, Fraction(1, 2))
    assert Vector.from_json(x.to_json()) == x
    assert x.shift(2).support == (3, 5)


def test_sum_basis_and_vsum():
    assert vsum([Vector.basis(1), Vector.basis(2)]) == Vector.sum_basis([1, 2])


def test_leaf_and_weighted_evaluate():
    f = weighted(TINY, 1, [leaf(1), leaf(2, -1)])
    x = Vector.from_dict({1: 2, 2: 1})
    assert f.m == 4
    assert evaluate(f, x) == Fraction(1, 4)
    assert weight_of(f) == 4


def test_l2_combination_validates():
    f = elltwo([(Fraction(3, 5), weighted(TINY, 1, [leaf(1)])), (Fraction(4, 5), weighted(TINY, 2, [leaf(2)]))])
    assert validate(f, G0, TINY)


@pytest.mark.parametrize("f,reason", [
    (Weighted(1, 4, tuple(Leaf(1, n) for n in range(1, 6))), "arity"),
    (Weighted(1, 4, (Leaf(1, 3), Leaf(1, 2))), "successive"),
    (Weighted(1, 5, (Leaf(1, 1),)), "weight"),
    (EllTwo(((Fraction(1), Weighted(1, 4, (Leaf(1, 1),))), (Fraction(1), Weighted(2, 16, (Leaf(1, 2),))))), "l2"),
    (EllTwo(((Fraction(1, 2), Weighted(1, 4, (Leaf(1, 1),))), (Fraction(1, 2), Weighted(1, 4, (Leaf(1, 2),))))),
     "distinct"),
    (EllTwo(((Fraction(1), Leaf(1, 1)),)), "not allowed"),
    (SignSum(((1, 1), (1, 2))), "auxiliary"),
])
def test_g0_rejections_name_the_clause(f, reason):
    v = validate(f, G0, TINY)
    assert not v
    assert reason in v.reason


def test_aux_leaf_size_bound():
    ok = SignSum(tuple((1, n) for n in range(1, TINY.n(1) + 1)))
    bad = SignSum(tuple((1, n) for n in range(1, TINY.n(1) + 2)))
    assert validate(ok, F2, TINY)
    assert not validate(bad, F2, TINY)


def test_aux_doubled_arity():
    f = Weighted(1, 4, tuple(Leaf(1, n) for n in range(1, 2 * TINY.n(2) + 1)))
    assert validate(f, F2, TINY)
    assert not validate(f, G0, TINY)


def test_aux_mixed_node_duplicate_basis_index():
    f = EllTwo(((Fraction(1, 2), Leaf(1, 3)), (Fraction(1, 2), Leaf(-1, 3))))
    assert not validate(f, F2, TINY)


def test_odd_top_only_in_primed_family():
    f = OddWeighted(1, TINY.m(3), (Leaf(1, 1), Leaf(1, 2)))
    assert validate(f, FP2, TINY)
    assert not validate(f, F2, TINY)
    assert not validate(f, G0, TINY)


def test_special_needs_registry_and_w0():
    reg = sample_registry(TINY)
    phi = reg.special_functionals()[0]
    assert validate(phi, W0, TINY, reg)
    assert not validate(phi, G0, TINY, reg)
    assert not validate(phi, W0, TINY, None)


def test_family_tag_parse():
    assert FamilyTag.parse("g0") == G0
    assert FamilyTag.parse("F':3") == FamilyTag("Fj0Prime", 3)
    assert FamilyTag.parse("fprime:2") == FP2
    with pytest.raises(ValueError):
        FamilyTag.parse("F:1")
    with pytest.raises(ValueError):
        FamilyTag.parse("H0")


def test_zero_functional():
    assert validate(ZERO, G0, TINY)
    assert evaluate(ZERO, Vector.basis(1)) == 0


def test_json_roundtrip_with_special():
    reg = sample_registry(TINY)
    phi = reg.special_functionals()[0].with_interval((2, 6), -1)
    g = from_json(to_json(phi), TINY, reg)
    x = Vector.sum_basis(range(1, 9))
    assert evaluate(g, x) == evaluate(phi, x)


def test_signsum_builder():
    f = signsum([(1, 1), (-1, 2)])
    assert evaluate(f, Vector.sum_basis([1, 2])) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([G0, W0, F2, FP2]))
def test_generated_trees_valid_and_sup_norm_at_most_one(seed, tag):
    import random
    rng = random.Random(seed)
    reg = sample_registry(TINY)
    f = TreeGenerator(TINY, tag, reg)(rng)
    assert validate(f, tag, TINY, reg)
    assert f.sup_norm <= 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), coords, st.integers(1, 12), st.integers(0, 8))
def test_restrict_commutes_with_evaluate(seed, d, a, length):
    import random
    f = TreeGenerator(TINY, G0)(random.Random(seed), span=14)
    x = Vector.from_dict(d)
    E = (a, a + length)
    assert evaluate(restrict(f, E), x) == evaluate(f, x.restrict(E))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), coords, coords)
def test_evaluate_is_linear(seed, d1, d2):
    import random
    f = TreeGenerator(TINY, F2)(random.Random(seed), span=14)
    x, y = Vector.from_dict(d1), Vector.from_dict(d2)
    assert evaluate(f, x + y) == evaluate(f, x) + evaluate(f, y)
    assert evaluate(f.negate(), x) == -evaluate(f, x)

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from xzero.core import FamilyTag, Vector, evaluate, validate
from xzero.norm import (NonConvergence, best_special_value, best_weighted_witness, norm_G0, norm_G0_oracle, norm_W0,
                        quick_lower_bound, w0_equals_g0, weight_profile)
from xzero.params import TINY, WIDE, ParameterError, paper_system
from xzero.verify import sample_registry

G0 = FamilyTag("G0")

vectors = st.dictionaries(st.integers(1, 14), st.fractions(-3, 3, max_denominator=4).filter(lambda v: v != 0),
                          min_size=1, max_size=6).map(Vector.from_dict)


def test_basis_vector_has_norm_one():
    c = norm_G0(Vector.basis(1), TINY)
    assert c.lo == c.hi == 1


def test_two_basis_vectors():
    c = norm_G0(Vector.sum_basis([1, 2]), TINY)
    assert c.lo == c.hi == 1


def test_four_basis_vectors_against_closed_form():
    # sqrt(1 + 4/16 + ...) is not rational; the enclosure must contain the DP value 1.0327955...
    c = norm_G0(Vector.sum_basis(range(1, 5)), TINY)
    assert c.hi - c.lo <= Fraction(1, 10 ** 9)
    assert abs(float(c.lo) - 1.0327955589886) < 1e-9


def test_plain_average_of_two_basis_vectors_is_one_half():
    c = norm_G0(Vector.sum_basis([1, 2], Fraction(1, 2)), TINY)
    assert c.lo == c.hi == Fraction(1, 2)


def test_witness_attains_lower_bound_and_validates():
    x = Vector.from_dict({1: 1, 3: Fraction(1, 2), 4: -2, 7: 1, 9: Fraction(3, 4)})
    c = norm_G0(x, TINY)
    assert evaluate(c.witness, x) == c.lo
    assert validate(c.witness, G0, TINY)


def test_paper_mode_rejected():
    with pytest.raises(ParameterError):
        norm_G0(Vector.basis(1), paper_system())


def test_non_convergence_reports_last_certificate():
    x = Vector.sum_basis(range(1, 5))
    with pytest.raises(NonConvergence) as e:
        norm_G0(x, TINY, tol=Fraction(1, 2 ** 200), attempts=1)
    assert e.value.last is not None and e.value.last.lo <= e.value.last.hi


def test_nonpositive_tolerance_rejected():
    with pytest.raises(ValueError):
        norm_G0(Vector.basis(1), TINY, tol=0)


def test_zero_vector():
    c = norm_G0(Vector(), TINY)
    assert c.lo == c.hi == 0


def test_weight_profile_of_basis_block():
    x = Vector.sum_basis(range(1, 5))
    prof = weight_profile(x, TINY, [1, 2])
    assert prof[1].lo == prof[1].hi == 1
    assert prof[2].lo == prof[2].hi == Fraction(1, 4)


def test_best_weighted_witness():
    x = Vector.sum_basis(range(1, 5))
    f, v = best_weighted_witness(x, 1, TINY)
    assert evaluate(f, x) == v == 1


def test_quick_lower_bound_is_a_lower_bound():
    x = Vector.sum_basis(range(1, 9))
    v, f = quick_lower_bound(x, TINY)
    assert evaluate(f, x) == v <= norm_G0(x, TINY).hi


def test_wide_parameters():
    x = Vector.sum_basis(range(1, 101), Fraction(1, 100))
    c = norm_G0(x, WIDE)
    assert c.lo >= Fraction(1, 4)


def test_registry_relative_w0():
    reg = sample_registry(TINY)
    x = Vector.sum_basis(range(1, 9))
    w = norm_W0(x, TINY, reg)
    g = norm_G0(x, TINY)
    assert w.registry_relative and w.lo >= g.lo
    same, sv = w0_equals_g0(x, TINY, reg)
    assert same and sv == best_special_value(x, reg)[0]


def test_special_value_interval_and_sign():
    reg = sample_registry(TINY)
    x = Vector.from_dict({1: 1, 2: -1})
    v, f = best_special_value(x, reg)
    assert v == abs(evaluate(f, x)) and v > 0


def test_oracle_small_case():
    x = Vector.sum_basis(range(1, 5))
    o = norm_G0_oracle(x, TINY, depth=3, grid_bits=6)
    assert o.complete
    assert o.value <= norm_G0(x, TINY).hi


@settings(max_examples=40, deadline=None)
@given(vectors)
def test_norm_between_sup_and_l1(x):
    c = norm_G0(x, TINY)
    assert x.linf <= c.lo <= c.hi <= x.l1
    assert c.hi - c.lo <= Fraction(1, 10 ** 9)


@settings(max_examples=30, deadline=None)
@given(vectors, st.fractions(Fraction(1, 4), 4, max_denominator=4))
def test_homogeneous(x, t):
    a, b = norm_G0(x, TINY), norm_G0(x.scale(t), TINY)
    assert b.lo <= t * a.hi and t * a.lo <= b.hi


@settings(max_examples=30, deadline=None)
@given(vectors)
def test_sign_invariant_and_monotone(x):
    a = norm_G0(x, TINY)
    b = norm_G0(x.abs(), TINY)
    assert a.lo == b.lo and a.hi == b.hi
    first = x.restrict((x.range[0], x.range[0]))
    assert norm_G0(first, TINY).lo <= a.hi


@settings(max_examples=25, deadline=None)
@given(vectors)
def test_oracle_dominated(x):
    o = norm_G0_oracle(x, TINY, depth=3, grid_bits=6)
    assert o.value <= norm_G0(x, TINY).hi
    assert evaluate(o.witness, x) == o.value


@settings(max_examples=25, deadline=None)
@given(vectors)
def test_triangle_inequality(x):
    y = x.shift(3)
    s = norm_G0(x + y, TINY)
    assert s.lo <= norm_G0(x, TINY).hi + norm_G0(y, TINY).hi

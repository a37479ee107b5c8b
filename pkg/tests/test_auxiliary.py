from __future__ import annotations

from fractions import Fraction

import pytest

from xzero.auxiliary import (check_prop_bounds, measure_average_bounds, search_basic_inequality_witness,
                             validate_aux)
from xzero.core import ZERO, EllTwo, Leaf, SignSum, Vector, Weighted, evaluate
from xzero.params import TINY
from xzero.sequences import BlockSource, ris_from_averages
from xzero.verify import sample_registry


def test_leaf_size_at_cap_and_over():
    cap = TINY.n(1)
    assert validate_aux(SignSum(tuple((1, n) for n in range(1, cap + 1))), 2, "F", TINY)
    v = validate_aux(SignSum(tuple((1, n) for n in range(1, cap + 2))), 2, "F", TINY)
    assert not v and "n_1" in v.reason


def test_unknown_tag():
    with pytest.raises(ValueError):
        validate_aux(Leaf(1, 1), 2, "G", TINY)


def test_j0_must_be_at_least_two():
    with pytest.raises(ValueError):
        validate_aux(Leaf(1, 1), 1, "F", TINY)


def test_mixed_node_with_basis_terms():
    f = EllTwo(((Fraction(1, 2), Leaf(1, 1)), (Fraction(1, 2), Weighted(1, 4, (Leaf(1, 2),)))))
    assert validate_aux(f, 2, "F", TINY)


def test_single_leaf_on_average_is_a_counting_bound():
    N = TINY.n(2)
    avg = Vector.sum_basis(range(1, N + 1), Fraction(1, N))
    leaf = SignSum(tuple((1, n) for n in range(1, TINY.n(1) + 1)))
    assert evaluate(leaf, avg) == Fraction(TINY.n(1), N)


def test_average_bounds_table_rows():
    t = measure_average_bounds(2, TINY, depth=3)
    assert t.length == TINY.n(2)
    assert [r["i"] for r in t.rows] == list(range(2, 10))
    for r in t.rows:
        assert r["cap_l1_over_m_i"]["asserted"] and r["cap_l1_over_m_i"]["holds"]
        assert r["paper_bound"]["asserted"] is False
    assert t.m_meas.lo <= t.m_meas.hi


def test_average_bounds_deterministic():
    a = measure_average_bounds(2, TINY, depth=2).to_json()
    b = measure_average_bounds(2, TINY, depth=2).to_json()
    assert a == b


def test_average_bounds_reject_bad_input():
    with pytest.raises(ValueError):
        measure_average_bounds(1, TINY)
    with pytest.raises(ValueError):
        measure_average_bounds(2, TINY, mode="G")


def test_basic_inequality_basis_functional():
    xs = [Vector.basis(n) for n in range(1, 5)]
    w = search_basic_inequality_witness(Leaf(1, 2), xs, [1, 2, 3, 4], [1, 2, 3, 4], 2, 1, Fraction(1, 8), TINY)
    assert w.found and w.eps_f == 0
    assert w.lhs <= w.rhs


def test_basic_inequality_zero_coefficients():
    xs = [Vector.basis(n) for n in range(1, 4)]
    w = search_basic_inequality_witness(Leaf(1, 1), xs, [0, 0, 0], [1, 2, 3], 2, 1, Fraction(1, 8), TINY)
    assert w.found and w.lhs == 0 == w.eps_f


def test_basic_inequality_with_special_functional():
    reg = sample_registry(TINY)
    phi = reg.special_functionals()[0]
    xs = [Vector.basis(n) for n in range(1, 5)]
    w = search_basic_inequality_witness(phi, xs, [1, -1, 1, 1], [1, 2, 3, 4], 2, 3, Fraction(1, 8), TINY)
    assert w.found
    assert w.lhs <= w.rhs


def test_basic_inequality_weighted_side_condition():
    xs = [Vector.basis(n) for n in range(1, 5)]
    f = Weighted(1, 4, tuple(Leaf(1, n) for n in range(1, 5)))
    w = search_basic_inequality_witness(f, xs, [1, 1, 1, 1], [1, 2, 3, 4], 2, 1, Fraction(1, 8), TINY)
    assert w.found and w.side_condition is not False


def test_prop_bounds_single_term_average():
    x = Vector.basis(1)
    r = check_prop_bounds([x], 2, "avg_W0", TINY, None, C=1, eps=Fraction(1, 100), js=[3], ks=[1] * TINY.n(2))
    assert r.measured.hi <= 1
    assert r.bound == Fraction(3, TINY.m(2))


def test_prop_bounds_pipeline_report():
    reg = sample_registry(TINY)
    ys, cert = ris_from_averages(BlockSource("basis", 0, start=20), TINY.n(2), 2, Fraction(1, 4), TINY, reg)
    r = check_prop_bounds([a.y for a in ys], 2, "avg_W0", TINY, reg, C=3, eps=Fraction(1, 4), js=list(cert.js),
                          ris_ok=cert.ok)
    doc = r.to_json()
    assert "measured" in doc and "paper_bound" in doc
    assert doc["asserted"] == all(doc["hypotheses"].values())


def test_prop_bounds_needs_enough_blocks():
    with pytest.raises(ValueError):
        check_prop_bounds([Vector.basis(1)], 2, "avg_W0", TINY, None, C=1, eps=Fraction(1, 4), js=[1])


def test_prop_bounds_unknown_kind():
    with pytest.raises(ValueError):
        check_prop_bounds([Vector.basis(1)], 2, "avg", TINY, None, C=1, eps=Fraction(1, 4), js=[1])


def test_zero_functional_is_member():
    assert validate_aux(ZERO, 2, "F'", TINY)

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from xzero.params import (NAMED, TINY, WIDE, ParameterError, ParameterSystem, ResidueClass, load_parameters,
                          make_surrogate, paper_parameters, paper_parameters_bigint, paper_system,
                          weight_tail_bound)


def test_paper_first_terms():
    v = paper_parameters(1)
    assert (v.m_log2, v.n_log2, v.s) == (8, 7, None)


def test_paper_recursion_exponents():
    v2, v3 = paper_parameters(2), paper_parameters(3)
    assert (v2.m_log2, v2.s, v2.n_log2) == (40, 160, 1280)
    assert v3.m_log2 == 200
    assert v3.s == 800
    assert v3.n_log2 == 800 * (1 + 1280)


def test_bigint_path_agrees():
    for j in (1, 2, 3):
        m, n = paper_parameters_bigint(j)
        v = paper_parameters(j)
        assert m == 1 << v.m_log2
        assert n == 1 << v.n_log2


@pytest.mark.parametrize("j", [0, -1])
def test_domain_error(j):
    with pytest.raises(ParameterError):
        paper_parameters(j)


def test_paper_system_refuses_huge_materialization():
    p = paper_system()
    assert p.m(2) == 2 ** 40
    with pytest.raises(ParameterError):
        p.n(4)
    assert p.n_capped(4, 100) == 100


def test_tiny_and_wide_heads():
    assert [TINY.m(j) for j in range(1, 6)] == [2, 4, 8, 16, 32]
    assert [TINY.n(j) for j in range(1, 6)] == [2, 4, 8, 16, 32]
    assert [WIDE.n(j) for j in range(1, 5)] == [2 ** 8, 2 ** 16, 2 ** 24, 2 ** 32]
    assert WIDE.m(3) == 8


def test_omegas_are_disjoint_index_classes():
    assert TINY.omega1.disjoint(TINY.omega2)
    assert TINY.omega_contains(1, 3) and TINY.omega_contains(2, 4)
    assert not TINY.omega_contains(1, 4)


def test_residue_class_parse_and_iter():
    r = ResidueClass.parse("odd")
    assert list(zip(range(3), r.iter_from(1))) == [(0, 1), (1, 3), (2, 5)]
    assert 7 in r and 8 not in r


def test_json_roundtrip_and_digest():
    for p in (TINY, WIDE):
        q = ParameterSystem.from_json(json.loads(json.dumps(p.to_json())))
        assert q.digest() == p.digest()
        assert [q.m(j) for j in range(1, 8)] == [p.m(j) for j in range(1, 8)]


def test_load_parameters_names_and_file(tmp_path):
    assert load_parameters(None) is TINY
    assert load_parameters("WIDE") is WIDE
    f = tmp_path / "p.json"
    f.write_text(json.dumps(TINY.to_json()))
    assert load_parameters(str(f)).digest() == TINY.digest()
    assert set(NAMED) == {"tiny", "wide", "paper"}


def test_bad_surrogate_rejected():
    with pytest.raises(ParameterError):
        make_surrogate((4, 2), (2, 4))


def test_weight_tail_bound_decreases():
    a = weight_tail_bound(TINY, 1, 2)
    b = weight_tail_bound(TINY, 1, 4)
    assert 0 < b < a
    assert weight_tail_bound(TINY, 0, 2) == 0


@given(st.integers(1, 40))
def test_surrogate_strictly_increasing(j):
    for p in (TINY, WIDE):
        assert p.m(j + 1) > p.m(j)
        assert p.n(j + 1) > p.n(j)


@given(st.integers(1, 6), st.integers(1, 10 ** 6))
def test_n_capped(j, cap):
    assert TINY.n_capped(j, cap) == min(TINY.n(j), cap)


def test_tail_bound_is_upper_bound():
    # sum_{j > J} m_{2j}^-2 at TINY, truncated far out, stays below the certified bound
    J = 2
    partial = sum(Fraction(1, TINY.m(2 * j) ** 2) for j in range(J + 1, 40))
    assert weight_tail_bound(TINY, 1, J) ** 2 >= partial

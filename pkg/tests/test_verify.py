from __future__ import annotations

import pytest

from xzero.verify import SUITES, stream, verify_suite


def test_streams_are_named_and_reproducible():
    assert stream(1, "a").random() == stream(1, "a").random()
    assert stream(1, "a").random() != stream(1, "b").random()


@pytest.mark.parametrize("suite", ["hygiene", "coding", "witnesses"])
def test_small_suites_pass(suite):
    res = verify_suite(suite, count=20) if suite != "witnesses" else verify_suite(suite)
    assert res.ok, res.counterexample


def test_damaged_upper_bound_is_caught():
    res = verify_suite("oracle", count=20, deep=0, corrupt=lambda lo, hi: (lo, hi / 2))
    assert not res.ok
    ce = res.counterexample
    assert ce["check"] == "oracle <= hi" and "x" in ce["instance"]


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify_suite("everything")
    assert "separation" in SUITES

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kfibconcat.kfib import (
    ConcatSolution,
    KSequence,
    SequenceIndexError,
    concat_value,
    digits10,
    index_of,
    sequence,
    term,
)

from .oracles import naive_kfib


@pytest.mark.parametrize("k,n,v", [(3, 7, 24), (8, 16, 16128), (2, 10, 55), (3, 8, 44)])
def test_named_terms(k, n, v):
    assert term(k, n) == v


@pytest.mark.parametrize("k", [2, 3, 7, 50])
def test_first_term_is_one(k):
    assert term(k, 1) == 1


def test_initial_zeros():
    s = KSequence(5)
    assert [s[n] for n in range(-3, 2)] == [0, 0, 0, 0, 1]
    with pytest.raises(SequenceIndexError):
        s[-4]


def test_k_below_two_rejected():
    with pytest.raises(ValueError):
        KSequence(1)


@pytest.mark.parametrize("x,d", [(128, 3), (16, 2), (10**6, 7), (1, 1), (9, 1)])
def test_digits10(x, d):
    assert digits10(x) == d


def test_digits10_domain():
    with pytest.raises(ValueError):
        digits10(0)


@pytest.mark.parametrize("a,b,v", [(2, 4, 24), (16, 128, 16128), (1, 1, 11), (5, 5, 55)])
def test_concat_value(a, b, v):
    assert concat_value(a, b) == v


def test_index_of():
    assert index_of(3, 44) == 8
    assert index_of(3, 45) is None
    assert index_of(5, 1) == 1
    with pytest.raises(ValueError):
        index_of(3, 0)


def test_solution_json_uses_string_value():
    s = ConcatSolution(8, 16, 6, 9, 3, 16128)
    assert s.to_json()["value"] == "16128"
    assert s.as_tuple() == (8, 16, 6, 9)


@given(st.integers(2, 40), st.integers(0, 300))
def test_matches_naive_recurrence(k, n):
    assert sequence(k)[n] == naive_kfib(k, n)[n]


@given(st.integers(2, 64), st.data())
def test_powers_of_two_region(k, data):
    n = data.draw(st.integers(2, k + 1))
    assert term(k, n) == 2 ** (n - 2)


def test_upto():
    assert sequence(3).upto(8) == [0, 1, 1, 2, 4, 7, 13, 24, 44]


@given(st.integers(1, 10**200))
def test_digits10_matches_string(x):
    assert digits10(x) == len(str(x))


@given(st.integers(2, 30), st.integers(1, 200))
def test_index_of_roundtrip(k, n):
    v = term(k, n)
    i = index_of(k, v)
    assert term(k, i) == v and i <= n

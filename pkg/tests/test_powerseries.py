from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from genfeyn.errors import DomainError
from genfeyn.powerseries import FormalSeries, add, exp, inverse, log, mul, scale

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def series(order, c0=None):
    head = st.just(Fraction(c0)) if c0 is not None else fractions
    return st.tuples(head, st.lists(fractions, min_size=order, max_size=order)).map(
        lambda t: FormalSeries([t[0], *t[1]]))


def test_small_products():
    a = FormalSeries([1, 1, 0])
    b = FormalSeries([1, -1, 0])
    assert mul(a, b) == FormalSeries([1, 0, -1])
    assert scale(a, 0) == FormalSeries.zero(2)
    assert add(a, b) == FormalSeries([2, 0, 0])


def test_order_mismatch():
    with pytest.raises(DomainError):
        FormalSeries([1, 2]) * FormalSeries([1, 2, 3])
    with pytest.raises(DomainError):
        FormalSeries([1, 2]) + FormalSeries([1])


def test_log_examples():
    assert log(FormalSeries.one(4)) == FormalSeries.zero(4)
    assert log(FormalSeries([1, 1, 0, 0])) == FormalSeries([0, 1, Fraction(-1, 2), Fraction(1, 3)])
    with pytest.raises(DomainError):
        log(FormalSeries([2, 1]))


def test_exp_and_inverse_examples():
    assert exp(FormalSeries.zero(3)) == FormalSeries.one(3)
    assert inverse(FormalSeries([1, -1, 0, 0])) == FormalSeries([1, 1, 1, 1])
    assert exp(FormalSeries.variable(4)) == FormalSeries([1, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24)])
    with pytest.raises(DomainError):
        exp(FormalSeries([1, 1]))
    with pytest.raises(DomainError):
        inverse(FormalSeries([0, 1]))


@settings(max_examples=50, deadline=None)
@given(series(5), series(5), series(5))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a + b) - b == a


@settings(max_examples=50, deadline=None)
@given(series(6, c0=1))
def test_log_exp_roundtrip(a):
    assert exp(log(a)) == a


@settings(max_examples=50, deadline=None)
@given(series(6, c0=0))
def test_exp_log_roundtrip(a):
    assert log(exp(a)) == a


@settings(max_examples=50, deadline=None)
@given(series(5))
def test_inverse(a):
    if a[0] == 0:
        return
    assert a * inverse(a) == FormalSeries.one(5)
    assert inverse(inverse(a)) == a


def test_json_roundtrip():
    a = FormalSeries([1, Fraction(-3, 2), 0, 7])
    assert a.to_json() == '["1", "-3/2", "0", "7"]'
    assert FormalSeries.from_json(a.to_json()) == a


def test_evaluate():
    a = FormalSeries([1, -1, Fraction(1, 2)])
    assert a.evaluate(Fraction(1, 2)) == Fraction(5, 8)
    assert a.evaluate(0.5) == pytest.approx(0.625)

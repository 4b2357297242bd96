"""Truncated formal power series with exact rational coefficients.

The truncation order travels with the value. Combining series of different
orders raises instead of silently truncating to the shorter one.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable

from .errors import DomainError
from .rational import format_rational, parse_rational


class FormalSeries:
    """c_0 + c_1 t + ... + c_N t^N  (mod t^(N+1))."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        if not self.coeffs:
            raise DomainError("a series needs at least the constant coefficient")

    @classmethod
    def constant(cls, c, order: int) -> "FormalSeries":
        return cls([c] + [0] * order)

    @classmethod
    def zero(cls, order: int) -> "FormalSeries":
        return cls.constant(0, order)

    @classmethod
    def one(cls, order: int) -> "FormalSeries":
        return cls.constant(1, order)

    @classmethod
    def variable(cls, order: int) -> "FormalSeries":
        """The series t, truncated at ``order``."""
        return cls([0, 1][: order + 1] + [0] * max(order - 1, 0))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"FormalSeries([{', '.join(format_rational(c) for c in self.coeffs)}])"

    def _same_order(self, other: "FormalSeries") -> None:
        if not isinstance(other, FormalSeries):
            raise TypeError(f"expected FormalSeries, got {type(other).__name__}")
        if other.order != self.order:
            raise DomainError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        self._same_order(other)
        return FormalSeries(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        self._same_order(other)
        return FormalSeries(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self):
        return FormalSeries(-a for a in self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, FormalSeries):
            return NotImplemented
        self._same_order(other)
        a, b = self.coeffs, other.coeffs
        return FormalSeries(sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(len(a)))

    __rmul__ = __mul__

    def scale(self, s) -> "FormalSeries":
        s = Fraction(s)
        return FormalSeries(s * a for a in self.coeffs)

    def derivative(self) -> list[Fraction]:
        """Coefficients of d/dt (one shorter than the series)."""
        return [k * c for k, c in enumerate(self.coeffs)][1:]

    def inverse(self) -> "FormalSeries":
        a = self.coeffs
        if a[0] == 0:
            raise DomainError("series with zero constant term has no inverse")
        b = [1 / a[0]]
        for k in range(1, len(a)):
            b.append(-sum((a[i] * b[k - i] for i in range(1, k + 1)), Fraction(0)) / a[0])
        return FormalSeries(b)

    def exp(self) -> "FormalSeries":
        """exp via E' = A' E, i.e. k e_k = sum_{i=1}^k i a_i e_{k-i}."""
        a = self.coeffs
        if a[0] != 0:
            raise DomainError("exp needs a zero constant term")
        e = [Fraction(1)]
        for k in range(1, len(a)):
            e.append(sum((i * a[i] * e[k - i] for i in range(1, k + 1)), Fraction(0)) / k)
        return FormalSeries(e)

    def log(self) -> "FormalSeries":
        """log via A L' = A', i.e. k l_k = k a_k - sum_{i=1}^{k-1} i l_i a_{k-i}."""
        a = self.coeffs
        if a[0] != 1:
            raise DomainError("log needs constant term 1")
        lg = [Fraction(0)]
        for k in range(1, len(a)):
            s = k * a[k] - sum((i * lg[i] * a[k - i] for i in range(1, k)), Fraction(0))
            lg.append(s / k)
        return FormalSeries(lg)

    def evaluate(self, t) -> Fraction | float:
        """Horner evaluation of the truncated polynomial; a float ``t`` gives a float."""
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def to_json(self) -> str:
        return json.dumps([format_rational(c) for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> "FormalSeries":
        data = json.loads(text)
        if not isinstance(data, list):
            raise DomainError("series JSON must be an array")
        return cls(parse_rational(x) for x in data)


def mul(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    return a * b


def add(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    return a + b


def scale(a: FormalSeries, s) -> FormalSeries:
    return a.scale(s)


def log(a: FormalSeries) -> FormalSeries:
    return a.log()


def exp(a: FormalSeries) -> FormalSeries:
    return a.exp()


def inverse(a: FormalSeries) -> FormalSeries:
    return a.inverse()

"""Wick ordering with respect to an arbitrary base measure.

``wick_expand`` unfolds the recursive definition of :phi(u1)...phi(un): into
an explicit combination of ordinary monomials. Expectations of products of
Wick monomials can then be computed two independent ways: by expanding and
taking ordinary moments, or by summing products of truncated moments over
partitions in which no block sits inside a single Wick factor.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import prod
from typing import Sequence

from .errors import DomainError
from .moments import MomentOracle
from .partitions import enumerate_sc_free_partitions, index_partitions
from .rational import format_rational

_EXPANSIONS: "weakref.WeakKeyDictionary[MomentOracle, dict]" = weakref.WeakKeyDictionary()


@dataclass
class MonomialCombination:
    """sum_S c_S phi^S, keyed by sorted site multisets (the empty key is the constant)."""

    terms: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.terms.get(tuple(sorted(key)), Fraction(0))

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])))

    def __len__(self):
        return len(self.terms)

    def expectation(self, oracle: MomentOracle, extra: Sequence[int] = ()) -> Fraction:
        """<(sum_S c_S phi^S) * phi^extra>."""
        return sum((c * oracle.moment(key + tuple(extra)) for key, c in self.terms.items()), Fraction(0))


def wick_expand(points: Sequence[int], oracle: MomentOracle) -> MonomialCombination:
    """Expand :phi(u1)...phi(un): into ordinary monomials.

    :U: = phi^U - sum_{I in P(U), |I|>1} sum_j :I_j: prod_{l != j} <I_l>^T
               - sum_{I in P(U)} prod_l <I_l>^T
    """
    key = tuple(sorted(points))
    if not key:
        raise DomainError("Wick monomial needs at least one point")
    cache = _EXPANSIONS.setdefault(oracle, {})
    if key in cache:
        return cache[key]
    terms: dict = {key: Fraction(1)}
    for blocks in index_partitions(len(key)):
        kappas = [oracle.cumulant([key[i] for i in b]) for b in blocks]
        full = prod(kappas, start=Fraction(1))
        if full:
            terms[()] = terms.get((), Fraction(0)) - full
        if len(blocks) < 2:
            continue
        for j, b in enumerate(blocks):
            coef = prod((kappas[l] for l in range(len(blocks)) if l != j), start=Fraction(1))
            if not coef:
                continue
            for mono, c in wick_expand([key[i] for i in b], oracle).terms.items():
                terms[mono] = terms.get(mono, Fraction(0)) - coef * c
    result = MonomialCombination({k: v for k, v in terms.items() if v or k == key})
    cache[key] = result
    return result


def _labelled(families, external):
    m = len(families)
    fam_labels = [[(q, i) for i in range(len(f))] for q, f in enumerate(families)]
    ext_labels = [(m, i) for i in range(len(external))]
    site = {(q, i): s for q, f in enumerate(families) for i, s in enumerate(f)}
    site.update({(m, i): s for i, s in enumerate(external)})
    return fam_labels, ext_labels, site


def wick_expectation_sc(
    families: Sequence[Sequence[int]], external: Sequence[int], oracle: MomentOracle
) -> Fraction:
    """<:J_1: ... :J_m: phi(Y)> as a sum over self-contraction-free partitions."""
    for f in families:
        if not f:
            raise DomainError("Wick families must be nonempty")
    fam_labels, ext_labels, site = _labelled(families, external)
    total = Fraction(0)
    for part in enumerate_sc_free_partitions(fam_labels, ext_labels):
        term = Fraction(1)
        for b in part.blocks:
            term *= oracle.cumulant([site[x] for x in b])
            if not term:
                break
        total += term
    return total


def wick_expectation_recursive(
    families: Sequence[Sequence[int]], external: Sequence[int], oracle: MomentOracle
) -> Fraction:
    """The same expectation by expanding every Wick factor into ordinary monomials."""
    expansions = [list(wick_expand(f, oracle).terms.items()) for f in families]
    ext = tuple(external)
    total = Fraction(0)
    for choice in product(*expansions):
        coef = prod((c for _, c in choice), start=Fraction(1))
        sites = ext + tuple(s for key, _ in choice for s in key)
        total += coef * oracle.moment(sites)
    return total


@dataclass
class OrthogonalityReport:
    sites: tuple
    max_degree: int
    monomials: list
    matrix: list
    off_degree_nonzero: list
    witness: dict | None

    @property
    def gaussian_compatible(self) -> bool:
        return not self.off_degree_nonzero

    def entry(self, a: Sequence[int], b: Sequence[int]) -> Fraction:
        i = self.monomials.index(tuple(sorted(a)))
        j = self.monomials.index(tuple(sorted(b)))
        return self.matrix[i][j]

    def to_dict(self) -> dict:
        out = {
            "budget": {"sites": list(self.sites), "max_degree": self.max_degree},
            "monomials": [list(m) for m in self.monomials],
            "matrix": [[format_rational(x) for x in row] for row in self.matrix],
            "off_degree_nonzero": [[list(a), list(b)] for a, b in self.off_degree_nonzero],
            "gaussian_compatible": self.gaussian_compatible,
        }
        if self.witness is not None:
            out["witness"] = {
                "first": list(self.witness["first"]),
                "rest": list(self.witness["rest"]),
                "value": format_rational(self.witness["value"]),
                "truncated_moment": format_rational(self.witness["truncated_moment"]),
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def orthogonality_report(oracle: MomentOracle, max_degree: int, sites: Sequence[int] = (0,)) -> OrthogonalityReport:
    """Table of <:A::B:> for monomials A, B over ``sites`` with degrees 1..max_degree.

    Non-Gaussian behaviour is witnessed by the smallest r >= 3 with a nonzero
    truncated moment among the designated sites: the entry for degrees
    (1, r-1) then equals that truncated moment. The verdict only covers the
    stated budget.
    """
    if max_degree < 1:
        raise DomainError("max_degree must be at least 1")
    sites = tuple(sorted(set(sites)))
    monomials = [
        mono for d in range(1, max_degree + 1) for mono in combinations_with_replacement(sites, d)
    ]
    matrix = [[Fraction(0)] * len(monomials) for _ in monomials]
    off = []
    for i, a in enumerate(monomials):
        for j in range(i, len(monomials)):
            b = monomials[j]
            v = wick_expectation_sc([a, b], (), oracle)
            matrix[i][j] = matrix[j][i] = v
            if len(a) != len(b) and v:
                off.append((a, b))
    witness = None
    for r in range(3, max_degree + 2):
        if oracle.max_order is not None and r > oracle.max_order:
            break
        for mono in combinations_with_replacement(sites, r):
            kappa = oracle.cumulant(mono)
            if kappa:
                first, rest = mono[:1], mono[1:]
                witness = {
                    "first": first,
                    "rest": rest,
                    "value": wick_expectation_sc([first, rest], (), oracle),
                    "truncated_moment": kappa,
                }
                break
        if witness:
            break
    return OrthogonalityReport(sites, max_degree, monomials, matrix, off, witness)

"""Moment oracles for a base measure on a finite site set, and the conversion
between moments and truncated moments (cumulants).

All values are exact ``Fraction`` objects. A site tuple is any sequence of
site indices, possibly with repeats; by permutation symmetry every cache is
keyed by the sorted tuple.
"""

from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction
from itertools import product
from math import comb, factorial, prod
from typing import Iterable, Sequence

from .errors import CapabilityError, ConfigError, DomainError
from .partitions import enumerate_pair_partitions, index_partitions
from .rational import format_rational, parse_rational


def _key(sites: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(sites))


class MomentOracle:
    """Source of moments ``<phi(s1)...phi(sq)>`` of a normalized measure.

    Subclasses implement ``_moment(key)`` for a sorted, nonempty site tuple.
    ``cumulant`` defaults to the truncation recursion and may be overridden by
    oracles that know their truncated moments in closed form.
    """

    max_order: int | None = None

    def __init__(self, num_sites: int, max_order: int | None = None):
        if num_sites < 1:
            raise DomainError("an oracle needs at least one site")
        self.num_sites = num_sites
        if max_order is not None:
            self.max_order = max_order
        self._moments: dict[tuple, Fraction] = {(): Fraction(1)}
        self._truncated: dict[tuple, Fraction] = {}

    def check(self, key: tuple) -> None:
        for s in key:
            if not 0 <= s < self.num_sites:
                raise DomainError(f"site {s} out of range 0..{self.num_sites - 1}")
        if self.max_order is not None and len(key) > self.max_order:
            raise CapabilityError(
                f"order {len(key)} exceeds oracle capability {self.max_order}"
            )

    def moment(self, sites: Iterable[int]) -> Fraction:
        key = _key(sites)
        value = self._moments.get(key)
        if value is None:
            self.check(key)
            value = self._moment(key)
            self._moments[key] = value
        return value

    def cumulant(self, sites: Iterable[int]) -> Fraction:
        return truncated_moment(self, sites)

    def _moment(self, key: tuple) -> Fraction:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def __getstate__(self):
        # caches are per-process; workers rebuild them
        state = self.__dict__.copy()
        state["_moments"] = {(): Fraction(1)}
        state["_truncated"] = {}
        return state


def _sub_multisets_with_first(key: tuple):
    """Yield (sub, rest, multiplicity) over sub-multisets of ``key`` that contain
    its first element, where multiplicity counts the position subsets of the
    tuple that contain position 0 and realize ``sub``."""
    counts = sorted(Counter(key).items())
    sites = [s for s, _ in counts]
    c = [k for _, k in counts]
    ranges = [range(1, c[0] + 1)] + [range(0, k + 1) for k in c[1:]]
    for t in product(*ranges):
        mult = comb(c[0] - 1, t[0] - 1)
        for ci, ti in zip(c[1:], t[1:]):
            mult *= comb(ci, ti)
        sub = tuple(s for s, ti in zip(sites, t) for _ in range(ti))
        rest = tuple(s for s, ci, ti in zip(sites, c, t) for _ in range(ci - ti))
        yield sub, rest, mult


def truncated_moment(oracle: MomentOracle, sites: Iterable[int]) -> Fraction:
    """Truncated moment from the partition recursion

        m(S) = sum over partitions I of S of prod_l kappa(I_l).

    Partitions are grouped by the block holding the first position, which
    gives kappa(S) = m(S) - sum_{T containing first, T != S} kappa(T) m(S \\ T).
    """
    key = _key(sites)
    if not key:
        raise DomainError("truncated moment of the empty tuple is undefined")
    memo = oracle._truncated
    if key in memo:
        return memo[key]
    oracle.check(key)
    total = oracle.moment(key)
    for sub, rest, mult in _sub_multisets_with_first(key):
        if not rest:
            continue
        total -= mult * truncated_moment(oracle, sub) * oracle.moment(rest)
    memo[key] = total
    return total


def moment_from_truncated(oracle: MomentOracle, sites: Sequence[int]) -> Fraction:
    """Sum over all partitions of the positions of products of truncated moments."""
    sites = tuple(sites)
    total = Fraction(0)
    for blocks in index_partitions(len(sites)):
        total += prod((truncated_moment(oracle, [sites[i] for i in b]) for b in blocks), start=Fraction(1))
    return total


def truncated_moment_mobius(oracle: MomentOracle, sites: Sequence[int]) -> Fraction:
    """Moebius inversion on the partition lattice:
    sum_I (-1)^(k-1) (k-1)! prod_l m(I_l)."""
    sites = tuple(sites)
    if not sites:
        raise DomainError("truncated moment of the empty tuple is undefined")
    total = Fraction(0)
    for blocks in index_partitions(len(sites)):
        k = len(blocks)
        term = (-1) ** (k - 1) * factorial(k - 1)
        total += term * prod((oracle.moment([sites[i] for i in b]) for b in blocks), start=Fraction(1))
    return total


class DiscreteMeasure(MomentOracle):
    """Finitely many weighted field configurations; moments by direct summation."""

    def __init__(self, configs: Sequence[tuple], max_order: int | None = None):
        configs = [(Fraction(w), tuple(Fraction(v) for v in vals)) for w, vals in configs]
        if not configs:
            raise DomainError("a discrete measure needs at least one configuration")
        k = len(configs[0][1])
        for w, vals in configs:
            if w <= 0:
                raise DomainError(f"configuration weight must be positive, got {w}")
            if len(vals) != k:
                raise DomainError("all configurations must assign a value to every site")
        total = sum(w for w, _ in configs)
        if total != 1:
            raise DomainError(f"weights must sum to 1, got {total}")
        super().__init__(k, max_order)
        self.configs = configs

    def _moment(self, key):
        powers = Counter(key)
        return sum(
            (w * prod((vals[s] ** e for s, e in powers.items()), start=Fraction(1)) for w, vals in self.configs),
            start=Fraction(0),
        )

    def expectation(self, f) -> Fraction:
        """Expectation of ``f(values)`` over the configurations."""
        return sum((w * f(vals) for w, vals in self.configs), start=Fraction(0))

    def to_config(self):
        return {
            "type": "discrete",
            "sites": self.num_sites,
            "configs": [
                {"weight": format_rational(w), "values": [format_rational(v) for v in vals]}
                for w, vals in self.configs
            ],
        }


class GaussianOracle(MomentOracle):
    """Centered Gaussian with covariance G: moments are sums over pairings."""

    def __init__(self, covariance: Sequence[Sequence], max_order: int | None = None):
        cov = [tuple(Fraction(x) for x in row) for row in covariance]
        k = len(cov)
        if k == 0 or any(len(row) != k for row in cov):
            raise DomainError("covariance must be a nonempty square matrix")
        for i in range(k):
            for j in range(i + 1, k):
                if cov[i][j] != cov[j][i]:
                    raise DomainError(f"covariance is not symmetric at ({i}, {j})")
        super().__init__(k, max_order)
        self.covariance = tuple(cov)

    def _moment(self, key):
        total = Fraction(0)
        for pairing in enumerate_pair_partitions(range(len(key)), capacity=len(key)):
            total += prod((self.covariance[key[i]][key[j]] for i, j in pairing.blocks), start=Fraction(1))
        return total

    def cumulant(self, sites):
        key = _key(sites)
        self.check(key)
        if len(key) == 2:
            return self.covariance[key[0]][key[1]]
        return Fraction(0)

    def to_config(self):
        return {
            "type": "gaussian",
            "covariance": [[format_rational(x) for x in row] for row in self.covariance],
        }


class IIDCumulantOracle(MomentOracle):
    """Independent, identically distributed sites with prescribed cumulants.

    ``cumulants[q-1]`` is the order-q cumulant at every site; mixed-site
    truncated moments vanish. Orders above ``len(cumulants)`` are unsupported.
    """

    def __init__(self, num_sites: int, cumulants: Sequence):
        cums = tuple(Fraction(c) for c in cumulants)
        if not cums:
            raise DomainError("at least one cumulant is required")
        super().__init__(num_sites, len(cums))
        self.cumulants = cums

    def cumulant(self, sites):
        key = _key(sites)
        if not key:
            raise DomainError("truncated moment of the empty tuple is undefined")
        self.check(key)
        if key[0] != key[-1]:
            return Fraction(0)
        return self.cumulants[len(key) - 1]

    def _moment(self, key):
        total = Fraction(0)
        for sub, rest, mult in _sub_multisets_with_first(key):
            total += mult * self.cumulant(sub) * self.moment(rest)
        return total

    def to_config(self):
        return {
            "type": "iid_cumulant",
            "sites": self.num_sites,
            "cumulants": [format_rational(c) for c in self.cumulants],
        }


class MomentSequenceOracle(MomentOracle):
    """A single random variable given by its moment sequence M_0 = 1, M_1, ..., M_K."""

    def __init__(self, moments: Sequence):
        ms = [Fraction(x) for x in moments]
        if not ms or ms[0] != 1:
            raise DomainError("moment sequence must start with M_0 = 1")
        super().__init__(1, len(ms) - 1)
        self.sequence = tuple(ms)

    def _moment(self, key):
        return self.sequence[len(key)]


def composite_truncated_moment(families: Sequence[Sequence[int]], oracle: MomentOracle) -> Fraction:
    """Truncated moment of the products ``prod phi(J_q)`` via the partition
    recursion on the composite variables themselves."""
    fams = tuple(sorted(tuple(sorted(f)) for f in families))
    if not fams:
        raise DomainError("at least one family is required")
    memo: dict = {}

    def kappa(fs):
        if fs in memo:
            return memo[fs]
        total = oracle.moment([s for f in fs for s in f])
        for blocks in index_partitions(len(fs)):
            if len(blocks) < 2:
                continue
            total -= prod(
                (kappa(tuple(sorted(fs[i] for i in b))) for b in blocks), start=Fraction(1)
            )
        memo[fs] = total
        return total

    return kappa(fams)


def composite_truncated_moment_connected(families: Sequence[Sequence[int]], oracle: MomentOracle) -> Fraction:
    """Same quantity expanded over connected partitions of the family legs."""
    from .partitions import enumerate_connected_partitions

    labelled = [[(q, i) for i in range(len(f))] for q, f in enumerate(families)]
    site = {(q, i): s for q, f in enumerate(families) for i, s in enumerate(f)}
    total = Fraction(0)
    for part in enumerate_connected_partitions(labelled):
        total += prod((oracle.cumulant([site[x] for x in b]) for b in part.blocks), start=Fraction(1))
    return total


def measure_from_config(cfg: dict) -> MomentOracle:
    """Build an oracle from a parsed measure configuration document."""
    if not isinstance(cfg, dict):
        raise ConfigError("measure configuration must be a JSON object")
    kind = cfg.get("type")
    try:
        if kind == "discrete":
            k = cfg.get("sites")
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ConfigError("'sites' must be a positive integer")
            configs = cfg.get("configs")
            if not isinstance(configs, list) or not configs:
                raise ConfigError("'configs' must be a nonempty list")
            parsed = []
            for c in configs:
                if not isinstance(c, dict) or set(c) != {"weight", "values"}:
                    raise ConfigError("each config needs exactly 'weight' and 'values'")
                vals = c["values"]
                if not isinstance(vals, list) or len(vals) != k:
                    raise ConfigError(f"each config must list {k} values")
                parsed.append((parse_rational(c["weight"]), [parse_rational(v) for v in vals]))
            return DiscreteMeasure(parsed)
        if kind == "gaussian":
            cov = cfg.get("covariance")
            if not isinstance(cov, list) or not all(isinstance(r, list) for r in cov):
                raise ConfigError("'covariance' must be a list of rows")
            return GaussianOracle([[parse_rational(x) for x in row] for row in cov])
        if kind == "iid_cumulant":
            k = cfg.get("sites")
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ConfigError("'sites' must be a positive integer")
            cums = cfg.get("cumulants")
            if not isinstance(cums, list) or not cums:
                raise ConfigError("'cumulants' must be a nonempty list")
            return IIDCumulantOracle(k, [parse_rational(c) for c in cums])
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown measure type {kind!r}")


def load_measure(path) -> MomentOracle:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read measure file {path}: {exc}") from None
    return measure_from_config(cfg)

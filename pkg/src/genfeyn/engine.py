"""Perturbation series over a finite weighted volume.

Integrals over the region are replaced by weighted sums over sites. Every
quantity has a graph-sum route (Feynman rules applied to enumerated graphs)
and a brute-force route (direct moments of the base measure), so the two can
be compared exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import islice, product
from typing import NamedTuple, Sequence

from .errors import CapabilityError, DomainError
from .graphs import FeynmanGraph, enumerate_graphs, has_self_contraction, is_connected
from .moments import DiscreteMeasure, MomentOracle, MomentSequenceOracle, truncated_moment
from .partitions import check_capacity, enumerate_connected_partitions, is_sc_free
from .powerseries import FormalSeries
from .rational import format_rational
from .wick import wick_expand, wick_expectation_recursive


@dataclass(frozen=True)
class VolumeSpec:
    """Integration sites with their quadrature weights."""

    sites: tuple
    weights: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        weights = tuple(Fraction(w) for w in self.weights)
        if not sites:
            raise DomainError("volume needs at least one site")
        if len(sites) != len(weights):
            raise DomainError("one weight per volume site is required")
        if len(set(sites)) != len(sites):
            raise DomainError("volume sites must be distinct")
        if any(w <= 0 for w in weights):
            raise DomainError("volume weights must be positive")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, sites: Sequence[int], weight=1) -> "VolumeSpec":
        return cls(tuple(sites), (weight,) * len(sites))

    def scaled(self, r) -> "VolumeSpec":
        return VolumeSpec(self.sites, tuple(Fraction(r) * w for w in self.weights))

    def to_dict(self) -> dict:
        return {"sites": list(self.sites), "weights": [format_rational(w) for w in self.weights]}


@dataclass(frozen=True)
class ExpansionRequest:
    measure: MomentOracle
    volume: VolumeSpec
    external_sites: tuple = ()
    p: int = 4
    N: int = 2
    wick_ordered: bool = False
    connected_only: bool = False
    jobs: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "external_sites", tuple(int(s) for s in self.external_sites))
        if self.p < 1:
            raise DomainError(f"interaction degree must be >= 1, got {self.p}")
        if self.N < 0:
            raise DomainError(f"order must be >= 0, got {self.N}")
        for s in self.external_sites + self.volume.sites:
            if not 0 <= s < self.measure.num_sites:
                raise DomainError(f"site {s} is not a site of the measure")

    @property
    def n(self) -> int:
        return len(self.external_sites)

    @property
    def filtered(self) -> str:
        tags = [t for t, on in (("wick", self.wick_ordered), ("connected", self.connected_only)) if on]
        return "+".join(tags) or "none"

    def with_(self, **changes) -> "ExpansionRequest":
        return replace(self, **changes)

    def require_capability(self, order: int | None = None) -> None:
        needed = self.n + self.p * (self.N if order is None else order)
        cap = self.measure.max_order
        if cap is not None and needed > cap:
            raise CapabilityError(f"expansion needs moments of order {needed}; oracle supports {cap}")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "external_sites": list(self.external_sites),
            "p": self.p,
            "N": self.N,
            "wick_ordered": self.wick_ordered,
            "connected_only": self.connected_only,
            "measure": self.measure.to_config(),
            "volume": self.volume.to_dict(),
        }


@dataclass
class SeriesResult:
    series: FormalSeries
    graph_counts: list
    kind: str
    filtered: str
    request: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "order": self.series.order,
            "coefficients": [format_rational(c) for c in self.series],
            "graph_counts": list(self.graph_counts),
            "filtered": self.filtered,
            "request": self.request,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        rows = ["order,coefficient,graph_count"]
        counts = list(self.graph_counts) + [""] * (len(self.series) - len(self.graph_counts))
        rows += [f"{k},{format_rational(c)},{counts[k]}" for k, c in enumerate(self.series)]
        return "\n".join(rows) + "\n"


class CompositeMoment(NamedTuple):
    """A truncated moment of the interaction computed two independent ways."""

    via_connected_partitions: Fraction
    via_recursion: Fraction

    @property
    def agree(self) -> bool:
        return self.via_connected_partitions == self.via_recursion


def _assignments(req: ExpansionRequest, m: int) -> list[tuple[tuple, Fraction]]:
    """All (y-sites, weight product) pairs for m integration points."""
    vol = req.volume
    out = []
    for idx in product(range(len(vol.sites)), repeat=m):
        w = Fraction(1)
        for i in idx:
            w *= vol.weights[i]
        out.append((tuple(vol.sites[i] for i in idx), w))
    return out


def _compile(g: FeynmanGraph, external_sites: tuple) -> list[tuple[tuple, tuple]]:
    """Per block: the fixed outer sites and the inner-vertex indices (0-based, with repeats)."""
    compiled = []
    for b in g.blocks:
        outer_sites = tuple(external_sites[x.vertex - 1] for x in b if x.is_outer)
        inner = tuple(x.vertex - 1 for x in b if not x.is_outer)
        compiled.append((outer_sites, inner))
    return compiled


def _value(compiled, assignments, oracle, cache=None) -> Fraction:
    # cache maps raw (unsorted) site tuples to cumulants, shared across graphs
    if cache is None:
        cache = {}
    cumulant = oracle.cumulant
    total = Fraction(0)
    for ys, w in assignments:
        term = w
        for outer_sites, inner in compiled:
            sites = outer_sites + tuple(ys[j] for j in inner)
            k = cache.get(sites)
            if k is None:
                k = cache[sites] = cumulant(sites)
            if not k:
                term = 0
                break
            term *= k
        if term:
            total += term
    return total


def evaluate_graph(g: FeynmanGraph, req: ExpansionRequest) -> Fraction:
    """Feynman rules: one truncated moment per empty vertex, multiplied, then
    summed over inner-vertex positions with the volume weights."""
    if g.n != req.n or g.p != req.p:
        raise DomainError(f"graph has n={g.n}, p={g.p}; request has n={req.n}, p={req.p}")
    req.require_capability(g.m)
    return _value(_compile(g, req.external_sites), _assignments(req, g.m), req.measure)


def _keep(g: FeynmanGraph, wick_ordered: bool, connected_only: bool) -> bool:
    if wick_ordered and has_self_contraction(g):
        return False
    if connected_only and not is_connected(g):
        return False
    return True


def _order_chunk(req: ExpansionRequest, m: int, start: int, stop: int | None) -> tuple[Fraction, int]:
    assignments = _assignments(req, m)
    total, count, cache = Fraction(0), 0, {}
    graphs = islice(enumerate_graphs(req.n, m, req.p), start, stop)
    for g in graphs:
        if _keep(g, req.wick_ordered, req.connected_only):
            total += _value(_compile(g, req.external_sites), assignments, req.measure, cache)
            count += 1
    return total, count


def _bell(k: int) -> int:
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def graph_sum(req: ExpansionRequest, m: int, pool: ProcessPoolExecutor | None = None) -> tuple[Fraction, int]:
    """Sum of evaluate_graph over the (filtered) graphs of order m, and their count.

    With a pool the enumeration is split into contiguous chunks whose partial
    sums are added back in canonical order.
    """
    req.require_capability(m)
    check_capacity(req.n + req.p * m)
    if pool is None or req.jobs <= 1:
        return _order_chunk(req, m, 0, None)
    total_graphs = _bell(req.n + req.p * m)
    nchunks = max(1, min(total_graphs, 4 * req.jobs))
    bounds = [total_graphs * i // nchunks for i in range(nchunks + 1)]
    futures = [pool.submit(_order_chunk, req, m, bounds[i], bounds[i + 1]) for i in range(nchunks)]
    total, count = Fraction(0), 0
    for f in futures:
        t, c = f.result()
        total += t
        count += c
    return total, count


def perturbation_series(req: ExpansionRequest) -> SeriesResult:
    """Coefficient of lambda^m is (-1)^m / m! times the filtered graph sum of order m.

    With ``connected_only`` and no external points the empty graph is dropped,
    so the constant term is 0 as for a logarithm.
    """
    req.require_capability()
    check_capacity(req.n + req.p * req.N)
    coeffs, counts = [], []
    pool = ProcessPoolExecutor(max_workers=req.jobs) if req.jobs > 1 else None
    try:
        for m in range(req.N + 1):
            if req.connected_only and req.n == 0 and m == 0:
                coeffs.append(Fraction(0))
                counts.append(0)
                continue
            total, count = graph_sum(req, m, pool)
            coeffs.append(Fraction((-1) ** m, math.factorial(m)) * total)
            counts.append(count)
    finally:
        if pool is not None:
            pool.shutdown()
    kind = "free_energy" if (req.connected_only and req.n == 0) else ("partition_function" if req.n == 0 else "moment")
    return SeriesResult(FormalSeries(coeffs), counts, kind, req.filtered, req.to_dict())


def free_energy_series(req: ExpansionRequest) -> SeriesResult:
    """ln Xi as a sum over connected vacuum graphs."""
    if req.n != 0:
        raise DomainError("the free energy has no external points")
    return perturbation_series(req.with_(connected_only=True))


def partition_function_series(req: ExpansionRequest) -> SeriesResult:
    return perturbation_series(req.with_(external_sites=(), connected_only=False))


def moment_sum_direct(m: int, req: ExpansionRequest) -> Fraction:
    """Brute force: sum over positions of weights times the full moment
    <phi(x_1)...phi(x_n) phi^p(y_1)...phi^p(y_m)>.

    With ``wick_ordered`` each phi^p(y_j) is replaced by the expansion of
    :phi^p(y_j): into ordinary monomials.
    """
    req.require_capability(m)
    total = Fraction(0)
    for ys, w in _assignments(req, m):
        if req.wick_ordered:
            value = wick_expectation_recursive([(y,) * req.p for y in ys], req.external_sites, req.measure)
        else:
            value = req.measure.moment(req.external_sites + tuple(y for y in ys for _ in range(req.p)))
        total += w * value
    return total


def truncated_composite_moment(m: int, req: ExpansionRequest) -> CompositeMoment:
    """<V, ..., V>^T (m copies) for V = sum_y w(y) phi^p(y) (or its Wick-ordered form).

    (a) connected partitions of the m leg families, weighted over positions;
    (b) the partition recursion applied to the moments <V^k> from moment_sum_direct.
    """
    if m < 1:
        raise DomainError("need at least one copy of the interaction")
    req = req.with_(external_sites=())
    req.require_capability(m)
    check_capacity(req.p * m)
    families = [[(j, k) for k in range(req.p)] for j in range(m)]
    parts = [
        part for part in enumerate_connected_partitions(families)
        if not req.wick_ordered or is_sc_free(part, families)
    ]
    via_pc = Fraction(0)
    oracle = req.measure
    for ys, w in _assignments(req, m):
        inner = Fraction(0)
        for part in parts:
            term = Fraction(1)
            for b in part.blocks:
                term *= oracle.cumulant([ys[j] for j, _ in b])
                if not term:
                    break
            inner += term
        via_pc += w * inner
    moments = [moment_sum_direct(k, req) for k in range(m + 1)]
    via_rec = truncated_moment(MomentSequenceOracle(moments), (0,) * m)
    return CompositeMoment(via_pc, via_rec)


def _interaction_values(measure: DiscreteMeasure, req: ExpansionRequest) -> list[Fraction]:
    """V evaluated on every configuration of a discrete measure."""
    vol = req.volume
    if req.wick_ordered:
        expansions = [wick_expand((y,) * req.p, measure) for y in vol.sites]
    out = []
    for _, vals in measure.configs:
        v = Fraction(0)
        for i, y in enumerate(vol.sites):
            if req.wick_ordered:
                local = sum(
                    (c * math.prod((vals[s] for s in key), start=Fraction(1)) for key, c in expansions[i].terms.items()),
                    Fraction(0),
                )
            else:
                local = vals[y] ** req.p
            v += vol.weights[i] * local
        out.append(v)
    return out


def exact_partition_function(measure: MomentOracle, req: ExpansionRequest, lambda_value) -> float:
    """Xi(lambda) = sum_i w_i exp(-lambda V_i) in binary64."""
    if not isinstance(measure, DiscreteMeasure):
        raise DomainError("the exact partition function needs a discrete measure")
    lam = float(lambda_value)
    return math.fsum(float(w) * math.exp(-lam * float(v)) for (w, _), v in zip(measure.configs, _interaction_values(measure, req)))


def direct_normalized_moment(measure: MomentOracle, req: ExpansionRequest, lambda_value) -> float:
    """<phi(x_1)...phi(x_n)> under the perturbed, normalized measure, in binary64."""
    if not isinstance(measure, DiscreteMeasure):
        raise DomainError("direct evaluation needs a discrete measure")
    lam = float(lambda_value)
    vs = _interaction_values(measure, req)
    num = math.fsum(
        float(w) * float(math.prod((vals[s] for s in req.external_sites), start=Fraction(1))) * math.exp(-lam * float(v))
        for (w, vals), v in zip(measure.configs, vs)
    )
    return num / exact_partition_function(measure, req, lam)


def normalized_moment_series(req: ExpansionRequest) -> SeriesResult:
    """S_n / Xi, by multiplying with the inverse of the vacuum series."""
    if req.n < 1:
        raise DomainError("normalized moments need at least one external point")
    if req.connected_only:
        raise DomainError("normalized moments are built from unfiltered-by-connectivity series")
    num = perturbation_series(req)
    den = partition_function_series(req)
    series = num.series * den.series.inverse()
    return SeriesResult(series, num.graph_counts, "normalized_moment", req.filtered, req.to_dict())

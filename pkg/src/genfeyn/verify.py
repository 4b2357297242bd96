"""End-to-end identity suites, shared by the ``verify`` subcommand and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import (
    ExpansionRequest,
    exact_partition_function,
    free_energy_series,
    graph_sum,
    moment_sum_direct,
    partition_function_series,
    truncated_composite_moment,
)
from .moments import DiscreteMeasure
from .rational import format_rational
from .wick import wick_expectation_recursive, wick_expectation_sc

SUITES = ("graph-sum", "linked-cluster", "wick", "connected-partitions", "remainder")

# largest leg-set size the graph-sum and Wick suites enumerate
GRAPH_SUITE_LIMIT = 8
REMAINDER_LAMBDAS = (Fraction(1, 64), Fraction(1, 128), Fraction(1, 256))


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    skipped: bool = False
    checks: int = 0
    lines: list = field(default_factory=list)
    counterexample: str | None = None

    def fail(self, text: str) -> None:
        if self.passed:
            self.counterexample = text
        self.passed = False
        self.lines.append("FAIL " + text)


def _cases(req: ExpansionRequest):
    for n in range(3):
        for m in range(req.N + 1):
            if n + req.p * m <= GRAPH_SUITE_LIMIT:
                yield n, m


def _external(req: ExpansionRequest, n: int) -> tuple:
    k = req.measure.num_sites
    return tuple(i % k for i in range(n))


def suite_graph_sum(req: ExpansionRequest) -> SuiteResult:
    res = SuiteResult("graph-sum")
    for n, m in _cases(req):
        r = req.with_(external_sites=_external(req, n), wick_ordered=False, connected_only=False)
        lhs, count = graph_sum(r, m)
        rhs = moment_sum_direct(m, r)
        res.checks += 1
        if lhs != rhs:
            res.fail(f"n={n} m={m} p={r.p}: graph sum over {count} graphs = {format_rational(lhs)}, "
                     f"direct moment = {format_rational(rhs)}")
    return res


def suite_linked_cluster(req: ExpansionRequest) -> SuiteResult:
    res = SuiteResult("linked-cluster")
    for wick in (False, True):
        r = req.with_(external_sites=(), wick_ordered=wick, connected_only=False)
        xi = partition_function_series(r).series
        fe = free_energy_series(r).series
        logxi = xi.log()
        for k, (a, b) in enumerate(zip(fe, logxi)):
            res.checks += 1
            tag = "wick" if wick else "plain"
            if a != b:
                res.fail(f"{tag} order {k}: connected graphs {format_rational(a)}, log Xi {format_rational(b)}")
            else:
                res.lines.append(f"{tag} order {k}: {format_rational(a)}")
    return res


def suite_wick(req: ExpansionRequest) -> SuiteResult:
    res = SuiteResult("wick")
    for n, m in _cases(req):
        r = req.with_(external_sites=_external(req, n), wick_ordered=True, connected_only=False)
        lhs, count = graph_sum(r, m)
        rhs = moment_sum_direct(m, r)
        res.checks += 1
        if lhs != rhs:
            res.fail(f"n={n} m={m} p={r.p}: self-contraction-free graphs ({count}) = {format_rational(lhs)}, "
                     f"Wick-substituted moment = {format_rational(rhs)}")
    # small family layouts over the measure's first two sites
    sites = tuple(range(min(2, req.measure.num_sites)))
    oracle = req.measure
    for sizes in ((1,), (2,), (1, 1), (2, 1), (2, 2), (1, 1, 1), (3, 1)):
        for ext_size in (0, 1):
            fams = [tuple(sites[(q + i) % len(sites)] for i in range(s)) for q, s in enumerate(sizes)]
            ext = sites[:1] * ext_size
            if oracle.max_order is not None and sum(sizes) + ext_size > oracle.max_order:
                continue
            a = wick_expectation_sc(fams, ext, oracle)
            b = wick_expectation_recursive(fams, ext, oracle)
            res.checks += 1
            if a != b:
                res.fail(f"families={fams} external={ext}: partition sum {format_rational(a)}, "
                         f"expanded {format_rational(b)}")
    return res


def suite_connected_partitions(req: ExpansionRequest) -> SuiteResult:
    res = SuiteResult("connected-partitions")
    for m in range(1, min(req.N, 3) + 1):
        if req.p * m > 9:
            break
        cm = truncated_composite_moment(m, req.with_(external_sites=()))
        res.checks += 1
        if not cm.agree:
            res.fail(f"m={m} p={req.p}: connected partitions {format_rational(cm.via_connected_partitions)}, "
                     f"recursion {format_rational(cm.via_recursion)}")
        else:
            res.lines.append(f"m={m}: {format_rational(cm.via_recursion)}")
    return res


def remainder_ratios(req: ExpansionRequest, order: int, lambdas=REMAINDER_LAMBDAS) -> list[float]:
    """|Xi(l) - S_N(l)| / |Xi(l/2) - S_N(l/2)| for each l."""
    r = req.with_(external_sites=(), N=order, connected_only=False)
    series = partition_function_series(r).series
    out = []
    for lam in lambdas:
        num = abs(exact_partition_function(r.measure, r, lam) - float(series.evaluate(lam)))
        den = abs(exact_partition_function(r.measure, r, lam / 2) - float(series.evaluate(lam / 2)))
        out.append(num / den)
    return out


def suite_remainder(req: ExpansionRequest) -> SuiteResult:
    res = SuiteResult("remainder")
    if not isinstance(req.measure, DiscreteMeasure):
        res.skipped = True
        res.lines.append("skipped: needs a discrete measure")
        return res
    for order in (1, 2):
        if order > req.N:
            break
        nxt = moment_sum_direct(order + 1, req.with_(external_sites=(), connected_only=False))
        if nxt == 0:
            res.lines.append(f"N={order}: next coefficient vanishes, ratio test not applicable")
            continue
        target = 2 ** (order + 1)
        for lam, ratio in zip(REMAINDER_LAMBDAS, remainder_ratios(req, order)):
            res.checks += 1
            if not 0.8 * target <= ratio <= 1.25 * target:
                res.fail(f"N={order} lambda={lam}: remainder ratio {ratio:.6g} outside "
                         f"[{0.8 * target:g}, {1.25 * target:g}]")
            else:
                res.lines.append(f"N={order} lambda={lam}: ratio {ratio:.6g}")
    return res


RUNNERS = {
    "graph-sum": suite_graph_sum,
    "linked-cluster": suite_linked_cluster,
    "wick": suite_wick,
    "connected-partitions": suite_connected_partitions,
    "remainder": suite_remainder,
}


def run_suites(req: ExpansionRequest, names=SUITES) -> list[SuiteResult]:
    return [RUNNERS[name](req) for name in names]

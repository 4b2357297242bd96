import math
from fractions import Fraction
from itertools import product

import pytest

from genfeyn.engine import (
    ExpansionRequest,
    VolumeSpec,
    direct_normalized_moment,
    evaluate_graph,
    exact_partition_function,
    free_energy_series,
    graph_sum,
    moment_sum_direct,
    normalized_moment_series,
    partition_function_series,
    perturbation_series,
    truncated_composite_moment,
)
from genfeyn.errors import CapabilityError, DomainError
from genfeyn.graphs import FeynmanGraph, enumerate_graphs
from genfeyn.moments import GaussianOracle, IIDCumulantOracle


def test_two_vertex_chain(two_site, unit_volume):
    g = FeynmanGraph.parse("x1,v1.1,v1.2|v1.3,v2.1|v1.4,v2.2|v2.3,v2.4,x2", 2, 2, 4)
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0, 1), p=4)
    k = two_site.cumulant
    expected = sum(
        k((0, y1, y1)) * k((y1, y2)) ** 2 * k((y2, y2, 1))
        for y1, y2 in product((0, 1), repeat=2)
    )
    assert evaluate_graph(g, req) == expected


def test_two_vertex_chain_weighted(two_site):
    vol = VolumeSpec((0, 1), (Fraction(1, 3), Fraction(2)))
    g = FeynmanGraph.parse("x1,v1.1,v1.2|v1.3,v2.1|v1.4,v2.2|v2.3,v2.4,x2", 2, 2, 4)
    req = ExpansionRequest(two_site, vol, external_sites=(1, 1), p=4)
    k, w = two_site.cumulant, dict(zip(vol.sites, vol.weights))
    expected = sum(
        w[y1] * w[y2] * k((1, y1, y1)) * k((y1, y2)) ** 2 * k((y2, y2, 1))
        for y1, y2 in product((0, 1), repeat=2)
    )
    assert evaluate_graph(g, req) == expected


def test_order_zero_graphs(skewed):
    req = ExpansionRequest(skewed, VolumeSpec.uniform([0]), external_sites=(0, 2))
    joined = FeynmanGraph.parse("x1,x2", 2, 0, 4)
    split = FeynmanGraph.parse("x1|x2", 2, 0, 4)
    assert evaluate_graph(joined, req) == skewed.cumulant((0, 2))
    assert evaluate_graph(split, req) == skewed.cumulant((0,)) * skewed.cumulant((2,))


def test_single_site_degree_two(pm_one):
    w = Fraction(3, 5)
    req = ExpansionRequest(pm_one, VolumeSpec((0,), (w,)), p=2)
    values = {str(g): evaluate_graph(g, req) for g in enumerate_graphs(0, 1, 2)}
    assert values == {"v1.1,v1.2": w, "v1.1|v1.2": 0}
    assert graph_sum(req, 1) == (w * pm_one.moment((0, 0)), 2)


def test_graph_mismatch(two_site, unit_volume):
    req = ExpansionRequest(two_site, unit_volume, p=4)
    with pytest.raises(DomainError):
        evaluate_graph(FeynmanGraph.parse("v1.1,v1.2", 0, 1, 2), req)


def test_moment_sum_direct_examples(two_site, unit_volume, pm_one):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0, 1))
    assert moment_sum_direct(0, req) == two_site.moment((0, 1))
    single = ExpansionRequest(pm_one, VolumeSpec.uniform([0]), p=4)
    assert moment_sum_direct(1, single) == 1


@pytest.mark.parametrize("n,m,p", [(0, 1, 2), (1, 1, 3), (2, 1, 2), (0, 2, 3), (2, 1, 4), (1, 2, 2)])
def test_graph_sum_matches_direct(two_site, unit_volume, n, m, p):
    req = ExpansionRequest(two_site, unit_volume, external_sites=tuple(range(n)), p=p)
    assert graph_sum(req, m)[0] == moment_sum_direct(m, req)


def test_series_examples(two_site, unit_volume, pm_one):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0, 1), N=0)
    assert list(perturbation_series(req).series) == [two_site.moment((0, 1))]
    assert list(perturbation_series(req.with_(external_sites=())).series) == [1]
    single = ExpansionRequest(pm_one, VolumeSpec.uniform([0]), p=4, N=2)
    res = perturbation_series(single)
    assert list(res.series) == [1, -1, Fraction(1, 2)]
    assert res.kind == "partition_function" and res.graph_counts == [1, 15, 4140]
    assert list(free_energy_series(single).series) == [0, -1, 0]


def test_gaussian_only_pair_blocks():
    g = GaussianOracle([[2, 1], [1, 1]])
    req = ExpansionRequest(g, VolumeSpec.uniform([0, 1]), external_sites=(0, 1), p=2)
    for gr in enumerate_graphs(2, 1, 2):
        if any(len(b) != 2 for b in gr.blocks):
            assert evaluate_graph(gr, req) == 0
    pair_only = sum(
        evaluate_graph(gr, req) for gr in enumerate_graphs(2, 1, 2) if all(len(b) == 2 for b in gr.blocks)
    )
    assert pair_only == moment_sum_direct(1, req)


def test_free_energy_low_orders(two_site):
    vol = VolumeSpec((0, 1), (Fraction(1, 2), Fraction(3)))
    req = ExpansionRequest(two_site, vol, p=3, N=2)
    fe = free_energy_series(req).series
    v1 = moment_sum_direct(1, req)
    v2 = moment_sum_direct(2, req)
    assert fe[1] == -v1
    assert fe[2] == Fraction(1, 2) * (v2 - v1 ** 2)
    assert fe[2] == Fraction(1, 2) * truncated_composite_moment(2, req).via_connected_partitions


def test_free_energy_rejects_external(two_site, unit_volume):
    with pytest.raises(DomainError):
        free_energy_series(ExpansionRequest(two_site, unit_volume, external_sites=(0,)))


def test_linked_cluster_small(skewed):
    req = ExpansionRequest(skewed, VolumeSpec.uniform([0, 2]), p=2, N=3)
    assert free_energy_series(req).series == partition_function_series(req).series.log()
    wick = req.with_(wick_ordered=True)
    assert free_energy_series(wick).series == partition_function_series(wick).series.log()


def test_composite_examples(pm_one):
    w = Fraction(2, 3)
    req = ExpansionRequest(pm_one, VolumeSpec((0,), (w,)), p=2)
    assert truncated_composite_moment(1, req) == (w, w)
    assert truncated_composite_moment(2, req) == (0, 0)
    kappa = Fraction(7)
    iid = IIDCumulantOracle(1, [0, 1, 0, kappa, 0, 0])
    req = ExpansionRequest(iid, VolumeSpec((0,), (w,)), p=2)
    cm = truncated_composite_moment(2, req)
    assert cm.agree and cm.via_recursion == w ** 2 * (kappa + 2)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_composite_routes_agree(skewed, m):
    req = ExpansionRequest(skewed, VolumeSpec((0, 1), (1, Fraction(1, 2))), p=3)
    assert truncated_composite_moment(m, req).agree
    assert truncated_composite_moment(m, req.with_(wick_ordered=True)).agree


def test_composite_needs_positive_order(skewed):
    with pytest.raises(DomainError):
        truncated_composite_moment(0, ExpansionRequest(skewed, VolumeSpec.uniform([0])))


def test_exact_partition_function(two_site, unit_volume, pm_one):
    assert exact_partition_function(two_site, ExpansionRequest(two_site, unit_volume), 0) == 1
    single = ExpansionRequest(pm_one, VolumeSpec.uniform([0]), p=4)
    for lam in (0.1, 0.5, 2.0):
        assert exact_partition_function(pm_one, single, lam) == pytest.approx(math.exp(-lam), rel=1e-15)
    with pytest.raises(DomainError):
        exact_partition_function(GaussianOracle([[1]]), ExpansionRequest(GaussianOracle([[1]]), VolumeSpec.uniform([0])), 1)


def test_normalized_order_zero(two_site, unit_volume):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0, 1), N=0)
    assert list(normalized_moment_series(req).series) == [two_site.moment((0, 1))]


def test_normalized_gaussian_first_order():
    g = GaussianOracle([[1, Fraction(1, 2)], [Fraction(1, 2), 2]])
    req = ExpansionRequest(g, VolumeSpec.uniform([0, 1]), external_sites=(0, 1), p=4, N=1)
    s = normalized_moment_series(req).series
    # <x1 x2> - lambda (<x1 x2 V> - <x1 x2><V>), i.e. the first cumulant correction
    direct = moment_sum_direct(1, req) - g.moment((0, 1)) * moment_sum_direct(1, req.with_(external_sites=()))
    assert list(s) == [g.moment((0, 1)), -direct]
    # graphs where the external pair is not linked to the vertex cancel
    linked = sum(
        evaluate_graph(gr, req) for gr in enumerate_graphs(2, 1, 4)
        if all(len(b) == 2 for b in gr.blocks) and not any(
            {x.vertex for x in b if x.is_outer} == {1, 2} for b in gr.blocks)
    )
    assert s[1] == -linked


def test_normalized_matches_direct_float(two_site, unit_volume):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0, 1), p=2, N=2)
    s = normalized_moment_series(req).series
    for lam in (1e-2, 5e-3):
        err = abs(float(s.evaluate(lam)) - direct_normalized_moment(two_site, req, lam))
        assert err < 50 * lam ** 3


def test_normalized_rejects(two_site, unit_volume):
    with pytest.raises(DomainError):
        normalized_moment_series(ExpansionRequest(two_site, unit_volume))


@pytest.mark.parametrize("r", [Fraction(2), Fraction(1, 3)])
def test_volume_scaling(two_site, unit_volume, r):
    req = ExpansionRequest(two_site, unit_volume, p=2, N=3)
    base = free_energy_series(req).series
    scaled = free_energy_series(req.with_(volume=unit_volume.scaled(r))).series
    assert all(scaled[m] == r ** m * base[m] for m in range(4))


def test_jobs_do_not_change_result(two_site, unit_volume):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(0,), p=3, N=2)
    one = perturbation_series(req)
    two = perturbation_series(req.with_(jobs=2))
    assert one.series == two.series and one.graph_counts == two.graph_counts
    assert one.to_json() == two.to_json()


def test_capability_errors():
    iid = IIDCumulantOracle(1, [0, 1, 0, 3])
    req = ExpansionRequest(iid, VolumeSpec.uniform([0]), p=4, N=2)
    with pytest.raises(CapabilityError):
        perturbation_series(req)
    assert list(perturbation_series(req.with_(N=1)).series) == [1, -iid.moment((0,) * 4)]


def test_request_validation(two_site, unit_volume):
    with pytest.raises(DomainError):
        ExpansionRequest(two_site, unit_volume, external_sites=(5,))
    with pytest.raises(DomainError):
        ExpansionRequest(two_site, unit_volume, N=-1)
    with pytest.raises(DomainError):
        VolumeSpec((0, 0), (1, 1))
    with pytest.raises(DomainError):
        VolumeSpec((0,), (0,))


def test_wick_filtered_series(two_site, unit_volume):
    req = ExpansionRequest(two_site, unit_volume, external_sites=(1,), p=2, N=2, wick_ordered=True)
    res = perturbation_series(req)
    assert res.filtered == "wick"
    for m in range(3):
        assert res.series[m] == Fraction((-1) ** m, math.factorial(m)) * moment_sum_direct(m, req)


def test_csv_output(pm_one):
    res = perturbation_series(ExpansionRequest(pm_one, VolumeSpec.uniform([0]), p=4, N=2))
    assert res.to_csv() == "order,coefficient,graph_count\n0,1,1\n1,-1,15\n2,1/2,4140\n"

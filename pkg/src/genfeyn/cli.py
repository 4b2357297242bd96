"""Command-line front end.

Subcommands: enumerate, render, series, verify, wick-report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from importlib import resources

from .engine import (
    ExpansionRequest,
    VolumeSpec,
    direct_normalized_moment,
    exact_partition_function,
    free_energy_series,
    normalized_moment_series,
    perturbation_series,
)
from .errors import CapabilityError, CapacityError, ConfigError, DomainError
from .graphs import FeynmanGraph, enumerate_graphs, has_self_contraction, is_connected, to_dot
from .moments import DiscreteMeasure, load_measure, measure_from_config
from .partitions import CAPACITY_ENV
from .rational import parse_rational
from .verify import SUITES, run_suites
from .wick import orthogonality_report

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3

EPILOG = f"""\
exit codes:
  0  success
  1  verification failure (first counterexample is printed)
  2  configuration or schema error
  3  capacity or oracle-capability exceeded

measure file (JSON, all scalars are exact-rational strings "p/q" or integers):
  {{"type": "discrete", "sites": K,
    "configs": [{{"weight": "1/2", "values": ["1", "-1", ...]}}, ...]}}
      weights positive and summing to exactly 1, one value per site
  {{"type": "gaussian", "covariance": [["1", "0"], ["0", "1"]]}}
      square and symmetric
  {{"type": "iid_cumulant", "sites": K, "cumulants": ["0", "1", "6", ...]}}
      cumulants of orders 1..Q; orders above Q are unsupported
  Without --measure the bundled 2-site discrete measure is used.

series output (JSON):
  {{"kind", "order", "coefficients": [...], "graph_counts": [...],
    "filtered": "none|wick|connected|wick+connected", "request": {{...}},
    "generated_at"}}; --lambda adds "lambda", "value", "precision": "binary64"
  and, for discrete measures, "direct_value".

environment:
  {CAPACITY_ENV}  ground-set capacity for enumeration (default 14)
"""


def bundled_measure_config() -> dict:
    text = resources.files("genfeyn").joinpath("data/two_site.json").read_text(encoding="utf-8")
    return json.loads(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rational_list(text: str) -> list:
    try:
        return [parse_rational(x) for x in text.split(",") if x.strip()]
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _measure(args):
    if args.measure:
        return load_measure(args.measure)
    return measure_from_config(bundled_measure_config())


def _request(args, measure, n_default=0) -> ExpansionRequest:
    k = measure.num_sites
    if args.external is not None:
        external = args.external
    else:
        external = [i % k for i in range(args.n if args.n is not None else n_default)]
    if args.n is not None and len(external) != args.n:
        raise ConfigError(f"--n {args.n} disagrees with {len(external)} external sites")
    sites = args.volume_sites if args.volume_sites is not None else list(range(k))
    weights = args.weights if args.weights is not None else [1] * len(sites)
    try:
        volume = VolumeSpec(tuple(sites), tuple(weights))
        return ExpansionRequest(
            measure=measure,
            volume=volume,
            external_sites=tuple(external),
            p=args.p,
            N=args.N,
            wick_ordered=getattr(args, "wick", False),
            connected_only=getattr(args, "connected", False),
            jobs=getattr(args, "jobs", 1),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_enumerate(args) -> int:
    count = 0
    lines = []
    if args.dot_dir:
        os.makedirs(args.dot_dir, exist_ok=True)
    for index, g in enumerate(enumerate_graphs(args.n, args.m, args.p)):
        if args.connected_only and not is_connected(g):
            continue
        if args.wick_only and has_self_contraction(g):
            continue
        count += 1
        if not args.count_only:
            lines.append(str(g))
        if args.dot_dir:
            path = os.path.join(args.dot_dir, f"g_{args.n}_{args.m}_{index}.dot")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(to_dot(g, name=f"g_{args.n}_{args.m}_{index}"))
    if args.count_only:
        print(count)
    else:
        for line in lines:
            print(line)
        print(f"# {count} graphs")
    return EXIT_OK


def cmd_render(args) -> int:
    if args.graph is not None:
        try:
            g = FeynmanGraph.parse(args.graph, args.n, args.m, args.p)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
    else:
        for index, g in enumerate(enumerate_graphs(args.n, args.m, args.p)):
            if index == args.index:
                break
        else:
            raise ConfigError(f"graph index {args.index} out of range")
    _emit(to_dot(g), args.output)
    return EXIT_OK


def cmd_series(args) -> int:
    measure = _measure(args)
    req = _request(args, measure)
    if args.free_energy:
        if req.n:
            raise ConfigError("--free-energy takes no external points")
        result = free_energy_series(req)
    elif args.normalized:
        try:
            result = normalized_moment_series(req)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
    else:
        result = perturbation_series(req)
    if args.format == "csv":
        _emit(result.to_csv(), args.output)
        return EXIT_OK
    out = result.to_dict()
    if args.lambda_value is not None:
        lam = float(args.lambda_value)
        out["lambda"] = lam
        out["value"] = float(result.series.evaluate(lam))
        out["precision"] = "binary64"
        if isinstance(measure, DiscreteMeasure) and not req.connected_only:
            if result.kind == "partition_function":
                out["direct_value"] = exact_partition_function(measure, req, lam)
            elif result.kind == "normalized_moment":
                out["direct_value"] = direct_normalized_moment(measure, req, lam)
    if not args.no_timestamp:
        out["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    measure = _measure(args)
    req = _request(args, measure)
    names = args.suite or list(SUITES)
    results = run_suites(req, names)
    for r in results:
        status = "SKIP" if r.skipped else ("ok" if r.passed else "FAIL")
        print(f"[{status}] {r.name} ({r.checks} checks)")
        if args.verbose or not r.passed:
            for line in r.lines:
                print(f"    {line}")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"FAIL ({len(failed)} of {len(results)} suites)")
        print(f"first counterexample [{failed[0].name}]: {failed[0].counterexample}")
        return EXIT_VERIFY
    ran = [r for r in results if not r.skipped]
    skipped = len(results) - len(ran)
    print(f"PASS ({len(ran)} suites)" + (f", {skipped} skipped" if skipped else ""))
    return EXIT_OK


def cmd_wick_report(args) -> int:
    measure = _measure(args)
    sites = args.sites if args.sites is not None else [0]
    for s in sites:
        if not 0 <= s < measure.num_sites:
            raise ConfigError(f"site {s} is not a site of the measure")
    report = orthogonality_report(measure, args.max_degree, sites)
    _emit(report.to_json() + "\n", args.output)
    return EXIT_OK


def _add_expansion_args(sp, p_default, n_default_N):
    sp.add_argument("--measure", help="measure JSON file (default: bundled 2-site discrete measure)")
    sp.add_argument("--n", type=int, default=None, help="number of external points")
    sp.add_argument("--external", type=_int_list, default=None, help="external sites, e.g. 0,1")
    sp.add_argument("--volume-sites", type=_int_list, default=None, help="integration sites (default: all)")
    sp.add_argument("--weights", type=_rational_list, default=None, help="site weights, e.g. 1/2,1")
    sp.add_argument("--p", type=int, default=p_default, help="interaction degree")
    sp.add_argument("--N", type=int, default=n_default_N, help="maximal order in lambda")
    sp.add_argument("--wick", action="store_true", help="Wick-ordered interaction")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (output does not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genfeyn",
        description="Generalized Feynman graphs for non-Gaussian base measures.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("enumerate", help="list or count graphs")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, default=4)
    sp.add_argument("--connected-only", action="store_true")
    sp.add_argument("--wick-only", action="store_true", help="drop graphs with a self-contraction")
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--dot-dir", help="write g_{n}_{m}_{index}.dot files here")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("render", help="DOT text for one graph")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, default=4)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--index", type=int, default=0, help="position in enumeration order")
    group.add_argument("--graph", help='canonical text, e.g. "x1,v1.1,v1.3|v1.2,v1.4"')
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("series", help="perturbation series as exact rationals")
    _add_expansion_args(sp, 4, 2)
    sp.add_argument("--connected", action="store_true", help="keep only connected graphs")
    kind = sp.add_mutually_exclusive_group()
    kind.add_argument("--free-energy", action="store_true", help="ln Xi from connected vacuum graphs")
    kind.add_argument("--normalized", action="store_true", help="S_n / Xi")
    sp.add_argument("--lambda", dest="lambda_value", type=float, default=None,
                    help="also evaluate the partial sum at this coupling (binary64)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--output")
    sp.add_argument("--no-timestamp", action="store_true")
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("verify", help="run the identity suites")
    _add_expansion_args(sp, 2, 3)
    sp.add_argument("--suite", action="append", choices=SUITES)
    sp.add_argument("--verbose", "-v", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("wick-report", help="Wick-monomial inner-product table")
    sp.add_argument("--measure")
    sp.add_argument("--max-degree", type=int, default=3)
    sp.add_argument("--sites", type=_int_list, default=None)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_wick_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapacityError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())

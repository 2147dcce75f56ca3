"""Command-line interface.

Subcommands:

* ``test``     -- run MCAR tests on a CSV file with missing cells
* ``generate`` -- write a synthetic dataset (optionally amputated) to CSV
* ``simulate`` -- run a Monte-Carlo size/power study, write results CSV
* ``plot``     -- render a results CSV as an SVG rate chart

Exit codes: 0 success, 2 usage error, 3 data or numeric error.
"""

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .data import ColumnRoles, load_csv, write_csv
from .errors import McartestError
from .harness import Scenario, resolve_test, run_grid, results_to_csv
from .numerics import rng_stream
from .plotting import render_rate_chart
from .stats import (
    bivariate_mcar_test,
    little_mcar_general,
    little_mcar_univariate,
    ustat_mcar_test,
)
from .synthesis import (
    DistributionSpec,
    MechanismSpec,
    apply_mechanism,
    generate,
    pattern_names,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _split_csv_list(text: str) -> list:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_tests(text: str, parser) -> tuple:
    tags = tuple(_split_csv_list(text))
    if not tags:
        parser.error("--tests must name at least one test")
    for tag in tags:
        try:
            resolve_test(tag, 1)
        except ValueError as exc:
            parser.error(str(exc))
    return tags


def _check_alpha(alpha: float, parser) -> float:
    if not 0.0 < alpha < 1.0:
        parser.error(f"--alpha must be in (0, 1), got {alpha}")
    return alpha


def _run_selected_tests(ds, roles, tags, alpha):
    results = []
    for tag in tags:
        resolved = resolve_test(tag, roles.q)
        if any(r.method == resolved for _, r in results):
            continue
        if resolved == "an":
            result = ustat_mcar_test(ds, roles, alpha)
        elif resolved == "dn":
            result = bivariate_mcar_test(ds, roles, alpha)
        elif resolved == "d2_univariate":
            result = little_mcar_univariate(ds, roles, alpha)
        else:
            result = little_mcar_general(ds, alpha)
        results.append((tag, result))
    return results


def _write_test_report(results, out_path) -> None:
    path = Path(out_path)
    records = [r.to_record() for _, r in results]
    if path.suffix.lower() == ".json":
        with path.open("w", encoding="utf-8") as fh:
            json.dump(records, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "statistic", "df", "p_value", "alpha", "reject"])
        for rec in records:
            writer.writerow(
                [
                    rec["method"],
                    repr(rec["statistic"]),
                    rec["df"],
                    repr(rec["p_value"]),
                    repr(rec["alpha"]),
                    rec["reject"],
                ]
            )


def _cmd_test(args, parser) -> int:
    alpha = _check_alpha(args.alpha, parser)
    tags = _parse_tests(args.tests, parser)
    na_tokens = set(args.na_token) if args.na_token else None
    incomplete = _split_csv_list(args.roles) if args.roles else None
    ds, roles = load_csv(args.input, na_tokens=na_tokens, incomplete=incomplete)
    results = _run_selected_tests(ds, roles, tags, alpha)

    name = Path(args.input).name
    print(f"{name}: n={ds.n} rows, {roles.p} complete, {roles.q} incomplete columns")
    for _, r in results:
        decision = "reject MCAR" if r.reject else "no evidence against MCAR"
        print(
            f"  {r.method:>14}: statistic={r.statistic:.6g} df={r.df} "
            f"p={r.p_value:.6g} -> {decision} at alpha={r.alpha:g}"
        )
    if args.out:
        _write_test_report(results, args.out)
        print(f"report written to {args.out}")
    return EXIT_OK


def _margins_for(args, dim, parser):
    if args.margins is None:
        return tuple(["exp1"] * dim)
    margins = tuple(_split_csv_list(args.margins))
    if len(margins) == 1 and dim > 1:
        margins = margins * dim
    if len(margins) != dim:
        parser.error(f"--margins needs 1 or {dim} entries, got {len(margins)}")
    return margins


def _build_distribution(args, parser) -> DistributionSpec:
    dim = args.p + args.q
    try:
        if args.dist == "std_normal":
            return DistributionSpec(kind="std_normal", dim=dim)
        return DistributionSpec(
            kind="clayton",
            dim=dim,
            theta=args.theta,
            margins=_margins_for(args, dim, parser),
        )
    except ValueError as exc:
        parser.error(str(exc))


def _resolve_control_names(args, names, parser):
    if args.controls is None:
        return None
    out = []
    for item in _split_csv_list(args.controls):
        if item in names:
            out.append(names.index(item))
        else:
            try:
                out.append(int(item))
            except ValueError:
                parser.error(f"--controls: no column named {item!r}")
    return tuple(out)


def _parse_rates(text, parser, name):
    try:
        return tuple(float(v) for v in _split_csv_list(text))
    except ValueError:
        parser.error(f"{name} must be a comma-separated list of numbers")


def _build_mechanism(args, names, parser) -> MechanismSpec:
    controls = _resolve_control_names(args, names, parser)
    try:
        if args.mechanism == "mar_mean":
            p_high = _parse_rates(args.p_high, parser, "--p-high") if args.p_high else None
            p_low = _parse_rates(args.p_low, parser, "--p-low") if args.p_low else None
            return MechanismSpec(
                kind="mar_mean", controls=controls, p_high=p_high, p_low=p_low
            )
        if args.miss_prob is None:
            parser.error(f"--miss-prob is required for mechanism {args.mechanism}")
        if args.mechanism == "mar_1_to_x":
            return MechanismSpec(
                kind="mar_1_to_x",
                miss_prob=args.miss_prob,
                odds=args.odds,
                controls=controls,
            )
        return MechanismSpec(
            kind=args.mechanism, miss_prob=args.miss_prob, controls=controls
        )
    except ValueError as exc:
        parser.error(str(exc))


def _cmd_generate(args, parser) -> int:
    if args.p < 1 or args.q < 1:
        parser.error("need --p >= 1 and --q >= 1")
    if args.n < 1:
        parser.error("need --n >= 1")
    names = pattern_names(args.p, args.q)
    dist = _build_distribution(args, parser)
    mech = _build_mechanism(args, names, parser)
    roles = ColumnRoles(tuple(range(args.p)), tuple(range(args.p, args.p + args.q)))
    full = generate(dist, args.n, rng_stream(args.seed, 0), names)
    ds = apply_mechanism(full, roles, mech, rng_stream(args.seed, 1))
    write_csv(ds, args.out, na_token=args.na_token or "NA")

    out = Path(args.out)
    sidecar = out.with_suffix(".json") if out.suffix == ".csv" else Path(str(out) + ".json")
    meta = {
        "n": args.n,
        "p": args.p,
        "q": args.q,
        "columns": list(names),
        "distribution": dist.to_dict(),
        "mechanism": mech.to_dict(),
        "seed": args.seed,
    }
    with sidecar.open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    missing = int((~ds.mask).sum())
    print(f"wrote {args.out} ({args.n} rows, {missing} missing cells) and {sidecar}")
    return EXIT_OK


def _scenario_from_args(args, parser) -> Scenario:
    if args.scenario:
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            parser.error(f"--scenario: {args.scenario} is not valid JSON ({exc})")
        except OSError as exc:
            parser.error(f"--scenario: {exc}")
        try:
            scenario = Scenario.from_dict(doc)
        except ValueError as exc:
            parser.error(f"--scenario: {exc}")
    else:
        names = pattern_names(args.p, args.q)
        dist = _build_distribution(args, parser)
        mech = _build_mechanism(args, names, parser)
        try:
            scenario = Scenario(
                label=f"{args.p}X{args.q}Y",
                distribution=dist,
                p=args.p,
                q=args.q,
                n=args.n,
                mechanism=mech,
                tests=_parse_tests(args.tests, parser),
                replications=args.replications or 2000,
                alpha=args.alpha,
                master_seed=args.seed,
            )
        except ValueError as exc:
            parser.error(str(exc))
        return scenario

    # file-based scenario still honors the override flags
    if args.replications:
        scenario = replace(scenario, replications=args.replications)
    if args.seed is not None:
        scenario = replace(scenario, master_seed=args.seed)
    return scenario


def _cmd_simulate(args, parser) -> int:
    scenario = _scenario_from_args(args, parser)
    if args.sweep_miss and args.sweep_n:
        parser.error("choose one of --sweep-miss and --sweep-n")
    if args.sweep_miss:
        sweep = {"miss_prob": [float(v) for v in _split_csv_list(args.sweep_miss)]}
    elif args.sweep_n:
        sweep = {"n": [int(v) for v in _split_csv_list(args.sweep_n)]}
    elif scenario.mechanism.miss_prob is not None:
        sweep = {"miss_prob": [scenario.mechanism.miss_prob]}
    else:
        sweep = {"n": [scenario.n]}

    (field, values), = sweep.items()
    print(
        f"scenario {scenario.label}: {scenario.replications} replications per cell, "
        f"{len(values)} cell(s) over {field}, tests {','.join(scenario.tests)}",
        file=sys.stderr,
    )
    cells = []
    for i, value in enumerate(values, start=1):
        cells.extend(run_grid(scenario, {field: [value]}, workers=args.workers))
        print(f"  [{i}/{len(values)}] {field}={value} done", file=sys.stderr)
    results_to_csv(cells, args.out)
    print(f"results written to {args.out}")
    return EXIT_OK


def _cmd_plot(args, parser) -> int:
    with open(args.input, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    render_rate_chart(rows, args.x, args.out, alpha=args.alpha)
    print(f"chart written to {args.out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcartest",
        description="MCAR tests, synthetic missing-data generation, and "
        "Monte-Carlo size/power studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run MCAR tests on a CSV file")
    t.add_argument("--input", required=True, help="CSV file with a header row")
    t.add_argument(
        "--na-token",
        action="append",
        help="string treated as missing (repeatable; replaces NA/NaN/empty)",
    )
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument(
        "--tests",
        default="an,d2",
        help="comma list from an,dn,d2,d2_univariate,d2_general",
    )
    t.add_argument(
        "--roles",
        help="comma list of column names to treat as incomplete "
        "(default: columns containing missing cells)",
    )
    t.add_argument("--out", help="write a machine-readable report (.json or .csv)")

    g = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    g.add_argument("--out", required=True, help="output CSV path")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--p", type=int, default=1, help="complete columns")
    g.add_argument("--q", type=int, default=2, help="incomplete columns")
    g.add_argument("--dist", choices=["std_normal", "clayton"], default="std_normal")
    g.add_argument("--theta", type=float, default=1.0, help="Clayton parameter")
    g.add_argument(
        "--margins",
        help="comma list of exp1,chisq4,uniform (one entry, or one per column)",
    )
    g.add_argument(
        "--mechanism",
        choices=["mcar", "mar_1_to_x", "mar_rank", "mar_mean"],
        default="mcar",
    )
    g.add_argument("--miss-prob", type=float)
    g.add_argument("--odds", type=float, help="odds x for mar_1_to_x (default 9)")
    g.add_argument(
        "--controls",
        help="comma list of control column names or indices, one per incomplete column",
    )
    g.add_argument("--p-high", help="comma list, mar_mean high-group rates")
    g.add_argument("--p-low", help="comma list, mar_mean low-group rates")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--na-token", help="token for missing cells (default NA)")

    s = sub.add_parser("simulate", help="run a Monte-Carlo study")
    s.add_argument("--scenario", help="scenario JSON file")
    s.add_argument("--out", required=True, help="results CSV path")
    s.add_argument("--replications", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="master seed override")
    s.add_argument("--sweep-miss", help="comma list of missingness probabilities")
    s.add_argument("--sweep-n", help="comma list of sample sizes")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--dist", choices=["std_normal", "clayton"], default="std_normal")
    s.add_argument("--theta", type=float, default=1.0)
    s.add_argument("--margins")
    s.add_argument(
        "--mechanism",
        choices=["mcar", "mar_1_to_x", "mar_rank", "mar_mean"],
        default="mcar",
    )
    s.add_argument("--miss-prob", type=float, default=0.12)
    s.add_argument("--odds", type=float)
    s.add_argument("--controls")
    s.add_argument("--p-high")
    s.add_argument("--p-low")
    s.add_argument("--tests", default="an,d2")
    s.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("plot", help="render a results CSV as SVG")
    p.add_argument("--input", required=True, help="results CSV from simulate")
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--x", choices=["param", "n"], default="param")
    p.add_argument("--alpha", type=float, default=0.05)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "test": _cmd_test,
        "generate": _cmd_generate,
        "simulate": _cmd_simulate,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args, parser)
    except McartestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: estimate (user CSV + graph JSON), measure (mi/cmi/tc/mmi/di/rdi
with column groups), experiment (benchmark reports as CSV) and generate
(benchmark datasets as CSV). Results go to stdout, diagnostics to stderr.
Exit codes: 0 success, 2 usage error, 3 data or validation error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import (
    EstimatorConfig,
    ParseError,
    ValidationError,
    cmi_dag,
    dag_from_json,
    dataset_from_array,
    load_dataset,
    mi_dag,
    save_dataset,
    tc_dag,
)
from .gdm import estimate_gdm, plug_in_gdm_discrete, resolve_k
from .baselines import BinningRule, NoiseRule, binning_gdm, ksg_gdm, sigma_h_gdm
from .measures import TimeSeries, di_pooled, mmi, rdi_pooled
from . import experiments as xp

ESTIMATORS = ("gdm", "ksg", "bin", "sigma_h", "oracle")
GENERATORS = (
    "markov_clip",
    "awgn_bsc",
    "indep_mixture",
    "zero_inflated",
    "feature_selection",
    "dynamics_network",
)


def _print_value(value: float, k: int, n: int, extra: str = "") -> None:
    sys.stdout.write(f"value_nats={value:.17g}\tk={k}\tn={n}{extra}\n")


def _parse_k(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"--k must be an integer or 'auto', got {text!r}") from None


def _parse_group(text: str, dataset) -> list[int]:
    cols = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValidationError(f"empty entry in column group {text!r}")
        if part.lstrip("-").isdigit():
            cols.append(int(part))
        else:
            cols.append(dataset.column_index(part))
    return cols


def _estimate_value(dataset, dag, args) -> tuple[float, int, int]:
    config = EstimatorConfig(k=_parse_k(args.k))
    n = dataset.n_rows
    if args.estimator == "gdm":
        res = estimate_gdm(dataset, dag, config)
        return res.value, res.k_used, res.n_used
    if args.estimator == "ksg":
        res = ksg_gdm(dataset, dag, config)
        return res.value, res.k_used, res.n_used
    if args.estimator == "bin":
        return binning_gdm(dataset, dag, BinningRule(args.m)), 0, n
    if args.estimator == "sigma_h":
        value = sigma_h_gdm(dataset, dag, config, NoiseRule(seed=args.seed))
        return value, resolve_k(config, n), n
    return plug_in_gdm_discrete(dataset, dag), 0, n


def _add_common_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="input CSV file")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--k", default="auto", help="neighbor count or 'auto'")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdiv",
        description="estimate graph divergence measures from samples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the divergence for a graph file")
    _add_common_data_flags(est)
    est.add_argument("--graph", required=True, help="graph JSON file")
    est.add_argument("--estimator", required=True, choices=ESTIMATORS)
    est.add_argument("--m", type=int, default=None, help="binning target per bin")
    est.add_argument("--seed", type=int, default=None, help="noise seed (sigma_h)")

    meas = sub.add_parser("measure", help="named information measures")
    msub = meas.add_subparsers(dest="measure", required=True)
    for name in ("mi", "cmi", "tc", "mmi", "di", "rdi"):
        mp = msub.add_parser(name)
        _add_common_data_flags(mp)
        if name == "mi":
            mp.add_argument("--a", required=True)
            mp.add_argument("--b", required=True)
        elif name == "cmi":
            mp.add_argument("--a", required=True)
            mp.add_argument("--b", required=True)
            mp.add_argument("--c", required=True)
        elif name in ("tc", "mmi"):
            mp.add_argument(
                "--groups", required=True, nargs="+",
                help="column groups, e.g. --groups 0 1 2,3",
            )
        elif name == "di":
            mp.add_argument("--x", required=True, help="source column")
            mp.add_argument("--y", required=True, help="target column")
            mp.add_argument("--order", type=int, default=1)
        elif name == "rdi":
            mp.add_argument("--source", required=True)
            mp.add_argument("--target", required=True)
            mp.add_argument("--cond", default=None)

    exp = sub.add_parser("experiment", help="run a benchmark experiment")
    exp.add_argument("--id", type=int, required=True, choices=list(xp.EXPERIMENT_IDS))
    exp.add_argument("--n-list", required=True, help="comma-separated sample sizes")
    exp.add_argument("--trials", type=int, required=True)
    exp.add_argument("--estimators", required=True, help="comma-separated estimator ids")
    exp.add_argument("--seed", type=int, required=True)
    exp.add_argument("--out", required=True, help="output CSV path")
    exp.add_argument("--k", default="auto")
    exp.add_argument("--m", type=int, default=20)
    exp.add_argument("--nodes", type=int, default=12, help="network size (experiment 5)")
    exp.add_argument("--density", type=float, default=0.2, help="edge density (experiment 5)")
    exp.add_argument("--erase-p", type=float, default=0.5, help="erasure rate (experiment 5)")
    exp.add_argument("--noise", type=float, default=0.03, help="dynamics noise (experiment 5)")
    exp.add_argument(
        "--noise-is-std", action="store_true",
        help="read --noise as a standard deviation instead of a variance",
    )
    exp.add_argument("--budget", type=int, default=5, help="selection budget (experiment 6)")
    exp.add_argument(
        "--variant", choices=("cmim", "cmim2"), default="cmim2",
        help="selection rule (experiment 6)",
    )

    gen = sub.add_parser("generate", help="write a benchmark dataset as CSV")
    gen.add_argument("--name", required=True, choices=GENERATORS)
    gen.add_argument("--n", type=int, required=True, help="samples (or time steps)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--params", default="{}", help="JSON object of generator overrides")
    gen.add_argument("--adjacency-out", default=None, help="dynamics_network truth matrix")
    return parser


def _cmd_estimate(args, parser) -> int:
    if args.k != "auto" and args.estimator in ("bin", "oracle"):
        parser.error(f"--k is not accepted by the {args.estimator} estimator")
    if args.m is not None and args.estimator != "bin":
        parser.error("--m is only accepted by the bin estimator")
    if args.seed is not None and args.estimator != "sigma_h":
        parser.error("--seed is only accepted by the sigma_h estimator")
    if args.m is None:
        args.m = 20
    if args.seed is None:
        args.seed = 0
    dataset = load_dataset(args.data, has_header=not args.no_header)
    dag = dag_from_json(args.graph, from_path=True)
    value, k, n = _estimate_value(dataset, dag, args)
    _print_value(value, k, n)
    return 0


def _cmd_measure(args, parser) -> int:
    dataset = load_dataset(args.data, has_header=not args.no_header)
    config = EstimatorConfig(k=_parse_k(args.k))
    name = args.measure
    if name in ("mi", "cmi"):
        a = _parse_group(args.a, dataset)
        b = _parse_group(args.b, dataset)
        if name == "mi":
            dag = mi_dag(a, b)
        else:
            dag = cmi_dag(a, b, _parse_group(args.c, dataset))
        res = estimate_gdm(dataset, dag, config)
        _print_value(res.value, res.k_used, res.n_used)
        return 0
    if name == "tc":
        groups = [_parse_group(g, dataset) for g in args.groups]
        res = estimate_gdm(dataset, tc_dag(groups), config)
        _print_value(res.value, res.k_used, res.n_used)
        return 0
    if name == "mmi":
        groups = [_parse_group(g, dataset) for g in args.groups]
        value, partition = mmi(dataset, groups, config)
        k = resolve_k(config, dataset.n_rows)
        _print_value(value, k, dataset.n_rows, f"\tpartition={partition.rgs_string()}")
        return 0
    if name == "di":
        x = dataset.values[:, _parse_group(args.x, dataset)[0]]
        y = dataset.values[:, _parse_group(args.y, dataset)[0]]
        pooled, dag = di_pooled(x, y, args.order)
        res = estimate_gdm(pooled, dag, config)
        _print_value(res.value, res.k_used, res.n_used)
        return 0
    ts = TimeSeries(dataset.values)
    source = _parse_group(args.source, dataset)[0]
    target = _parse_group(args.target, dataset)[0]
    cond = _parse_group(args.cond, dataset)[0] if args.cond is not None else None
    pooled, dag = rdi_pooled(ts, source, target, cond)
    res = estimate_gdm(pooled, dag, config)
    _print_value(res.value, res.k_used, res.n_used)
    return 0


def _cmd_experiment(args, parser) -> int:
    try:
        n_list = [int(s) for s in args.n_list.split(",") if s]
    except ValueError:
        parser.error(f"bad --n-list {args.n_list!r}")
    estimators = [s.strip() for s in args.estimators.split(",") if s.strip()]
    for est in estimators:
        if est not in ESTIMATORS:
            parser.error(f"unknown estimator id {est!r}")
    report = xp.run_convergence(
        args.id,
        n_list,
        args.trials,
        estimators,
        args.seed,
        config=EstimatorConfig(k=_parse_k(args.k)),
        bin_m=args.m,
        exp5_nodes=args.nodes,
        exp5_density=args.density,
        exp5_erase_p=args.erase_p,
        exp5_noise=args.noise,
        exp5_noise_is_variance=not args.noise_is_std,
        exp6_budget=args.budget,
        exp6_variant=args.variant,
    )
    with open(args.out, "w", newline="") as fh:
        fh.write(report.to_csv())
    sys.stderr.write(f"wrote {len(report.rows)} rows to {args.out}\n")
    return 0


def _cmd_generate(args, parser) -> int:
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        parser.error(f"bad --params JSON: {exc}")
    if not isinstance(params, dict):
        parser.error("--params must be a JSON object")
    rng = xp.Rng(args.seed)
    name = args.name
    if args.adjacency_out is not None and name != "dynamics_network":
        parser.error("--adjacency-out applies only to dynamics_network")
    try:
        if name == "markov_clip":
            ds = xp.gen_markov_clip(
                args.n,
                params.get("alpha1", 0.9),
                params.get("alpha2", 0.8),
                params.get("alpha3", 0.7),
                rng,
            )
        elif name == "awgn_bsc":
            ds = xp.gen_awgn_bsc(
                args.n,
                params.get("alpha", 0.3),
                params.get("beta", 0.2),
                params.get("p", 0.5),
                params.get("sigma_x", 1.0),
                params.get("sigma_n", 0.1),
                rng,
                powers=params.get("powers", True),
            )
        elif name == "indep_mixture":
            ds = xp.gen_indep_mixture_tc(
                args.n, params.get("alphas", (1.0, 0.5, 0.25)), rng
            )
        elif name == "zero_inflated":
            ds = xp.gen_zero_inflated(
                args.n, params.get("p1", 0.6), params.get("p2", 0.6), rng
            )
        elif name == "feature_selection":
            features, y = xp.gen_feature_selection(args.n, rng)
            ds = dataset_from_array(
                np.column_stack([features.values, y]), features.col_names + ("y",)
            )
        else:
            nodes = int(params.get("nodes", 12))
            adj = xp.random_dag_adjacency(nodes, params.get("density", 0.2), rng.child(1))
            noise = params.get("noise", 0.03)
            sigma = noise ** 0.5 if params.get("noise_is_variance", True) else noise
            ts, adj = xp.gen_dynamics_network(
                args.n, adj, sigma, params.get("erase_p", 0.5), rng.child(0)
            )
            ds = dataset_from_array(
                ts.values, tuple(f"x{i}" for i in range(ts.n_vars))
            )
            if args.adjacency_out is not None:
                np.savetxt(args.adjacency_out, adj, fmt="%d", delimiter=",")
    except TypeError as exc:
        raise ValidationError(f"bad generator parameters: {exc}") from exc
    save_dataset(ds, args.out)
    sys.stderr.write(f"wrote {ds.n_rows}x{ds.n_cols} dataset to {args.out}\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args, parser)
        if args.command == "measure":
            return _cmd_measure(args, parser)
        if args.command == "experiment":
            return _cmd_experiment(args, parser)
        return _cmd_generate(args, parser)
    except (ParseError, ValidationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())

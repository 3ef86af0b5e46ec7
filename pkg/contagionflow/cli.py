from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Callable, Sequence
from typing import Any

from contagionflow._constants import LOGGER_NAME, SEED_MODES
from contagionflow.bridges import (
    count_bridge_pairs,
    crossing_point,
    enumerate_bridge_pairs_oracle,
    first_spread_counts,
    incidence_tail_estimate,
    isotonic_violation_rate,
    predicted_ratio,
    run_bridge_trials,
    symmetric_probability_curve,
)
from contagionflow.causal import DEFAULT_ENUMERATION_LIMIT, aggregate_sweeps, write_scores_csv
from contagionflow.contagion import ModelSpec, ThresholdSpec, simulate, spreading_density
from contagionflow.exceptions import ContagionFlowError, ParameterError
from contagionflow.experiments import (
    convergence_diagnostics,
    periphery_core_sweep,
    rewiring_dip,
    run_scenarios,
    symmetry_vs_threshold,
    tie_range_asymmetry,
    tie_range_profile,
    tie_strength_importance,
)
from contagionflow.fixtures import FIXTURES, load_fixture
from contagionflow.generators import (
    clustered_power_law,
    generator_metadata,
    two_disconnected_ws,
    watts_strogatz,
)
from contagionflow.graph import Graph, read_edge_list, to_edge_list
from contagionflow.metrics import flow_alignment, flow_symmetry
from contagionflow.rng import make_rng
from contagionflow.runtime import Runtime, resolve_workers
from contagionflow.scenario import ScenarioConfig, load_config
from contagionflow.seeding import SeedSet, random_clustered_seed_set, random_seed_set
from contagionflow.sink import ResultSink, RunManifest

logger = logging.getLogger(LOGGER_NAME)

Handler = Callable[[argparse.Namespace, ResultSink], dict[str, Any]]


# --- Parser ---


def _add_graph_input(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="edge-list file")
    source.add_argument("--fixture", choices=FIXTURES, help="bundled two-community graph")


def _add_model(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model", default="gi", choices=["gi", "ltm", "icm", "noisy", "noisy-single"]
    )
    parser.add_argument("--threshold-mode", default="abs", choices=["abs", "rel"])
    parser.add_argument("--threshold", type=float, default=2)
    parser.add_argument("--neighborhood", default="closed", choices=["closed", "open"])
    parser.add_argument("--q", type=float, default=None, help="subthreshold adoption probability")
    parser.add_argument("--icm-beta", type=float, default=None)
    parser.add_argument("--ltm-weights", default="homogeneous", choices=["homogeneous", "gaussian"])
    parser.add_argument("--ltm-sigma", type=float, default=0.05)
    parser.add_argument("--ltm-phi", type=float, default=0.5)


def _add_seeding(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed-mode", default="rcs", choices=sorted(SEED_MODES))
    parser.add_argument("--seed-frac", type=float, default=0.05)
    parser.add_argument("--sweeps", type=int, default=2)
    parser.add_argument("--enumeration-limit", type=int, default=DEFAULT_ENUMERATION_LIMIT)
    parser.add_argument("--rng", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contagionflow",
        description="Complex contagion simulation and causal flow analysis",
    )
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--format", default="csv", choices=["csv", "json"], dest="fmt")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--config", default=None, help="TOML scenario file")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-q", "--quiet", action="store_true")
    parser.add_argument("--debug", action="store_true", help="record and log batch events")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="write a generated graph as an edge list")
    kinds = generate.add_subparsers(dest="kind", required=True)
    for kind in ("ws", "two-ws"):
        p = kinds.add_parser(kind)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--beta", type=float, required=True)
        p.add_argument("--rng", type=int, default=0)
    cpl = kinds.add_parser("cpl")
    cpl.add_argument("--n", type=int, required=True)
    cpl.add_argument("--m", type=int, required=True)
    cpl.add_argument("--p", type=float, required=True)
    cpl.add_argument("--rng", type=int, default=0)

    sim = sub.add_parser("simulate", help="run cascades and report activation times")
    _add_graph_input(sim)
    _add_model(sim)
    sim.add_argument("--seeds", default=None, help="comma-separated seed node names")
    sim.add_argument("--seed-mode", default="rcs", choices=["rs", "rcs"])
    sim.add_argument("--seed-frac", type=float, default=0.05)
    sim.add_argument("--runs", type=int, default=1)
    sim.add_argument("--rng", type=int, default=0)

    for name, text in (
        ("causal", "aggregate node and tie importance"),
        ("metrics", "flow symmetry and degree alignment"),
    ):
        p = sub.add_parser(name, help=text)
        _add_graph_input(p)
        _add_model(p)
        _add_seeding(p)

    bridge = sub.add_parser("bridge-experiment", help="cross-tie formation trials")
    bridge.add_argument("--n", type=int, default=100)
    bridge.add_argument("--k", type=int, default=6)
    bridge.add_argument("--beta", type=float, default=0.1)
    bridge.add_argument("--T", type=int, default=3, dest="t")
    bridge.add_argument("--c", type=float, nargs="+", default=[0.0])
    bridge.add_argument("--trials", type=int, default=1000)
    bridge.add_argument("--max-ties", type=int, default=300)
    bridge.add_argument("--closure-rule", default="any", choices=["any", "both"])
    bridge.add_argument("--rng", type=int, default=0)

    count = sub.add_parser("bridge-count", help="count minimal bridge pairs")
    count.add_argument("--n-a", type=int, required=True)
    count.add_argument("--n-b", type=int, required=True)
    count.add_argument("--T", type=int, nargs="+", required=True, dest="t")
    count.add_argument("--oracle", action="store_true", help="also enumerate by brute force")

    tail = sub.add_parser("incidence-tail", help="estimate the tie-incidence tail probability")
    tail.add_argument("--n", type=int, nargs="+", required=True)
    tail.add_argument("--T", type=int, nargs="+", required=True, dest="t")
    tail.add_argument("--trials", type=int, default=100_000)
    tail.add_argument("--rng", type=int, default=0)

    for name in ("symmetry-sweep", "tie-range", "tie-strength", "periphery", "rewiring-dip", "converge"):
        p = sub.add_parser(name, help="run a configured experiment")
        p.add_argument("--rng", type=int, default=None, help="override the configured root seed")
    return parser


# --- Helpers ---


def _threshold(args: argparse.Namespace) -> ThresholdSpec:
    mode = "absolute" if args.threshold_mode == "abs" else "relative"
    return ThresholdSpec(mode, args.threshold, args.neighborhood)


def _model(args: argparse.Namespace) -> ModelSpec:
    return ModelSpec(
        family=args.model,
        threshold=_threshold(args),
        ltm_weights=args.ltm_weights,
        ltm_sigma=args.ltm_sigma,
        ltm_phi=args.ltm_phi,
        icm_beta=args.icm_beta,
        noise_q=args.q,
    )


def _graph(args: argparse.Namespace) -> Graph:
    if args.fixture:
        return load_fixture(args.fixture)[0]
    return read_edge_list(args.graph)


def _named_seeds(g: Graph, text: str) -> SeedSet:
    index = {g.name_of(i): i for i in range(g.node_count)}
    members: set[int] = set()
    for name in filter(None, (part.strip() for part in text.split(","))):
        if name not in index:
            raise ParameterError("seeds", f"unknown node {name!r}")
        members.add(index[name])
    if not members:
        raise ParameterError("seeds", "at least one seed node is required")
    return SeedSet(frozenset(members), len(members) / g.node_count)


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    if not args.config:
        raise ParameterError("config", f"'{args.command}' needs --config <file.toml>")
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if args.rng is not None:
        config.rng_seed = args.rng
    return config


def _rows(items: Sequence[Any]) -> list[dict[str, Any]]:
    return [item.to_dict() for item in items]


# --- Commands ---


def cmd_generate(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    labels: tuple[str, ...] | None = None
    if args.kind == "ws":
        params = {"n": args.n, "k": args.k, "beta": args.beta}
        g = watts_strogatz(args.n, args.k, args.beta, args.rng)
    elif args.kind == "two-ws":
        params = {"n": args.n, "k": args.k, "beta": args.beta}
        g, labels = two_disconnected_ws(args.n, args.k, args.beta, args.rng)
    else:
        params = {"n": args.n, "m": args.m, "p": args.p}
        g = clustered_power_law(args.n, args.m, args.p, args.rng)
    metadata = generator_metadata(args.kind, params, args.rng)
    metadata.update(nodes=g.node_count, edges=g.edge_count)
    if labels is not None:
        metadata["labels"] = list(labels)
    sink.write_text("graph.edges", to_edge_list(g))
    sink.write_json("graph.meta", metadata)
    return {"rng": args.rng}


def cmd_simulate(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    g = _graph(args)
    model = _model(args)
    if args.runs < 1:
        raise ParameterError("runs", f"must be >= 1, got {args.runs}")
    activations: list[dict[str, Any]] = []
    summary: list[dict[str, Any]] = []
    for run in range(args.runs):
        if args.seeds:
            seeds = _named_seeds(g, args.seeds)
        else:
            sampler = random_seed_set if args.seed_mode == "rs" else random_clustered_seed_set
            seeds = sampler(g, args.seed_frac, make_rng(args.rng, run, 0))
        rec = simulate(g, seeds, model, make_rng(args.rng, run, 1))
        for i in range(g.node_count):
            activations.append(
                {"run": run, "node": g.name_of(i), "tau": int(rec.activation_time[i])}
            )
        summary.append(
            {
                "run": run,
                "seeds": len(seeds),
                "active": rec.active_count,
                "density": spreading_density(rec, g),
                "converged_at": rec.converged_at,
            }
        )
        logger.info("Run %d: density %.4f", run, summary[-1]["density"])
    sink.write_table("activations", activations, ["run", "node", "tau"])
    sink.write_table("runs", summary, ["run", "seeds", "active", "density", "converged_at"])
    return {"rng": args.rng}


def _aggregate(args: argparse.Namespace) -> tuple[Graph, Any]:
    g = _graph(args)
    scores = aggregate_sweeps(
        g,
        _model(args),
        args.seed_mode,
        args.seed_frac,
        args.sweeps,
        args.rng,
        workers=resolve_workers(args.workers),
        limit=args.enumeration_limit,
    )
    return g, scores


def cmd_causal(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    g, scores = _aggregate(args)
    if args.fmt == "csv":
        sink.adopt(write_scores_csv(scores, g, sink.directory))
    else:
        ni_norm, ti_norm = scores.ni_norm, scores.ti_norm
        sink.write_table(
            "nodes",
            [
                {"node": g.name_of(i), "ni_raw": int(scores.ni_raw[i]), "ni_norm": float(ni_norm[i])}
                for i in range(g.node_count)
            ],
        )
        ties = []
        for e, (i, j) in enumerate(g.edges):
            for slot, (src, dst) in ((2 * e, (i, j)), (2 * e + 1, (j, i))):
                ties.append(
                    {
                        "src": g.name_of(src),
                        "dst": g.name_of(dst),
                        "ti_raw": int(scores.ti_raw[slot]),
                        "ti_norm": float(ti_norm[slot]),
                    }
                )
        sink.write_table("ties", ties)
    sink.write_json(
        "summary",
        {
            "runs": scores.runs,
            "sweeps": scores.sweeps,
            "mean_density": scores.mean_density(),
            "full_runs": scores.full_runs,
            "ni_degenerate": scores.ni_degenerate,
            "ti_degenerate": scores.ti_degenerate,
        },
    )
    return {"rng": args.rng}


def cmd_metrics(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    g, scores = _aggregate(args)
    sink.write_json(
        "metrics",
        {
            "model": _model(args).to_dict(),
            "mean_density": scores.mean_density(),
            "symmetry": flow_symmetry(scores, g).to_dict(),
            "symmetry_active_only": flow_symmetry(scores, g, include_silent=False).to_dict(),
            "symmetry_cosine": flow_symmetry(scores, g, method="cosine").to_dict(),
            "alignment": flow_alignment(scores, g).to_dict(),
        },
    )
    return {"rng": args.rng}


def cmd_bridge_experiment(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    results = run_bridge_trials(
        args.n,
        args.k,
        args.beta,
        args.t,
        args.c,
        args.trials,
        args.max_ties,
        args.rng,
        closure_rule=args.closure_rule,
        workers=resolve_workers(args.workers),
    )
    trial_rows: list[dict[str, Any]] = []
    curve_rows: list[dict[str, Any]] = []
    summary: list[dict[str, Any]] = []
    for c, trials in results.items():
        for index, trial in enumerate(trials):
            trial_rows.append({"c": c, "trial": index, **trial.to_dict()})
        curve = symmetric_probability_curve(trials)
        curve_rows.extend({"c": c, **point.to_dict()} for point in curve)
        summary.append(
            {
                "c": c,
                "first_spread": first_spread_counts(trials),
                "crossing": crossing_point(curve),
                "isotonic_violation_rate": isotonic_violation_rate(curve),
            }
        )
    sink.write_table(
        "trials",
        trial_rows,
        ["c", "trial", "first_spread_at", "first_spread_label", "ties", "closure_ties"],
    )
    sink.write_table("curve", curve_rows, ["c", "ties", "spreadable", "symmetric", "probability"])
    sink.write_json("summary", summary)
    return {"rng": args.rng}


def cmd_bridge_count(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    rows: list[dict[str, Any]] = []
    for t in args.t:
        row = count_bridge_pairs(args.n_a, args.n_b, t).to_dict()
        predicted = predicted_ratio(args.n_a, args.n_b, t)
        row["predicted_ratio"] = None if predicted is None else str(predicted)
        if args.oracle:
            oracle = enumerate_bridge_pairs_oracle(args.n_a, args.n_b, t)
            row["oracle_sym"], row["oracle_asym"] = oracle.sym, oracle.asym
        rows.append(row)
    sink.write_table("bridge_counts", rows)
    return {}


def cmd_incidence_tail(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    rows = [
        incidence_tail_estimate(n, t, args.trials, make_rng(args.rng, n, t)).to_dict()
        for n in args.n
        for t in args.t
    ]
    sink.write_table("incidence_tail", rows, ["n", "t", "trials", "estimate", "bound", "union_bound"])
    return {"rng": args.rng}


def cmd_symmetry_sweep(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    table = symmetry_vs_threshold(config, debug=args.debug)
    sink.write_table("symmetry", _rows(table.rows))
    sink.write_json("summary", {"config": config.to_dict(), "pooled": table.pooled.to_dict()})
    return {"rng": config.rng_seed}


def cmd_tie_range(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    runs = run_scenarios(config, Runtime(workers=config.workers, debug=args.debug))
    report = tie_range_asymmetry(config, runs=runs)
    sink.write_table("edges", _rows(report.edges))
    sink.write_table("cells", _rows(report.cells))
    sink.write_table("profile", _rows(tie_range_profile(config, runs=runs)))
    sink.write_json("summary", {"config": config.to_dict(), "correlation": report.correlation.to_dict()})
    return {"rng": config.rng_seed}


def cmd_tie_strength(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    report = tie_strength_importance(config, debug=args.debug)
    sink.write_table("terciles", _rows(report.rows + report.pooled))
    sink.write_json("summary", {"config": config.to_dict()})
    return {"rng": config.rng_seed}


def cmd_periphery(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    sink.write_table("periphery", _rows(periphery_core_sweep(config, debug=args.debug)))
    sink.write_json("summary", {"config": config.to_dict()})
    return {"rng": config.rng_seed}


def cmd_rewiring_dip(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    sink.write_table("rewiring", _rows(rewiring_dip(config, debug=args.debug)))
    sink.write_json("summary", {"config": config.to_dict()})
    return {"rng": config.rng_seed}


def cmd_converge(args: argparse.Namespace, sink: ResultSink) -> dict[str, Any]:
    config = _scenario(args)
    report = convergence_diagnostics(config, debug=args.debug)
    sink.write_table("convergence", _rows(report.rows))
    sink.write_table("quintiles", _rows(report.quintiles))
    sink.write_json(
        "summary", {"config": config.to_dict(), "minimal_sweeps": report.minimal_sweeps}
    )
    return {"rng": config.rng_seed}


COMMANDS: dict[str, Handler] = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "causal": cmd_causal,
    "metrics": cmd_metrics,
    "bridge-experiment": cmd_bridge_experiment,
    "bridge-count": cmd_bridge_count,
    "incidence-tail": cmd_incidence_tail,
    "symmetry-sweep": cmd_symmetry_sweep,
    "tie-range": cmd_tie_range,
    "tie-strength": cmd_tie_strength,
    "periphery": cmd_periphery,
    "rewiring-dip": cmd_rewiring_dip,
    "converge": cmd_converge,
}


def _configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(LOGGER_NAME).setLevel(level)


def _echo(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose", "quiet")}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose, args.quiet)
    sink = ResultSink(args.out, args.fmt)
    started = time.perf_counter()
    try:
        seeds = COMMANDS[args.command](args, sink)
        manifest = RunManifest(
            command=args.command,
            config=_echo(args),
            seeds=seeds,
            wall_time=time.perf_counter() - started,
        )
        sink.finalize(manifest)
    except ContagionFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logger.info("Finished %s in %.2fs", args.command, time.perf_counter() - started)
    return 0

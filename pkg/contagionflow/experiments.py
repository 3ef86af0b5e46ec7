from __future__ import annotations

import asyncio
import logging
import math
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from contagionflow._constants import (
    CONVERGENCE_CORRELATION,
    CONVERGENCE_SYMMETRY_PCT,
    LOGGER_NAME,
)
from contagionflow.causal import CausalScores, aggregate_sweeps, ti_pairs
from contagionflow.contagion import ModelSpec, ThresholdSpec
from contagionflow.graph import Edge, Graph, TercileAssignment, tie_ranges, tie_strength_terciles
from contagionflow.metrics import (
    CorrelationTest,
    correlation_test,
    flow_alignment,
    flow_symmetry,
    mean_and_stderr,
    pearson,
)
from contagionflow.rng import RngSeed, derive_seed
from contagionflow.runtime import Runtime, SimulationTask
from contagionflow.scenario import GraphSource, ScenarioConfig

logger = logging.getLogger(LOGGER_NAME)

_EPSILON = 1e-9


@dataclass
class ScenarioRun:
    graph_name: str
    graph_index: int
    graph: Graph
    source: GraphSource
    threshold: ThresholdSpec
    scores: CausalScores

    @property
    def density(self) -> float:
        return self.scores.mean_density()

    @property
    def full_activation(self) -> bool:
        return self.scores.full_runs > 0


def _score(
    g: Graph, model: ModelSpec, seed_mode: str, p: float, sweeps: int, seed: RngSeed
) -> CausalScores:
    return aggregate_sweeps(g, model, seed_mode, p, sweeps, seed)


def _execute(runtime: Runtime, tasks: Sequence[SimulationTask]) -> list[Any]:
    return asyncio.run(runtime.execute(tasks)).results


def run_scenarios(
    config: ScenarioConfig, runtime: Runtime | None = None
) -> list[ScenarioRun]:
    """Aggregate causal scores for every graph x threshold of ``config``.

    Seed sets depend on the graph only, so every threshold of a graph sees
    the same seeding schedule.
    """
    runtime = runtime or Runtime(workers=config.workers)
    graphs = config.build_graphs()
    tasks: list[SimulationTask] = []
    meta: list[tuple[str, int, Graph, GraphSource, ThresholdSpec]] = []
    for index, (name, g, source) in enumerate(graphs):
        seed = derive_seed(config.rng_seed, index)
        for threshold in config.thresholds:
            model = config.model_for(threshold)
            tasks.append(
                SimulationTask(
                    scenario=f"{name}|{threshold.label()}",
                    fn=_score,
                    args=(g, model, config.seed_mode, config.seed_fraction, config.sweeps, seed),
                )
            )
            meta.append((name, index, g, source, threshold))
    logger.info("Running %d scenarios on %d graphs", len(tasks), len(graphs))
    results = _execute(runtime, tasks)
    return [
        ScenarioRun(
            graph_name=name,
            graph_index=index,
            graph=g,
            source=source,
            threshold=threshold,
            scores=scores,
        )
        for (name, index, g, source, threshold), scores in zip(meta, results)
    ]


def _runs(
    config: ScenarioConfig, runs: list[ScenarioRun] | None, debug: bool
) -> tuple[Runtime, list[ScenarioRun]]:
    runtime = Runtime(workers=config.workers, debug=debug)
    if runs is None:
        runs = run_scenarios(config, runtime)
    return runtime, runs


# --- Symmetry vs. threshold ---


@dataclass
class SymmetryRow:
    graph: str
    threshold: str
    threshold_value: float
    xi_s: float | None
    n_edges: int
    defined: bool
    density: float
    included: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SymmetryTable:
    rows: list[SymmetryRow] = field(default_factory=list)
    pooled: CorrelationTest = field(default_factory=lambda: CorrelationTest(None, None, 0))


def symmetry_vs_threshold(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> SymmetryTable:
    """Flow symmetry per graph and threshold, with the pooled correlation of
    threshold value against symmetry over included, defined scenarios."""
    runtime, runs = _runs(config, runs, debug)
    table = SymmetryTable()
    for run in runs:
        report = flow_symmetry(
            run.scores,
            run.graph,
            include_silent=config.include_silent,
            method=config.symmetry_method,
        )
        density = run.density
        included = config.density_filter is None or density > config.density_filter
        if not included:
            runtime.record_filtered(run.graph_name, f"density {density:.3f} at {run.threshold.label()}")
        table.rows.append(
            SymmetryRow(
                graph=run.graph_name,
                threshold=run.threshold.label(),
                threshold_value=run.threshold.value,
                xi_s=report.xi_s,
                n_edges=report.n_edges,
                defined=report.defined,
                density=density,
                included=included,
            )
        )
    usable = [r for r in table.rows if r.included and r.xi_s is not None]
    if not any(r.included for r in table.rows):
        logger.warning("Every scenario was filtered out by the density filter")
    table.pooled = correlation_test(
        [r.threshold_value for r in usable], [r.xi_s for r in usable if r.xi_s is not None]
    )
    return table


# --- Tie range ---


@dataclass
class EdgeRecord:
    graph: str
    threshold: str
    src: int
    dst: int
    tie_range: float
    max_ti: float
    delta: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TieRangeCell:
    range_low: float
    range_high: float
    importance_low: float
    importance_high: float
    mean_delta: float | None
    count: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TieRangeReport:
    edges: list[EdgeRecord] = field(default_factory=list)
    cells: list[TieRangeCell] = field(default_factory=list)
    correlation: CorrelationTest = field(default_factory=lambda: CorrelationTest(None, None, 0))


def edge_records(runs: Sequence[ScenarioRun]) -> list[EdgeRecord]:
    """Per-edge range, larger normalized direction and direction gap."""
    records: list[EdgeRecord] = []
    ranges_by_graph: dict[int, dict[Edge, int | float]] = {}
    for run in runs:
        ranges = ranges_by_graph.get(run.graph_index)
        if ranges is None:
            ranges = ranges_by_graph[run.graph_index] = tie_ranges(run.graph)
        for (i, j), forward, reverse in ti_pairs(run.scores, run.graph, normalized=True):
            records.append(
                EdgeRecord(
                    graph=run.graph_name,
                    threshold=run.threshold.label(),
                    src=i,
                    dst=j,
                    tie_range=float(ranges[(i, j)]),
                    max_ti=max(forward, reverse),
                    delta=abs(forward - reverse),
                )
            )
    return records


def _bin_edges(low: float, high: float, bins: int) -> np.ndarray:
    if high <= low:
        high = low + 1.0
    return np.linspace(low, high, bins + 1)


def _bin_index(edges: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.searchsorted(edges[1:-1], values, side="right")


def tie_range_asymmetry(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> TieRangeReport:
    """Per-edge records, binned mean direction gap over (range, importance),
    and the range/gap correlation among edges above the median importance."""
    _, runs = _runs(config, runs, debug)
    report = TieRangeReport(edges=edge_records(runs))
    finite = [r for r in report.edges if math.isfinite(r.tie_range)]
    if not finite:
        logger.warning("No finite-range edges to bin")
        return report

    ranges = np.array([r.tie_range for r in finite])
    importance = np.array([r.max_ti for r in finite])
    deltas = np.array([r.delta for r in finite])
    range_edges = _bin_edges(float(ranges.min()), float(ranges.max()), config.range_bins)
    importance_edges = _bin_edges(0.0, 1.0, config.importance_bins)
    range_idx = _bin_index(range_edges, ranges)
    importance_idx = _bin_index(importance_edges, importance)
    for a in range(config.range_bins):
        for b in range(config.importance_bins):
            mask = (range_idx == a) & (importance_idx == b)
            count = int(mask.sum())
            report.cells.append(
                TieRangeCell(
                    range_low=float(range_edges[a]),
                    range_high=float(range_edges[a + 1]),
                    importance_low=float(importance_edges[b]),
                    importance_high=float(importance_edges[b + 1]),
                    mean_delta=float(deltas[mask].mean()) if count else None,
                    count=count,
                )
            )

    strong = importance > np.median(importance)
    report.correlation = correlation_test(ranges[strong], deltas[strong])
    return report


@dataclass
class RangeProfileRow:
    tie_range: float
    mean_ti: float
    stderr: float
    n: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def tie_range_profile(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> list[RangeProfileRow]:
    """Mean larger-direction tie importance per tie range value."""
    _, runs = _runs(config, runs, debug)
    by_range: dict[float, list[float]] = defaultdict(list)
    for rec in edge_records(runs):
        if math.isfinite(rec.tie_range):
            by_range[rec.tie_range].append(rec.max_ti)
    rows: list[RangeProfileRow] = []
    for tie_range in sorted(by_range):
        mean, stderr = mean_and_stderr(by_range[tie_range])
        rows.append(
            RangeProfileRow(tie_range=tie_range, mean_ti=mean, stderr=stderr, n=len(by_range[tie_range]))
        )
    return rows


# --- Tie strength ---


@dataclass
class TercileRow:
    graph: str
    threshold: str
    tercile: str
    mean_ti: float
    stderr: float
    n: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TieStrengthReport:
    rows: list[TercileRow] = field(default_factory=list)
    pooled: list[TercileRow] = field(default_factory=list)

    def pooled_mean(self, tercile: str) -> float:
        return next(r.mean_ti for r in self.pooled if r.tercile == tercile)


def tie_strength_importance(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> TieStrengthReport:
    """Mean undirected tie importance per weak/medium/strong tercile, per
    scenario and pooled. Undirected importance is the larger direction, or
    the sum of both when ``config.tie_importance == "sum"``."""
    _, runs = _runs(config, runs, debug)
    report = TieStrengthReport()
    pooled: dict[str, list[float]] = defaultdict(list)
    terciles_by_graph: dict[int, TercileAssignment] = {}
    for run in runs:
        terciles = terciles_by_graph.get(run.graph_index)
        if terciles is None:
            terciles = terciles_by_graph[run.graph_index] = tie_strength_terciles(run.graph)
        norm = run.scores.ti_norm
        forward, reverse = norm[0::2], norm[1::2]
        combined = forward + reverse if config.tie_importance == "sum" else np.maximum(forward, reverse)
        for tercile in ("weak", "medium", "strong"):
            values = [float(combined[run.graph.edge_ids[e]]) for e in terciles.members(tercile)]
            pooled[tercile].extend(values)
            mean, stderr = mean_and_stderr(values)
            report.rows.append(
                TercileRow(
                    graph=run.graph_name,
                    threshold=run.threshold.label(),
                    tercile=tercile,
                    mean_ti=mean,
                    stderr=stderr,
                    n=len(values),
                )
            )
    for tercile in ("weak", "medium", "strong"):
        mean, stderr = mean_and_stderr(pooled[tercile])
        report.pooled.append(
            TercileRow(graph="*", threshold="*", tercile=tercile, mean_ti=mean, stderr=stderr, n=len(pooled[tercile]))
        )
    return report


# --- Periphery / core ---


@dataclass
class PeripheryRow:
    graph: str
    threshold_mode: str
    threshold_value: float
    rho_ds_dk: float | None
    rho_ni_k: float | None
    rho_nik_k: float | None
    density: float
    full_activation: bool
    included: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def periphery_core_sweep(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> list[PeripheryRow]:
    """Degree alignment of causal flow per scenario. With
    ``require_full_activation`` only scenarios where some cascade activated
    every node are marked included."""
    runtime, runs = _runs(config, runs, debug)
    rows: list[PeripheryRow] = []
    for run in runs:
        alignment = flow_alignment(run.scores, run.graph)
        included = run.full_activation or not config.require_full_activation
        if not included:
            runtime.record_filtered(run.graph_name, f"no full activation at {run.threshold.label()}")
        rows.append(
            PeripheryRow(
                graph=run.graph_name,
                threshold_mode=run.threshold.mode,
                threshold_value=run.threshold.value,
                rho_ds_dk=alignment.rho_ds_dk,
                rho_ni_k=alignment.rho_ni_k,
                rho_nik_k=alignment.rho_nik_k,
                density=run.density,
                full_activation=run.full_activation,
                included=included,
            )
        )
    if rows and not any(r.included for r in rows):
        logger.warning("No scenario reached full activation")
    return rows


# --- Rewiring ---


@dataclass
class RewiringRow:
    threshold: str
    beta: float
    mean_density: float
    mean_xi: float | None
    n_graphs: int
    n_defined: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def rewiring_dip(
    config: ScenarioConfig,
    *,
    runs: list[ScenarioRun] | None = None,
    debug: bool = False,
) -> list[RewiringRow]:
    """Mean density and mean flow symmetry per rewiring probability."""
    _, runs = _runs(config, runs, debug)
    groups: dict[tuple[str, float], list[ScenarioRun]] = defaultdict(list)
    for run in runs:
        groups[(run.threshold.label(), run.source.beta)].append(run)
    rows: list[RewiringRow] = []
    for (threshold, beta), members in sorted(groups.items()):
        xis = [
            flow_symmetry(
                r.scores,
                r.graph,
                include_silent=config.include_silent,
                method=config.symmetry_method,
            ).xi_s
            for r in members
        ]
        defined = [x for x in xis if x is not None]
        rows.append(
            RewiringRow(
                threshold=threshold,
                beta=beta,
                mean_density=float(np.mean([r.density for r in members])),
                mean_xi=float(np.mean(defined)) if defined else None,
                n_graphs=len(members),
                n_defined=len(defined),
            )
        )
    return rows


# --- Convergence ---


@dataclass
class ConvergenceRow:
    graph: str
    nodes: int
    sweeps: int
    ni_corr: float | None
    ti_corr: float | None
    xi_a: float | None
    xi_b: float | None
    symmetry_diff_pct: float | None
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class QuintileRow:
    group: int
    min_nodes: int
    max_nodes: int
    sweeps: int
    mean_symmetry_diff_pct: float | None
    n_graphs: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow] = field(default_factory=list)
    minimal_sweeps: dict[str, int | None] = field(default_factory=dict)
    quintiles: list[QuintileRow] = field(default_factory=list)


def symmetry_difference_pct(xi_a: float | None, xi_b: float | None) -> float | None:
    if xi_a is None or xi_b is None:
        return None
    return abs(xi_a - xi_b) / max(abs(xi_a), _EPSILON) * 100.0


def convergence_diagnostics(
    config: ScenarioConfig, *, debug: bool = False
) -> ConvergenceReport:
    """Agreement of two independent aggregations per sweep count.

    Uses the first configured threshold. A sweep count converges when both
    NI and TI correlations exceed 0.95 and symmetry differs by under 2%.
    """
    runtime = Runtime(workers=config.workers, debug=debug)
    model = config.model_for(config.thresholds[0])
    graphs = config.build_graphs()
    tasks: list[SimulationTask] = []
    for index, (name, g, _) in enumerate(graphs):
        for sweeps in config.sweep_counts:
            for rep in (0, 1):
                tasks.append(
                    SimulationTask(
                        scenario=f"{name}|sweeps={sweeps}|rep={rep}",
                        fn=_score,
                        args=(
                            g,
                            model,
                            config.seed_mode,
                            config.seed_fraction,
                            sweeps,
                            derive_seed(config.rng_seed, index, sweeps, rep),
                        ),
                    )
                )
    results = iter(_execute(runtime, tasks))

    report = ConvergenceReport()
    for name, g, _ in graphs:
        report.minimal_sweeps[name] = None
        for sweeps in config.sweep_counts:
            a, b = next(results), next(results)
            xi_a = flow_symmetry(a, g, include_silent=config.include_silent).xi_s
            xi_b = flow_symmetry(b, g, include_silent=config.include_silent).xi_s
            ni_corr = pearson(a.ni_raw, b.ni_raw)
            ti_corr = pearson(a.ti_raw, b.ti_raw)
            diff = symmetry_difference_pct(xi_a, xi_b)
            converged = (
                ni_corr is not None
                and ti_corr is not None
                and diff is not None
                and ni_corr > CONVERGENCE_CORRELATION
                and ti_corr > CONVERGENCE_CORRELATION
                and diff < CONVERGENCE_SYMMETRY_PCT
            )
            if converged and report.minimal_sweeps[name] is None:
                report.minimal_sweeps[name] = sweeps
            report.rows.append(
                ConvergenceRow(
                    graph=name,
                    nodes=g.node_count,
                    sweeps=sweeps,
                    ni_corr=ni_corr,
                    ti_corr=ti_corr,
                    xi_a=xi_a,
                    xi_b=xi_b,
                    symmetry_diff_pct=diff,
                    converged=converged,
                )
            )
    report.quintiles = _size_quintiles(report.rows, [(name, g.node_count) for name, g, _ in graphs])
    return report


def _size_quintiles(
    rows: Sequence[ConvergenceRow], sizes: Sequence[tuple[str, int]]
) -> list[QuintileRow]:
    ordered = sorted(sizes, key=lambda item: (item[1], item[0]))
    groups: list[list[int]] = []
    if ordered:
        chunks = np.array_split(np.arange(len(ordered)), min(5, len(ordered)))
        groups = [chunk.tolist() for chunk in chunks]
    result: list[QuintileRow] = []
    sweep_counts = sorted({r.sweeps for r in rows})
    for group_no, members in enumerate(groups):
        names = {ordered[i][0] for i in members}
        node_counts = [ordered[i][1] for i in members]
        for sweeps in sweep_counts:
            diffs = [
                r.symmetry_diff_pct
                for r in rows
                if r.graph in names and r.sweeps == sweeps and r.symmetry_diff_pct is not None
            ]
            result.append(
                QuintileRow(
                    group=group_no,
                    min_nodes=min(node_counts),
                    max_nodes=max(node_counts),
                    sweeps=sweeps,
                    mean_symmetry_diff_pct=float(np.mean(diffs)) if diffs else None,
                    n_graphs=len(names),
                )
            )
    return result

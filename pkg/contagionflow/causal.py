from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from contagionflow._constants import LOGGER_NAME, SEED_MODES
from contagionflow.contagion import CascadeRecord, ModelSpec, ThresholdSpec, simulate
from contagionflow.exceptions import EnumerationRefusedError, GraphArgumentError, ParameterError
from contagionflow.graph import Edge, Graph
from contagionflow.rng import RngSeed, make_rng
from contagionflow.runtime import SimulationTask, run_batch
from contagionflow.seeding import (
    SeedSet,
    enumerate_seed_sets,
    random_clustered_seed_set,
    random_seed_set,
    seed_set_size,
)

logger = logging.getLogger(LOGGER_NAME)

DEFAULT_ENUMERATION_LIMIT = 1_000_000

DirectedEdge = tuple[int, int]


def directed_index(g: Graph, src: int, dst: int) -> int:
    """Slot of ``src -> dst`` in a per-directed-edge array.

    Canonical edge ``e = (i, j)`` with ``i < j`` owns slots ``2e`` (``i -> j``)
    and ``2e + 1`` (``j -> i``).
    """
    e = g.edge_index(src, dst)
    return 2 * e + (0 if src < dst else 1)


@dataclass
class CausalScores:
    """Raw causal membership counts accumulated over cascades.

    ``ti_raw`` has two slots per undirected edge, laid out as in
    ``directed_index``. Normalized views divide by the maximum raw count and
    are all zero (with the matching ``*_degenerate`` flag set) when nothing
    was counted.
    """

    ni_raw: np.ndarray
    ti_raw: np.ndarray
    sweeps: int = 0
    runs: int = 0
    activations: int = 0
    full_runs: int = 0

    @classmethod
    def empty(cls, g: Graph) -> CausalScores:
        return cls(
            ni_raw=np.zeros(g.node_count, dtype=np.int64),
            ti_raw=np.zeros(2 * g.edge_count, dtype=np.int64),
        )

    @property
    def ni_norm(self) -> np.ndarray:
        return _max_normalize(self.ni_raw)

    @property
    def ti_norm(self) -> np.ndarray:
        return _max_normalize(self.ti_raw)

    @property
    def ni_degenerate(self) -> bool:
        return not self.ni_raw.any()

    @property
    def ti_degenerate(self) -> bool:
        return not self.ti_raw.any()

    def mean_density(self) -> float:
        """Mean spreading density over the accumulated runs."""
        n = self.ni_raw.shape[0]
        if self.runs == 0 or n == 0:
            return 0.0
        return self.activations / (self.runs * n)

    def ti(self, g: Graph, src: int, dst: int) -> int:
        return int(self.ti_raw[directed_index(g, src, dst)])

    def forward_reverse(self) -> tuple[np.ndarray, np.ndarray]:
        """``(TI(i, j), TI(j, i))`` for every canonical edge ``i < j``."""
        return self.ti_raw[0::2], self.ti_raw[1::2]

    def __add__(self, other: CausalScores) -> CausalScores:
        self._check_shape(other)
        return CausalScores(
            ni_raw=self.ni_raw + other.ni_raw,
            ti_raw=self.ti_raw + other.ti_raw,
            sweeps=self.sweeps + other.sweeps,
            runs=self.runs + other.runs,
            activations=self.activations + other.activations,
            full_runs=self.full_runs + other.full_runs,
        )

    def __iadd__(self, other: CausalScores) -> CausalScores:
        self._check_shape(other)
        self.ni_raw += other.ni_raw
        self.ti_raw += other.ti_raw
        self.sweeps += other.sweeps
        self.runs += other.runs
        self.activations += other.activations
        self.full_runs += other.full_runs
        return self

    def _check_shape(self, other: CausalScores) -> None:
        if self.ni_raw.shape != other.ni_raw.shape or self.ti_raw.shape != other.ti_raw.shape:
            raise GraphArgumentError("cannot merge causal scores of different graphs")


def _max_normalize(raw: np.ndarray) -> np.ndarray:
    peak = raw.max() if raw.size else 0
    if peak == 0:
        return np.zeros(raw.shape, dtype=np.float64)
    return raw / float(peak)


# --- Causal subgraphs ---


@dataclass(frozen=True)
class CausalSubgraph:
    target: int
    nodes: frozenset[int]
    edges: frozenset[DirectedEdge]


@dataclass(frozen=True)
class CausalTree:
    """Stages of extracting one node's causal subgraph.

    ``active_nodes`` is every active node of the cascade, ``earlier_nodes``
    keeps those activated before the target (plus the target), and
    ``subgraph`` is the causal closure within them.
    """

    active_nodes: frozenset[int]
    earlier_nodes: frozenset[int]
    subgraph: CausalSubgraph


def _check_target(rec: CascadeRecord, target: int) -> None:
    if not 0 <= target < rec.activation_time.shape[0]:
        raise GraphArgumentError(f"target {target} is not a node of the graph")
    if rec.activation_time[target] < 0:
        raise GraphArgumentError(f"target {target} never activated")


def causal_subgraph(rec: CascadeRecord, g: Graph, target: int) -> CausalSubgraph:
    """Closure of earlier-activated active neighbors back from ``target``.

    Edges run from the earlier to the later endpoint; nodes with equal
    activation times are never linked.
    """
    _check_target(rec, target)
    tau = rec.activation_time
    nodes = {target}
    edges: set[DirectedEdge] = set()
    worklist = [target]
    while worklist:
        v = worklist.pop()
        for u in g.neighbors(v):
            if 0 <= tau[u] < tau[v]:
                edges.add((u, v))
                if u not in nodes:
                    nodes.add(u)
                    worklist.append(u)
    return CausalSubgraph(target=target, nodes=frozenset(nodes), edges=frozenset(edges))


def causal_tree(rec: CascadeRecord, g: Graph, target: int) -> CausalTree:
    _check_target(rec, target)
    tau = rec.activation_time
    active = frozenset(rec.active_nodes())
    earlier = frozenset(v for v in active if tau[v] < tau[target]) | {target}
    return CausalTree(
        active_nodes=active,
        earlier_nodes=earlier,
        subgraph=causal_subgraph(rec, g, target),
    )


# --- Accumulation ---


def accumulate(rec: CascadeRecord, g: Graph, scores: CausalScores) -> CausalScores:
    """Add one cascade's causal memberships to ``scores`` in place.

    Node ``i`` lies in the causal subgraph of ``m`` exactly when ``m`` is
    reachable from ``i`` along earlier-to-later active edges, so each node's
    count grows by the size of its reachable set (itself included) and each
    edge ``u -> v`` by the reachable set of ``v``. Reachable sets are bitsets
    built in decreasing activation order.
    """
    tau = rec.activation_time
    active = np.flatnonzero(tau >= 0)
    order = active[np.argsort(-tau[active], kind="stable")]
    reach: dict[int, int] = {}
    edge_ids = g.edge_ids
    for v in order.tolist():
        tv = tau[v]
        mask = 1 << v
        for w in g.neighbors(v):
            if tau[w] > tv:
                mask |= reach[w]
        reach[v] = mask
        size = mask.bit_count()
        scores.ni_raw[v] += size
        for u in g.neighbors(v):
            if 0 <= tau[u] < tv:
                e = edge_ids[(u, v) if u < v else (v, u)]
                scores.ti_raw[2 * e + (0 if u < v else 1)] += size
    scores.runs += 1
    scores.activations += int(active.size)
    if active.size == g.node_count:
        scores.full_runs += 1
    return scores


# --- Sweeps ---


def _seed_sets(
    g: Graph,
    seed_mode: str,
    p: float,
    seed: RngSeed,
    sweep: int,
    limit: int,
) -> Iterator[tuple[int, SeedSet]]:
    if seed_mode in ("rs", "rcs"):
        sampler = random_seed_set if seed_mode == "rs" else random_clustered_seed_set
        for run in range(g.node_count):
            yield run, sampler(g, p, make_rng(seed, sweep, run, 0))
        return
    size = seed_set_size(g.node_count, p)
    total = math.comb(g.node_count, size)
    if total > limit:
        raise EnumerationRefusedError(total, limit)
    for run, seeds in enumerate(enumerate_seed_sets(g, size, clustered=seed_mode == "exhaustive-rcs")):
        yield run, SeedSet(seeds.members, p)


def run_sweep(
    g: Graph,
    model: ModelSpec,
    seed_mode: str,
    p: float,
    seed: RngSeed,
    sweep: int,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> CausalScores:
    """One sweep: ``|V|`` sampled seed sets, or every seed set of the target
    size for the exhaustive modes."""
    scores = CausalScores.empty(g)
    for run, seeds in _seed_sets(g, seed_mode, p, seed, sweep, limit):
        rec = simulate(g, seeds, model, make_rng(seed, sweep, run, 1))
        accumulate(rec, g, scores)
    scores.sweeps = 1
    logger.debug("Sweep %d (%s, %s): %d runs", sweep, model.label(), seed_mode, scores.runs)
    return scores


def aggregate_sweeps(
    g: Graph,
    model: ModelSpec,
    seed_mode: str,
    p: float,
    sweeps: int,
    seed: RngSeed,
    *,
    threshold: ThresholdSpec | None = None,
    workers: int = 1,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> CausalScores:
    """Accumulate causal scores over ``sweeps`` sweeps.

    Every run draws its seed set and dynamics from streams keyed by
    ``(sweep, run)`` under ``seed``, so the result does not depend on
    ``workers``.
    """
    if sweeps < 1:
        raise ParameterError("sweeps", f"must be >= 1, got {sweeps}")
    if seed_mode not in SEED_MODES:
        raise ParameterError("seed_mode", f"unknown seed mode: {seed_mode}")
    if threshold is not None:
        model = model.with_threshold(threshold)
    if workers > 1 and sweeps > 1:
        tasks = [
            SimulationTask(
                scenario=f"{model.label()}#{s}",
                fn=run_sweep,
                args=(g, model, seed_mode, p, seed, s, limit),
            )
            for s in range(sweeps)
        ]
        partials: Sequence[CausalScores] = run_batch(tasks, workers=workers).results
    else:
        partials = [run_sweep(g, model, seed_mode, p, seed, s, limit) for s in range(sweeps)]
    total = CausalScores.empty(g)
    for part in partials:
        total += part
    return total


# --- Export ---


def write_scores_csv(scores: CausalScores, g: Graph, directory: Path | str) -> list[Path]:
    """Write ``nodes.csv`` (``node,ni_raw,ni_norm``) and ``ties.csv``
    (``src,dst,ti_raw,ti_norm``, both orientations of every edge)."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    node_path = out / "nodes.csv"
    tie_path = out / "ties.csv"
    ni_norm, ti_norm = scores.ni_norm, scores.ti_norm
    with node_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "ni_raw", "ni_norm"])
        for i in range(g.node_count):
            writer.writerow([g.name_of(i), int(scores.ni_raw[i]), repr(float(ni_norm[i]))])
    with tie_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["src", "dst", "ti_raw", "ti_norm"])
        for e, (i, j) in enumerate(g.edges):
            for slot, (src, dst) in ((2 * e, (i, j)), (2 * e + 1, (j, i))):
                writer.writerow(
                    [g.name_of(src), g.name_of(dst), int(scores.ti_raw[slot]), repr(float(ti_norm[slot]))]
                )
    return [node_path, tie_path]


def ti_pairs(
    scores: CausalScores, g: Graph, *, normalized: bool = False
) -> list[tuple[Edge, float, float]]:
    """``(edge, TI(i, j), TI(j, i))`` per canonical edge, raw or max-normalized."""
    values = scores.ti_norm if normalized else scores.ti_raw.astype(float)
    return [
        (e, float(f), float(r)) for e, f, r in zip(g.edges, values[0::2], values[1::2])
    ]


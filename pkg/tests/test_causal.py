from __future__ import annotations

import csv
import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from contagionflow.causal import (
    CausalScores,
    accumulate,
    aggregate_sweeps,
    causal_subgraph,
    causal_tree,
    directed_index,
    run_sweep,
    ti_pairs,
    write_scores_csv,
)
from contagionflow.contagion import CascadeRecord, ModelSpec, ThresholdSpec
from contagionflow.contagion.gi import run_gi
from contagionflow.exceptions import EnumerationRefusedError, GraphArgumentError, ParameterError
from contagionflow.generators import watts_strogatz
from contagionflow.graph import Graph
from contagionflow.seeding import SeedSet
from tests.strategies import graphs_with_seeds

GI1 = ModelSpec("gi", ThresholdSpec("absolute", 1))
GI2 = ModelSpec("gi", ThresholdSpec("absolute", 2))


def _cascade(g: Graph, seeds: frozenset[int] | set[int], t: int) -> CascadeRecord:
    return run_gi(g, SeedSet(frozenset(seeds), 0.0), np.full(g.node_count, t, dtype=np.int64))


def _oracle_closure(rec: CascadeRecord, g: Graph, target: int) -> tuple[set[int], set[tuple[int, int]]]:
    """Direct set recursion: a node's causal set is itself plus the causal sets
    of its earlier-activated neighbors."""
    tau = rec.activation_time
    nodes = {target}
    edges: set[tuple[int, int]] = set()
    for u in g.neighbors(target):
        if 0 <= tau[u] < tau[target]:
            sub_nodes, sub_edges = _oracle_closure(rec, g, u)
            nodes |= sub_nodes
            edges |= sub_edges | {(u, target)}
    return nodes, edges


def _oracle_scores(g: Graph, records: list[CascadeRecord]) -> tuple[np.ndarray, np.ndarray]:
    ni = np.zeros(g.node_count, dtype=np.int64)
    ti = np.zeros(2 * g.edge_count, dtype=np.int64)
    for rec in records:
        for target in rec.active_nodes():
            nodes, edges = _oracle_closure(rec, g, target)
            for v in nodes:
                ni[v] += 1
            for u, v in edges:
                ti[directed_index(g, u, v)] += 1
    return ni, ti


# --- Causal subgraphs ---


class TestCausalSubgraph:
    def test_path(self, path3: Graph) -> None:
        rec = _cascade(path3, {0}, 1)
        sub = causal_subgraph(rec, path3, 2)
        assert sub.nodes == {0, 1, 2}
        assert sub.edges == {(0, 1), (1, 2)}

    def test_seed_target(self, path3: Graph) -> None:
        rec = _cascade(path3, {0}, 1)
        sub = causal_subgraph(rec, path3, 0)
        assert sub.nodes == {0}
        assert not sub.edges

    def test_inactive_target(self) -> None:
        g = Graph(3, [(0, 1)])
        rec = _cascade(g, {0}, 1)
        with pytest.raises(GraphArgumentError, match="never activated"):
            causal_subgraph(rec, g, 2)

    def test_unknown_target(self, path3: Graph) -> None:
        with pytest.raises(GraphArgumentError, match="not a node"):
            causal_subgraph(_cascade(path3, {0}, 1), path3, 7)

    def test_equal_times_not_linked(self, triangle: Graph) -> None:
        rec = _cascade(triangle, {0}, 1)
        sub = causal_subgraph(rec, triangle, 1)
        assert sub.edges == {(0, 1)}

    def test_tree_stages(self, small_ws: Graph) -> None:
        rec = _cascade(small_ws, {0, 1, 2}, 2)
        target = max(rec.active_nodes(), key=lambda v: rec.activation_time[v])
        tree = causal_tree(rec, small_ws, target)
        assert tree.subgraph.nodes <= tree.earlier_nodes <= tree.active_nodes
        tau = rec.activation_time
        assert all(tau[v] < tau[target] for v in tree.earlier_nodes - {target})

    @given(graphs_with_seeds())
    @settings(max_examples=300, deadline=None)
    def test_dag_and_seed_containment(self, case: tuple[Graph, frozenset[int]]) -> None:
        g, seeds = case
        rec = _cascade(g, seeds, 1)
        tau = rec.activation_time
        for target in rec.active_nodes():
            sub = causal_subgraph(rec, g, target)
            assert all(tau[u] < tau[v] for u, v in sub.edges)
            if target not in seeds:
                assert sub.nodes & seeds


# --- Accumulation ---


class TestAccumulate:
    def test_path_counts(self, path3: Graph) -> None:
        scores = accumulate(_cascade(path3, {0}, 1), path3, CausalScores.empty(path3))
        assert scores.ni_raw.tolist() == [3, 2, 1]
        assert scores.ti(path3, 0, 1) == 2
        assert scores.ti(path3, 1, 2) == 1
        assert scores.ti(path3, 1, 0) == 0
        assert scores.ti(path3, 2, 1) == 0

    def test_path_normalization(self, path3: Graph) -> None:
        scores = accumulate(_cascade(path3, {0}, 1), path3, CausalScores.empty(path3))
        assert scores.ni_norm == pytest.approx([1.0, 2 / 3, 1 / 3])
        assert scores.ti_norm[directed_index(path3, 0, 1)] == 1.0
        assert scores.ti_norm[directed_index(path3, 1, 2)] == 0.5

    def test_repeat_doubles_raw_keeps_norm(self, small_ws: Graph) -> None:
        rec = _cascade(small_ws, {0, 1}, 2)
        once = accumulate(rec, small_ws, CausalScores.empty(small_ws))
        twice = accumulate(rec, small_ws, accumulate(rec, small_ws, CausalScores.empty(small_ws)))
        assert np.array_equal(twice.ni_raw, 2 * once.ni_raw)
        assert np.allclose(twice.ni_norm, once.ni_norm)
        assert twice.runs == 2

    def test_triangle_symmetry(self, triangle: Graph) -> None:
        scores = CausalScores.empty(triangle)
        for s in range(3):
            accumulate(_cascade(triangle, {s}, 1), triangle, scores)
        assert len(set(scores.ni_raw.tolist())) == 1

    def test_empty_scores_are_degenerate(self, path3: Graph) -> None:
        scores = CausalScores.empty(path3)
        assert scores.ni_degenerate and scores.ti_degenerate
        assert not scores.ni_norm.any()
        assert scores.mean_density() == 0.0

    def test_full_runs_and_density(self) -> None:
        g = Graph(3, [(0, 1)])
        scores = accumulate(_cascade(g, {0}, 1), g, CausalScores.empty(g))
        assert scores.full_runs == 0
        assert scores.mean_density() == pytest.approx(2 / 3)

    @given(graphs_with_seeds())
    @settings(max_examples=300, deadline=None)
    def test_matches_set_recursion(self, case: tuple[Graph, frozenset[int]]) -> None:
        g, seeds = case
        records = [_cascade(g, seeds, 1), _cascade(g, seeds, 2)]
        scores = CausalScores.empty(g)
        for rec in records:
            accumulate(rec, g, scores)
        ni, ti = _oracle_scores(g, records)
        assert np.array_equal(scores.ni_raw, ni)
        assert np.array_equal(scores.ti_raw, ti)

    @given(graphs_with_seeds())
    @settings(max_examples=200, deadline=None)
    def test_one_direction_per_cascade(self, case: tuple[Graph, frozenset[int]]) -> None:
        g, seeds = case
        scores = accumulate(_cascade(g, seeds, 1), g, CausalScores.empty(g))
        forward, reverse = scores.forward_reverse()
        assert not ((forward > 0) & (reverse > 0)).any()


class TestMerge:
    def test_order_independent(self, small_ws: Graph) -> None:
        a = accumulate(_cascade(small_ws, {0, 1}, 2), small_ws, CausalScores.empty(small_ws))
        b = accumulate(_cascade(small_ws, {9, 10}, 2), small_ws, CausalScores.empty(small_ws))
        ab, ba = a + b, b + a
        assert np.array_equal(ab.ni_raw, ba.ni_raw)
        assert np.array_equal(ab.ti_raw, ba.ti_raw)
        assert ab.runs == 2

    def test_in_place(self, path3: Graph) -> None:
        total = CausalScores.empty(path3)
        total += accumulate(_cascade(path3, {0}, 1), path3, CausalScores.empty(path3))
        assert total.ni_raw.tolist() == [3, 2, 1]

    def test_shape_mismatch(self, path3: Graph, triangle: Graph) -> None:
        with pytest.raises(GraphArgumentError, match="different graphs"):
            CausalScores.empty(path3) + CausalScores.empty(triangle)


# --- Sweeps ---


class TestAggregateSweeps:
    def test_exhaustive_clustered_matches_oracle(self) -> None:
        g = watts_strogatz(12, 4, 0.3, 21)
        scores = aggregate_sweeps(g, GI2, "exhaustive-rcs", 2 / 12, 1, 0)
        records = [_cascade(g, set(e), 2) for e in g.edges]
        ni, ti = _oracle_scores(g, records)
        assert scores.runs == g.edge_count
        assert np.array_equal(scores.ni_raw, ni)
        assert np.array_equal(scores.ti_raw, ti)

    @pytest.mark.parametrize("t", [1, 2])
    def test_exhaustive_clustered_pairs_match_oracle_on_random_graphs(self, t: int) -> None:
        model = ModelSpec("gi", ThresholdSpec("absolute", t))
        for index in range(100):
            n = 3 + index % 10
            g = Graph.from_networkx(nx.gnp_random_graph(n, 0.35, seed=index))
            # clustered pairs: an edge, or two nodes without neighbors
            isolated = [v for v in range(n) if g.degree(v) == 0]
            pairs = [set(e) for e in g.edges] + [set(p) for p in itertools.combinations(isolated, 2)]
            scores = aggregate_sweeps(g, model, "exhaustive-rcs", 2 / n, 1, 0)
            ni, ti = _oracle_scores(g, [_cascade(g, p, t) for p in pairs])
            assert scores.runs == len(pairs)
            assert np.array_equal(scores.ni_raw, ni), f"graph {index}"
            assert np.array_equal(scores.ti_raw, ti), f"graph {index}"

    def test_exhaustive_repeats_per_sweep(self, triangle: Graph) -> None:
        one = aggregate_sweeps(triangle, GI1, "exhaustive-rs", 1 / 3, 1, 0)
        two = aggregate_sweeps(triangle, GI1, "exhaustive-rs", 1 / 3, 2, 0)
        assert np.array_equal(two.ni_raw, 2 * one.ni_raw)
        assert two.sweeps == 2

    def test_sweep_has_node_count_runs(self, small_ws: Graph) -> None:
        scores = run_sweep(small_ws, GI2, "rcs", 0.1, 3, 0)
        assert scores.runs == small_ws.node_count
        assert scores.sweeps == 1

    def test_reproducible(self, small_ws: Graph) -> None:
        a = aggregate_sweeps(small_ws, GI2, "rcs", 0.1, 2, 5)
        b = aggregate_sweeps(small_ws, GI2, "rcs", 0.1, 2, 5)
        assert np.array_equal(a.ti_raw, b.ti_raw)

    def test_workers_do_not_change_result(self, small_ws: Graph) -> None:
        model = ModelSpec("icm", icm_beta=0.4)
        serial = aggregate_sweeps(small_ws, model, "rs", 0.1, 3, 8, workers=1)
        parallel = aggregate_sweeps(small_ws, model, "rs", 0.1, 3, 8, workers=2)
        assert np.array_equal(serial.ni_raw, parallel.ni_raw)
        assert np.array_equal(serial.ti_raw, parallel.ti_raw)

    def test_threshold_override(self, path3: Graph) -> None:
        scores = aggregate_sweeps(
            path3, GI2, "exhaustive-rs", 1 / 3, 1, 0, threshold=ThresholdSpec("absolute", 1)
        )
        assert scores.activations == 9

    def test_enumeration_refused(self, small_ws: Graph) -> None:
        with pytest.raises(EnumerationRefusedError) as info:
            aggregate_sweeps(small_ws, GI2, "exhaustive-rs", 0.2, 1, 0, limit=100)
        assert info.value.limit == 100

    def test_invalid_sweeps(self, path3: Graph) -> None:
        with pytest.raises(ParameterError, match="sweeps"):
            aggregate_sweeps(path3, GI1, "rs", 0.5, 0, 0)

    def test_invalid_mode(self, path3: Graph) -> None:
        with pytest.raises(ParameterError, match="seed_mode"):
            aggregate_sweeps(path3, GI1, "all", 0.5, 1, 0)


# --- Export ---


class TestExport:
    def test_csv_files(self, tmp_path, path3: Graph) -> None:
        scores = accumulate(_cascade(path3, {0}, 1), path3, CausalScores.empty(path3))
        node_path, tie_path = write_scores_csv(scores, path3, tmp_path)
        with node_path.open() as fh:
            nodes = list(csv.DictReader(fh))
        assert [(r["node"], r["ni_raw"]) for r in nodes] == [("a", "3"), ("b", "2"), ("c", "1")]
        with tie_path.open() as fh:
            ties = {(r["src"], r["dst"]): int(r["ti_raw"]) for r in csv.DictReader(fh)}
        assert ties == {("a", "b"): 2, ("b", "a"): 0, ("b", "c"): 1, ("c", "b"): 0}

    def test_pairs(self, path3: Graph) -> None:
        scores = accumulate(_cascade(path3, {0}, 1), path3, CausalScores.empty(path3))
        assert ti_pairs(scores, path3) == [((0, 1), 2, 0), ((1, 2), 1, 0)]
        assert ti_pairs(scores, path3, normalized=True) == [((0, 1), 1.0, 0.0), ((1, 2), 0.5, 0.0)]

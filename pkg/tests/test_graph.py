from __future__ import annotations

import itertools
import math
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings

from contagionflow.exceptions import (
    AnalysisError,
    EdgeListParseError,
    EdgeListReadError,
    GraphArgumentError,
)
from contagionflow.graph import (
    INFINITE_RANGE,
    Graph,
    common_neighbors,
    components,
    giant_component,
    load_edge_list,
    read_edge_list,
    structural_tie_strength,
    tie_range,
    tie_ranges,
    tie_strength_terciles,
    to_edge_list,
)
from tests.strategies import graphs


def _cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def _barbell() -> Graph:
    # triangles 0-1-2 and 3-4-5 joined by 2-3
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


# --- Construction ---


class TestGraph:
    def test_edges_are_canonical_and_sorted(self) -> None:
        g = Graph(4, [(3, 1), (0, 2), (1, 0)])
        assert g.edges == ((0, 1), (0, 2), (1, 3))
        assert g.neighbors(1) == (0, 3)

    def test_self_loop_rejected(self) -> None:
        with pytest.raises(GraphArgumentError, match="self-loop"):
            Graph(2, [(1, 1)])

    def test_out_of_range_rejected(self) -> None:
        with pytest.raises(GraphArgumentError, match="outside node range"):
            Graph(2, [(0, 2)])

    def test_names_length_checked(self) -> None:
        with pytest.raises(GraphArgumentError):
            Graph(2, [(0, 1)], names=["a"])

    def test_edge_index_unknown_edge(self, path3: Graph) -> None:
        with pytest.raises(GraphArgumentError, match="not in the graph"):
            path3.edge_index(0, 2)

    def test_csr_matches_adjacency(self, small_ws: Graph) -> None:
        matrix = small_ws.adjacency_matrix
        for i in range(small_ws.node_count):
            row = matrix.indices[matrix.indptr[i] : matrix.indptr[i + 1]]
            assert tuple(sorted(row.tolist())) == small_ws.neighbors(i)

    def test_degree_sum(self, small_ws: Graph) -> None:
        assert int(small_ws.degrees.sum()) == 2 * small_ws.edge_count

    def test_from_edges_infers_count(self) -> None:
        assert Graph.from_edges([(0, 4)]).node_count == 5

    def test_from_networkx(self) -> None:
        g = Graph.from_networkx(nx.cycle_graph(5))
        assert g == _cycle(5)
        assert g.to_networkx().number_of_edges() == 5

    def test_from_networkx_needs_dense_labels(self) -> None:
        with pytest.raises(GraphArgumentError, match="0..n-1"):
            Graph.from_networkx(nx.Graph([("a", "b")]))

    def test_with_edges_extends(self, path3: Graph) -> None:
        g = path3.with_edges([(0, 2)])
        assert g.edge_count == 3
        assert g.name_of(2) == "c"
        assert path3.edge_count == 2


# --- Ingestion ---


class TestLoadEdgeList:
    def test_simple(self) -> None:
        g = load_edge_list("a b\nb c")
        assert (g.node_count, g.edge_count) == (3, 2)
        assert g.names == ("a", "b", "c")

    def test_dedup_and_self_loop(self) -> None:
        g = load_edge_list("a b\nb a\na a")
        assert (g.node_count, g.edge_count) == (2, 1)

    def test_empty(self) -> None:
        g = load_edge_list("")
        assert (g.node_count, g.edge_count) == (0, 0)

    def test_comments_and_blank_lines(self) -> None:
        g = load_edge_list("# header\n\n1 2\n  \n2 3\n")
        assert g.edge_count == 2

    def test_malformed_line_reports_number(self) -> None:
        with pytest.raises(EdgeListParseError, match=r"\[line 2\]") as info:
            load_edge_list("a b\na b c\n")
        assert info.value.line_number == 2

    def test_missing_file(self, tmp_path) -> None:
        path = tmp_path / "absent.edges"
        with pytest.raises(EdgeListReadError, match=r"\[.*absent\.edges\]") as info:
            read_edge_list(path)
        assert info.value.path == str(path)

    def test_non_utf8_file(self, tmp_path) -> None:
        path = tmp_path / "latin.edges"
        path.write_bytes(b"a \xff\n")
        with pytest.raises(EdgeListReadError, match="not UTF-8"):
            read_edge_list(path)

    def test_round_trip(self, tmp_path, small_ws: Graph) -> None:
        path = tmp_path / "g.edges"
        path.write_text(to_edge_list(small_ws), encoding="utf-8")
        again = read_edge_list(path)
        assert again.edge_count == small_ws.edge_count
        assert {
            tuple(sorted((int(again.name_of(i)), int(again.name_of(j))))) for i, j in again.edges
        } == set(small_ws.edges)


# --- Components ---


class TestGiantComponent:
    def test_size_tie_takes_lowest_index(self) -> None:
        g = Graph(8, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 7)])
        giant = giant_component(g)
        assert giant.node_count == 3
        assert giant.edges == ((0, 1), (0, 2), (1, 2))

    def test_size_dominance(self) -> None:
        k3 = [(0, 1), (1, 2), (0, 2)]
        k4 = [(i, j) for i, j in itertools.combinations(range(3, 7), 2)]
        giant = giant_component(Graph(7, k3 + k4))
        assert (giant.node_count, giant.edge_count) == (4, 6)

    def test_connected_graph_unchanged(self, path3: Graph) -> None:
        assert giant_component(path3) == path3

    def test_empty_graph(self) -> None:
        assert giant_component(Graph(0, [])).node_count == 0

    def test_components_ordered(self) -> None:
        assert components(Graph(5, [(3, 4), (0, 2)])) == [[0, 2], [1], [3, 4]]

    @given(graphs())
    @settings(max_examples=200)
    def test_idempotent(self, g: Graph) -> None:
        once = giant_component(g)
        assert giant_component(once) == once


# --- Tie range ---


class TestTieRange:
    def test_triangle_edge(self, triangle: Graph) -> None:
        assert tie_range(triangle, (0, 1)) == 2

    def test_five_cycle(self) -> None:
        assert tie_range(_cycle(5), (0, 1)) == 4

    def test_barbell_bridge(self) -> None:
        assert tie_range(_barbell(), (2, 3)) == INFINITE_RANGE

    def test_unknown_edge(self, path3: Graph) -> None:
        with pytest.raises(GraphArgumentError):
            tie_range(path3, (0, 2))

    def test_bulk_matches_single(self) -> None:
        g = _barbell()
        assert tie_ranges(g) == {e: tie_range(g, e) for e in g.edges}

    @given(graphs(min_nodes=2))
    @settings(max_examples=200)
    def test_range_two_iff_common_neighbor(self, g: Graph) -> None:
        for e, value in tie_ranges(g).items():
            if math.isfinite(value):
                assert value >= 2
            assert (value == 2) == (common_neighbors(g, *e) > 0)


# --- Tie strength ---


class TestTieStrength:
    def test_k4_edge(self) -> None:
        g = Graph(4, list(itertools.combinations(range(4), 2)))
        assert structural_tie_strength(g, (0, 1)) == Fraction(1)

    def test_pendant_edge(self, path3: Graph) -> None:
        assert structural_tie_strength(path3, (0, 1)) == Fraction(0)

    def test_isolated_edge_undefined(self) -> None:
        assert structural_tie_strength(Graph(2, [(0, 1)]), (0, 1)) is None

    def test_bounded_on_small_graphs(self) -> None:
        pairs = list(itertools.combinations(range(5), 2))
        for mask in range(1 << len(pairs)):
            g = Graph(5, [p for bit, p in enumerate(pairs) if mask >> bit & 1])
            for i, j in g.edges:
                if g.degree(i) >= 2 and g.degree(j) >= 2:
                    s = structural_tie_strength(g, (i, j))
                    assert s is not None and 0 <= s <= 1

    @pytest.mark.slow
    def test_bounded_on_six_node_graphs(self) -> None:
        for g in nx.graph_atlas_g():
            if g.number_of_nodes() != 6:
                continue
            graph = Graph(6, g.edges())
            for i, j in graph.edges:
                if graph.degree(i) >= 2 and graph.degree(j) >= 2:
                    s = structural_tie_strength(graph, (i, j))
                    assert s is not None and 0 <= s <= 1


class TestTerciles:
    def test_exact_thirds(self) -> None:
        split = tie_strength_terciles(_cycle(9))
        assert [len(split.members(t)) for t in ("weak", "medium", "strong")] == [3, 3, 3]

    def test_remainder_goes_low(self) -> None:
        split = tie_strength_terciles(_cycle(10))
        assert [len(split.members(t)) for t in ("weak", "medium", "strong")] == [4, 3, 3]

    def test_equal_strengths_split_by_edge_index(self) -> None:
        g = _cycle(9)
        split = tie_strength_terciles(g)
        assert split.members("weak") == list(g.edges[:3])
        assert split.members("strong") == list(g.edges[6:])

    def test_orders_by_strength(self) -> None:
        # triangle with a pendant: triangle edges are stronger than the pendant edge
        g = Graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
        split = tie_strength_terciles(g)
        assert split.members("strong") == [(0, 1)]
        assert split.members("medium") == [(0, 2), (1, 2)]
        assert split.members("weak") == [(2, 3), (3, 4)]

    def test_too_few_edges(self) -> None:
        with pytest.raises(AnalysisError, match="at least 3"):
            tie_strength_terciles(Graph(4, [(0, 1), (2, 3)]))

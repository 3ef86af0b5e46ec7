from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Literal

import networkx as nx
import numpy as np
from scipy import sparse

from contagionflow._constants import LOGGER_NAME
from contagionflow.exceptions import (
    AnalysisError,
    EdgeListParseError,
    EdgeListReadError,
    GraphArgumentError,
)

logger = logging.getLogger(LOGGER_NAME)

Edge = tuple[int, int]
TieStrengthGroup = Literal["weak", "medium", "strong"]

INFINITE_RANGE = math.inf


def _canonical(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


class Graph:
    """Immutable undirected simple graph on nodes ``0..node_count-1``.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``,
    sorted; ``adjacency[i]`` is the sorted tuple of neighbors of ``i``.
    Optional ``names`` map indices back to the labels of an ingested file.
    """

    def __init__(
        self,
        node_count: int,
        edges: Iterable[Edge],
        names: Sequence[str] | None = None,
    ) -> None:
        if node_count < 0:
            raise GraphArgumentError(f"node_count must be >= 0, got {node_count}")
        if names is not None and len(names) != node_count:
            raise GraphArgumentError(
                f"{len(names)} names given for {node_count} nodes"
            )
        edge_set: set[Edge] = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphArgumentError(f"self-loop on node {i}")
            if not (0 <= i < node_count and 0 <= j < node_count):
                raise GraphArgumentError(
                    f"edge ({i}, {j}) outside node range [0, {node_count})"
                )
            edge_set.add(_canonical(i, j))

        self._node_count = node_count
        self._edges: tuple[Edge, ...] = tuple(sorted(edge_set))
        neighbors: list[list[int]] = [[] for _ in range(node_count)]
        for i, j in self._edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        self._adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(n)) for n in neighbors
        )
        self._names: tuple[str, ...] | None = tuple(names) if names is not None else None

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], node_count: int | None = None) -> Graph:
        edge_list = [(int(i), int(j)) for i, j in edges]
        if node_count is None:
            node_count = 1 + max((max(e) for e in edge_list), default=-1)
        return cls(node_count, edge_list)

    @classmethod
    def from_networkx(cls, nxg: nx.Graph) -> Graph:
        """Convert a networkx graph whose nodes are ``0..n-1``."""
        n = nxg.number_of_nodes()
        if set(nxg.nodes) != set(range(n)):
            raise GraphArgumentError("networkx graph nodes must be 0..n-1")
        return cls(n, nxg.edges)

    @property
    def node_count(self) -> int:
        return self._node_count

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adjacency

    @property
    def names(self) -> tuple[str, ...] | None:
        return self._names

    def name_of(self, node: int) -> str:
        if self._names is None:
            return str(node)
        return self._names[node]

    def neighbors(self, node: int) -> tuple[int, ...]:
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter(
            (len(n) for n in self._adjacency), dtype=np.int64, count=self._node_count
        )

    @cached_property
    def edge_ids(self) -> dict[Edge, int]:
        return {e: idx for idx, e in enumerate(self._edges)}

    def edge_index(self, i: int, j: int) -> int:
        idx = self.edge_ids.get(_canonical(i, j))
        if idx is None:
            raise GraphArgumentError(f"edge ({i}, {j}) is not in the graph")
        return idx

    def has_edge(self, i: int, j: int) -> bool:
        return _canonical(i, j) in self.edge_ids

    @cached_property
    def indptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.degrees))).astype(np.int64)

    @cached_property
    def indices(self) -> np.ndarray:
        if not self._edges:
            return np.zeros(0, dtype=np.int64)
        return np.fromiter(
            (j for row in self._adjacency for j in row),
            dtype=np.int64,
            count=2 * len(self._edges),
        )

    def neighbor_array(self, nodes: Iterable[int]) -> np.ndarray:
        """Concatenated neighbor lists of ``nodes``, in the given node order."""
        ptr, idx = self.indptr, self.indices
        blocks = [idx[ptr[u] : ptr[u + 1]] for u in nodes]
        if not blocks:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(blocks)

    @cached_property
    def adjacency_matrix(self) -> sparse.csr_array:
        """Symmetric 0/1 CSR matrix; row ``i`` lists the neighbors of ``i``."""
        data = np.ones(self.indices.shape[0], dtype=np.int64)
        return sparse.csr_array(
            (data, self.indices, self.indptr),
            shape=(self._node_count, self._node_count),
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self._node_count))
        g.add_edges_from(self._edges)
        return nx.freeze(g)

    def with_edges(self, extra: Iterable[Edge]) -> Graph:
        return Graph(self._node_count, [*self._edges, *extra], self._names)

    def __len__(self) -> int:
        return self._node_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._node_count == other._node_count and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._node_count, self._edges))

    def __repr__(self) -> str:
        return f"Graph(nodes={self._node_count}, edges={len(self._edges)})"


# --- Ingestion ---


def load_edge_list(text: str) -> Graph:
    """Parse whitespace-separated ``u v`` lines into a densely indexed graph.

    Nodes are numbered by first appearance. ``#`` lines and blank lines are
    skipped, reversed duplicates collapse, and self-loops are dropped (the
    node itself is kept).
    """
    index: dict[str, int] = {}
    edges: list[Edge] = []
    loops = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                number, f"expected 2 tokens, found {len(tokens)}: {line!r}"
            )
        ids = [index.setdefault(tok, len(index)) for tok in tokens]
        if ids[0] == ids[1]:
            loops += 1
            continue
        edges.append((ids[0], ids[1]))
    names = sorted(index, key=index.__getitem__)
    g = Graph(len(names), edges, names)
    logger.debug(
        "Loaded edge list: %d nodes, %d edges, %d self-loops dropped",
        g.node_count,
        g.edge_count,
        loops,
    )
    return g


def read_edge_list(path: Path | str) -> Graph:
    target = Path(path)
    try:
        text = target.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise EdgeListReadError(str(target), f"not UTF-8 text: {exc.reason}") from exc
    except OSError as exc:
        raise EdgeListReadError(str(target), exc.strerror or str(exc)) from exc
    return load_edge_list(text)


def to_edge_list(g: Graph) -> str:
    lines = [f"{g.name_of(i)} {g.name_of(j)}" for i, j in g.edges]
    return "\n".join(lines) + ("\n" if lines else "")


# --- Structure ---


def components(g: Graph) -> list[list[int]]:
    """Connected components as sorted index lists, ordered by smallest member."""
    comps = [sorted(c) for c in nx.connected_components(g.to_networkx())]
    return sorted(comps, key=lambda c: c[0])


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    keep = sorted(set(nodes))
    remap = {old: new for new, old in enumerate(keep)}
    edges = [
        (remap[i], remap[j]) for i, j in g.edges if i in remap and j in remap
    ]
    names = [g.names[i] for i in keep] if g.names is not None else None
    return Graph(len(keep), edges, names)


def giant_component(g: Graph) -> Graph:
    """Subgraph induced by the largest component, re-indexed in original order.

    Equal-size components are resolved in favour of the one holding the
    smallest original index.
    """
    if g.node_count == 0:
        return g
    comps = components(g)
    best = max(comps, key=lambda c: (len(c), -c[0]))
    return induced_subgraph(g, best)


def clustering_coefficient(g: Graph) -> float:
    if g.node_count == 0:
        return 0.0
    return float(nx.average_clustering(g.to_networkx()))


def common_neighbors(g: Graph, i: int, j: int) -> int:
    return len(set(g.neighbors(i)).intersection(g.neighbors(j)))


def tie_range(g: Graph, edge: Edge) -> int | float:
    """Length of the shortest ``i``-``j`` path that avoids the edge itself.

    Returns ``INFINITE_RANGE`` when removing the edge disconnects its ends.
    """
    i, j = edge
    g.edge_index(i, j)
    if common_neighbors(g, i, j) > 0:
        return 2
    view = nx.restricted_view(g.to_networkx(), [], [(i, j)])
    try:
        return int(nx.shortest_path_length(view, i, j))
    except nx.NetworkXNoPath:
        return INFINITE_RANGE


def tie_ranges(g: Graph) -> dict[Edge, int | float]:
    """Tie range of every edge, sharing one networkx graph across edges."""
    base = g.to_networkx()
    result: dict[Edge, int | float] = {}
    for i, j in g.edges:
        if common_neighbors(g, i, j) > 0:
            result[(i, j)] = 2
            continue
        view = nx.restricted_view(base, [], [(i, j)])
        try:
            result[(i, j)] = int(nx.shortest_path_length(view, i, j))
        except nx.NetworkXNoPath:
            result[(i, j)] = INFINITE_RANGE
    return result


def structural_tie_strength(g: Graph, edge: Edge) -> Fraction | None:
    """Mutual-neighbor overlap ``M / (D_i + D_j - M - 2)``; ``None`` when the
    denominator vanishes."""
    i, j = edge
    g.edge_index(i, j)
    mutual = common_neighbors(g, i, j)
    denominator = g.degree(i) + g.degree(j) - mutual - 2
    if denominator == 0:
        return None
    return Fraction(mutual, denominator)


@dataclass
class TercileAssignment:
    groups: dict[Edge, TieStrengthGroup]
    strengths: dict[Edge, Fraction]
    undefined: list[Edge] = field(default_factory=list)

    def members(self, group: TieStrengthGroup) -> list[Edge]:
        return [e for e, label in self.groups.items() if label == group]


def tie_strength_terciles(g: Graph) -> TercileAssignment:
    """Split defined-strength edges into weak/medium/strong thirds.

    Edges are ordered by ``(strength, edge index)``; a remainder of one or two
    goes to the lower groups first, so sizes differ by at most one.
    """
    strengths: dict[Edge, Fraction] = {}
    undefined: list[Edge] = []
    for e in g.edges:
        s = structural_tie_strength(g, e)
        if s is None:
            undefined.append(e)
        else:
            strengths[e] = s
    if len(strengths) < 3:
        raise AnalysisError(
            "tie_strength_terciles",
            f"need at least 3 edges with defined strength, found {len(strengths)}",
        )
    ordered = sorted(strengths, key=lambda e: (strengths[e], g.edge_ids[e]))
    base, remainder = divmod(len(ordered), 3)
    sizes = [base + (1 if k < remainder else 0) for k in range(3)]
    labels: tuple[TieStrengthGroup, ...] = ("weak", "medium", "strong")
    groups: dict[Edge, TieStrengthGroup] = {}
    start = 0
    for label, size in zip(labels, sizes):
        for e in ordered[start : start + size]:
            groups[e] = label
        start += size
    if undefined:
        logger.debug("Tercile split excluded %d undefined-strength edges", len(undefined))
    return TercileAssignment(groups=groups, strengths=strengths, undefined=undefined)

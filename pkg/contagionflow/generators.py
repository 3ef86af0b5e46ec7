from __future__ import annotations

import logging
from typing import Any

import networkx as nx
import numpy as np

from contagionflow._constants import GENERATOR_VERSION, LOGGER_NAME, RNG_ALGORITHM
from contagionflow.exceptions import ParameterError
from contagionflow.graph import Edge, Graph
from contagionflow.rng import RngSeed, make_rng

logger = logging.getLogger(LOGGER_NAME)

CommunityLabel = str


def generator_metadata(name: str, params: dict[str, Any], seed: RngSeed) -> dict[str, Any]:
    """Sidecar record that makes a generated graph re-creatable."""
    return {
        "generator": name,
        "params": dict(params),
        "seed": int(seed),
        "generator_version": GENERATOR_VERSION,
        "rng": RNG_ALGORITHM,
    }


def _check_ws(n: int, k: int, beta: float) -> None:
    if k < 2 or k % 2:
        raise ParameterError("k", f"mean degree must be even and >= 2, got {k}")
    if k >= n:
        raise ParameterError("k", f"mean degree {k} must be smaller than n={n}")
    if not 0.0 <= beta <= 1.0:
        raise ParameterError("beta", f"rewiring probability must be in [0, 1], got {beta}")


def _ws_edges(n: int, k: int, beta: float, rng: np.random.Generator) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for step in range(1, k // 2 + 1):
            v = (u + step) % n
            adj[u].add(v)
            adj[v].add(u)

    for step in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + step) % n
            if rng.random() >= beta or v not in adj[u]:
                continue
            for _ in range(n):
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    adj[u].discard(v)
                    adj[v].discard(u)
                    adj[u].add(w)
                    adj[w].add(u)
                    break
    return adj


def _adjacency_edges(adj: list[set[int]], offset: int = 0) -> list[Edge]:
    return [(u + offset, v + offset) for u, nbrs in enumerate(adj) for v in nbrs if u < v]


def watts_strogatz(n: int, k: int, beta: float, seed: RngSeed) -> Graph:
    """Ring lattice of ``k/2`` neighbors per side with each lattice edge
    rewired with probability ``beta``.

    A rewire draws up to ``n`` uniform targets, skipping self and existing
    neighbors; when none fits the original edge stays.
    """
    _check_ws(n, k, beta)
    adj = _ws_edges(n, k, beta, make_rng(seed))
    g = Graph(n, _adjacency_edges(adj))
    logger.debug("watts_strogatz(n=%d, k=%d, beta=%.3f, seed=%d)", n, k, beta, seed)
    return g


def clustered_power_law(n: int, m: int, p: float, seed: RngSeed) -> Graph:
    """Preferential attachment with triad formation (Holme-Kim).

    Built by ``networkx.powerlaw_cluster_graph``; its seed is an integer
    drawn from ``make_rng(seed)`` so the result stays keyed to ``seed``.
    """
    if m < 1:
        raise ParameterError("m", f"edges per new node must be >= 1, got {m}")
    if n <= m:
        raise ParameterError("n", f"node count {n} must exceed m={m}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p", f"triangle probability must be in [0, 1], got {p}")

    nx_seed = int(make_rng(seed).integers(1 << 32))
    g = Graph.from_networkx(nx.powerlaw_cluster_graph(n, m, p, seed=nx_seed))
    logger.debug("clustered_power_law(n=%d, m=%d, p=%.3f, seed=%d)", n, m, p, seed)
    return g


def two_disconnected_ws(
    n: int, k: int, beta: float, seed: RngSeed
) -> tuple[Graph, tuple[CommunityLabel, ...]]:
    """Two independent WS communities: nodes ``0..n-1`` are A, ``n..2n-1`` are B."""
    _check_ws(n, k, beta)
    edges = _adjacency_edges(_ws_edges(n, k, beta, make_rng(seed, 0)))
    edges += _adjacency_edges(_ws_edges(n, k, beta, make_rng(seed, 1)), offset=n)
    labels = tuple("A" if i < n else "B" for i in range(2 * n))
    return Graph(2 * n, edges), labels

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from contagionflow._constants import LOGGER_NAME
from contagionflow.exceptions import ParameterError
from contagionflow.graph import Graph
from contagionflow.rng import RngSeed, make_rng

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class SeedSet:
    members: frozenset[int]
    fraction: float

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, node: object) -> bool:
        return node in self.members

    def as_array(self) -> np.ndarray:
        return np.fromiter(sorted(self.members), dtype=np.int64, count=len(self.members))


def seed_set_size(node_count: int, p: float) -> int:
    """``ceil(p * |V|)``, computed on the exact decimal value of ``p``, at least 1."""
    if not 0.0 < p <= 1.0:
        raise ParameterError("p", f"seed fraction must be in (0, 1], got {p}")
    exact = Fraction(p).limit_denominator(10**9) * node_count
    return max(1, min(node_count, math.ceil(exact)))


def _as_generator(rng: np.random.Generator | RngSeed) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


def random_seed_set(g: Graph, p: float, seed: np.random.Generator | RngSeed) -> SeedSet:
    size = seed_set_size(g.node_count, p)
    rng = _as_generator(seed)
    chosen = rng.choice(g.node_count, size=size, replace=False)
    return SeedSet(frozenset(int(x) for x in chosen), p)


def random_clustered_seed_set(
    g: Graph, p: float, seed: np.random.Generator | RngSeed
) -> SeedSet:
    """Grow seed patches by uniform frontier expansion until ``ceil(p|V|)`` nodes.

    A patch starts at a uniform unseeded node and absorbs a uniform frontier
    node (unseeded neighbor of the seed set) per step. When the frontier runs
    dry a new patch starts. A patch never closes as a singleton inside a
    component of size > 1: if only one slot is left, an isolated node is
    preferred, otherwise the last node of a patch of size >= 3 is released so
    the new patch can take two nodes.
    """
    size = seed_set_size(g.node_count, p)
    rng = _as_generator(seed)
    members: set[int] = set()
    patches: list[list[int]] = []
    frontier: set[int] = set()

    def add(node: int) -> None:
        members.add(node)
        patches[-1].append(node)
        frontier.discard(node)
        frontier.update(v for v in g.neighbors(node) if v not in members)

    while len(members) < size:
        if frontier:
            pool = sorted(frontier)
            add(pool[int(rng.integers(len(pool)))])
            continue

        unseeded = [v for v in range(g.node_count) if v not in members]
        if size - len(members) == 1:
            isolated = [v for v in unseeded if g.degree(v) == 0]
            if isolated:
                unseeded = isolated
            else:
                # the last-grown node of a patch of >= 3 is a leaf of its growth tree
                donor = next((pt for pt in reversed(patches) if len(pt) >= 3), None)
                if donor is not None:
                    members.discard(donor.pop())
                else:
                    logger.warning(
                        "Clustered seed set of size %d cannot give every seed a "
                        "seed neighbor on this graph; keeping a singleton patch",
                        size,
                    )

        patches.append([])
        add(unseeded[int(rng.integers(len(unseeded)))])

    return SeedSet(frozenset(members), p)


def enumerate_seed_sets(g: Graph, size: int, clustered: bool = False) -> Iterator[SeedSet]:
    """All seed sets of ``size`` nodes in lexicographic order; with ``clustered``
    only those where every member has a member neighbor (members of singleton
    components are exempt)."""
    if not 1 <= size <= g.node_count:
        raise ParameterError("size", f"seed set size must be in [1, {g.node_count}], got {size}")
    fraction = size / g.node_count
    for combo in itertools.combinations(range(g.node_count), size):
        chosen = frozenset(combo)
        if clustered and not is_clustered(g, chosen):
            continue
        yield SeedSet(chosen, fraction)


def is_clustered(g: Graph, members: frozenset[int] | set[int]) -> bool:
    return all(
        g.degree(v) == 0 or any(u in members for u in g.neighbors(v)) for v in members
    )

from __future__ import annotations

import logging

import numpy as np

from contagionflow._constants import LOGGER_NAME
from contagionflow.contagion import (
    CascadeRecord,
    ContagionDynamics,
    ModelSpec,
    new_activation_times,
    resolve_thresholds,
)
from contagionflow.graph import Graph
from contagionflow.seeding import SeedSet

logger = logging.getLogger(LOGGER_NAME)


class GeneralInfluenceDynamics(ContagionDynamics):
    def run(
        self,
        g: Graph,
        seeds: SeedSet,
        model: ModelSpec,
        rng: np.random.Generator,
    ) -> CascadeRecord:
        assert model.threshold is not None
        return run_gi(g, seeds, resolve_thresholds(g, model.threshold))


def run_gi(g: Graph, seeds: SeedSet, thresholds: np.ndarray) -> CascadeRecord:
    """Deterministic synchronous threshold cascade.

    An inactive node activates at ``t + 1`` when at least ``thresholds[i]`` of
    its neighbors were active at ``t``. Exposure counts are updated
    incrementally from the nodes activated in the previous step only.
    """
    tau = new_activation_times(g, seeds)
    active = tau >= 0
    adjacency = g.adjacency_matrix
    exposure = adjacency @ active.astype(np.int64)
    t = 0
    while True:
        newly = ~active & (exposure >= thresholds)
        if not newly.any():
            break
        t += 1
        tau[newly] = t
        active |= newly
        exposure += adjacency @ newly.astype(np.int64)
    logger.debug(
        "gi cascade: %d seeds -> %d active after %d steps",
        len(seeds),
        int(active.sum()),
        t,
    )
    return CascadeRecord(activation_time=tau, seed_set=seeds, converged_at=t)

from __future__ import annotations

import logging

import numpy as np

from contagionflow._constants import LOGGER_NAME
from contagionflow.contagion import (
    CascadeRecord,
    ContagionDynamics,
    ModelSpec,
    new_activation_times,
)
from contagionflow.graph import Graph
from contagionflow.seeding import SeedSet

logger = logging.getLogger(LOGGER_NAME)


class IndependentCascadeDynamics(ContagionDynamics):
    def run(
        self,
        g: Graph,
        seeds: SeedSet,
        model: ModelSpec,
        rng: np.random.Generator,
    ) -> CascadeRecord:
        assert model.icm_beta is not None
        return run_icm(g, seeds, model.icm_beta, rng)


def run_icm(
    g: Graph, seeds: SeedSet, beta: float, rng: np.random.Generator
) -> CascadeRecord:
    """Independent cascade: each node, on the step after it activates, makes
    one Bernoulli(``beta``) attempt on every neighbor still inactive."""
    tau = new_activation_times(g, seeds)
    active = tau >= 0
    frontier = np.flatnonzero(active)
    t = 0
    while frontier.size:
        targets = g.neighbor_array(frontier)
        targets = targets[~active[targets]]
        if targets.size == 0:
            break
        hits = targets[rng.random(targets.size) < beta]
        if hits.size == 0:
            break
        frontier = np.unique(hits)
        t += 1
        tau[frontier] = t
        active[frontier] = True
    logger.debug("icm cascade: %d active after %d steps", int(active.sum()), t)
    return CascadeRecord(activation_time=tau, seed_set=seeds, converged_at=t)

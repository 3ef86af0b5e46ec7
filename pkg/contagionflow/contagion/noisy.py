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


class NoisyThresholdDynamics(ContagionDynamics):
    def __init__(self, single_transmission: bool) -> None:
        self.single_transmission = single_transmission

    def run(
        self,
        g: Graph,
        seeds: SeedSet,
        model: ModelSpec,
        rng: np.random.Generator,
    ) -> CascadeRecord:
        assert model.threshold is not None and model.noise_q is not None
        return run_noisy(
            g,
            seeds,
            resolve_thresholds(g, model.threshold),
            model.noise_q,
            self.single_transmission,
            rng,
        )


def run_noisy(
    g: Graph,
    seeds: SeedSet,
    thresholds: np.ndarray,
    q: float,
    single_transmission: bool,
    rng: np.random.Generator,
) -> CascadeRecord:
    """Threshold cascade where exposed but subthreshold nodes adopt with
    probability ``q`` per step.

    With ``single_transmission`` a node gets its subthreshold draw only on the
    first step at which it has an active neighbor. The run stops at the first
    step in which no node changes state.
    """
    tau = new_activation_times(g, seeds)
    active = tau >= 0
    adjacency = g.adjacency_matrix
    exposure = adjacency @ active.astype(np.int64)
    drawn = np.zeros(g.node_count, dtype=bool)
    t = 0
    while True:
        inactive = ~active
        forced = inactive & (exposure >= thresholds)
        eligible = inactive & ~forced & (exposure >= 1)
        if single_transmission:
            eligible &= ~drawn
            drawn |= inactive & (exposure >= 1)
        lucky = np.zeros(g.node_count, dtype=bool)
        candidates = np.flatnonzero(eligible)
        if candidates.size and q > 0:
            lucky[candidates[rng.random(candidates.size) < q]] = True
        newly = forced | lucky
        if not newly.any():
            break
        t += 1
        tau[newly] = t
        active |= newly
        exposure += adjacency @ newly.astype(np.int64)
    logger.debug(
        "noisy cascade (single=%s): %d active after %d steps",
        single_transmission,
        int(active.sum()),
        t,
    )
    return CascadeRecord(activation_time=tau, seed_set=seeds, converged_at=t)

from __future__ import annotations

import logging

import numpy as np
from scipy import sparse

from contagionflow._constants import LOGGER_NAME
from contagionflow.contagion import (
    CascadeRecord,
    ContagionDynamics,
    LtmWeights,
    ModelSpec,
    new_activation_times,
)
from contagionflow.graph import Graph
from contagionflow.seeding import SeedSet

logger = logging.getLogger(LOGGER_NAME)

# slack when comparing summed float weights against phi
_TOLERANCE = 1e-12


class LinearThresholdDynamics(ContagionDynamics):
    def run(
        self,
        g: Graph,
        seeds: SeedSet,
        model: ModelSpec,
        rng: np.random.Generator,
    ) -> CascadeRecord:
        return run_ltm(
            g,
            seeds,
            phi=model.ltm_phi,
            weights=model.ltm_weights,
            sigma=model.ltm_sigma,
            rng=rng,
        )


def incoming_weights(
    g: Graph,
    weights: LtmWeights,
    sigma: float,
    rng: np.random.Generator,
) -> sparse.csr_array:
    """Row ``i`` holds the weights ``w_ji`` node ``i`` gives its neighbors.

    Homogeneous weights are ``1/deg(i)``. Gaussian weights are drawn around
    ``1/deg(i)`` with spread ``sigma``, clipped at zero and renormalized so each
    row sums to one; a row that clips to all zeros falls back to homogeneous.
    """
    degrees = g.degrees
    rows = np.repeat(np.arange(g.node_count), degrees)
    base = 1.0 / degrees[rows] if rows.size else np.zeros(0)
    if weights == "gaussian" and sigma > 0 and rows.size:
        drawn = np.clip(rng.normal(loc=base, scale=sigma), 0.0, None)
        totals = np.bincount(rows, weights=drawn, minlength=g.node_count)
        dead = totals[rows] <= 0.0
        data = np.where(dead, base, drawn / np.where(dead, 1.0, totals[rows]))
    else:
        data = base
    return sparse.csr_array(
        (data, g.indices, g.indptr), shape=(g.node_count, g.node_count)
    )


def run_ltm(
    g: Graph,
    seeds: SeedSet,
    phi: float,
    weights: LtmWeights,
    sigma: float,
    rng: np.random.Generator,
) -> CascadeRecord:
    """Synchronous linear threshold cascade with weights fixed for the run."""
    w = incoming_weights(g, weights, sigma, rng)
    tau = new_activation_times(g, seeds)
    active = tau >= 0
    influence = w @ active.astype(np.float64)
    t = 0
    while True:
        newly = ~active & (influence >= phi - _TOLERANCE)
        if not newly.any():
            break
        t += 1
        tau[newly] = t
        active |= newly
        influence += w @ newly.astype(np.float64)
    logger.debug("ltm cascade: %d active after %d steps", int(active.sum()), t)
    return CascadeRecord(activation_time=tau, seed_set=seeds, converged_at=t)

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

import numpy as np

from contagionflow._constants import DEFAULT_LTM_PHI, DEFAULT_LTM_SIGMA
from contagionflow.exceptions import ParameterError
from contagionflow.graph import Graph
from contagionflow.seeding import SeedSet

ThresholdMode = Literal["absolute", "relative"]
Neighborhood = Literal["closed", "open"]
ModelFamily = Literal["gi", "ltm", "icm", "noisy", "noisy-single"]
LtmWeights = Literal["homogeneous", "gaussian"]

_MODE_PREFIX: dict[str, ThresholdMode] = {
    "abs": "absolute",
    "absolute": "absolute",
    "rel": "relative",
    "relative": "relative",
}


@dataclass(frozen=True)
class ThresholdSpec:
    mode: ThresholdMode
    value: float
    neighborhood: Neighborhood = "closed"

    def __post_init__(self) -> None:
        if self.mode == "absolute":
            if self.value < 1 or int(self.value) != self.value:
                raise ParameterError(
                    "threshold", f"absolute threshold must be a positive integer, got {self.value}"
                )
        elif self.mode == "relative":
            if not 0.0 < self.value <= 1.0:
                raise ParameterError(
                    "threshold", f"relative threshold must be in (0, 1], got {self.value}"
                )
        else:
            raise ParameterError("threshold", f"unknown threshold mode: {self.mode}")
        if self.neighborhood not in ("closed", "open"):
            raise ParameterError("neighborhood", f"unknown neighborhood: {self.neighborhood}")

    def label(self) -> str:
        if self.mode == "absolute":
            return f"abs:{int(self.value)}"
        return f"rel:{self.value:g}"


def threshold_from_string(text: str, neighborhood: Neighborhood = "closed") -> ThresholdSpec:
    """Parse ``"abs:2"`` / ``"rel:0.15"`` (``absolute:`` / ``relative:`` also accepted)."""
    prefix, sep, raw = text.strip().partition(":")
    mode = _MODE_PREFIX.get(prefix.lower())
    if not sep or mode is None:
        raise ParameterError("threshold", f"expected 'abs:<T>' or 'rel:<theta>', got {text!r}")
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError("threshold", f"not a number: {raw!r}") from None
    return ThresholdSpec(mode, value, neighborhood)


@dataclass(frozen=True)
class ModelSpec:
    family: ModelFamily
    threshold: ThresholdSpec | None = None
    ltm_weights: LtmWeights = "homogeneous"
    ltm_sigma: float = DEFAULT_LTM_SIGMA
    ltm_phi: float = DEFAULT_LTM_PHI
    icm_beta: float | None = None
    noise_q: float | None = None

    def __post_init__(self) -> None:
        if self.family in ("gi", "noisy", "noisy-single") and self.threshold is None:
            raise ParameterError("threshold", f"model '{self.family}' needs a threshold")
        if self.family in ("noisy", "noisy-single"):
            _check_probability("noise_q", self.noise_q)
        elif self.family == "icm":
            _check_probability("icm_beta", self.icm_beta)
        elif self.family == "ltm":
            if not 0.0 < self.ltm_phi <= 1.0:
                raise ParameterError("ltm_phi", f"must be in (0, 1], got {self.ltm_phi}")
            if self.ltm_sigma < 0:
                raise ParameterError("ltm_sigma", f"must be >= 0, got {self.ltm_sigma}")
            if self.ltm_weights not in ("homogeneous", "gaussian"):
                raise ParameterError("ltm_weights", f"unknown weighting: {self.ltm_weights}")
        elif self.family != "gi":
            raise ParameterError("family", f"unknown model family: {self.family}")

    def with_threshold(self, threshold: ThresholdSpec) -> ModelSpec:
        return ModelSpec(
            family=self.family,
            threshold=threshold,
            ltm_weights=self.ltm_weights,
            ltm_sigma=self.ltm_sigma,
            ltm_phi=self.ltm_phi,
            icm_beta=self.icm_beta,
            noise_q=self.noise_q,
        )

    @property
    def deterministic(self) -> bool:
        return self.family == "gi" or (self.family == "ltm" and self.ltm_weights == "homogeneous")

    def label(self) -> str:
        if self.family == "gi":
            return f"gi[{self.threshold.label() if self.threshold else '-'}]"
        if self.family == "ltm":
            return f"ltm[{self.ltm_weights},phi={self.ltm_phi:g}]"
        if self.family == "icm":
            return f"icm[beta={self.icm_beta:g}]"
        return f"{self.family}[{self.threshold.label() if self.threshold else '-'},q={self.noise_q:g}]"

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "threshold": self.threshold.label() if self.threshold else None,
            "neighborhood": self.threshold.neighborhood if self.threshold else None,
            "ltm_weights": self.ltm_weights,
            "ltm_sigma": self.ltm_sigma,
            "ltm_phi": self.ltm_phi,
            "icm_beta": self.icm_beta,
            "noise_q": self.noise_q,
        }


def _check_probability(name: str, value: float | None) -> None:
    if value is None:
        raise ParameterError(name, "required for this model family")
    if not 0.0 <= value <= 1.0:
        raise ParameterError(name, f"probability must be in [0, 1], got {value}")


@dataclass
class CascadeRecord:
    """Activation times of one converged run.

    ``activation_time[i]`` is the step at which ``i`` became active (0 for
    seeds) or -1 if it never did; ``converged_at`` is the last step at which
    any node changed state.
    """

    activation_time: np.ndarray
    seed_set: SeedSet
    converged_at: int
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def active(self) -> np.ndarray:
        return self.activation_time >= 0

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.activation_time >= 0))

    def active_nodes(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.activation_time >= 0)]


def new_activation_times(g: Graph, seeds: SeedSet) -> np.ndarray:
    tau = np.full(g.node_count, -1, dtype=np.int64)
    if len(seeds):
        members = seeds.as_array()
        if members.min() < 0 or members.max() >= g.node_count:
            raise ParameterError("seeds", "seed set contains nodes outside the graph")
        tau[members] = 0
    return tau


def resolve_thresholds(g: Graph, spec: ThresholdSpec) -> np.ndarray:
    """Per-node integer thresholds ``T_i >= 1``.

    Relative thresholds use ``ceil(theta * |N[i]|)`` with the closed
    neighborhood size ``deg(i) + 1`` (or ``deg(i)`` when ``open``).
    """
    return thresholds_for_degrees(g.degrees, spec)


def thresholds_for_degrees(degrees: np.ndarray, spec: ThresholdSpec) -> np.ndarray:
    if spec.mode == "absolute":
        return np.full(degrees.shape[0], int(spec.value), dtype=np.int64)
    sizes = degrees.astype(np.int64) + (1 if spec.neighborhood == "closed" else 0)
    theta = Fraction(spec.value).limit_denominator(10**9)
    resolved = -(-(theta.numerator * sizes) // theta.denominator)
    return np.maximum(resolved, 1).astype(np.int64)


def spreading_density(rec: CascadeRecord, g: Graph) -> float:
    if g.node_count == 0:
        return 0.0
    return rec.active_count / g.node_count


class ContagionDynamics(ABC):
    """One synchronous diffusion family, run to convergence."""

    @abstractmethod
    def run(
        self,
        g: Graph,
        seeds: SeedSet,
        model: ModelSpec,
        rng: np.random.Generator,
    ) -> CascadeRecord: ...


_dynamics: dict[str, ContagionDynamics] = {}


def get_dynamics(family: str) -> ContagionDynamics:
    if family in _dynamics:
        return _dynamics[family]
    backend: ContagionDynamics
    if family == "gi":
        from contagionflow.contagion.gi import GeneralInfluenceDynamics
        backend = GeneralInfluenceDynamics()
    elif family == "ltm":
        from contagionflow.contagion.ltm import LinearThresholdDynamics
        backend = LinearThresholdDynamics()
    elif family == "icm":
        from contagionflow.contagion.icm import IndependentCascadeDynamics
        backend = IndependentCascadeDynamics()
    elif family == "noisy":
        from contagionflow.contagion.noisy import NoisyThresholdDynamics
        backend = NoisyThresholdDynamics(single_transmission=False)
    elif family == "noisy-single":
        from contagionflow.contagion.noisy import NoisyThresholdDynamics
        backend = NoisyThresholdDynamics(single_transmission=True)
    else:
        raise ParameterError("family", f"unknown model family: {family}")
    _dynamics[family] = backend
    return backend


def simulate(
    g: Graph,
    seeds: SeedSet,
    model: ModelSpec,
    rng: np.random.Generator | None = None,
) -> CascadeRecord:
    if rng is None:
        rng = np.random.default_rng(0)
    return get_dynamics(model.family).run(g, seeds, model, rng)


__all__ = [
    "CascadeRecord",
    "ContagionDynamics",
    "ModelSpec",
    "ThresholdSpec",
    "get_dynamics",
    "resolve_thresholds",
    "simulate",
    "spreading_density",
    "threshold_from_string",
]

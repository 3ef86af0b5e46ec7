from __future__ import annotations

import logging
import tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

from contagionflow._constants import LOGGER_NAME, MODEL_FAMILIES, SEED_MODES
from contagionflow.contagion import ModelSpec, ThresholdSpec, threshold_from_string
from contagionflow.exceptions import ConfigError, ContagionFlowError
from contagionflow.fixtures import load_fixture
from contagionflow.generators import clustered_power_law, two_disconnected_ws, watts_strogatz
from contagionflow.graph import Graph, giant_component, read_edge_list
from contagionflow.rng import RngSeed, derive_seed

logger = logging.getLogger(LOGGER_NAME)

GraphKind = Literal["ws", "cpl", "two-ws", "edges", "fixture"]
TieImportance = Literal["max", "sum"]

_GRAPH_KINDS = ("ws", "cpl", "two-ws", "edges", "fixture")


@dataclass
class GraphSource:
    """Where a scenario's graphs come from.

    Generated kinds produce ``count`` replicate graphs with seeds derived from
    the scenario seed; file and fixture kinds produce one graph.
    """

    kind: GraphKind
    n: int = 0
    k: int = 0
    beta: float = 0.0
    m: int = 0
    p: float = 0.0
    path: str | None = None
    fixture: str | None = None
    count: int = 1
    giant_component: bool = True

    def label(self) -> str:
        if self.kind in ("ws", "two-ws"):
            return f"{self.kind}(n={self.n},k={self.k},beta={self.beta:g})"
        if self.kind == "cpl":
            return f"cpl(n={self.n},m={self.m},p={self.p:g})"
        if self.kind == "edges":
            return f"edges({Path(self.path or '').name})"
        return f"fixture({self.fixture})"

    def build(self, seed: RngSeed, index: int) -> list[tuple[str, Graph]]:
        graphs: list[tuple[str, Graph]] = []
        if self.kind == "edges":
            if not self.path:
                raise ConfigError("graphs.path", "edge-list source needs a path")
            graphs.append((self.label(), read_edge_list(self.path)))
        elif self.kind == "fixture":
            if not self.fixture:
                raise ConfigError("graphs.fixture", "fixture source needs a name")
            graphs.append((self.label(), load_fixture(self.fixture)[0]))
        else:
            for replicate in range(self.count):
                graph_seed = derive_seed(seed, index, replicate)
                if self.kind == "ws":
                    g = watts_strogatz(self.n, self.k, self.beta, graph_seed)
                elif self.kind == "cpl":
                    g = clustered_power_law(self.n, self.m, self.p, graph_seed)
                else:
                    g = two_disconnected_ws(self.n, self.k, self.beta, graph_seed)[0]
                graphs.append((f"{self.label()}#{replicate}", g))
        if self.giant_component and self.kind not in ("two-ws", "fixture"):
            graphs = [(name, giant_component(g)) for name, g in graphs]
        return graphs


@dataclass
class ScenarioConfig:
    graphs: list[GraphSource] = field(default_factory=list)
    family: str = "gi"
    thresholds: list[ThresholdSpec] = field(
        default_factory=lambda: [ThresholdSpec("absolute", 2)]
    )
    ltm_weights: Literal["homogeneous", "gaussian"] = "homogeneous"
    ltm_sigma: float = 0.05
    ltm_phi: float = 0.5
    icm_beta: float | None = None
    noise_q: float | None = None
    seed_mode: str = "rcs"
    seed_fraction: float = 0.05
    sweeps: int = 2
    rng_seed: RngSeed = 0
    density_filter: float | None = None
    require_full_activation: bool = False
    include_silent: bool = True
    symmetry_method: Literal["pearson", "cosine"] = "pearson"
    tie_importance: TieImportance = "max"
    range_bins: int = 5
    importance_bins: int = 5
    sweep_counts: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.family not in MODEL_FAMILIES:
            raise ConfigError("family", f"unknown model family {self.family!r}")
        if self.seed_mode not in SEED_MODES:
            raise ConfigError("seed_mode", f"unknown seed mode {self.seed_mode!r}")
        if not 0.0 < self.seed_fraction <= 1.0:
            raise ConfigError("seed_fraction", f"must be in (0, 1], got {self.seed_fraction}")
        if self.sweeps < 1:
            raise ConfigError("sweeps", f"must be >= 1, got {self.sweeps}")
        if self.density_filter is not None and not 0.0 <= self.density_filter <= 1.0:
            raise ConfigError("density_filter", f"must be in [0, 1], got {self.density_filter}")
        if not self.thresholds:
            raise ConfigError("thresholds", "at least one threshold is required")
        if any(s < 1 for s in self.sweep_counts):
            raise ConfigError("sweep_counts", "sweep counts must be >= 1")

    def model_for(self, threshold: ThresholdSpec) -> ModelSpec:
        try:
            return ModelSpec(
                family=self.family,  # type: ignore[arg-type]
                threshold=threshold,
                ltm_weights=self.ltm_weights,
                ltm_sigma=self.ltm_sigma,
                ltm_phi=self.ltm_phi,
                icm_beta=self.icm_beta,
                noise_q=self.noise_q,
            )
        except ContagionFlowError as exc:
            raise ConfigError("model", str(exc)) from exc

    def build_graphs(self) -> list[tuple[str, Graph, GraphSource]]:
        """Graphs of every source, named ``<source index>:<label>`` so that
        repeated sources stay distinct."""
        built: list[tuple[str, Graph, GraphSource]] = []
        for index, source in enumerate(self.graphs):
            for name, g in source.build(self.rng_seed, index):
                built.append((f"{index}:{name}", g, source))
        logger.debug("Built %d graphs from %d sources", len(built), len(self.graphs))
        return built

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["thresholds"] = [
            {"threshold": t.label(), "neighborhood": t.neighborhood} for t in self.thresholds
        ]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        known = set(cls.__dataclass_fields__) | {"neighborhood"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        values = dict(data)
        neighborhood = values.pop("neighborhood", "closed")
        try:
            if "thresholds" in values:
                values["thresholds"] = [
                    _threshold_value(t, neighborhood) for t in values["thresholds"]
                ]
            if "graphs" in values:
                values["graphs"] = [
                    src for entry in values["graphs"] for src in _graph_sources(entry)
                ]
        except ContagionFlowError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("thresholds", str(exc)) from exc
        return cls(**values)


def _threshold_value(value: Any, neighborhood: str) -> ThresholdSpec:
    if isinstance(value, ThresholdSpec):
        return value
    if isinstance(value, dict):
        return threshold_from_string(value["threshold"], value.get("neighborhood", neighborhood))
    return threshold_from_string(str(value), neighborhood)  # type: ignore[arg-type]


def _graph_sources(entry: dict[str, Any]) -> list[GraphSource]:
    """One source per value when ``beta`` or ``p`` is given as a list."""
    kind = entry.get("kind")
    if kind not in _GRAPH_KINDS:
        raise ConfigError("graphs.kind", f"unknown graph kind {kind!r}")
    fields = set(GraphSource.__dataclass_fields__)
    unknown = sorted(set(entry) - fields)
    if unknown:
        raise ConfigError(f"graphs.{unknown[0]}", "unknown graph source key")
    for key in ("beta", "p"):
        value = entry.get(key)
        if isinstance(value, list):
            return [
                src
                for v in value
                for src in _graph_sources({**entry, key: v})
            ]
    return [GraphSource(**entry)]


def load_config(path: Path | str) -> ScenarioConfig:
    """Read a TOML scenario file."""
    target = Path(path)
    try:
        with target.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"no such file: {target}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"{target}: {exc}") from exc
    config = ScenarioConfig.from_dict(data)
    logger.debug("Loaded scenario config from %s", target)
    return config

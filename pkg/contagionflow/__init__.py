from contagionflow.bridges import (
    BridgeCount,
    BridgeTrialResult,
    bridge_formation_trial,
    can_spread,
    count_bridge_pairs,
    enumerate_bridge_pairs_oracle,
    incidence_tail_estimate,
    predicted_ratio,
    run_bridge_trials,
)
from contagionflow.causal import (
    CausalScores,
    CausalSubgraph,
    accumulate,
    aggregate_sweeps,
    causal_subgraph,
    causal_tree,
)
from contagionflow.contagion import (
    CascadeRecord,
    ModelSpec,
    ThresholdSpec,
    get_dynamics,
    resolve_thresholds,
    simulate,
    spreading_density,
    threshold_from_string,
)
from contagionflow.event_log import EventLog, SimulationEvent
from contagionflow.exceptions import (
    AnalysisError,
    ConfigError,
    ContagionFlowError,
    EdgeListParseError,
    EdgeListReadError,
    EnumerationRefusedError,
    ExperimentError,
    GraphArgumentError,
    ParameterError,
)
from contagionflow.generators import clustered_power_law, two_disconnected_ws, watts_strogatz
from contagionflow.graph import Graph, load_edge_list, read_edge_list, tie_range, to_edge_list
from contagionflow.metrics import flow_alignment, flow_symmetry, pearson
from contagionflow.runtime import BatchResult, Runtime, SimulationTask, run_batch
from contagionflow.scenario import GraphSource, ScenarioConfig, load_config
from contagionflow.seeding import SeedSet, random_clustered_seed_set, random_seed_set

__all__ = [
    "AnalysisError",
    "BatchResult",
    "BridgeCount",
    "BridgeTrialResult",
    "CascadeRecord",
    "CausalScores",
    "CausalSubgraph",
    "ConfigError",
    "ContagionFlowError",
    "EdgeListParseError",
    "EdgeListReadError",
    "EnumerationRefusedError",
    "EventLog",
    "ExperimentError",
    "Graph",
    "GraphArgumentError",
    "GraphSource",
    "ModelSpec",
    "ParameterError",
    "Runtime",
    "ScenarioConfig",
    "SeedSet",
    "SimulationEvent",
    "SimulationTask",
    "ThresholdSpec",
    "accumulate",
    "aggregate_sweeps",
    "bridge_formation_trial",
    "can_spread",
    "causal_subgraph",
    "causal_tree",
    "clustered_power_law",
    "count_bridge_pairs",
    "enumerate_bridge_pairs_oracle",
    "flow_alignment",
    "flow_symmetry",
    "get_dynamics",
    "incidence_tail_estimate",
    "load_config",
    "load_edge_list",
    "pearson",
    "predicted_ratio",
    "random_clustered_seed_set",
    "random_seed_set",
    "read_edge_list",
    "resolve_thresholds",
    "run_batch",
    "run_bridge_trials",
    "simulate",
    "spreading_density",
    "threshold_from_string",
    "tie_range",
    "to_edge_list",
    "two_disconnected_ws",
    "watts_strogatz",
]

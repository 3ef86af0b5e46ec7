from __future__ import annotations

from pathlib import Path

import pytest

from contagionflow.contagion import ThresholdSpec
from contagionflow.exceptions import ConfigError
from contagionflow.scenario import GraphSource, ScenarioConfig, load_config

SWEEP_TOML = """
family = "gi"
thresholds = ["abs:1", "abs:2", "rel:0.2"]
seed_mode = "rs"
seed_fraction = 0.1
sweeps = 3
rng_seed = 42
density_filter = 0.1

[[graphs]]
kind = "ws"
n = 40
k = 4
beta = [0.0, 0.1, 0.5]
count = 2
"""


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "scenario.toml"
    path.write_text(text, encoding="utf-8")
    return path


# --- Loading ---


class TestLoadConfig:
    def test_sweep_file(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, SWEEP_TOML))
        assert config.family == "gi"
        assert config.seed_mode == "rs"
        assert config.sweeps == 3
        assert config.density_filter == 0.1
        assert config.thresholds == [
            ThresholdSpec("absolute", 1),
            ThresholdSpec("absolute", 2),
            ThresholdSpec("relative", 0.2),
        ]
        assert [src.beta for src in config.graphs] == [0.0, 0.1, 0.5]

    def test_neighborhood_applies_to_thresholds(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, 'thresholds = ["rel:0.3"]\nneighborhood = "open"\n'))
        assert config.thresholds[0].neighborhood == "open"

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="no such file"):
            load_config(tmp_path / "absent.toml")

    def test_bad_toml(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match=r"\[config\]"):
            load_config(_write(tmp_path, "family = \n"))

    def test_unknown_key(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="unknown configuration key"):
            load_config(_write(tmp_path, "colour = 'red'\n"))

    def test_unknown_graph_kind(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="graphs.kind"):
            load_config(_write(tmp_path, "[[graphs]]\nkind = 'lattice'\n"))

    def test_bad_threshold(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match=r"\[thresholds\]"):
            load_config(_write(tmp_path, 'thresholds = ["abs:0"]\n'))


# --- Validation ---


class TestScenarioConfig:
    def test_defaults(self) -> None:
        config = ScenarioConfig()
        assert config.thresholds == [ThresholdSpec("absolute", 2)]
        assert config.include_silent is True
        assert config.tie_importance == "max"

    @pytest.mark.parametrize(
        ("key", "value"),
        [
            ("family", "sir"),
            ("seed_mode", "hubs"),
            ("seed_fraction", 0.0),
            ("sweeps", 0),
            ("density_filter", 1.5),
            ("thresholds", []),
            ("sweep_counts", [0, 2]),
        ],
    )
    def test_rejects(self, key: str, value: object) -> None:
        with pytest.raises(ConfigError, match=key):
            ScenarioConfig(**{key: value})  # type: ignore[arg-type]

    def test_model_for(self) -> None:
        config = ScenarioConfig(family="noisy", noise_q=0.2)
        model = config.model_for(ThresholdSpec("absolute", 2))
        assert model.family == "noisy"
        assert model.noise_q == 0.2

    def test_model_errors_become_config_errors(self) -> None:
        config = ScenarioConfig(family="icm")
        with pytest.raises(ConfigError, match=r"\[model\]"):
            config.model_for(ThresholdSpec("absolute", 2))

    def test_to_dict_labels_thresholds(self) -> None:
        data = ScenarioConfig(thresholds=[ThresholdSpec("relative", 0.15)]).to_dict()
        assert data["thresholds"] == [{"threshold": "rel:0.15", "neighborhood": "closed"}]


# --- Graph sources ---


class TestGraphSources:
    def test_replicates_are_distinct_and_reproducible(self) -> None:
        config = ScenarioConfig(graphs=[GraphSource("ws", n=30, k=4, beta=0.3, count=2)], rng_seed=5)
        first = config.build_graphs()
        second = config.build_graphs()
        assert [name for name, _, _ in first] == ["0:ws(n=30,k=4,beta=0.3)#0", "0:ws(n=30,k=4,beta=0.3)#1"]
        assert first[0][1].edges != first[1][1].edges
        assert [g.edges for _, g, _ in first] == [g.edges for _, g, _ in second]

    def test_fixture_source(self) -> None:
        source = GraphSource("fixture", fixture="asymmetric_bridge")
        [(name, g)] = source.build(0, 0)
        assert name == "fixture(asymmetric_bridge)"
        assert g.node_count > 0

    def test_edges_source(self, tmp_path: Path) -> None:
        path = tmp_path / "tri.edges"
        path.write_text("a b\nb c\nc a\nx y\n", encoding="utf-8")
        [(name, g)] = GraphSource("edges", path=str(path)).build(0, 0)
        assert name == "edges(tri.edges)"
        # giant component only
        assert g.node_count == 3

    def test_missing_path(self) -> None:
        with pytest.raises(ConfigError, match="graphs.path"):
            GraphSource("edges").build(0, 0)

    def test_two_ws_keeps_both_communities(self) -> None:
        [(_, g)] = GraphSource("two-ws", n=20, k=4, beta=0.1).build(1, 0)
        assert g.node_count == 40

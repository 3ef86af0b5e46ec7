from __future__ import annotations

import pytest

from contagionflow.fixtures import load_fixture
from contagionflow.generators import watts_strogatz
from contagionflow.graph import Graph


@pytest.fixture
def path3() -> Graph:
    """a - b - c as nodes 0 - 1 - 2."""
    return Graph(3, [(0, 1), (1, 2)], names=["a", "b", "c"])


@pytest.fixture
def triangle() -> Graph:
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def symmetric_bridge() -> tuple[Graph, tuple[str, ...]]:
    return load_fixture("symmetric_bridge")


@pytest.fixture
def asymmetric_bridge() -> tuple[Graph, tuple[str, ...]]:
    return load_fixture("asymmetric_bridge")


@pytest.fixture
def small_ws() -> Graph:
    return watts_strogatz(30, 4, 0.1, 7)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("CONTAGIONFLOW_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("CONTAGIONFLOW_WORKERS", raising=False)

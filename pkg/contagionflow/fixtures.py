from __future__ import annotations

from importlib import resources

from contagionflow.exceptions import ParameterError
from contagionflow.graph import Graph, load_edge_list

FIXTURES = ("symmetric_bridge", "asymmetric_bridge")


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise ParameterError("fixture", f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return (
        resources.files("contagionflow")
        .joinpath("data", f"{name}.edges")
        .read_text(encoding="utf-8")
    )


def load_fixture(name: str) -> tuple[Graph, tuple[str, ...]]:
    """Bundled two-community graph with ``A``/``B`` labels (red nodes ``r*``
    are ``A``, green nodes ``g*`` are ``B``)."""
    g = load_edge_list(fixture_text(name))
    labels = tuple("A" if g.name_of(i).startswith("r") else "B" for i in range(g.node_count))
    return g, labels

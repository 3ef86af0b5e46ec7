from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from scipy import stats

from contagionflow._constants import LOGGER_NAME
from contagionflow.causal import CausalScores
from contagionflow.exceptions import GraphArgumentError
from contagionflow.graph import Graph

logger = logging.getLogger(LOGGER_NAME)

SymmetryMethod = Literal["pearson", "cosine"]

Values = Sequence[float] | np.ndarray


def _pair(x: Values, y: Values) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape:
        raise GraphArgumentError(
            f"sequences differ in length: {xa.shape[0]} vs {ya.shape[0]}"
        )
    return xa, ya


def _defined(xa: np.ndarray, ya: np.ndarray) -> bool:
    return xa.size >= 2 and np.ptp(xa) > 0 and np.ptp(ya) > 0


def pearson(x: Values, y: Values) -> float | None:
    """Sample Pearson coefficient, or ``None`` when fewer than two points or
    either side is constant."""
    xa, ya = _pair(x, y)
    if not _defined(xa, ya):
        return None
    r = float(stats.pearsonr(xa, ya).statistic)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationTest:
    r: float | None
    p_value: float | None
    n: int

    @property
    def defined(self) -> bool:
        return self.r is not None

    def to_dict(self) -> dict[str, Any]:
        return {"r": self.r, "p_value": self.p_value, "n": self.n}


def correlation_test(x: Values, y: Values) -> CorrelationTest:
    """Pearson r with its two-sided p-value; pooled statistics always carry n."""
    xa, ya = _pair(x, y)
    if not _defined(xa, ya):
        return CorrelationTest(r=None, p_value=None, n=int(xa.size))
    result = stats.pearsonr(xa, ya)
    r = max(-1.0, min(1.0, float(result.statistic)))
    p = float(result.pvalue) if xa.size > 2 else None
    return CorrelationTest(r=r, p_value=p, n=int(xa.size))


def cosine_similarity(x: Values, y: Values) -> float | None:
    xa, ya = _pair(x, y)
    nx_, ny_ = float(np.linalg.norm(xa)), float(np.linalg.norm(ya))
    if nx_ == 0.0 or ny_ == 0.0:
        return None
    return max(-1.0, min(1.0, float(xa @ ya) / (nx_ * ny_)))


def mean_and_stderr(values: Values) -> tuple[float, float]:
    """Mean and standard error (``ddof=1``); ``nan`` for an empty sample and
    a zero error for a single value."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(stats.sem(arr))


# --- Flow summaries ---


@dataclass(frozen=True)
class SymmetryReport:
    xi_s: float | None
    n_edges: int
    defined: bool
    method: SymmetryMethod = "pearson"

    def to_dict(self) -> dict[str, Any]:
        return {
            "xi_s": self.xi_s,
            "n_edges": self.n_edges,
            "defined": self.defined,
            "method": self.method,
        }


def flow_symmetry(
    scores: CausalScores,
    g: Graph,
    *,
    include_silent: bool = True,
    method: SymmetryMethod = "pearson",
) -> SymmetryReport:
    """Correlation of ``TI(i, j)`` against ``TI(j, i)`` over canonical edges.

    Edges never traversed in either direction enter as ``(0, 0)`` pairs unless
    ``include_silent`` is off.
    """
    if scores.ti_raw.shape[0] != 2 * g.edge_count:
        raise GraphArgumentError("causal scores do not belong to this graph")
    forward, reverse = scores.forward_reverse()
    if not include_silent:
        keep = (forward > 0) | (reverse > 0)
        forward, reverse = forward[keep], reverse[keep]
    n_edges = int(forward.shape[0])
    if method == "cosine":
        xi = cosine_similarity(forward, reverse) if n_edges >= 2 else None
    else:
        xi = pearson(forward, reverse)
    if xi is None:
        logger.debug("Flow symmetry undefined over %d edges", n_edges)
    return SymmetryReport(xi_s=xi, n_edges=n_edges, defined=xi is not None, method=method)


@dataclass(frozen=True)
class FlowAlignment:
    rho_ds_dk: float | None
    rho_ni_k: float | None
    rho_nik_k: float | None
    n_edges: int
    n_nodes: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "rho_ds_dk": self.rho_ds_dk,
            "rho_ni_k": self.rho_ni_k,
            "rho_nik_k": self.rho_nik_k,
            "n_edges": self.n_edges,
            "n_nodes": self.n_nodes,
        }


def flow_alignment(scores: CausalScores, g: Graph) -> FlowAlignment:
    """Degree alignment of causal flow.

    For each canonical edge ``i < j``, ``dS = TI(i, j) - TI(j, i)`` is paired
    with ``dk = k(j) - k(i)``; positive correlation means flow runs toward
    higher-degree nodes. Node correlations use ``NI`` and ``NI / k`` against
    degree, the latter over nodes with ``k > 0``.
    """
    if scores.ni_raw.shape[0] != g.node_count:
        raise GraphArgumentError("causal scores do not belong to this graph")
    forward, reverse = scores.forward_reverse()
    degrees = g.degrees
    if g.edge_count:
        edges = np.asarray(g.edges, dtype=np.int64)
        delta_s = forward - reverse
        delta_k = degrees[edges[:, 1]] - degrees[edges[:, 0]]
        rho_ds_dk = pearson(delta_s, delta_k)
    else:
        rho_ds_dk = None
    ni = scores.ni_raw.astype(np.float64)
    connected = degrees > 0
    return FlowAlignment(
        rho_ds_dk=rho_ds_dk,
        rho_ni_k=pearson(ni, degrees),
        rho_nik_k=pearson(ni[connected] / degrees[connected], degrees[connected]),
        n_edges=g.edge_count,
        n_nodes=g.node_count,
    )

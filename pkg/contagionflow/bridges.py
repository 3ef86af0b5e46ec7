from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

import numpy as np
from scipy import stats
from scipy.special import comb

from contagionflow._constants import DEFAULT_BRIDGE_THRESHOLD, LOGGER_NAME
from contagionflow.contagion import ThresholdSpec, resolve_thresholds
from contagionflow.contagion.gi import run_gi
from contagionflow.exceptions import AnalysisError, EnumerationRefusedError, ParameterError
from contagionflow.generators import two_disconnected_ws
from contagionflow.graph import Graph
from contagionflow.rng import RngSeed, derive_seed, make_rng
from contagionflow.runtime import SimulationTask, run_batch
from contagionflow.seeding import SeedSet

logger = logging.getLogger(LOGGER_NAME)

Direction = Literal["a_to_b", "b_to_a"]
BridgeLabel = Literal["none", "a_to_b", "b_to_a", "symmetric"]
ClosureRule = Literal["any", "both"]

DEFAULT_MAX_TIES = 300
DEFAULT_ORACLE_LIMIT = 5_000_000


# --- Spreadability ---


def can_spread(
    g: Graph,
    labels: Sequence[str],
    direction: Direction,
    threshold: ThresholdSpec,
) -> bool:
    """Seed the whole source community and report whether any node of the
    other community activates."""
    if len(labels) != g.node_count:
        raise ParameterError("labels", f"{len(labels)} labels for {g.node_count} nodes")
    source_label, target_label = ("A", "B") if direction == "a_to_b" else ("B", "A")
    source = frozenset(i for i, lab in enumerate(labels) if lab == source_label)
    seeds = SeedSet(source, len(source) / max(g.node_count, 1))
    rec = run_gi(g, seeds, resolve_thresholds(g, threshold))
    return any(rec.activation_time[i] > 0 for i, lab in enumerate(labels) if lab == target_label)


def _spreads(
    adjacency: np.ndarray,
    source: np.ndarray,
    target: np.ndarray,
    thresholds: np.ndarray,
) -> bool:
    # GI on a dense adjacency, stopping as soon as a target node activates
    active = source.copy()
    exposure = adjacency @ active.astype(np.int64)
    while True:
        newly = ~active & (exposure >= thresholds)
        if not newly.any():
            return False
        if (newly & target).any():
            return True
        active |= newly
        exposure += adjacency @ newly.astype(np.int64)


def _label(a_to_b: bool, b_to_a: bool) -> BridgeLabel:
    if a_to_b and b_to_a:
        return "symmetric"
    if a_to_b:
        return "a_to_b"
    if b_to_a:
        return "b_to_a"
    return "none"


# --- Bridge formation ---


@dataclass(frozen=True)
class CrossTie:
    a: int
    b: int
    closure: bool


@dataclass
class BridgeTrialResult:
    """One bridge-formation run. ``labels[k - 1]`` classifies the graph after
    ``k`` cross ties were added."""

    ties_added: list[CrossTie] = field(default_factory=list)
    labels: list[BridgeLabel] = field(default_factory=list)
    first_spread_at: int | None = None

    @property
    def first_spread_label(self) -> BridgeLabel:
        if self.first_spread_at is None:
            return "none"
        return self.labels[self.first_spread_at - 1]

    def label_at(self, ties: int) -> BridgeLabel:
        return self.labels[ties - 1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "first_spread_at": self.first_spread_at,
            "first_spread_label": self.first_spread_label,
            "ties": len(self.ties_added),
            "closure_ties": sum(t.closure for t in self.ties_added),
        }


def bridge_formation_trial(
    n: int,
    k: int,
    beta: float,
    t: int = DEFAULT_BRIDGE_THRESHOLD,
    c: float = 0.0,
    max_ties: int = DEFAULT_MAX_TIES,
    rng: np.random.Generator | RngSeed = 0,
    *,
    closure_rule: ClosureRule = "any",
    verify_monotone: bool = True,
) -> BridgeTrialResult:
    """Add cross ties one at a time between two disconnected WS communities.

    With probability ``c`` the tie closes a triangle: a uniform untied cross
    pair with a common neighbor (``closure_rule="any"``) or with common
    neighbors on both sides (``"both"``). Otherwise, or when no such pair
    exists, a uniform untied cross pair is added. After every tie both
    directions are tested for spreading at threshold ``t``. With
    ``verify_monotone`` a direction that already spreads is re-tested after
    every tie and losing it raises ``AnalysisError``; without it the test is
    skipped once the direction spreads.
    """
    if not 0.0 <= c <= 1.0:
        raise ParameterError("c", f"closure probability must be in [0, 1], got {c}")
    if max_ties < 1 or max_ties > n * n:
        raise ParameterError("max_ties", f"must be in [1, {n * n}], got {max_ties}")
    if t < 1:
        raise ParameterError("t", f"threshold must be >= 1, got {t}")
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(rng)

    g, _ = two_disconnected_ws(n, k, beta, int(rng.integers(2**62)))
    size = 2 * n
    adjacency = np.zeros((size, size), dtype=np.int64)
    for i, j in g.edges:
        adjacency[i, j] = adjacency[j, i] = 1
    in_a = np.arange(size) < n
    in_b = ~in_a
    thresholds = np.full(size, t, dtype=np.int64)

    tied = np.zeros((n, n), dtype=bool)
    # common neighbors of cross pair (a, b) inside A and inside B
    common_a = np.zeros((n, n), dtype=np.int64)
    common_b = np.zeros((n, n), dtype=np.int64)

    result = BridgeTrialResult()
    a_to_b = b_to_a = False
    for _ in range(max_ties):
        closure = False
        pair: tuple[int, int] | None = None
        if c > 0 and rng.random() < c:
            if closure_rule == "both":
                mask = (common_a > 0) & (common_b > 0) & ~tied
            else:
                mask = ((common_a + common_b) > 0) & ~tied
            candidates = np.flatnonzero(mask)
            if candidates.size:
                pick = int(candidates[int(rng.integers(candidates.size))])
                pair = divmod(pick, n)
                closure = True
        if pair is None:
            while True:
                a, b = int(rng.integers(n)), int(rng.integers(n))
                if not tied[a, b]:
                    pair = (a, b)
                    break

        a, b = pair
        tied[a, b] = True
        a_nbrs = np.flatnonzero(adjacency[a, :n])
        b_nbrs = np.flatnonzero(adjacency[n + b, n:])
        common_a[a_nbrs, b] += 1
        common_b[a, b_nbrs] += 1
        adjacency[a, n + b] = adjacency[n + b, a] = 1
        result.ties_added.append(CrossTie(a, b, closure))

        if not a_to_b or verify_monotone:
            now = _spreads(adjacency, in_a, in_b, thresholds)
            if a_to_b and not now:
                raise AnalysisError("bridge_formation", "A->B spreading was lost after adding a tie")
            a_to_b = now
        if not b_to_a or verify_monotone:
            now = _spreads(adjacency, in_b, in_a, thresholds)
            if b_to_a and not now:
                raise AnalysisError("bridge_formation", "B->A spreading was lost after adding a tie")
            b_to_a = now
        label = _label(a_to_b, b_to_a)
        result.labels.append(label)
        if result.first_spread_at is None and label != "none":
            result.first_spread_at = len(result.labels)

    logger.debug(
        "Bridge trial c=%.2f t=%d: first spread at %s (%s)",
        c,
        t,
        result.first_spread_at,
        result.first_spread_label,
    )
    return result


@dataclass(frozen=True)
class CurvePoint:
    ties: int
    spreadable: int
    symmetric: int

    @property
    def probability(self) -> float | None:
        if self.spreadable == 0:
            return None
        return self.symmetric / self.spreadable

    def to_dict(self) -> dict[str, Any]:
        return {
            "ties": self.ties,
            "spreadable": self.spreadable,
            "symmetric": self.symmetric,
            "probability": self.probability,
        }


def symmetric_probability_curve(trials: Sequence[BridgeTrialResult]) -> list[CurvePoint]:
    """P(symmetric | spreading possible) after each tie count."""
    if not trials:
        return []
    horizon = min(len(tr.labels) for tr in trials)
    points: list[CurvePoint] = []
    for ties in range(1, horizon + 1):
        labels = [tr.labels[ties - 1] for tr in trials]
        spreadable = sum(lab != "none" for lab in labels)
        symmetric = sum(lab == "symmetric" for lab in labels)
        points.append(CurvePoint(ties=ties, spreadable=spreadable, symmetric=symmetric))
    return points


def first_spread_counts(trials: Sequence[BridgeTrialResult]) -> dict[str, int]:
    counts = {"symmetric": 0, "asymmetric": 0, "none": 0}
    for tr in trials:
        label = tr.first_spread_label
        if label == "symmetric":
            counts["symmetric"] += 1
        elif label == "none":
            counts["none"] += 1
        else:
            counts["asymmetric"] += 1
    return counts


def crossing_point(curve: Sequence[CurvePoint], level: float = 0.5) -> int | None:
    """First tie count whose symmetric probability exceeds ``level``."""
    for point in curve:
        prob = point.probability
        if prob is not None and prob > level:
            return point.ties
    return None


def isotonic_violation_rate(curve: Sequence[CurvePoint], *, z: float = 2.0) -> float | None:
    """Share of adjacent defined points where the symmetric probability drops
    by more than ``z`` binomial standard errors of the later point.

    ``None`` when fewer than two points are defined.
    """
    defined = [p for p in curve if p.probability is not None]
    if len(defined) < 2:
        return None
    violations = 0
    for before, after in itertools.pairwise(defined):
        p_before = before.probability or 0.0
        p_after = after.probability or 0.0
        tolerance = z * math.sqrt(p_after * (1.0 - p_after) / after.spreadable)
        if p_after < p_before - tolerance:
            violations += 1
    return violations / (len(defined) - 1)


# --- Minimal bridge combinatorics ---


@dataclass(frozen=True)
class BridgeCount:
    n_a: int
    n_b: int
    t: int
    sym: int
    asym: int

    @property
    def total(self) -> int:
        return self.sym + self.asym

    @property
    def ratio(self) -> Fraction | None:
        """``sym / asym``, ``None`` when no asymmetric pair exists."""
        if self.asym == 0:
            return None
        return Fraction(self.sym, self.asym)

    def to_dict(self) -> dict[str, Any]:
        ratio = self.ratio
        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "t": self.t,
            "sym": self.sym,
            "asym": self.asym,
            "ratio": None if ratio is None else str(ratio),
            "ratio_defined": ratio is not None,
        }


def _check_counts(n_a: int, n_b: int, t: int) -> None:
    if t < 1:
        raise ParameterError("t", f"threshold must be >= 1, got {t}")
    if n_a < t or n_b < t:
        raise ParameterError("n", f"community sizes ({n_a}, {n_b}) must be >= t={t}")


def count_bridge_pairs(n_a: int, n_b: int, t: int) -> BridgeCount:
    """Closed-form counts of ordered (A->B, B->A) minimal bridge pairs that
    share one edge (symmetric) or none (asymmetric)."""
    _check_counts(n_a, n_b, t)
    sym = n_a * n_b * int(comb(n_a - 1, t - 1, exact=True)) * int(comb(n_b - 1, t - 1, exact=True))
    total = n_a * n_b * int(comb(n_a, t, exact=True)) * int(comb(n_b, t, exact=True))
    return BridgeCount(n_a=n_a, n_b=n_b, t=t, sym=sym, asym=total - sym)


def predicted_ratio(n_a: int, n_b: int, t: int) -> Fraction | None:
    """``t^2 / (n_a n_b - t^2)``, ``None`` when the denominator is not positive."""
    denominator = n_a * n_b - t * t
    if denominator <= 0:
        return None
    return Fraction(t * t, denominator)


@dataclass(frozen=True)
class BridgePair:
    """A minimal A->B bridge and a minimal B->A bridge, as sets of cross
    edges ``(a, b)``."""

    a_to_b: frozenset[tuple[int, int]]
    b_to_a: frozenset[tuple[int, int]]

    @property
    def overlap(self) -> int:
        return len(self.a_to_b & self.b_to_a)


def minimal_bridge_union_size(pair: BridgePair) -> int:
    return len(pair.a_to_b | pair.b_to_a)


def iter_bridge_pairs(n_a: int, n_b: int, t: int) -> Iterator[BridgePair]:
    """Every ordered pair of minimal bridges: an A->B bridge is ``t`` A-sources
    tied to one B-target, and the reverse likewise."""
    _check_counts(n_a, n_b, t)
    forward = [
        frozenset((a, b) for a in sources)
        for b in range(n_b)
        for sources in itertools.combinations(range(n_a), t)
    ]
    backward = [
        frozenset((a, b) for b in sources)
        for a in range(n_a)
        for sources in itertools.combinations(range(n_b), t)
    ]
    for f, r in itertools.product(forward, backward):
        yield BridgePair(a_to_b=f, b_to_a=r)


def enumerate_bridge_pairs_oracle(
    n_a: int, n_b: int, t: int, limit: int = DEFAULT_ORACLE_LIMIT
) -> BridgeCount:
    """Brute-force counterpart of ``count_bridge_pairs``."""
    _check_counts(n_a, n_b, t)
    size = n_b * int(comb(n_a, t, exact=True)) * n_a * int(comb(n_b, t, exact=True))
    if size > limit:
        raise EnumerationRefusedError(size, limit)
    sym = asym = 0
    for pair in iter_bridge_pairs(n_a, n_b, t):
        overlap = pair.overlap
        if overlap == 0:
            asym += 1
        elif overlap == 1:
            sym += 1
        else:
            raise AnalysisError("bridge_oracle", f"minimal bridges overlap on {overlap} edges")
    return BridgeCount(n_a=n_a, n_b=n_b, t=t, sym=sym, asym=asym)


# --- Random incidence ---


@dataclass(frozen=True)
class TailEstimate:
    n: int
    t: int
    trials: int
    hits: int

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def bound(self) -> float:
        return incidence_tail_bound(self.n, self.t)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "t": self.t,
            "trials": self.trials,
            "estimate": self.estimate,
            "bound": self.bound,
            "union_bound": incidence_union_bound(self.n, self.t),
        }


def incidence_tail_bound(n: int, t: int) -> float:
    """``2N (T + 1) (4 / N)^T``."""
    return 2 * n * (t + 1) * (4 / n) ** t


def incidence_union_bound(n: int, t: int) -> float:
    """``2N P[Binomial(2T, 1/N) >= T]``, the union bound before the tail is
    loosened."""
    return float(2 * n * stats.binom.sf(t - 1, 2 * t, 1 / n))


def _has_run(endpoints: np.ndarray, t: int) -> np.ndarray:
    ordered = np.sort(endpoints, axis=1)
    width = ordered.shape[1]
    hit = np.zeros(ordered.shape[0], dtype=bool)
    for start in range(width - t + 1):
        hit |= ordered[:, start] == ordered[:, start + t - 1]
    return hit


def incidence_tail_estimate(
    n: int,
    t: int,
    trials: int,
    rng: np.random.Generator | RngSeed = 0,
    *,
    chunk: int = 50_000,
) -> TailEstimate:
    """Monte Carlo probability that, among ``2t`` uniform cross ties between
    two communities of size ``n``, some vertex carries at least ``t``."""
    if n < 1 or t < 1:
        raise ParameterError("n", f"need n >= 1 and t >= 1, got n={n}, t={t}")
    if trials < 1:
        raise ParameterError("trials", f"must be >= 1, got {trials}")
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(rng)
    hits = 0
    remaining = trials
    while remaining:
        batch = min(chunk, remaining)
        a_ends = rng.integers(n, size=(batch, 2 * t))
        b_ends = rng.integers(n, size=(batch, 2 * t))
        hits += int(np.count_nonzero(_has_run(a_ends, t) | _has_run(b_ends, t)))
        remaining -= batch
    return TailEstimate(n=n, t=t, trials=trials, hits=hits)


@dataclass(frozen=True)
class DirectionalOdds:
    p_sym: float
    p_asym: float
    ratio: float | None


def asymmetric_probability_ratio(p_n: float) -> DirectionalOdds:
    """Symmetric vs. asymmetric bridge odds when each direction independently
    gets a minimal bridge with probability ``p_n``."""
    if not 0.0 <= p_n <= 1.0:
        raise ParameterError("p_n", f"probability must be in [0, 1], got {p_n}")
    p_sym = p_n * p_n
    p_asym = 2 * p_n * (1 - p_n)
    ratio = None if p_asym == 0 else p_sym / p_asym
    return DirectionalOdds(p_sym=p_sym, p_asym=p_asym, ratio=ratio)


# --- Batches ---


def run_bridge_trials(
    n: int,
    k: int,
    beta: float,
    t: int,
    closure_probabilities: Sequence[float],
    trials: int,
    max_ties: int,
    seed: RngSeed,
    *,
    closure_rule: ClosureRule = "any",
    verify_monotone: bool = True,
    workers: int = 1,
) -> dict[float, list[BridgeTrialResult]]:
    """Independent trials per closure probability; trial ``j`` at the ``i``-th
    probability draws from stream ``(i, j)`` under ``seed``."""
    if trials < 1:
        raise ParameterError("trials", f"must be >= 1, got {trials}")
    tasks = [
        SimulationTask(
            scenario=f"bridge(c={c:g})#{j}",
            fn=_trial_task,
            args=(n, k, beta, t, c, max_ties, derive_seed(seed, i, j), closure_rule, verify_monotone),
        )
        for i, c in enumerate(closure_probabilities)
        for j in range(trials)
    ]
    results = iter(run_batch(tasks, workers=workers).results)
    return {c: [next(results) for _ in range(trials)] for c in closure_probabilities}


def _trial_task(
    n: int,
    k: int,
    beta: float,
    t: int,
    c: float,
    max_ties: int,
    seed: RngSeed,
    closure_rule: ClosureRule,
    verify_monotone: bool,
) -> BridgeTrialResult:
    return bridge_formation_trial(
        n,
        k,
        beta,
        t,
        c,
        max_ties,
        seed,
        closure_rule=closure_rule,
        verify_monotone=verify_monotone,
    )

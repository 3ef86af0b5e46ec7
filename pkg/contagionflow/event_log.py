from __future__ import annotations

import time
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any, Literal

EventType = Literal[
    "batch_start",
    "scenario_start",
    "scenario_done",
    "task_failed",
    "filtered",
    "batch_done",
]

_DETAIL_WIDTH = 120


@dataclass
class SimulationEvent:
    event_type: EventType
    scenario: str
    task_index: int | None = None
    timestamp: float = field(default_factory=time.perf_counter)
    details: dict[str, Any] = field(default_factory=dict)


class EventLog:
    """Batch events recorded in debug mode. Timestamps are monotonic, so only
    differences between them are meaningful."""

    def __init__(self) -> None:
        self._events: list[SimulationEvent] = []

    def record(self, event: SimulationEvent) -> None:
        self._events.append(event)

    @property
    def events(self) -> list[SimulationEvent]:
        return list(self._events)

    def __iter__(self) -> Iterator[SimulationEvent]:
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def filter(
        self,
        scenario: str | None = None,
        event_type: EventType | None = None,
    ) -> list[SimulationEvent]:
        return [
            e
            for e in self._events
            if (scenario is None or e.scenario == scenario)
            and (event_type is None or e.event_type == event_type)
        ]

    def failures(self) -> list[SimulationEvent]:
        return self.filter(event_type="task_failed")

    def filtered_reasons(self) -> dict[str, list[str]]:
        """Scenario name to the reasons it was left out of a pooled statistic."""
        reasons: dict[str, list[str]] = {}
        for e in self.filter(event_type="filtered"):
            reasons.setdefault(e.scenario, []).append(str(e.details.get("reason", "")))
        return reasons

    def durations(self) -> dict[int, float]:
        """Seconds between ``scenario_start`` and ``scenario_done`` per task index."""
        started: dict[int, float] = {}
        spans: dict[int, float] = {}
        for e in self._events:
            if e.task_index is None:
                continue
            if e.event_type == "scenario_start":
                started[e.task_index] = e.timestamp
            elif e.event_type == "scenario_done" and e.task_index in started:
                spans[e.task_index] = e.timestamp - started[e.task_index]
        return spans

    def format(self) -> str:
        if not self._events:
            return ""
        origin = self._events[0].timestamp
        lines: list[str] = []
        for e in self._events:
            idx = "-" if e.task_index is None else str(e.task_index)
            lines.append(
                f"+{e.timestamp - origin:9.3f}s [{e.scenario}] {e.event_type} task={idx}"
            )
            for k, v in e.details.items():
                val = str(v)
                if len(val) > _DETAIL_WIDTH:
                    val = val[:_DETAIL_WIDTH] + "..."
                lines.append(f"{'':12s}{k}={val}")
        return "\n".join(lines)

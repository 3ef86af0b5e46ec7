from __future__ import annotations

import asyncio
import logging
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from contagionflow._constants import LOGGER_NAME, WORKERS_ENV
from contagionflow.event_log import EventLog, SimulationEvent
from contagionflow.exceptions import ConfigError, ExperimentError

logger = logging.getLogger(LOGGER_NAME)


@dataclass
class SimulationTask:
    """One unit of batch work. ``fn`` and ``args`` must be picklable when the
    batch runs on more than one worker."""

    scenario: str
    fn: Callable[..., Any]
    args: tuple[Any, ...] = ()


@dataclass
class BatchResult:
    results: list[Any] = field(default_factory=list)
    event_log: EventLog | None = None
    elapsed: float = 0.0

    def format_events(self) -> str:
        if self.event_log is None:
            return "(no event log; run with debug=True)"
        return self.event_log.format()


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else ``CONTAGIONFLOW_WORKERS``, else the CPU count."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV)
        if raw:
            try:
                workers = int(raw)
            except ValueError:
                raise ConfigError(WORKERS_ENV, f"not an integer: {raw!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {workers}")
    return workers


class Runtime:
    def __init__(self, workers: int | None = None, debug: bool = False) -> None:
        self._workers = resolve_workers(workers)
        self._debug = debug
        self._event_log: EventLog | None = EventLog() if debug else None

    @property
    def workers(self) -> int:
        return self._workers

    async def execute(self, tasks: Sequence[SimulationTask]) -> BatchResult:
        """Run every task, then raise ``ExperimentError`` if any failed.

        Results come back in task order regardless of completion order.
        """
        started = time.perf_counter()
        self._record("batch_start", "batch", None, {"tasks": len(tasks), "workers": self._workers})
        if self._workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self._workers) as pool:
                results = await self._gather(tasks, pool)
        else:
            results = await self._gather(tasks, None)

        failures = [
            (idx, task, res)
            for idx, (task, res) in enumerate(zip(tasks, results))
            if isinstance(res, BaseException)
        ]
        for idx, task, err in failures:
            logger.error("Task %d of scenario %s failed: %s", idx, task.scenario, err)
            self._record("task_failed", task.scenario, idx, {"error": repr(err)})

        elapsed = time.perf_counter() - started
        self._record("batch_done", "batch", None, {"failed": len(failures), "elapsed": round(elapsed, 3)})
        if self._event_log is not None:
            logger.debug("Batch events:\n%s", self._event_log.format())

        if failures:
            idx, task, err = failures[0]
            raise ExperimentError(
                task.scenario,
                f"{len(failures)} of {len(tasks)} tasks failed; first (task {idx}): {err}",
            ) from err
        return BatchResult(results=list(results), event_log=self._event_log, elapsed=elapsed)

    async def _gather(
        self, tasks: Sequence[SimulationTask], pool: Executor | None
    ) -> list[Any]:
        loop = asyncio.get_running_loop()

        async def run_one(idx: int, task: SimulationTask) -> Any:
            self._record("scenario_start", task.scenario, idx, {})
            if pool is None:
                result = task.fn(*task.args)
            else:
                result = await loop.run_in_executor(pool, task.fn, *task.args)
            self._record("scenario_done", task.scenario, idx, {})
            return result

        return await asyncio.gather(
            *[run_one(idx, t) for idx, t in enumerate(tasks)],
            return_exceptions=True,
        )

    def record_filtered(self, scenario: str, reason: str) -> None:
        self._record("filtered", scenario, None, {"reason": reason})

    def _record(
        self,
        event_type: str,
        scenario: str,
        task_index: int | None,
        details: dict[str, Any],
    ) -> None:
        if self._event_log is None:
            return
        event = SimulationEvent(
            event_type=event_type,  # type: ignore[arg-type]
            scenario=scenario,
            task_index=task_index,
            details=details,
        )
        self._event_log.record(event)


async def async_run_batch(
    tasks: Sequence[SimulationTask],
    *,
    workers: int | None = None,
    debug: bool = False,
) -> BatchResult:
    runtime = Runtime(workers=workers, debug=debug)
    return await runtime.execute(tasks)


def run_batch(
    tasks: Sequence[SimulationTask],
    *,
    workers: int | None = None,
    debug: bool = False,
) -> BatchResult:
    return asyncio.run(async_run_batch(tasks, workers=workers, debug=debug))

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Literal

import numpy as np

from contagionflow._constants import DEFAULT_OUTPUT_DIR, LOGGER_NAME, OUTPUT_DIR_ENV

logger = logging.getLogger(LOGGER_NAME)

OutputFormat = Literal["csv", "json"]


def tool_version() -> str:
    try:
        return version("contagionflow")
    except PackageNotFoundError:
        return "0+unknown"


def resolve_output_dir(directory: Path | str | None = None) -> Path:
    """Explicit directory, else ``CONTAGIONFLOW_OUTPUT_DIR``, else the default."""
    if directory is not None:
        return Path(directory)
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def _plain(value: Any) -> Any:
    # JSON-safe view: numpy scalars unwrapped, non-finite floats as null
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_plain(v) for v in items]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(data: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(data), sort_keys=True, indent=2) + "\n"


def _cell(value: Any) -> Any:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    seeds: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    outputs: list[dict[str, str]] = field(default_factory=list)
    tool_version: str = field(default_factory=tool_version)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "wall_time": round(self.wall_time, 3),
            "outputs": self.outputs,
        }


class ResultSink:
    """Writes every output of a run under one directory and tracks digests
    for the manifest. All writes go through one sink per run."""

    def __init__(self, directory: Path | str | None = None, fmt: OutputFormat = "csv") -> None:
        self._dir = resolve_output_dir(directory)
        self._fmt = fmt
        self._written: list[Path] = []

    @property
    def directory(self) -> Path:
        return self._dir

    @property
    def written(self) -> list[Path]:
        return list(self._written)

    def _path(self, name: str) -> Path:
        self._dir.mkdir(parents=True, exist_ok=True)
        return self._dir / name

    def _track(self, path: Path) -> Path:
        if path not in self._written:
            self._written.append(path)
        logger.info("Wrote %s", path)
        return path

    def write_table(
        self,
        name: str,
        rows: Sequence[Mapping[str, Any]],
        columns: Sequence[str] | None = None,
    ) -> Path:
        """Write ``rows`` as ``name.csv`` or ``name.json`` per the sink format."""
        if columns is None:
            columns = list(rows[0]) if rows else []
        if self._fmt == "json":
            path = self._path(f"{name}.json")
            path.write_text(dumps([{c: row.get(c) for c in columns} for row in rows]), encoding="utf-8")
            return self._track(path)
        path = self._path(f"{name}.csv")
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(row.get(c)) for c in columns])
        return self._track(path)

    def write_json(self, name: str, data: Any) -> Path:
        path = self._path(f"{name}.json")
        path.write_text(dumps(data), encoding="utf-8")
        return self._track(path)

    def write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        path.write_text(text, encoding="utf-8")
        return self._track(path)

    def adopt(self, paths: Sequence[Path]) -> None:
        """Track files written by other helpers into this sink's directory."""
        for path in paths:
            self._track(Path(path))

    def finalize(self, manifest: RunManifest) -> Path:
        manifest.outputs = [
            {"path": p.relative_to(self._dir).as_posix(), "sha256": sha256_file(p)}
            for p in self._written
        ]
        path = self._path("manifest.json")
        path.write_text(dumps(manifest.to_dict()), encoding="utf-8")
        logger.info("Wrote manifest %s (%d outputs)", path, len(manifest.outputs))
        return path

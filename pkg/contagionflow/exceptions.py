from __future__ import annotations


class ContagionFlowError(Exception):
    """Base exception for contagionflow."""


class EdgeListParseError(ContagionFlowError):
    """Raised when an edge-list line cannot be parsed."""

    def __init__(self, line_number: int, message: str) -> None:
        self.line_number = line_number
        super().__init__(f"[line {line_number}] {message}")


class EdgeListReadError(ContagionFlowError):
    """Raised when an edge-list file cannot be opened or decoded."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"[{path}] {message}")


class ParameterError(ContagionFlowError):
    """Raised when a generator, sampler or model parameter is out of range."""

    def __init__(self, parameter: str, message: str) -> None:
        self.parameter = parameter
        super().__init__(f"[{parameter}] {message}")


class GraphArgumentError(ContagionFlowError):
    """Raised when an operation receives an argument that does not fit the graph
    (unknown edge, inactive causal target, mismatched lengths)."""

    def __init__(self, message: str) -> None:
        super().__init__(message)


class AnalysisError(ContagionFlowError):
    """Raised when an analysis has too little data to run."""

    def __init__(self, analysis: str, message: str) -> None:
        self.analysis = analysis
        super().__init__(f"[{analysis}] {message}")


class EnumerationRefusedError(ContagionFlowError):
    """Raised when a brute-force enumeration exceeds the caller's bound."""

    def __init__(self, size: int, limit: int) -> None:
        self.size = size
        self.limit = limit
        super().__init__(
            f"[enumeration] {size} configurations exceed the limit of {limit}"
        )


class ConfigError(ContagionFlowError):
    """Raised when a scenario configuration value is invalid."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"[{key}] {message}")


class ExperimentError(ContagionFlowError):
    """Raised when a task inside an experiment batch fails."""

    def __init__(self, scenario: str, message: str) -> None:
        self.scenario = scenario
        super().__init__(f"[{scenario}] {message}")

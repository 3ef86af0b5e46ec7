from __future__ import annotations

LOGGER_NAME = "contagionflow"

# Bumped whenever a generator or sampler changes the stream it consumes.
GENERATOR_VERSION = "2"
RNG_ALGORITHM = "numpy.PCG64"

DEFAULT_LTM_SIGMA = 0.05
DEFAULT_LTM_PHI = 0.5
DEFAULT_BRIDGE_THRESHOLD = 3

CONVERGENCE_CORRELATION = 0.95
CONVERGENCE_SYMMETRY_PCT = 2.0

OUTPUT_DIR_ENV = "CONTAGIONFLOW_OUTPUT_DIR"
WORKERS_ENV = "CONTAGIONFLOW_WORKERS"
DEFAULT_OUTPUT_DIR = "contagionflow-out"

SEED_MODES: frozenset[str] = frozenset(
    {
        "rs",
        "rcs",
        "exhaustive-rs",
        "exhaustive-rcs",
    }
)

MODEL_FAMILIES: frozenset[str] = frozenset(
    {
        "gi",
        "ltm",
        "icm",
        "noisy",
        "noisy-single",
    }
)

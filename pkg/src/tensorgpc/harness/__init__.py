"""Active-learning harness: benchmarks, simulator protocol, persistence, driver."""

from .benchmarks import BENCHMARKS, builtin_benchmark
from .loop import RunConfig, RunHistory, run_active_loop, summarize
from .persistence import (
    RoundRecord,
    emit_history,
    load_model,
    persist_model,
    read_history,
)
from .simulator import ExternalSimulator, external_simulator

__all__ = [
    "BENCHMARKS",
    "ExternalSimulator",
    "RoundRecord",
    "RunConfig",
    "RunHistory",
    "builtin_benchmark",
    "emit_history",
    "external_simulator",
    "load_model",
    "persist_model",
    "read_history",
    "run_active_loop",
    "summarize",
]

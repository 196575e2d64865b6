"""Hybrid optimization loop: cost function, optimizers, restart runner."""

from .optimizers import (
    MINIMIZERS,
    STOP_REASONS,
    ConvergenceMonitor,
    OptimizeOutcome,
    cobyla_minimize,
    lbfgsb_minimize,
    spsa_minimize,
)
from .runner import INITS, OPTIMIZERS, VqeConfig, VqeResult, cost, result_to_json, run_vqe

__all__ = [
    "ConvergenceMonitor",
    "INITS",
    "MINIMIZERS",
    "OPTIMIZERS",
    "OptimizeOutcome",
    "STOP_REASONS",
    "VqeConfig",
    "VqeResult",
    "cobyla_minimize",
    "cost",
    "lbfgsb_minimize",
    "result_to_json",
    "run_vqe",
    "spsa_minimize",
]

"""Statevector simulator, hardware-efficient ansatz, and measurement."""

from .ansatz import (
    MAX_DEPTH,
    PATTERNS,
    AnsatzSpec,
    GateOp,
    apply_ansatz,
    build_ansatz,
    n_params_for,
)
from .backend import backend_name
from .measure import expectation_exact, expectation_shots, sample_bitstrings
from .statevector import MAX_QUBITS, Statevector, apply_gate, init_state

__all__ = [
    "AnsatzSpec",
    "GateOp",
    "MAX_DEPTH",
    "MAX_QUBITS",
    "PATTERNS",
    "Statevector",
    "apply_ansatz",
    "apply_gate",
    "backend_name",
    "build_ansatz",
    "expectation_exact",
    "expectation_shots",
    "init_state",
    "n_params_for",
    "sample_bitstrings",
]

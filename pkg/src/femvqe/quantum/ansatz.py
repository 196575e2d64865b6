"""Hardware-efficient ansatz: U(theta) = [U_rot][U_ent][U_pre].

The pre-rotation block is an Rz slice followed by an Ry slice over every
qubit; each depth then appends a full all-pairs entangler and another
(Rz, Ry) rotation block.  CX and CZ entanglers carry no angles; CRX
entangler angles are additional variational parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DepthOutOfRange, ParameterLengthMismatch, QubitCountOutOfRange
from .statevector import MAX_QUBITS, Statevector, apply_gate, init_state

PATTERNS = ("CX", "CZ", "CRX")
MAX_DEPTH = 10


@dataclass(frozen=True)
class GateOp:
    """One gate in an ansatz: parameterized ops carry a slot index into theta."""

    kind: str
    qubits: tuple
    slot: int | None = None


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    depth: int
    pattern: str
    gate_sequence: tuple
    n_params: int

    def to_json(self, indent=None) -> str:
        payload = {
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "pattern": self.pattern,
            "n_params": self.n_params,
            "gates": [
                {"kind": g.kind, "qubits": list(g.qubits), "slot": g.slot}
                for g in self.gate_sequence
            ],
        }
        return json.dumps(payload, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "AnsatzSpec":
        payload = json.loads(text)
        gates = tuple(
            GateOp(g["kind"], tuple(g["qubits"]), g["slot"]) for g in payload["gates"]
        )
        return cls(
            n_qubits=int(payload["n_qubits"]),
            depth=int(payload["depth"]),
            pattern=payload["pattern"],
            gate_sequence=gates,
            n_params=int(payload["n_params"]),
        )


def n_params_for(n_qubits: int, depth: int, pattern: str) -> int:
    base = 2 * n_qubits * (depth + 1)
    if pattern == "CRX":
        return base + depth * n_qubits * (n_qubits - 1) // 2
    return base


def build_ansatz(n_qubits: int, depth: int, pattern: str) -> AnsatzSpec:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise QubitCountOutOfRange(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    if not 1 <= depth <= MAX_DEPTH:
        raise DepthOutOfRange(f"depth must be in [1, {MAX_DEPTH}], got {depth}")
    if pattern not in PATTERNS:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")

    gates = []
    slot = 0

    def rotation_block():
        nonlocal slot
        for kind in ("Rz", "Ry"):
            for q in range(n_qubits):
                gates.append(GateOp(kind, (q,), slot))
                slot += 1

    rotation_block()  # pre-rotations
    for _ in range(depth):
        for j1 in range(n_qubits - 1):
            for j2 in range(j1 + 1, n_qubits):
                if pattern == "CRX":
                    gates.append(GateOp("CRX", (j1, j2), slot))
                    slot += 1
                else:
                    gates.append(GateOp(pattern, (j1, j2)))
        rotation_block()

    spec = AnsatzSpec(
        n_qubits=n_qubits,
        depth=depth,
        pattern=pattern,
        gate_sequence=tuple(gates),
        n_params=slot,
    )
    assert spec.n_params == n_params_for(n_qubits, depth, pattern)
    return spec


def apply_ansatz(ansatz: AnsatzSpec, theta) -> Statevector:
    """Push |0...0> through the gate sequence with the bound angles."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ParameterLengthMismatch(
            f"ansatz takes {ansatz.n_params} parameters, got shape {theta.shape}"
        )
    state = init_state(ansatz.n_qubits)
    for gate in ansatz.gate_sequence:
        angle = None if gate.slot is None else theta[gate.slot]
        apply_gate(state, gate.kind, gate.qubits, angle)
    return state

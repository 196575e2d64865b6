"""Expectation values, exact and shot-sampled, plus bitstring sampling."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..hamiltonian import PauliHamiltonian, StandardHamiltonian, _string_masks
from . import backend
from .statevector import Statevector

_IMAG_TOL = 1e-10


def expectation_exact(state: Statevector, h) -> float:
    """<psi|H|psi> for a dense matrix or a PauliHamiltonian.

    The dense path is one matvec; the Pauli path is sum_l c_l <P_l> with each
    term in O(2^N).  The imaginary residual must sit at roundoff.
    """
    amps = state.amplitudes
    if isinstance(h, PauliHamiltonian):
        if h.n_qubits != state.n_qubits:
            raise DimensionMismatch(
                f"operator has {h.n_qubits} qubits, state has {state.n_qubits}"
            )
        val = 0j
        for coeff, word in h.terms:
            flip, phase_mask, n_y = _string_masks(word)
            val += coeff * backend.pauli_expectation(amps, state.n_qubits, flip, phase_mask, n_y)
    else:
        mat = h.matrix if isinstance(h, StandardHamiltonian) else np.asarray(h)
        if mat.shape != (amps.size, amps.size):
            raise DimensionMismatch(
                f"operator shape {mat.shape} does not match state dimension {amps.size}"
            )
        val = np.vdot(amps, mat @ amps)
    assert abs(val.imag) <= _IMAG_TOL, f"imaginary residual {val.imag:.3e}"
    return float(val.real)


def _allocate_shots(weights, total: int):
    """Largest-remainder apportionment of `total` over |c_l| weights, floor 1.

    The floor can push the sum slightly above `total` when terms outnumber
    shots; accuracy beats strict budget accounting at that extreme.
    """
    weights = np.asarray(weights, dtype=float)
    raw = total * weights / weights.sum()
    alloc = np.floor(raw).astype(int)
    remainder = total - int(alloc.sum())
    if remainder > 0:
        order = np.argsort(-(raw - alloc), kind="stable")
        alloc[order[:remainder]] += 1
    return np.maximum(alloc, 1)


# Basis changes using only native gates:
#   X: Rz(pi) then Ry(pi/2)   == Hadamard up to global phase
#   Y: Rz(pi/2) then Ry(pi/2) == Hadamard . S-dagger up to global phase
_BASIS_ANGLE = {"X": np.pi, "Y": np.pi / 2}


def _measurement_probs(state: Statevector, word: str):
    """Probabilities after rotating each X/Y qubit into the Z basis."""
    n = state.n_qubits
    amps = state.amplitudes.copy()
    for pos, ch in enumerate(word):
        if ch in _BASIS_ANGLE:
            q = n - 1 - pos
            backend.apply_rz(amps, n, q, _BASIS_ANGLE[ch])
            backend.apply_ry(amps, n, q, np.pi / 2)
    probs = backend.probabilities(amps, n)
    return probs / probs.sum()


def expectation_shots(state: Statevector, h: PauliHamiltonian, shots: int, seed: int) -> float:
    """Shot-based estimate of <psi|H|psi>.

    Every non-identity term is measured in its own rotated basis; <P_l> is the
    mean of (-1)^(parity of the measured support bits).  The shot budget is
    split across terms proportionally to |c_l| (floor 1), and each term draws
    from an independent stream keyed by (seed, term index), so the estimate is
    deterministic per seed and independent of evaluation order.
    """
    if h.n_qubits != state.n_qubits:
        raise DimensionMismatch(
            f"operator has {h.n_qubits} qubits, state has {state.n_qubits}"
        )
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")

    sampled = [(i, c, w) for i, (c, w) in enumerate(h.terms) if set(w) != {"I"}]
    total = sum(c for c, w in h.terms if set(w) == {"I"})
    if not sampled:
        return total
    alloc = _allocate_shots([abs(c) for _, c, _ in sampled], shots)

    idx = np.arange(1 << state.n_qubits, dtype=np.uint64)
    for (term_idx, coeff, word), n_shots in zip(sampled, alloc):
        probs = _measurement_probs(state, word)
        rng = np.random.default_rng(np.random.SeedSequence((seed, term_idx)))
        counts = rng.multinomial(int(n_shots), probs)
        flip, phase_mask, _ = _string_masks(word)
        support = flip | phase_mask  # every non-I qubit contributes to the parity
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(support)) & 1)
        total += coeff * float(counts @ signs) / int(n_shots)
    return float(total)


def sample_bitstrings(state: Statevector, shots: int, seed: int) -> dict:
    """Multinomial sample of computational-basis outcomes.

    Keys are bitstrings with qubit N-1 leftmost; values sum to shots.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = backend.probabilities(state.amplitudes, state.n_qubits)
    probs = probs / probs.sum()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = rng.multinomial(shots, probs)
    return {
        np.binary_repr(i, width=state.n_qubits): int(c)
        for i, c in enumerate(counts)
        if c > 0
    }

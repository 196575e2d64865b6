"""Independent reference implementations used only by the test suite.

Everything here is written the slow, obvious way (explicit Kronecker
products, full enumeration, dense linear algebra) so it shares no code with
the package under test.
"""

import itertools

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_chain(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word; leftmost character = highest qubit."""
    out = np.array([[1.0 + 0j]])
    for ch in word:
        out = np.kron(out, PAULI[ch])
    return out


def naive_pauli_coeffs(h: np.ndarray) -> dict[str, complex]:
    """All 4^N coefficients c_w = Tr(P_w H) / 2^N by literal enumeration."""
    n = h.shape[0].bit_length() - 1
    assert h.shape == (2**n, 2**n)
    coeffs = {}
    for letters in itertools.product("IXYZ", repeat=n):
        word = "".join(letters)
        coeffs[word] = np.trace(kron_chain(word) @ h) / 2**n
    return coeffs


def single_qubit_embed(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Embed a 2x2 gate on one qubit of an n-qubit register (little-endian)."""
    out = np.array([[1.0 + 0j]])
    for j in range(n - 1, -1, -1):
        out = np.kron(out, gate if j == qubit else PAULI["I"])
    return out


def controlled_embed(gate: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    """Dense controlled-gate unitary: apply `gate` on target where control=1."""
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)

    def chain(factors):
        out = np.array([[1.0 + 0j]])
        for j in range(n - 1, -1, -1):
            out = np.kron(out, factors.get(j, PAULI["I"]))
        return out

    return chain({control: p0}) + chain({control: p1, target: gate})


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


X_GATE = PAULI["X"]
Z_GATE = PAULI["Z"]


def generalized_eigvals(k: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Eigenvalues of M^{-1} K via the general nonsymmetric solver."""
    vals = np.linalg.eigvals(np.linalg.solve(m, k))
    assert np.max(np.abs(vals.imag)) <= 1e-8 * max(1.0, np.max(np.abs(vals)))
    return np.sort(vals.real)


def random_spd(rng: np.random.Generator, n: int, shift: float = 0.1) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + shift * np.eye(n)


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2

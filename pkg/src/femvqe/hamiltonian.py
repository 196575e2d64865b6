"""Qubit-Hamiltonian construction from partitioned stiffness/mass pairs.

The generalized eigenproblem K v = lam M v is reduced to an ordinary symmetric
one with the same spectrum, then decomposed into weighted Pauli strings.  The
classical dense eigensolver lives here too, as the reference oracle for the
quantum estimates.

Conventions: a Pauli string is a length-N word over {I, X, Y, Z} whose
leftmost character acts on qubit N-1 (the most significant bit of the
statevector index).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    MassNotPD,
    NotPowerOfTwo,
    QubitCountOutOfRange,
    ShiftTooSmall,
)

MAX_QUBITS = 12  # dense path: 4096x4096 tops
PRUNE_DEFAULT = 1e-12

_REDUCTIONS = ("diagonal_mass", "cholesky")
_SYM_TOL = 1e-10


def n_qubits_for_dim(dim: int) -> int:
    """Qubit count N with 2^N == dim, or NotPowerOfTwo."""
    if dim < 1 or dim & (dim - 1):
        raise NotPowerOfTwo(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def _as_dense(obj) -> np.ndarray:
    if isinstance(obj, StandardHamiltonian):
        return obj.matrix
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _check_symmetric(arr: np.ndarray, what: str) -> None:
    scale = max(np.abs(arr).max(), 1e-300)
    if np.abs(arr - arr.T).max() > _SYM_TOL * scale:
        raise ValueError(f"{what} is not symmetric within tolerance")


@dataclass(frozen=True, eq=False)
class StandardHamiltonian:
    """Dense real symmetric 2^N x 2^N operator ready for decomposition.

    unit_scale records any spectral normalization applied so reported
    eigenvalues can be mapped back: lam_physical = unit_scale * lam_reported.
    """

    matrix: np.ndarray
    n_qubits: int
    reduction: str
    unit_scale: float = 1.0

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {mat.shape}")
        n = n_qubits_for_dim(mat.shape[0])
        if n != self.n_qubits:
            raise DimensionMismatch(
                f"matrix dimension {mat.shape[0]} does not match n_qubits={self.n_qubits}"
            )
        if self.reduction not in _REDUCTIONS:
            raise ValueError(f"reduction must be one of {_REDUCTIONS}")
        _check_symmetric(mat, "Hamiltonian matrix")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=True)
class PauliHamiltonian:
    """Weighted Pauli-string sum: H = sum_l c_l P_l."""

    n_qubits: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), str(p)) for c, p in self.terms))
        seen = set()
        for c, p in self.terms:
            if len(p) != self.n_qubits or any(ch not in "IXYZ" for ch in p):
                raise ValueError(f"bad pauli string {p!r} for n_qubits={self.n_qubits}")
            if p in seen:
                raise ValueError(f"duplicate pauli string {p!r}")
            seen.add(p)

    def __len__(self) -> int:
        return len(self.terms)

    def to_json(self, indent=None) -> str:
        payload = {
            "n_qubits": self.n_qubits,
            "terms": [{"c": c, "p": p} for c, p in self.terms],
        }
        return json.dumps(payload, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "PauliHamiltonian":
        payload = json.loads(text)
        terms = tuple((t["c"], t["p"]) for t in payload["terms"])
        return cls(n_qubits=int(payload["n_qubits"]), terms=terms)


def reduce_to_standard(k, m, formulation: str = "auto") -> StandardHamiltonian:
    """Reduce (K, M) to a symmetric operator with the generalized spectrum.

    Diagonal M uses the elementwise scaling M^{-1/2} K M^{-1/2}; a full M goes
    through its Cholesky factor, H = L^{-1} K L^{-T}.  Both are congruence-free
    similarity reductions: the spectrum equals that of M^{-1}K.
    """
    k_arr = _as_dense(k)
    m_arr = _as_dense(m)
    if k_arr.shape != m_arr.shape:
        raise DimensionMismatch(f"K shape {k_arr.shape} != M shape {m_arr.shape}")
    n = n_qubits_for_dim(k_arr.shape[0])
    _check_symmetric(k_arr, "K")
    _check_symmetric(m_arr, "M")

    diag_only = np.count_nonzero(m_arr - np.diag(np.diag(m_arr))) == 0
    if formulation == "auto":
        mode = "diagonal_mass" if diag_only else "cholesky"
    elif formulation in _REDUCTIONS:
        if formulation == "diagonal_mass" and not diag_only:
            raise ValueError("diagonal_mass requested but M has off-diagonal entries")
        mode = formulation
    else:
        raise ValueError(f"formulation must be 'auto' or one of {_REDUCTIONS}")

    if mode == "diagonal_mass":
        d = np.diag(m_arr)
        if np.any(d <= 0):
            raise MassNotPD("diagonal mass matrix has nonpositive entries")
        inv_sqrt = 1.0 / np.sqrt(d)
        h = k_arr * np.outer(inv_sqrt, inv_sqrt)
    else:
        try:
            low = np.linalg.cholesky(m_arr)
        except np.linalg.LinAlgError as exc:
            raise MassNotPD("mass matrix is not positive definite") from exc
        y = np.linalg.solve(low, k_arr)
        h = np.linalg.solve(low, y.T).T
    h = (h + h.T) / 2  # enforce exact symmetry against roundoff
    return StandardHamiltonian(matrix=h, n_qubits=n, reduction=mode)


def rescale_spectral(sh: StandardHamiltonian) -> StandardHamiltonian:
    """Divide by the largest eigenvalue so the spectrum lands in (0, 1].

    The factor is recorded in unit_scale; physical eigenvalues are recovered
    as unit_scale * lam.  Keeps optimizer tolerances meaningful regardless of
    the input's unit system.
    """
    lam_max = float(np.linalg.eigvalsh(sh.matrix)[-1])
    if lam_max <= 0:
        raise ValueError("spectral rescale needs a positive largest eigenvalue")
    return StandardHamiltonian(
        matrix=sh.matrix / lam_max,
        n_qubits=sh.n_qubits,
        reduction=sh.reduction,
        unit_scale=sh.unit_scale * lam_max,
    )


def pauli_decompose(h, prune: float = PRUNE_DEFAULT) -> PauliHamiltonian:
    """Expand H into sum_l c_l P_l with c_l = Tr(P_l H) / 2^N.

    Recursive tensor split on the most significant qubit: the four half-size
    blocks [[A, B], [C, D]] contribute (A+D)/2 to I, (B+C)/2 to X, i(B-C)/2
    to Y and (A-D)/2 to Z.  A subtree is dropped as soon as its block's
    largest magnitude falls to `prune`, which bounds every coefficient below
    it.  Cost O(4^N * N) versus the naive 16^N enumeration.
    """
    if isinstance(h, StandardHamiltonian):
        mat = h.matrix
    else:
        mat = np.asarray(h)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {mat.shape}")
    n = n_qubits_for_dim(mat.shape[0])
    if n > MAX_QUBITS:
        raise QubitCountOutOfRange(f"dense decomposition supports at most {MAX_QUBITS} qubits, got {n}")
    scale = max(np.abs(mat).max(), 1e-300)
    if np.abs(mat - mat.conj().T).max() > _SYM_TOL * scale:
        raise ValueError("matrix must be Hermitian")

    terms = []
    stack = [("", np.asarray(mat, dtype=complex))]
    while stack:
        prefix, block = stack.pop()
        if np.abs(block).max() <= prune:
            continue
        if block.shape[0] == 1:
            c = block[0, 0].real  # Hermitian input: imaginary part is roundoff
            if abs(c) > prune:
                terms.append((c, prefix))
            continue
        half = block.shape[0] // 2
        a = block[:half, :half]
        b = block[:half, half:]
        c_ = block[half:, :half]
        d = block[half:, half:]
        # pushed in reverse so popping emits depth-first in I, X, Y, Z order
        stack.append((prefix + "Z", (a - d) / 2))
        stack.append((prefix + "Y", 1j * (b - c_) / 2))
        stack.append((prefix + "X", (b + c_) / 2))
        stack.append((prefix + "I", (a + d) / 2))
    return PauliHamiltonian(n_qubits=n, terms=tuple(terms))


def _string_masks(pauli: str):
    """Bit masks (flip, phase, n_y) for a string, leftmost char = qubit N-1."""
    n = len(pauli)
    m_x = m_y = m_z = 0
    for pos, ch in enumerate(pauli):
        bit = 1 << (n - 1 - pos)
        if ch == "X":
            m_x |= bit
        elif ch == "Y":
            m_y |= bit
        elif ch == "Z":
            m_z |= bit
    return m_x | m_y, m_y | m_z, bin(m_y).count("1")


def pauli_reconstruct(ph: PauliHamiltonian) -> np.ndarray:
    """Dense sum of coefficient-weighted Kronecker products.

    Each string has exactly one nonzero per column: <j^flip|P|j> =
    i^{n_Y} * (-1)^{popcount(j & (m_Y|m_Z))}, so the build is O(T * 2^N).
    """
    dim = 2**ph.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.uint64)
    for coeff, pauli in ph.terms:
        flip, phase_mask, n_y = _string_masks(pauli)
        rows = cols ^ np.uint64(flip)
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & np.uint64(phase_mask)) & 1)
        out[rows, cols] += coeff * (1j**n_y) * signs
    if np.abs(out.imag).max() == 0.0:
        return out.real.copy()
    return out


def classical_min_eig(h) -> tuple:
    """Smallest eigenvalue and unit eigenvector of a symmetric matrix."""
    mat = _as_dense(h)
    _check_symmetric(mat, "matrix")
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("dense symmetric eigensolver failed to converge") from exc
    lam = float(vals[0])
    vec = vecs[:, 0]
    norm = float(np.abs(vals).max())
    residual = float(np.linalg.norm(mat @ vec - lam * vec))
    if residual > 1e-9 * max(norm, 1e-300):
        raise ConvergenceFailure(f"eigenpair residual {residual:.3e} exceeds tolerance")
    return lam, vec


def gershgorin_upper(h) -> float:
    """Upper bound on the spectrum: max_i (H_ii + sum_{j != i} |H_ij|)."""
    mat = _as_dense(h)
    radii = np.abs(mat).sum(axis=1) - np.abs(np.diag(mat))
    return float((np.diag(mat) + radii).max())


def pad_to_power_of_two(h, target_n: int, shift: float = None) -> StandardHamiltonian:
    """Embed H block-diagonally into 2^target_n with `shift` on the padding.

    Any shift above the Gershgorin upper bound keeps the padded minimum equal
    to the original minimum.  shift=None picks one automatically.
    """
    if isinstance(h, StandardHamiltonian):
        mat, reduction, unit_scale = h.matrix, h.reduction, h.unit_scale
    else:
        mat = _as_dense(h)
        reduction, unit_scale = "diagonal_mass", 1.0  # raw input: treated as already reduced
    _check_symmetric(mat, "matrix")
    dim = mat.shape[0]
    target = 2**int(target_n)
    if dim > target:
        raise DimensionMismatch(f"matrix of dimension {dim} cannot pad down to {target}")
    if dim == target:
        return StandardHamiltonian(mat, int(target_n), reduction, unit_scale)
    bound = gershgorin_upper(mat)
    if shift is None:
        shift = bound + max(1.0, abs(bound))
    elif shift <= bound:
        raise ShiftTooSmall(f"shift {shift} must exceed the Gershgorin upper bound {bound}")
    padded = np.zeros((target, target))
    padded[:dim, :dim] = mat
    padded[range(dim, target), range(dim, target)] = shift
    return StandardHamiltonian(padded, int(target_n), reduction, unit_scale)

"""Sparse symmetric matrix I/O with DOF labels.

Two text formats are supported: the ABAQUS-style 5-field coordinate format
(``node_i, dof_i, node_j, dof_j, value``) and Matrix Market coordinate files.
Matrices are stored canonically: lower triangle only, entries sorted by
(row, col) in DofLabel order, values untouched so that write -> parse is a
bit-exact round trip for binary64.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateEntry, MalformedRecord, UnknownDof, UnsupportedHeader

__all__ = [
    "DofLabel",
    "BoundarySet",
    "CoordinateMatrix",
    "parse_abaqus_mtx",
    "parse_matrix_market",
    "partition_free",
    "write_matrix",
]

# Relative tolerances: exact duplicate records vs. values implied twice by
# symmetry (general-format mirrors). Asymmetry gets the looser bound.
_DUP_TOL = 1e-12
_MIRROR_TOL = 1e-10


@dataclass(frozen=True, order=True)
class DofLabel:
    """A global degree of freedom: (node id, 1-based local DOF index)."""

    node_id: int
    dof_index: int

    def __post_init__(self):
        if self.node_id < 1 or self.dof_index < 1:
            raise ValueError(f"DofLabel indices must be >= 1, got {self!r}")

    def __repr__(self):
        return f"DofLabel({self.node_id}, {self.dof_index})"


@dataclass(frozen=True)
class BoundarySet:
    """Set of fixed DOFs to be removed when partitioning."""

    fixed: frozenset[DofLabel] = field(default_factory=frozenset)

    @classmethod
    def of(cls, labels: Iterable[DofLabel]) -> "BoundarySet":
        return cls(frozenset(labels))

    def __len__(self):
        return len(self.fixed)

    def __contains__(self, label):
        return label in self.fixed

    def __iter__(self):
        return iter(sorted(self.fixed))


Entry = tuple[DofLabel, DofLabel, float]


@dataclass(frozen=True)
class CoordinateMatrix:
    """Symmetric sparse matrix in canonical lower-triangle coordinate form.

    ``entries`` hold (row, col, value) with row >= col in DofLabel order,
    sorted by (row, col). ``dim`` is the number of distinct labels.
    ``symmetric_storage`` records whether the source stored one triangle
    (ABAQUS, Matrix Market ``symmetric``) or both (``general``); the entry
    list itself is always canonical.
    """

    entries: tuple[Entry, ...]
    dim: int
    symmetric_storage: bool = True

    @classmethod
    def from_entries(
        cls,
        raw: Iterable[tuple[DofLabel, DofLabel, float]],
        symmetric_storage: bool = True,
    ) -> "CoordinateMatrix":
        """Canonicalize arbitrary-triangle entries.

        Upper-triangle entries are mirrored to the lower triangle. A slot
        given twice must agree: within 1e-12 relative for repeated records,
        within 1e-10 relative when implied by symmetry, else DuplicateEntry.
        """
        slots: dict[tuple[DofLabel, DofLabel], float] = {}
        mirrored: dict[tuple[DofLabel, DofLabel], bool] = {}
        labels: set[DofLabel] = set()
        for row, col, value in raw:
            value = float(value)
            labels.add(row)
            labels.add(col)
            was_mirrored = row < col
            key = (col, row) if was_mirrored else (row, col)
            if key in slots:
                old = slots[key]
                tol = _MIRROR_TOL if (was_mirrored or mirrored[key]) else _DUP_TOL
                scale = max(abs(old), abs(value))
                if abs(old - value) > tol * scale:
                    kind = "asymmetric pair" if (was_mirrored or mirrored[key]) else "duplicate entry"
                    raise DuplicateEntry(
                        f"{kind} at ({key[0]!r}, {key[1]!r}): {old!r} vs {value!r}"
                    )
                # keep the first value seen; they agree within tolerance
                mirrored[key] = mirrored[key] and was_mirrored
            else:
                slots[key] = value
                mirrored[key] = was_mirrored
        entries = tuple(sorted((r, c, v) for (r, c), v in slots.items()))
        return cls(entries=entries, dim=len(labels), symmetric_storage=symmetric_storage)

    def labels(self) -> list[DofLabel]:
        seen = set()
        for row, col, _ in self.entries:
            seen.add(row)
            seen.add(col)
        return sorted(seen)

    def to_dense(self) -> tuple[np.ndarray, list[DofLabel]]:
        """Densify, mirroring the stored triangle. Exactly symmetric."""
        labels = self.labels()
        index = {lab: i for i, lab in enumerate(labels)}
        dense = np.zeros((len(labels), len(labels)))
        for row, col, value in self.entries:
            i, j = index[row], index[col]
            dense[i, j] = value
            dense[j, i] = value
        return dense, labels


# --- parsing ----------------------------------------------------------------

_SPLIT = re.compile(r"[,\s]+")


def _fields(line: str) -> list[str]:
    return [tok for tok in _SPLIT.split(line.strip()) if tok]


def parse_abaqus_mtx(text: str) -> CoordinateMatrix:
    """Parse ABAQUS-style coordinate records ``node_i, dof_i, node_j, dof_j, value``.

    Comment lines start with ``*`` or ``%``; blank lines are skipped. Fields
    may be separated by commas, whitespace, or both.
    """
    raw: list[Entry] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "*%":
            continue
        toks = _fields(stripped)
        if len(toks) != 5:
            raise MalformedRecord(line_no, line, f"expected 5 fields, got {len(toks)}")
        try:
            ni, di, nj, dj = (int(t) for t in toks[:4])
        except ValueError:
            raise MalformedRecord(line_no, line, "non-integer index field") from None
        try:
            value = float(toks[4])
        except ValueError:
            raise MalformedRecord(line_no, line, "non-numeric value field") from None
        try:
            row = DofLabel(ni, di)
            col = DofLabel(nj, dj)
        except ValueError as exc:
            raise MalformedRecord(line_no, line, str(exc)) from None
        raw.append((row, col, value))
    return CoordinateMatrix.from_entries(raw, symmetric_storage=True)


def parse_matrix_market(text: str) -> CoordinateMatrix:
    """Parse a Matrix Market coordinate file (real, symmetric or general).

    DofLabels are synthesized as (row_index, 1). The declared header size is
    honored: indices without any record still count toward ``dim`` (an
    explicit zero diagonal entry is added for them).
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise UnsupportedHeader("missing %%MatrixMarket banner")
    banner = lines[0].split()
    if len(banner) != 5:
        raise UnsupportedHeader(f"malformed banner: {lines[0]!r}")
    _, obj, fmt, fld, sym = (tok.lower() for tok in banner)
    if obj != "matrix" or fmt != "coordinate":
        raise UnsupportedHeader(f"only coordinate matrices supported, got {obj} {fmt}")
    if fld != "real":
        raise UnsupportedHeader(f"only real field supported, got {fld}")
    if sym not in ("symmetric", "general"):
        raise UnsupportedHeader(f"only symmetric/general supported, got {sym}")

    # locate the size line (first non-comment, non-blank after the banner)
    body_start = None
    size_line = None
    for idx in range(1, len(lines)):
        stripped = lines[idx].strip()
        if not stripped or stripped.startswith("%"):
            continue
        size_line = (idx + 1, lines[idx])
        body_start = idx + 1
        break
    if size_line is None:
        raise UnsupportedHeader("missing size line")
    toks = _fields(size_line[1])
    if len(toks) != 3:
        raise MalformedRecord(size_line[0], size_line[1], "size line needs 3 fields")
    try:
        n_rows, n_cols, nnz = (int(t) for t in toks)
    except ValueError:
        raise MalformedRecord(size_line[0], size_line[1], "non-integer size field") from None
    if n_rows != n_cols:
        raise UnsupportedHeader(f"matrix must be square, got {n_rows}x{n_cols}")

    raw: list[Entry] = []
    seen_records = 0
    for line_no in range(body_start + 1, len(lines) + 1):
        line = lines[line_no - 1]
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        toks = _fields(stripped)
        if len(toks) != 3:
            raise MalformedRecord(line_no, line, f"expected 3 fields, got {len(toks)}")
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise MalformedRecord(line_no, line, "non-integer index field") from None
        try:
            value = float(toks[2])
        except ValueError:
            raise MalformedRecord(line_no, line, "non-numeric value field") from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MalformedRecord(line_no, line, f"index out of declared range {n_rows}")
        raw.append((DofLabel(i, 1), DofLabel(j, 1), value))
        seen_records += 1
    if seen_records != nnz:
        raise MalformedRecord(
            len(lines), "", f"declared {nnz} records, found {seen_records}"
        )

    present = {r for r, _, _ in raw} | {c for _, c, _ in raw}
    for i in range(1, n_rows + 1):
        lab = DofLabel(i, 1)
        if lab not in present:
            raw.append((lab, lab, 0.0))
    return CoordinateMatrix.from_entries(raw, symmetric_storage=(sym == "symmetric"))


# --- partitioning and writing -----------------------------------------------


def partition_free(
    matrix: CoordinateMatrix, bc: BoundarySet
) -> tuple[np.ndarray, list[DofLabel]]:
    """Delete rows/columns of fixed DOFs; return dense free block + labels.

    The result is exactly symmetric (mirrored from one stored triangle).
    """
    labels = matrix.labels()
    label_set = set(labels)
    missing = sorted(set(bc.fixed) - label_set)
    if missing:
        raise UnknownDof(f"boundary labels absent from matrix: {missing}")
    retained = [lab for lab in labels if lab not in bc.fixed]
    index = {lab: i for i, lab in enumerate(retained)}
    dense = np.zeros((len(retained), len(retained)))
    for row, col, value in matrix.entries:
        i = index.get(row)
        j = index.get(col)
        if i is None or j is None:
            continue
        dense[i, j] = value
        dense[j, i] = value
    zero_rows = [retained[i] for i in range(len(retained)) if not dense[i].any()]
    if zero_rows and len(retained):
        warnings.warn(f"all-zero rows after partitioning: {zero_rows}", stacklevel=2)
    return dense, retained


def _fmt(value: float) -> str:
    # 17 significant digits: lossless for binary64
    return format(value, ".17g")


def write_matrix(matrix: CoordinateMatrix, format: str = "abaqus_mtx") -> str:
    """Serialize to text. parse(write(m)) == m, bit-exact.

    ``abaqus_mtx`` emits the canonical lower triangle (symmetric storage is
    implied by the format). ``matrix_market`` maps each DofLabel to its
    1-based position in sorted label order; matrices whose labels are already
    (i, 1) round-trip with identical labels. A matrix parsed from a
    ``general`` file is written back as general (both triangles emitted).
    """
    if format == "abaqus_mtx":
        lines = ["* symmetric coordinate matrix: node_i, dof_i, node_j, dof_j, value"]
        for row, col, value in matrix.entries:
            lines.append(
                f"{row.node_id},{row.dof_index},{col.node_id},{col.dof_index}, {_fmt(value)}"
            )
        return "\n".join(lines) + "\n"
    if format == "matrix_market":
        labels = matrix.labels()
        index = {lab: i + 1 for i, lab in enumerate(labels)}
        records: list[tuple[int, int, float]] = []
        for row, col, value in matrix.entries:
            records.append((index[row], index[col], value))
            if not matrix.symmetric_storage and row != col:
                records.append((index[col], index[row], value))
        records.sort()
        sym = "symmetric" if matrix.symmetric_storage else "general"
        lines = [f"%%MatrixMarket matrix coordinate real {sym}"]
        lines.append(f"{matrix.dim} {matrix.dim} {len(records)}")
        for i, j, value in records:
            lines.append(f"{i} {j} {_fmt(value)}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")

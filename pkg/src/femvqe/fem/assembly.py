"""Global assembly of element matrices into labeled coordinate form."""

from __future__ import annotations

import math

import numpy as np

from ..errors import FemVqeError, ZeroLengthElement
from ..matrixio import CoordinateMatrix, DofLabel
from .elements import (
    ROTARY_DIVISOR,
    SHEAR_FACTOR,
    beam_element,
    plane_strain_element,
    truss_element,
    truss_lumped_mass,
)
from .model import ELEMENT_NDOF, FemModel


def _beam_rotation(c: float, s: float) -> np.ndarray:
    r = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    t = np.zeros((6, 6))
    t[:3, :3] = r
    t[3:, 3:] = r
    return t


def element_matrices(element, nodes, material, mass_formulation):
    """Element (k_e, m_e) in global axes plus the per-node local DOF count."""
    kind = element.kind
    pts = [(nodes[n].x, nodes[n].y) for n in element.node_ids]
    if kind == "T2D2":
        area = element.section["area"]
        k, m = truss_element(pts[0], pts[1], area, material)
        if mass_formulation == "lumped":
            length = math.hypot(pts[1][0] - pts[0][0], pts[1][1] - pts[0][1])
            m = truss_lumped_mass(length, area, material)
        return k, m
    if kind == "B21":
        if mass_formulation != "lumped":
            raise FemVqeError("B21 supports only the lumped mass formulation")
        dx = pts[1][0] - pts[0][0]
        dy = pts[1][1] - pts[0][1]
        length = math.hypot(dx, dy)
        if length == 0.0:
            raise ZeroLengthElement(f"element {element.id}: nodes coincide")
        k, m = beam_element(
            length,
            element.section["radius"],
            material,
            shear_factor=element.section.get("shear_factor", SHEAR_FACTOR),
            rotary_divisor=element.section.get("rotary_divisor", ROTARY_DIVISOR),
        )
        t = _beam_rotation(dx / length, dy / length)
        # diagonal lumped mass is rotation invariant (equal translational
        # entries per node), so only k needs the transformation
        return t.T @ k @ t, m
    if kind in ("CPE3", "CPE4"):
        if mass_formulation != "lumped":
            raise FemVqeError(f"{kind} supports only the lumped mass formulation")
        thickness = element.section.get("thickness", 1.0)
        return plane_strain_element(kind, pts, material, thickness=thickness)
    raise FemVqeError(f"unknown element kind {kind!r}")


def assemble(model: FemModel) -> tuple[CoordinateMatrix, CoordinateMatrix]:
    """Assemble global (K, M) over all DOFs in DofLabel order.

    Every DOF's diagonal slot is stored explicitly (even when zero) so the
    coordinate form preserves the full dimension.
    """
    model.mesh.validate()
    nodes = model.mesh.node_map()
    labels = model.mesh.all_dof_labels()
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)

    # dict-of-slots accumulation keeps memory proportional to the nonzeros;
    # addition order follows the element loop, so results are deterministic
    k_acc: dict[tuple[int, int], float] = {}
    m_acc: dict[tuple[int, int], float] = {}
    for el in model.mesh.elements:
        k_e, m_e = element_matrices(el, nodes, model.material, model.mass_formulation)
        gidx = [
            index[DofLabel(node_id, d)]
            for node_id in el.node_ids
            for d in range(1, ELEMENT_NDOF[el.kind] + 1)
        ]
        for a, gi in enumerate(gidx):
            for b, gj in enumerate(gidx):
                if gi < gj:
                    continue  # lower triangle only
                key = (gi, gj)
                if k_e[a, b] != 0.0:
                    k_acc[key] = k_acc.get(key, 0.0) + k_e[a, b]
                if m_e[a, b] != 0.0:
                    m_acc[key] = m_acc.get(key, 0.0) + m_e[a, b]

    def to_coordinate(acc: dict[tuple[int, int], float]) -> CoordinateMatrix:
        raw = []
        for i in range(n):
            raw.append((labels[i], labels[i], float(acc.get((i, i), 0.0))))
        for (i, j), value in acc.items():
            if i != j and value != 0.0:
                raw.append((labels[i], labels[j], float(value)))
        return CoordinateMatrix.from_entries(raw)

    return to_coordinate(k_acc), to_coordinate(m_acc)

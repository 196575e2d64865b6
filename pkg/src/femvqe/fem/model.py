"""Model data types: material, mesh, boundary conditions, DOF bookkeeping.

All quantities are SI (m, kg, Pa). Millimeter inputs are converted by the
case generators at the boundary, never stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import FemVqeError
from ..matrixio import BoundarySet, DofLabel

# node count per element kind, and local DOFs carried per node
ELEMENT_NODES = {"T2D2": 2, "B21": 2, "CPE3": 3, "CPE4": 4}
ELEMENT_NDOF = {"T2D2": 2, "B21": 3, "CPE3": 2, "CPE4": 2}


@dataclass(frozen=True)
class Material:
    """Linear-elastic isotropic material."""

    density: float  # kg/m^3
    youngs_modulus: float  # Pa
    poisson_ratio: float

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError(f"density must be > 0, got {self.density}")
        if self.youngs_modulus <= 0:
            raise ValueError(f"youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not 0 <= self.poisson_ratio < 0.5:
            raise ValueError(f"poisson_ratio must be in [0, 0.5), got {self.poisson_ratio}")


# Values as printed in the source data: rho = 7850 kg/m^3, E = 21e4 GPa
# (not the conventional 210 GPa for steel), nu = 0.3. E is overridable.
DEFAULT_MATERIAL = Material(density=7850.0, youngs_modulus=2.1e14, poisson_ratio=0.3)


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    node_ids: tuple[int, ...]
    section: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Mesh:
    nodes: tuple[Node, ...]
    elements: tuple[Element, ...]

    def node_map(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    def validate(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise FemVqeError("duplicate node ids in mesh")
        known = set(ids)
        for el in self.elements:
            if el.kind not in ELEMENT_NODES:
                raise FemVqeError(f"element {el.id}: unknown kind {el.kind!r}")
            if len(el.node_ids) != ELEMENT_NODES[el.kind]:
                raise FemVqeError(
                    f"element {el.id}: kind {el.kind} needs "
                    f"{ELEMENT_NODES[el.kind]} nodes, got {len(el.node_ids)}"
                )
            missing = set(el.node_ids) - known
            if missing:
                raise FemVqeError(f"element {el.id}: unknown node ids {sorted(missing)}")

    def dofs_per_node(self) -> int:
        return 3 if any(el.kind == "B21" for el in self.elements) else 2

    def all_dof_labels(self) -> list[DofLabel]:
        d = self.dofs_per_node()
        return [DofLabel(n.id, k) for n in sorted(self.nodes, key=lambda n: n.id) for k in range(1, d + 1)]


@dataclass(frozen=True)
class FemModel:
    mesh: Mesh
    material: Material
    bc: BoundarySet
    mass_formulation: str  # "consistent" | "lumped"
    n_all_dof: int
    n_fixed_dof: int
    n_free_dof: int

    def __post_init__(self):
        if self.mass_formulation not in ("consistent", "lumped"):
            raise ValueError(f"mass_formulation must be consistent|lumped, got {self.mass_formulation!r}")
        if self.n_free_dof != self.n_all_dof - self.n_fixed_dof:
            raise ValueError("n_free_dof must equal n_all_dof - n_fixed_dof")

    @classmethod
    def build(cls, mesh: Mesh, material: Material, bc: BoundarySet, mass_formulation: str) -> "FemModel":
        mesh.validate()
        n_all = len(mesh.all_dof_labels())
        return cls(
            mesh=mesh,
            material=material,
            bc=bc,
            mass_formulation=mass_formulation,
            n_all_dof=n_all,
            n_fixed_dof=len(bc),
            n_free_dof=n_all - len(bc),
        )


def model_to_json(model: FemModel, case: str | None = None) -> str:
    """Serialize a model descriptor (nodes, elements, bc, material, counts)."""
    doc = {
        "case": case,
        "unit_system": "SI (m, kg, Pa)",
        "material": {
            "density": model.material.density,
            "youngs_modulus": model.material.youngs_modulus,
            "poisson_ratio": model.material.poisson_ratio,
        },
        "mass_formulation": model.mass_formulation,
        "nodes": [[n.id, n.x, n.y] for n in model.mesh.nodes],
        "elements": [
            {"id": e.id, "kind": e.kind, "nodes": list(e.node_ids), "section": e.section}
            for e in model.mesh.elements
        ],
        "bc": [[lab.node_id, lab.dof_index] for lab in sorted(model.bc.fixed)],
        "counts": {
            "n_all_dof": model.n_all_dof,
            "n_fixed_dof": model.n_fixed_dof,
            "n_free_dof": model.n_free_dof,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str) -> FemModel:
    doc = json.loads(text)
    mat = Material(**doc["material"])
    nodes = tuple(Node(int(i), float(x), float(y)) for i, x, y in doc["nodes"])
    elements = tuple(
        Element(int(e["id"]), str(e["kind"]), tuple(int(n) for n in e["nodes"]), dict(e["section"]))
        for e in doc["elements"]
    )
    bc = BoundarySet.of(DofLabel(int(n), int(d)) for n, d in doc["bc"])
    return FemModel.build(Mesh(nodes, elements), mat, bc, doc["mass_formulation"])


def boundary_from_json(text: str) -> BoundarySet:
    """Read just the fixed-DOF set from a model descriptor."""
    doc = json.loads(text)
    return BoundarySet.of(DofLabel(int(n), int(d)) for n, d in doc["bc"])

"""Finite-element models: elements, assembly, and the three case studies."""

from .assembly import assemble
from .cases import generate_case
from .elements import beam_element, plane_strain_element, truss_element
from .model import (
    DEFAULT_MATERIAL,
    Element,
    FemModel,
    Material,
    Mesh,
    Node,
    boundary_from_json,
    model_from_json,
    model_to_json,
)

__all__ = [
    "DEFAULT_MATERIAL",
    "Element",
    "FemModel",
    "Material",
    "Mesh",
    "Node",
    "assemble",
    "beam_element",
    "boundary_from_json",
    "generate_case",
    "model_from_json",
    "model_to_json",
    "plane_strain_element",
    "truss_element",
]

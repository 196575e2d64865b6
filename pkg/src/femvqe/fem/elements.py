"""Element stiffness and mass matrices: 2-node bar, Timoshenko beam, plane strain.

Local DOF orders:
    T2D2  (u1a, u2a, u1b, u2b), global axes
    B21   (u1a, u2a, th_a, u1b, u2b, th_b), local x along the element
    CPE3/CPE4  (u1, u2) per node in the given node order
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateElement, InvalidSection, ZeroLengthElement
from .model import Material

# default Timoshenko shear correction for solid circular sections; the
# lumped rotary inertia divisor alpha gives a per-node entry rho*A*L^3/(2*alpha)
SHEAR_FACTOR = 0.9
ROTARY_DIVISOR = 24.0


def truss_element(
    node_a: tuple[float, float],
    node_b: tuple[float, float],
    area: float,
    mat: Material,
) -> tuple[np.ndarray, np.ndarray]:
    """Axial bar in global coordinates with consistent mass."""
    if area <= 0:
        raise InvalidSection(f"area must be > 0, got {area}")
    dx = node_b[0] - node_a[0]
    dy = node_b[1] - node_a[1]
    length = math.hypot(dx, dy)
    if length == 0.0:
        raise ZeroLengthElement(f"nodes coincide at {node_a}")
    c, s = dx / length, dy / length
    t = np.array([-c, -s, c, s])
    k = (mat.youngs_modulus * area / length) * np.outer(t, t)
    # consistent mass: rho*A*L/6 * [[2,1],[1,2]] per axis, rotation invariant
    m = np.zeros((4, 4))
    coef = mat.density * area * length / 6.0
    for axis in (0, 1):
        m[axis, axis] = m[axis + 2, axis + 2] = 2.0 * coef
        m[axis, axis + 2] = m[axis + 2, axis] = coef
    return k, m


def truss_lumped_mass(length: float, area: float, mat: Material) -> np.ndarray:
    """Row-sum lumped variant: rho*A*L/2 per node per axis."""
    half = mat.density * area * length / 2.0
    return np.diag([half, half, half, half])


def beam_element(
    length: float,
    radius: float,
    mat: Material,
    shear_factor: float = SHEAR_FACTOR,
    rotary_divisor: float = ROTARY_DIVISOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Shear-deformable 2-node beam with axial DOFs and diagonal lumped mass.

    Solid circular section: A = pi r^2, I = pi r^4 / 4. The bending block is
    the standard shear-flexible form with phi = 12EI / (kappa G A L^2); at
    kappa -> inf it degenerates to the Euler-Bernoulli pattern.
    """
    if length <= 0:
        raise InvalidSection(f"length must be > 0, got {length}")
    if radius <= 0:
        raise InvalidSection(f"radius must be > 0, got {radius}")
    # nominal range is (0, 1]; larger values (up to the kappa -> inf
    # Euler-Bernoulli limit) are accepted for limiting-case studies
    if not shear_factor > 0:
        raise InvalidSection(f"shear_factor must be > 0, got {shear_factor}")
    if rotary_divisor <= 0:
        raise InvalidSection(f"rotary_divisor must be > 0, got {rotary_divisor}")

    e = mat.youngs_modulus
    area = math.pi * radius**2
    inertia = math.pi * radius**4 / 4.0
    g = e / (2.0 * (1.0 + mat.poisson_ratio))
    phi = 12.0 * e * inertia / (shear_factor * g * area * length**2)

    k = np.zeros((6, 6))
    ax = e * area / length
    k[0, 0] = k[3, 3] = ax
    k[0, 3] = k[3, 0] = -ax

    coef = e * inertia / ((1.0 + phi) * length**3)
    ll = length
    bend = coef * np.array(
        [
            [12.0, 6.0 * ll, -12.0, 6.0 * ll],
            [6.0 * ll, (4.0 + phi) * ll**2, -6.0 * ll, (2.0 - phi) * ll**2],
            [-12.0, -6.0 * ll, 12.0, -6.0 * ll],
            [6.0 * ll, (2.0 - phi) * ll**2, -6.0 * ll, (4.0 + phi) * ll**2],
        ]
    )
    idx = [1, 2, 4, 5]
    for a, ia in enumerate(idx):
        for b, ib in enumerate(idx):
            k[ia, ib] = bend[a, b]

    half = mat.density * area * length / 2.0
    rot = half * length**2 / rotary_divisor
    m = np.diag([half, half, rot, half, half, rot])
    return k, m


def plane_strain_d(mat: Material) -> np.ndarray:
    e, nu = mat.youngs_modulus, mat.poisson_ratio
    c = e / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return c * np.array(
        [
            [1.0 - nu, nu, 0.0],
            [nu, 1.0 - nu, 0.0],
            [0.0, 0.0, (1.0 - 2.0 * nu) / 2.0],
        ]
    )


_GAUSS_2 = (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0))
_CORNERS_Q4 = ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))


def plane_strain_element(
    kind: str,
    coords,
    mat: Material,
    thickness: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """CPE3 (single-point, exact) or CPE4 (2x2 Gauss), unit thickness.

    Mass is row-sum lumped and diagonal; total element mass equals
    rho * area * thickness.
    """
    coords = np.asarray(coords, dtype=float)
    d = plane_strain_d(mat)
    if kind == "CPE3":
        if coords.shape != (3, 2):
            raise DegenerateElement(f"CPE3 needs 3 nodes, got shape {coords.shape}")
        x, y = coords[:, 0], coords[:, 1]
        det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
        if det <= 0:
            raise DegenerateElement(f"CPE3 area nonpositive (det={det}); node order must be CCW")
        area = det / 2.0
        # B matrix of the constant-strain triangle
        b_i = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]]) / det
        c_i = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]]) / det
        b = np.zeros((3, 6))
        for i in range(3):
            b[0, 2 * i] = b_i[i]
            b[1, 2 * i + 1] = c_i[i]
            b[2, 2 * i] = c_i[i]
            b[2, 2 * i + 1] = b_i[i]
        k = b.T @ d @ b * area * thickness
        node_mass = mat.density * area * thickness / 3.0
        m = np.diag([node_mass] * 6)
        return k, m
    if kind == "CPE4":
        if coords.shape != (4, 2):
            raise DegenerateElement(f"CPE4 needs 4 nodes, got shape {coords.shape}")
        k = np.zeros((8, 8))
        node_int = np.zeros(4)  # integral of each shape function
        for xi in _GAUSS_2:
            for eta in _GAUSS_2:
                shape = np.array(
                    [(1 + xi * cx) * (1 + eta * cy) / 4.0 for cx, cy in _CORNERS_Q4]
                )
                dshape = np.array(
                    [
                        [cx * (1 + eta * cy) / 4.0, cy * (1 + xi * cx) / 4.0]
                        for cx, cy in _CORNERS_Q4
                    ]
                )  # (4, 2): d/dxi, d/deta
                jac = dshape.T @ coords  # [[dx/dxi, dy/dxi], [dx/deta, dy/deta]]
                det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
                if det <= 0:
                    raise DegenerateElement(
                        f"CPE4 Jacobian nonpositive at gauss point ({xi:.3f},{eta:.3f})"
                    )
                dndx = dshape @ np.linalg.inv(jac).T  # (4, 2): d/dx, d/dy
                b = np.zeros((3, 8))
                for i in range(4):
                    b[0, 2 * i] = dndx[i, 0]
                    b[1, 2 * i + 1] = dndx[i, 1]
                    b[2, 2 * i] = dndx[i, 1]
                    b[2, 2 * i + 1] = dndx[i, 0]
                k += b.T @ d @ b * det * thickness
                node_int += shape * det
        node_mass = mat.density * thickness * node_int
        m = np.diag(np.repeat(node_mass, 2))
        return k, m
    raise DegenerateElement(f"unknown plane-strain kind {kind!r}")

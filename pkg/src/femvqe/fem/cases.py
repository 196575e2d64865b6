"""The three built-in case studies, discretized to exactly 2^N free DOFs.

All three use fixed geometry and material; only the subdivision is searched.
Dimensions are given in mm and converted to SI here.

truss_hex   regular hexagon of pin-jointed bars, member length 1.5 mm,
            bar radius 0.5 mm, consistent mass. Bottom-edge nodes are fully
            fixed; every other node keeps only u2 free. The four slanted
            members are split into k equal segments (k = 2^(N-2)); the
            horizontal top and bottom members are never split, since a
            pin-jointed interior node on a straight horizontal chain would
            carry no transverse stiffness.
beam        both-ends-pinned Timoshenko beam, span 9 mm, radius 1 mm,
            lumped mass. With 3 DOFs per node and 4 fixed, free = 3n - 4,
            so the element count is computed directly; only odd N are
            reachable (2^N = 2 mod 3 requires odd N).
plate_hole  quarter of a 2 mm x 2 mm plate with a central hole r = 0.5 mm,
            plane strain, unit thickness, lumped mass. Structured
            transfinite ring-to-square grid of CPE4 cells between the
            quarter-arc and the two outer edges; the two outer-edge portions
            carry independent circumferential counts, and leftover DOF
            deficits are closed by splitting selected quads into 4 CPE3
            triangles around an added centroid node (+2 free DOFs each).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DegenerateElement, TargetUnreachable
from ..matrixio import BoundarySet, DofLabel
from .model import DEFAULT_MATERIAL, Element, FemModel, Material, Mesh, Node

_MM = 1e-3

TRUSS_MEMBER_LENGTH = 1.5 * _MM
TRUSS_BAR_RADIUS = 0.5 * _MM
BEAM_SPAN = 9.0 * _MM
BEAM_RADIUS = 1.0 * _MM
PLATE_HALF_WIDTH = 1.0 * _MM  # quarter model of the 2 mm square
PLATE_HOLE_RADIUS = 0.5 * _MM


def generate_case(case: str, n_qubits: int, material: Material | None = None) -> FemModel:
    """Build the named case with n_free_dof = 2^n_qubits exactly."""
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    material = material or DEFAULT_MATERIAL
    builders = {
        "truss_hex": _truss_hex_model,
        "beam": _beam_model,
        "plate_hole": _plate_hole_model,
    }
    if case not in builders:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(builders)}")
    model = builders[case](2**n_qubits, material)
    if model.n_free_dof != 2**n_qubits:
        raise AssertionError(
            f"internal error: case {case} produced {model.n_free_dof} free DOFs, "
            f"wanted {2 ** n_qubits}"
        )
    return model


def _two_nearest(target: int, achievable) -> list[int]:
    """The closest distinct achievable counts (at most two) to the target."""
    pool = sorted(set(achievable))
    pool.sort(key=lambda v: (abs(v - target), v))
    return sorted(pool[:2])


# --- Case I: hexagonal truss -------------------------------------------------

def _truss_hex_model(target: int, material: Material) -> FemModel:
    # free DOFs: u2 at the four non-bottom vertices plus u2 at each interior
    # node of the four slanted chains -> 4 + 4(k-1) = 4k
    if target % 4 != 0 or target < 4:
        k_near = max(1, round(target / 4))
        nearest = _two_nearest(target, [4 * max(1, k_near - 1), 4 * k_near, 4 * (k_near + 1)])
        raise TargetUnreachable("truss_hex", target, nearest)
    k = target // 4

    side = TRUSS_MEMBER_LENGTH
    h = math.sqrt(3.0) / 2.0 * side
    verts = [
        (-side / 2.0, 0.0),  # 1 bottom-left
        (side / 2.0, 0.0),   # 2 bottom-right
        (side, h),           # 3 right
        (side / 2.0, 2 * h), # 4 top-right
        (-side / 2.0, 2 * h),# 5 top-left
        (-side, h),          # 6 left
    ]
    nodes = [Node(i + 1, x, y) for i, (x, y) in enumerate(verts)]
    bottom_nodes = {1, 2}

    section = {"area": math.pi * TRUSS_BAR_RADIUS**2}
    elements: list[Element] = []
    next_node = 7
    next_el = 1

    def add_member(na: int, nb: int):
        nonlocal next_el
        elements.append(Element(next_el, "T2D2", (na, nb), dict(section)))
        next_el += 1

    def add_chain(na: int, nb: int):
        # split edge na -> nb into k equal segments with k-1 interior nodes
        nonlocal next_node
        ax, ay = verts[na - 1]
        bx, by = verts[nb - 1]
        chain = [na]
        for j in range(1, k):
            f = j / k
            nodes.append(Node(next_node, ax + f * (bx - ax), ay + f * (by - ay)))
            chain.append(next_node)
            next_node += 1
        chain.append(nb)
        for a, b in zip(chain, chain[1:]):
            add_member(a, b)

    add_member(1, 2)  # bottom, unsplit
    add_member(4, 5)  # top, unsplit
    for na, nb in ((2, 3), (3, 4), (5, 6), (6, 1)):
        add_chain(na, nb)

    fixed = []
    for node in nodes:
        if node.id in bottom_nodes:
            fixed += [DofLabel(node.id, 1), DofLabel(node.id, 2)]
        else:
            fixed.append(DofLabel(node.id, 1))
    mesh = Mesh(tuple(nodes), tuple(elements))
    return FemModel.build(mesh, material, BoundarySet.of(fixed), "consistent")


# --- Case II: Timoshenko beam ------------------------------------------------

def _beam_model(target: int, material: Material) -> FemModel:
    # 3 DOFs per node, both end nodes pinned (u1 = u2 = 0): free = 3n - 4
    if (target + 4) % 3 != 0:
        n_below = (target + 4) // 3
        nearest = _two_nearest(
            target, [3 * n - 4 for n in (n_below, n_below + 1) if n >= 2]
        )
        raise TargetUnreachable("beam", target, nearest)
    n_nodes = (target + 4) // 3
    if n_nodes < 2:
        raise TargetUnreachable("beam", target, [2])

    section = {"radius": BEAM_RADIUS}
    nodes = [
        Node(i + 1, BEAM_SPAN * i / (n_nodes - 1), 0.0) for i in range(n_nodes)
    ]
    elements = [
        Element(i + 1, "B21", (i + 1, i + 2), dict(section)) for i in range(n_nodes - 1)
    ]
    fixed = [
        DofLabel(1, 1),
        DofLabel(1, 2),
        DofLabel(n_nodes, 1),
        DofLabel(n_nodes, 2),
    ]
    mesh = Mesh(tuple(nodes), tuple(elements))
    return FemModel.build(mesh, material, BoundarySet.of(fixed), "lumped")


# --- Case III: plate with hole -----------------------------------------------

@dataclass(frozen=True)
class _PlateGrid:
    n_c1: int  # circumferential cells mapped to the right outer edge (odd)
    n_c2: int  # circumferential cells mapped to the top outer edge
    n_r: int   # radial cell count
    splits: int  # quads replaced by 4 triangles to add 2 DOFs each

    @property
    def n_c(self) -> int:
        return self.n_c1 + self.n_c2

    @property
    def base_free(self) -> int:
        return 2 * self.n_c * (self.n_r + 1) - self.n_c1 - 1


def _plate_search(target: int) -> _PlateGrid | None:
    """Smallest-splits grid hitting the target, preferring square-ish cells."""
    best = None
    best_key = None
    for n_c1 in range(1, 64, 2):
        for n_c2 in range(1, 65):
            n_c = n_c1 + n_c2
            for n_r in range(1, 10_000):
                base = 2 * n_c * (n_r + 1) - n_c1 - 1
                if base > target:
                    break
                diff = target - base  # even: base is even, target is 2^N
                splits = diff // 2
                if splits > n_c * n_r:
                    continue
                # cell aspect ratio ~ (mid-path length / n_c) / (0.5 / n_r)
                penalty = abs(math.log(3.0 * n_r / n_c))
                key = (splits, penalty, n_c1, n_c2, n_r)
                if best_key is None or key < best_key:
                    best_key = key
                    best = _PlateGrid(n_c1, n_c2, n_r, splits)
    return best


def _plate_point(t: float, s: float) -> tuple[float, float]:
    """Transfinite map: inner quarter arc (s=0) to outer square edges (s=1)."""
    r = PLATE_HOLE_RADIUS
    w = PLATE_HALF_WIDTH
    ix = r * math.cos(math.pi / 2.0 * t)
    iy = r * math.sin(math.pi / 2.0 * t)
    if t <= 0.5:
        ox, oy = w, 2.0 * t * w
    else:
        ox, oy = (2.0 - 2.0 * t) * w, w
    return (1.0 - s) * ix + s * ox, (1.0 - s) * iy + s * oy


def _plate_hole_model(target: int, material: Material) -> FemModel:
    grid = _plate_search(target)
    if grid is None:
        # the coarsest grid (1,1,1) yields 6 free DOFs; everything even and
        # >= 6 is reachable via splits
        nearest = _two_nearest(target, [6, 8])
        raise TargetUnreachable("plate_hole", target, nearest)

    n_c, n_r = grid.n_c, grid.n_r
    t_stations = [0.5 * i / grid.n_c1 for i in range(grid.n_c1)] + [
        0.5 + 0.5 * j / grid.n_c2 for j in range(grid.n_c2 + 1)
    ]
    s_stations = [j / n_r for j in range(n_r + 1)]

    nodes: list[Node] = []
    node_id: dict[tuple[int, int], int] = {}
    for i in range(n_c + 1):
        for j in range(n_r + 1):
            nid = 1 + i * (n_r + 1) + j
            x, y = _plate_point(t_stations[i], s_stations[j])
            nodes.append(Node(nid, x, y))
            node_id[(i, j)] = nid

    # split the outermost ring first, walking circumferentially
    cells = [(i, j) for i in range(n_c) for j in range(n_r)]
    split_order = sorted(cells, key=lambda c: (-c[1], c[0]))
    split_set = set(split_order[: grid.splits])

    elements: list[Element] = []
    next_node = len(nodes) + 1
    next_el = 1
    section = {"thickness": 1.0}
    for i in range(n_c):
        for j in range(n_r):
            a = node_id[(i, j)]
            b = node_id[(i, j + 1)]
            c = node_id[(i + 1, j + 1)]
            d = node_id[(i + 1, j)]
            if (i, j) in split_set:
                tc = (t_stations[i] + t_stations[i + 1]) / 2.0
                sc = (s_stations[j] + s_stations[j + 1]) / 2.0
                x, y = _plate_point(tc, sc)
                nodes.append(Node(next_node, x, y))
                o = next_node
                next_node += 1
                for tri in ((a, b, o), (b, c, o), (c, d, o), (d, a, o)):
                    elements.append(Element(next_el, "CPE3", tri, dict(section)))
                    next_el += 1
            else:
                elements.append(Element(next_el, "CPE4", (a, b, c, d), dict(section)))
                next_el += 1

    _check_orientation(nodes, elements)

    fixed: set[DofLabel] = set()
    for j in range(n_r + 1):
        fixed.add(DofLabel(node_id[(0, j)], 2))  # bottom edge: u2 = 0
        fixed.add(DofLabel(node_id[(n_c, j)], 1))  # left edge: u1 = 0
    for i in range(grid.n_c1 + 1):
        fixed.add(DofLabel(node_id[(i, n_r)], 1))  # right edge: u1 = 0

    mesh = Mesh(tuple(nodes), tuple(elements))
    return FemModel.build(mesh, material, BoundarySet.of(sorted(fixed)), "lumped")


def _check_orientation(nodes: list[Node], elements: list[Element]):
    coords = {n.id: (n.x, n.y) for n in nodes}
    for el in elements:
        pts = [coords[n] for n in el.node_ids]
        area2 = 0.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            area2 += x0 * y1 - x1 * y0
        if area2 <= 0.0:
            raise DegenerateElement(
                f"element {el.id} ({el.kind}) has nonpositive area {area2 / 2.0}"
            )

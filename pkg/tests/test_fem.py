import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from femvqe.errors import (
    DegenerateElement,
    FemVqeError,
    InvalidSection,
    TargetUnreachable,
    ZeroLengthElement,
)
from femvqe.fem import (
    DEFAULT_MATERIAL,
    Element,
    FemModel,
    Material,
    Mesh,
    Node,
    assemble,
    beam_element,
    generate_case,
    model_from_json,
    model_to_json,
    plane_strain_element,
    truss_element,
)
from femvqe.fem.model import ELEMENT_NDOF
from femvqe.matrixio import BoundarySet, DofLabel, partition_free

MAT = Material(density=1.0, youngs_modulus=1.0, poisson_ratio=0.3)


class TestTrussElement:
    def test_horizontal_bar_stiffness(self):
        k, _ = truss_element((0, 0), (1, 0), 1.0, MAT)
        expect = np.zeros((4, 4))
        expect[np.ix_([0, 2], [0, 2])] = [[1, -1], [-1, 1]]
        assert np.allclose(k, expect, atol=1e-15)

    def test_consistent_mass_axial_block(self):
        mat = Material(density=6.0, youngs_modulus=1.0, poisson_ratio=0.3)
        _, m = truss_element((0, 0), (1, 0), 1.0, mat)
        assert np.allclose(m[np.ix_([0, 2], [0, 2])], [[2, 1], [1, 2]], atol=1e-15)
        assert np.allclose(m[np.ix_([1, 3], [1, 3])], [[2, 1], [1, 2]], atol=1e-15)

    @given(st.floats(-math.pi, math.pi), st.floats(0.2, 5.0), st.floats(0.1, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_rotation_oracle(self, angle, length, area):
        # independent oracle: rotate the axis-aligned element stiffness
        b = (length * math.cos(angle), length * math.sin(angle))
        k, m = truss_element((0.0, 0.0), b, area, MAT)
        k_local, m_local = truss_element((0.0, 0.0), (length, 0.0), area, MAT)
        c, s = math.cos(angle), math.sin(angle)
        r2 = np.array([[c, s], [-s, c]])
        rot = np.zeros((4, 4))
        rot[:2, :2] = r2
        rot[2:, 2:] = r2
        assert np.allclose(k, rot.T @ k_local @ rot, atol=1e-12 * np.abs(k_local).max())
        assert np.allclose(m, rot.T @ m_local @ rot, atol=1e-12 * np.abs(m_local).max())

    def test_stiffness_rank_one_psd(self):
        k, m = truss_element((0, 0), (0.3, 0.7), 2.0, MAT)
        vals = np.linalg.eigvalsh(k)
        assert np.sum(np.abs(vals) > 1e-12) == 1
        assert vals[0] > -1e-12
        assert np.all(np.linalg.eigvalsh(m) > 0)

    def test_zero_length(self):
        with pytest.raises(ZeroLengthElement):
            truss_element((1, 1), (1, 1), 1.0, MAT)

    def test_bad_area(self):
        with pytest.raises(InvalidSection):
            truss_element((0, 0), (1, 0), 0.0, MAT)


class TestBeamElement:
    def test_axial_block_matches_bar(self):
        k, _ = beam_element(2.0, 0.1, MAT)
        area = math.pi * 0.01
        assert k[0, 0] == pytest.approx(area * 1.0 / 2.0, rel=1e-14)
        assert k[0, 3] == pytest.approx(-area / 2.0, rel=1e-14)

    def test_euler_bernoulli_limit(self):
        length, radius = 2.0, 0.05
        e = MAT.youngs_modulus
        inertia = math.pi * radius**4 / 4.0
        k, _ = beam_element(length, radius, MAT, shear_factor=1e12)
        assert k[1, 1] == pytest.approx(12 * e * inertia / length**3, rel=1e-9)
        assert k[1, 2] == pytest.approx(6 * e * inertia / length**2, rel=1e-9)
        assert k[2, 2] == pytest.approx(4 * e * inertia / length, rel=1e-9)
        assert k[2, 5] == pytest.approx(2 * e * inertia / length, rel=1e-9)

    def test_rigid_body_nullspace(self):
        k, _ = beam_element(1.7, 0.2, MAT)
        scale = np.abs(k).max()
        translate = np.array([0, 1, 0, 0, 1, 0], dtype=float)
        assert np.abs(k @ translate).max() <= 1e-10 * scale
        rotate = np.array([0, 0, 1, 0, 1.7, 1], dtype=float)
        assert np.abs(k @ rotate).max() <= 1e-10 * scale
        axial = np.array([1, 0, 0, 1, 0, 0], dtype=float)
        assert np.abs(k @ axial).max() <= 1e-10 * scale

    @given(
        st.floats(0.5, 4.0),
        st.floats(0.02, 0.3),
        st.floats(0.3, 1.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_clamped_tip_flexibility_oracle(self, length, radius, kappa):
        """Force-method oracle: invert the cantilever tip flexibility.

        With node a clamped, the (u2b, th_b) stiffness block must equal the
        inverse of F = [[L^3/3EI + L/(kGA), L^2/2EI], [L^2/2EI, L/EI]].
        """
        k, _ = beam_element(length, radius, MAT, shear_factor=kappa)
        e = MAT.youngs_modulus
        area = math.pi * radius**2
        inertia = math.pi * radius**4 / 4.0
        g = e / (2 * (1 + MAT.poisson_ratio))
        flex = np.array(
            [
                [length**3 / (3 * e * inertia) + length / (kappa * g * area), length**2 / (2 * e * inertia)],
                [length**2 / (2 * e * inertia), length / (e * inertia)],
            ]
        )
        block = k[np.ix_([4, 5], [4, 5])]
        assert np.allclose(block, np.linalg.inv(flex), rtol=1e-9)

    def test_lumped_mass_entries(self):
        mat = Material(density=3.0, youngs_modulus=1.0, poisson_ratio=0.3)
        length, radius = 2.0, 0.1
        _, m = beam_element(length, radius, mat, rotary_divisor=24.0)
        area = math.pi * radius**2
        half = mat.density * area * length / 2
        assert np.allclose(np.diag(m), [half, half, half * length**2 / 24, half, half, half * length**2 / 24])
        assert np.count_nonzero(m - np.diag(np.diag(m))) == 0

    @pytest.mark.parametrize("bad", [dict(length=0), dict(radius=-1), dict(shear_factor=0), dict(rotary_divisor=0)])
    def test_invalid_section(self, bad):
        args = dict(length=1.0, radius=0.1, shear_factor=0.9, rotary_divisor=24.0)
        args.update(bad)
        with pytest.raises(InvalidSection):
            beam_element(args["length"], args["radius"], MAT, args["shear_factor"], args["rotary_divisor"])


def oracle_cst_stiffness(coords, mat):
    """Independent CPE3 stiffness: shape-function coefficients by 3x3 solves."""
    e, nu = mat.youngs_modulus, mat.poisson_ratio
    d = e / ((1 + nu) * (1 - 2 * nu)) * np.array(
        [[1 - nu, nu, 0], [nu, 1 - nu, 0], [0, 0, (1 - 2 * nu) / 2]]
    )
    a = np.column_stack([np.ones(3), coords[:, 0], coords[:, 1]])
    area = abs(np.linalg.det(a)) / 2
    grads = np.zeros((3, 2))
    for i in range(3):
        rhs = np.zeros(3)
        rhs[i] = 1.0
        coef = np.linalg.solve(a, rhs)  # N_i = c0 + c1 x + c2 y
        grads[i] = coef[1:]
    b = np.zeros((3, 6))
    for i in range(3):
        b[0, 2 * i] = grads[i, 0]
        b[1, 2 * i + 1] = grads[i, 1]
        b[2, 2 * i] = grads[i, 1]
        b[2, 2 * i + 1] = grads[i, 0]
    return b.T @ d @ b * area


class TestPlaneStrainElement:
    def test_cst_unit_right_triangle_oracle(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        k, _ = plane_strain_element("CPE3", coords, MAT)
        assert np.allclose(k, oracle_cst_stiffness(coords, MAT), atol=1e-12)

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_cst_random_triangle_oracle(self, seed):
        rng = np.random.default_rng(seed)
        coords = rng.uniform(-2, 2, size=(3, 2))
        x, y = coords[:, 0], coords[:, 1]
        det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
        if abs(det) < 1e-2:
            return
        if det < 0:
            coords = coords[[0, 2, 1]]
        k, _ = plane_strain_element("CPE3", coords, MAT)
        oracle = oracle_cst_stiffness(coords, MAT)
        assert np.allclose(k, oracle, atol=1e-11 * max(1.0, np.abs(oracle).max()))

    def test_rigid_modes_triangle(self):
        coords = np.array([[0.0, 0.0], [2.0, 0.3], [0.5, 1.5]])
        k, _ = plane_strain_element("CPE3", coords, MAT)
        scale = np.abs(k).max()
        tx = np.array([1, 0, 1, 0, 1, 0], dtype=float)
        ty = np.array([0, 1, 0, 1, 0, 1], dtype=float)
        rot = np.column_stack([-coords[:, 1], coords[:, 0]]).ravel()
        for v in (tx, ty, rot):
            assert np.abs(k @ v).max() <= 1e-10 * scale

    def test_rigid_modes_quad(self):
        coords = np.array([[0.0, 0.0], [2.0, 0.1], [2.2, 1.9], [-0.1, 1.7]])
        k, _ = plane_strain_element("CPE4", coords, MAT)
        scale = np.abs(k).max()
        tx = np.array([1, 0] * 4, dtype=float)
        ty = np.array([0, 1] * 4, dtype=float)
        rot = np.column_stack([-coords[:, 1], coords[:, 0]]).ravel()
        for v in (tx, ty, rot):
            assert np.abs(k @ v).max() <= 1e-10 * scale

    def test_unit_square_lumped_mass(self):
        mat = Material(density=4.0, youngs_modulus=1.0, poisson_ratio=0.3)
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        _, m = plane_strain_element("CPE4", coords, mat)
        assert np.allclose(np.diag(m), np.ones(8), atol=1e-14)

    def test_affine_patch_energy_quad(self):
        # a bilinear quad reproduces affine fields exactly; the strain energy
        # of a constant-strain field must equal eps' D eps * area
        coords = np.array([[0.0, 0.0], [1.5, 0.2], [1.8, 1.4], [-0.2, 1.1]])
        k, _ = plane_strain_element("CPE4", coords, MAT)
        rng = np.random.default_rng(5)
        grad = rng.normal(size=(2, 2))
        disp = (coords @ grad.T).ravel()
        eps = np.array([grad[0, 0], grad[1, 1], grad[0, 1] + grad[1, 0]])
        x, y = coords[:, 0], coords[:, 1]
        area = 0.5 * abs(
            np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
        )
        e, nu = MAT.youngs_modulus, MAT.poisson_ratio
        d = e / ((1 + nu) * (1 - 2 * nu)) * np.array(
            [[1 - nu, nu, 0], [nu, 1 - nu, 0], [0, 0, (1 - 2 * nu) / 2]]
        )
        assert disp @ k @ disp == pytest.approx(eps @ d @ eps * area, rel=1e-10)

    def test_lumped_mass_total_is_density_times_area(self):
        coords = np.array([[0.0, 0.0], [2.0, 0.1], [2.2, 1.9], [-0.1, 1.7]])
        x, y = coords[:, 0], coords[:, 1]
        area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
        _, m = plane_strain_element("CPE4", coords, MAT)
        assert np.trace(m) / 2 == pytest.approx(MAT.density * area, rel=1e-12)

    def test_degenerate_triangle(self):
        with pytest.raises(DegenerateElement):
            plane_strain_element("CPE3", [[0, 0], [1, 0], [2, 0]], MAT)
        with pytest.raises(DegenerateElement):  # clockwise
            plane_strain_element("CPE3", [[0, 0], [0, 1], [1, 0]], MAT)

    def test_degenerate_quad(self):
        bowtie = [[0, 0], [1, 1], [1, 0], [0, 1]]
        with pytest.raises(DegenerateElement):
            plane_strain_element("CPE4", bowtie, MAT)


def oracle_assemble(model):
    """Brute-force dense scatter-add, written independently of assembly.py."""
    nodes = {n.id: n for n in model.mesh.nodes}
    ndof = 3 if any(e.kind == "B21" for e in model.mesh.elements) else 2
    ids = sorted(nodes)
    pos = {(nid, d): ids.index(nid) * ndof + (d - 1) for nid in ids for d in range(1, ndof + 1)}
    n = len(ids) * ndof
    k_g = np.zeros((n, n))
    m_g = np.zeros((n, n))
    from femvqe.fem.assembly import element_matrices

    for el in model.mesh.elements:
        k_e, m_e = element_matrices(el, nodes, model.material, model.mass_formulation)
        local = ELEMENT_NDOF[el.kind]
        gdofs = []
        for nid in el.node_ids:
            for d in range(1, local + 1):
                gdofs.append(pos[(nid, d)])
        for a in range(len(gdofs)):
            for b in range(len(gdofs)):
                k_g[gdofs[a], gdofs[b]] += k_e[a, b]
                m_g[gdofs[a], gdofs[b]] += m_e[a, b]
    return k_g, m_g


class TestAssembly:
    def test_single_element_equals_element_matrix(self):
        mesh = Mesh(
            (Node(1, 0, 0), Node(2, 1, 0)),
            (Element(1, "T2D2", (1, 2), {"area": 1.0}),),
        )
        model = FemModel.build(mesh, MAT, BoundarySet(), "consistent")
        k, m = assemble(model)
        k_e, m_e = truss_element((0, 0), (1, 0), 1.0, MAT)
        k_dense, _ = k.to_dense()
        m_dense, _ = m.to_dense()
        assert np.allclose(k_dense, k_e, atol=1e-15)
        assert np.allclose(m_dense, m_e, atol=1e-15)

    def test_two_collinear_bars_superpose(self):
        mesh = Mesh(
            (Node(1, 0, 0), Node(2, 1, 0), Node(3, 2, 0)),
            (
                Element(1, "T2D2", (1, 2), {"area": 1.0}),
                Element(2, "T2D2", (2, 3), {"area": 1.0}),
            ),
        )
        model = FemModel.build(mesh, MAT, BoundarySet(), "consistent")
        k, _ = assemble(model)
        k_dense, labels = k.to_dense()
        mid = labels.index(DofLabel(2, 1))
        assert k_dense[mid, mid] == pytest.approx(2.0, rel=1e-14)

    def test_three_element_beam_matches_oracle(self):
        nodes = tuple(Node(i + 1, i * 0.5, 0.0) for i in range(4))
        elements = tuple(
            Element(i + 1, "B21", (i + 1, i + 2), {"radius": 0.1}) for i in range(3)
        )
        model = FemModel.build(Mesh(nodes, elements), MAT, BoundarySet(), "lumped")
        k, m = assemble(model)
        k_dense, _ = k.to_dense()
        m_dense, _ = m.to_dense()
        k_oracle, m_oracle = oracle_assemble(model)
        assert np.allclose(k_dense, k_oracle, atol=1e-12 * np.abs(k_oracle).max())
        assert np.allclose(m_dense, m_oracle, atol=1e-12 * np.abs(m_oracle).max())

    def test_mixed_plate_mesh_matches_oracle(self):
        model = generate_case("plate_hole", 3)  # contains a split cell
        k, m = assemble(model)
        k_dense, _ = k.to_dense()
        m_dense, _ = m.to_dense()
        k_oracle, m_oracle = oracle_assemble(model)
        assert np.allclose(k_dense, k_oracle, atol=1e-9 * np.abs(k_oracle).max())
        assert np.allclose(m_dense, m_oracle, atol=1e-9 * np.abs(m_oracle).max())

    def test_consistent_mass_rejected_for_beam(self):
        mesh = Mesh(
            (Node(1, 0, 0), Node(2, 1, 0)),
            (Element(1, "B21", (1, 2), {"radius": 0.1}),),
        )
        model = FemModel.build(mesh, MAT, BoundarySet(), "consistent")
        with pytest.raises(FemVqeError):
            assemble(model)


FEASIBLE = [("truss_hex", n) for n in range(2, 8)] + [
    ("beam", n) for n in (1, 3, 5, 7)
] + [("plate_hole", n) for n in range(3, 8)]


class TestGenerateCase:
    @pytest.mark.parametrize("case,n", FEASIBLE)
    def test_exact_free_dof_count(self, case, n):
        model = generate_case(case, n)
        assert model.n_free_dof == 2**n
        k, _ = assemble(model)
        free, labels = partition_free(k, model.bc)
        assert free.shape == (2**n, 2**n)
        assert model.n_all_dof - model.n_fixed_dof == len(labels)

    @pytest.mark.parametrize(
        "case,n,nearest",
        [
            ("truss_hex", 1, [4, 8]),
            ("beam", 2, [2, 5]),
            ("beam", 4, [14, 17]),
            ("beam", 6, [62, 65]),
            ("plate_hole", 1, [6, 8]),
            ("plate_hole", 2, [6, 8]),
        ],
    )
    def test_unreachable_targets_report_nearest(self, case, n, nearest):
        with pytest.raises(TargetUnreachable) as exc:
            generate_case(case, n)
        assert exc.value.nearest == nearest
        assert str(2**n) in str(exc.value)

    def test_beam_n3_arithmetic(self):
        model = generate_case("beam", 3)
        assert len(model.mesh.nodes) == 4
        assert len(model.mesh.elements) == 3
        assert model.n_all_dof == 12
        assert model.n_fixed_dof == 4

    @pytest.mark.parametrize("case,n", FEASIBLE)
    def test_global_k_psd_and_m_pd(self, case, n):
        model = generate_case(case, n)
        k, m = assemble(model)
        k_dense, _ = k.to_dense()
        m_dense, _ = m.to_dense()
        k_vals = np.linalg.eigvalsh(k_dense)
        assert k_vals[0] >= -1e-9 * np.abs(k_vals).max()
        assert np.linalg.eigvalsh(m_dense)[0] > 0
        if model.mass_formulation == "lumped":
            assert np.count_nonzero(m_dense - np.diag(np.diag(m_dense))) == 0

    @pytest.mark.parametrize("case,n", [("truss_hex", 3), ("beam", 3), ("plate_hole", 4)])
    def test_rigid_translations_in_unconstrained_nullspace(self, case, n):
        model = generate_case(case, n)
        k, _ = assemble(model)
        k_dense, labels = k.to_dense()
        scale = np.abs(k_dense).max()
        for direction in (1, 2):
            v = np.array([1.0 if lab.dof_index == direction else 0.0 for lab in labels])
            assert np.abs(k_dense @ v).max() <= 1e-8 * scale

    @pytest.mark.parametrize("case,n", FEASIBLE)
    def test_free_block_positive_definite(self, case, n):
        model = generate_case(case, n)
        k, _ = assemble(model)
        free, _ = partition_free(k, model.bc)
        assert np.linalg.eigvalsh(free)[0] > 0

    def test_beam_lumped_mass_totals(self):
        model = generate_case("beam", 3)
        _, m = assemble(model)
        m_dense, labels = m.to_dense()
        mat = model.material
        total = mat.density * math.pi * (1e-3) ** 2 * 9e-3
        for direction in (1, 2):
            got = sum(
                m_dense[i, i] for i, lab in enumerate(labels) if lab.dof_index == direction
            )
            assert got == pytest.approx(total, rel=1e-12)

    def test_plate_lumped_mass_totals(self):
        model = generate_case("plate_hole", 4)
        _, m = assemble(model)
        m_dense, labels = m.to_dense()
        coords = {node.id: (node.x, node.y) for node in model.mesh.nodes}
        area = 0.0
        for el in model.mesh.elements:
            pts = [coords[i] for i in el.node_ids]
            shoelace = 0.0
            for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
                shoelace += x0 * y1 - x1 * y0
            area += shoelace / 2
        total = model.material.density * area
        got = sum(m_dense[i, i] for i, lab in enumerate(labels) if lab.dof_index == 1)
        assert got == pytest.approx(total, rel=1e-12)

    def test_truss_consistent_mass_totals(self):
        model = generate_case("truss_hex", 3)
        _, m = assemble(model)
        m_dense, labels = m.to_dense()
        coords = {node.id: (node.x, node.y) for node in model.mesh.nodes}
        length_total = 0.0
        for el in model.mesh.elements:
            (xa, ya), (xb, yb) = (coords[i] for i in el.node_ids)
            length_total += math.hypot(xb - xa, yb - ya)
        total = model.material.density * el.section["area"] * length_total
        got = sum(m_dense[i, :].sum() for i, lab in enumerate(labels) if lab.dof_index == 1)
        assert got == pytest.approx(total, rel=1e-12)

    def test_truss_geometry_member_lengths(self):
        model = generate_case("truss_hex", 2)  # unsplit slants: 6 members
        coords = {node.id: (node.x, node.y) for node in model.mesh.nodes}
        for el in model.mesh.elements:
            (xa, ya), (xb, yb) = (coords[i] for i in el.node_ids)
            assert math.hypot(xb - xa, yb - ya) == pytest.approx(1.5e-3, rel=1e-12)

    def test_plate_bc_assignment(self):
        model = generate_case("plate_hole", 4)
        coords = {node.id: (node.x, node.y) for node in model.mesh.nodes}
        w = 1e-3
        for lab in model.bc:
            x, y = coords[lab.node_id]
            if lab.dof_index == 2:
                assert abs(y) < 1e-12  # bottom edge only
            else:
                assert abs(x) < 1e-12 or abs(x - w) < 1e-12  # left or right edge

    def test_material_override(self):
        soft = Material(density=7850.0, youngs_modulus=2.1e11, poisson_ratio=0.3)
        model = generate_case("beam", 3, material=soft)
        assert model.material.youngs_modulus == 2.1e11

    def test_invalid_case_name(self):
        with pytest.raises(ValueError):
            generate_case("bridge", 3)

    def test_model_json_round_trip(self):
        model = generate_case("plate_hole", 3)
        again = model_from_json(model_to_json(model, case="plate_hole"))
        assert again == model

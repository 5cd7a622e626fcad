import numpy as np
import pytest
from scipy.integrate import quad

from discharge_sim.geometry import (BoundaryTag, DomainSpec, Rectangle,
                                    TouchDown, build_mesh, gap_profile,
                                    gap_profile_derivative)


class TestProfiles:
    def test_rectangle_constant(self):
        spec = DomainSpec(r=1.0, profile=Rectangle(h=2.0), nx=4, ny=4)
        assert gap_profile(0.3, spec) == 2.0

    def test_touchdown_minimum(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=2.0), nx=4, ny=4)
        assert gap_profile(0.0, spec) == pytest.approx(0.1, abs=0)

    def test_touchdown_power_evaluation(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=2.0), nx=4, ny=4)
        expected = 0.1 + 2.0 * 0.5 ** (4.0 / 3.0)
        assert gap_profile(0.5, spec) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.8937005, abs=1e-6)

    def test_even_in_x(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=2.0), nx=4, ny=4)
        xs = np.linspace(0, 1, 11)
        assert np.array_equal(gap_profile(xs, spec), gap_profile(-xs, spec))

    def test_out_of_range_rejected(self):
        spec = DomainSpec(r=1.0, profile=Rectangle(h=1.0), nx=4, ny=4)
        with pytest.raises(ValueError):
            gap_profile(1.5, spec)

    def test_derivative_odd(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=2.0), nx=4, ny=4)
        assert gap_profile_derivative(0.25, spec) == pytest.approx(
            -gap_profile_derivative(-0.25, spec))


class TestSpecValidation:
    def test_degenerate_touchdown_rejected(self):
        with pytest.raises(ValueError):
            TouchDown(g0=0.0)

    def test_negative_sizes_rejected(self):
        with pytest.raises(ValueError):
            Rectangle(h=-1.0)
        with pytest.raises(ValueError):
            DomainSpec(r=-1.0, profile=Rectangle(h=1.0), nx=4, ny=4)
        with pytest.raises(ValueError):
            DomainSpec(r=1.0, profile=Rectangle(h=1.0), nx=1, ny=4)


class TestBuildMesh:
    def test_small_rectangle_nodes_and_tags(self):
        spec = DomainSpec(r=1.0, profile=Rectangle(h=1.0), nx=2, ny=2)
        mesh = build_mesh(spec)
        assert mesh.x.size == 9
        assert mesh.x[1, 1] == pytest.approx(0.0)
        assert mesh.y[1, 1] == pytest.approx(0.5)
        assert np.all(mesh.tags[:, 0] == BoundaryTag.ELECTRODE_B)
        assert np.all(mesh.tags[:, -1] == BoundaryTag.ELECTRODE_A)

    def test_touchdown_top_boundary(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=1.0), nx=4, ny=4)
        mesh = build_mesh(spec)
        assert mesh.w[mesh.nx // 2] == pytest.approx(0.1)
        assert mesh.y[-1, -1] == pytest.approx(1.1)

    def test_corner_nodes_are_dirichlet(self):
        mesh = build_mesh(DomainSpec(r=1.0, profile=Rectangle(h=1.0), nx=4, ny=4))
        for i in (0, -1):
            assert mesh.tags[i, 0] == BoundaryTag.ELECTRODE_B
            assert mesh.tags[i, -1] == BoundaryTag.ELECTRODE_A

    def test_boundary_tags_partition(self):
        mesh = build_mesh(DomainSpec(r=1.0, profile=TouchDown(g0=0.2), nx=6, ny=5))
        interior = mesh.tags == BoundaryTag.INTERIOR
        assert np.all(interior[1:-1, 1:-1])
        assert not np.any(interior[0, :]) and not np.any(interior[:, 0])
        assert np.all(mesh.dirichlet_mask() ^ mesh.neumann_mask()
                      == ~interior)

    def test_cell_areas_positive(self, touchdown_mesh):
        assert np.all(touchdown_mesh.cell_areas > 0)

    def test_area_sum_rectangle_exact(self):
        mesh = build_mesh(DomainSpec(r=0.75, profile=Rectangle(h=2.0), nx=8, ny=6))
        assert mesh.cell_areas.sum() == pytest.approx(1.5 * 2.0, rel=1e-13)

    def test_area_sum_touchdown_quadrature(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.1, c=1.0), nx=64, ny=8)
        mesh = build_mesh(spec)
        exact, _ = quad(lambda x: gap_profile(x, spec), -1.0, 1.0)
        # trapezoid-in-x area of the mapped quads converges at O(1/nx^2)
        assert mesh.cell_areas.sum() == pytest.approx(exact, rel=5.0 / 64**2)

    def test_mirror_symmetry(self):
        mesh = build_mesh(DomainSpec(r=1.0, profile=TouchDown(g0=0.2, c=1.5),
                                     nx=8, ny=4))
        assert np.allclose(mesh.w, mesh.w[::-1], atol=0, rtol=0)
        assert np.allclose(mesh.wprime, -mesh.wprime[::-1], atol=0, rtol=0)
        assert np.array_equal(mesh.tags, mesh.tags[::-1, :])
        assert np.allclose(mesh.cell_areas, mesh.cell_areas[::-1, :],
                           rtol=1e-14)

    def test_refinement_nests_nodes(self):
        spec = DomainSpec(r=1.0, profile=TouchDown(g0=0.2, c=1.0), nx=4, ny=4)
        coarse = build_mesh(spec)
        fine = build_mesh(DomainSpec(r=1.0, profile=spec.profile, nx=8, ny=8))
        assert np.allclose(coarse.x, fine.x[::2, ::2], atol=1e-15)
        assert np.allclose(coarse.y, fine.y[::2, ::2], atol=1e-15)

    def test_rectangle_metric_identity(self, unit_mesh):
        assert np.all(unit_mesh.dydxi == 0)
        assert np.all(unit_mesh.wprime == 0)
        assert np.all(unit_mesh.w == 1.0)

    def test_node_weights_sum_to_area(self, touchdown_mesh):
        assert touchdown_mesh.node_weights.sum() == pytest.approx(
            touchdown_mesh.cell_areas.sum(), rel=1e-13)

    def test_all_neumann_flag(self):
        mesh = build_mesh(DomainSpec(r=1.0, profile=Rectangle(h=1.0), nx=4, ny=4),
                          all_neumann=True)
        assert not mesh.dirichlet_mask().any()
        assert mesh.all_neumann

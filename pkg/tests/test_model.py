import numpy as np
import pytest

from discharge_sim.geometry import DomainSpec, Rectangle, build_mesh
from discharge_sim.model import (PhysParams, State, StreamFunction, Zero,
                                 build_velocity, default_bump,
                                 discrete_divergence, init_state)


class TestPhysParams:
    def test_defaults_valid(self):
        PhysParams()

    @pytest.mark.parametrize("name", ["eps0", "eps_plus", "eps_minus",
                                      "mu_plus", "mu_minus", "alpha1",
                                      "alpha2", "eta0"])
    def test_nonpositive_constants_rejected(self, name):
        with pytest.raises(ValueError, match=name):
            PhysParams(**{name: -1.0})
        with pytest.raises(ValueError, match=name):
            PhysParams(**{name: 0.0})

    def test_electrode_density_bounds(self):
        PhysParams(theta_p=1.0, theta_n=2.0, R_a=0.5, R_b=3.0)
        with pytest.raises(ValueError):
            PhysParams(theta_p=0.1, R_a=0.5, R_b=3.0)
        with pytest.raises(ValueError):
            PhysParams(theta_n=5.0, R_a=0.5, R_b=3.0)
        with pytest.raises(ValueError):
            PhysParams(R_a=2.0, R_b=1.0)


class TestInitState:
    def test_zero_amplitude_constants(self, unit_mesh):
        params = PhysParams(theta_p=1.5, theta_n=0.5, V=0.0)
        st = init_state(unit_mesh, params)
        assert np.all(st.p == 1.5)
        assert np.all(st.n == 0.5)
        assert st.t == 0.0

    def test_bump_center_value(self):
        mesh = build_mesh(DomainSpec(r=0.5, profile=Rectangle(h=1.0), nx=8, ny=8))
        st = init_state(mesh, PhysParams(theta_p=1.0), amplitude=0.5)
        # center node: xi = 0, eta = 1/2 where the bump equals 1
        assert st.p[4, 4] == pytest.approx(1.5, rel=1e-14)

    def test_negative_amplitude_rejected(self, unit_mesh):
        with pytest.raises(ValueError):
            init_state(unit_mesh, PhysParams(theta_p=1.0, theta_n=1.0),
                       amplitude=-2.0)

    def test_dirichlet_traces_and_side_neumann(self, touchdown_mesh):
        params = PhysParams(theta_p=1.2, theta_n=0.8)
        st = init_state(touchdown_mesh, params, amplitude=0.3)
        dmask = touchdown_mesh.dirichlet_mask()
        assert np.all(st.p[dmask][st.p[dmask] != 0] != 0)  # finite sanity
        assert np.abs(st.p[:, 0] - 1.2).max() == 0.0
        assert np.abs(st.p[:, -1] - 1.2).max() == 0.0
        # one-sided normal difference at the side walls is exactly zero
        assert np.array_equal(st.p[0, :], st.p[1, :])
        assert np.array_equal(st.n[-1, :], st.n[-2, :])

    def test_bump_vanishes_on_electrodes(self, touchdown_mesh):
        B = default_bump(touchdown_mesh)
        assert np.abs(B[:, 0]).max() <= 1e-30
        assert np.abs(B[:, -1]).max() <= 1e-30

    def test_state_is_value_type(self, unit_mesh):
        st = init_state(unit_mesh, PhysParams())
        st2 = st.copy()
        st2.p[0, 0] = 99.0
        assert st.p[0, 0] != 99.0
        with pytest.raises(Exception):
            st.t = 1.0


class TestVelocity:
    def test_zero_spec(self, touchdown_mesh):
        vel = build_velocity(touchdown_mesh, Zero())
        assert np.abs(vel.vx).max() == 0.0
        assert np.abs(vel.vy).max() == 0.0
        assert np.abs(discrete_divergence(touchdown_mesh, vel)).max() == 0.0
        assert vel.is_zero

    def test_stream_discretely_divergence_free(self, unit_mesh, touchdown_mesh):
        for mesh in (unit_mesh, touchdown_mesh):
            vel = build_velocity(mesh, StreamFunction(v0=1.0))
            assert np.abs(discrete_divergence(mesh, vel)).max() <= 1e-12

    def test_stream_higher_modes_divergence_free(self, touchdown_mesh):
        vel = build_velocity(touchdown_mesh, StreamFunction(v0=0.7, kx=3, ky=2))
        assert np.abs(discrete_divergence(touchdown_mesh, vel)).max() <= 1e-12

    def test_tangential_at_boundary(self, touchdown_mesh):
        mesh = touchdown_mesh
        vel = build_velocity(mesh, StreamFunction(v0=1.0))
        # side walls: normal is x
        assert np.abs(vel.vx[0, :]).max() <= 1e-13
        assert np.abs(vel.vx[-1, :]).max() <= 1e-13
        # bottom electrode: normal is y
        assert np.abs(vel.vy[:, 0]).max() <= 1e-13
        # top electrode: normal ~ (-w', 1)
        normal_flux = -mesh.wprime * vel.vx[:, -1] + vel.vy[:, -1]
        assert np.abs(normal_flux).max() <= 1e-13

    def test_invalid_modes_rejected(self):
        with pytest.raises(ValueError):
            StreamFunction(v0=1.0, kx=0)

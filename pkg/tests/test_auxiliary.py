import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discharge_sim.auxiliary import (TruncationConfig, clamp_G, m_sweep,
                                     run_auxiliary, spacetime_l2_difference,
                                     truncated_sources)
from discharge_sim.geometry import DomainSpec, Rectangle, build_mesh
from discharge_sim.model import PhysParams, Zero, build_velocity, init_state
from discharge_sim.transport import StepConfig, ionization_source

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
levels = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)


class TestClamp:
    def test_branch_examples(self):
        assert clamp_G(5.0, 3.0) == 3.0
        assert clamp_G(5.0, 7.0) == 5.0
        assert clamp_G(5.0, -9.0) == -5.0

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            clamp_G(0.0, 1.0)
        with pytest.raises(ValueError):
            clamp_G(-2.0, 1.0)

    @given(M=levels, z=finite)
    @settings(max_examples=200, deadline=None)
    def test_bounded_and_identity_branch(self, M, z):
        g = clamp_G(M, z)
        assert abs(g) <= M
        if abs(z) <= M:
            assert g == z

    @given(M=levels, z=finite)
    @settings(max_examples=200, deadline=None)
    def test_odd(self, M, z):
        assert clamp_G(M, -z) == -clamp_G(M, z)

    @given(M=levels, z1=finite, z2=finite)
    @settings(max_examples=200, deadline=None)
    def test_lipschitz_and_monotone(self, M, z1, z2):
        g1, g2 = clamp_G(M, z1), clamp_G(M, z2)
        assert abs(g1 - g2) <= abs(z1 - z2) + 1e-12 * max(abs(z1), abs(z2), 1.0)
        if z1 <= z2:
            assert g1 <= g2

    def test_vectorized(self):
        z = np.array([-9.0, -5.0, 0.0, 3.0, 7.0])
        assert np.array_equal(clamp_G(5.0, z), [-5.0, -5.0, 0.0, 3.0, 5.0])


ZERO2 = (0.0, 0.0)


class TestTruncatedSources:
    def test_vanish_without_electrons(self):
        params = PhysParams(alpha1=2.0, eta0=0.7)
        F1, F2 = truncated_sources(3.0, 0.0, 1.5, ZERO2, ZERO2, ZERO2,
                                   1e4, params)
        assert F1 == 0.0 and F2 == 0.0

    def test_reference_values_near_limit(self):
        params = PhysParams(mu_minus=1.0, alpha1=1e-300, alpha2=1.0, eta0=1.0)
        F1, F2 = truncated_sources(2.0, 3.0, 1.0, ZERO2, ZERO2, ZERO2,
                                   1e6, params)
        assert F1 == pytest.approx(-2.9999985, abs=1e-6)
        assert F2 == pytest.approx(-2.9999985, abs=1e-6)
        # the attachment limit: F1 -> -eta0*E*n/p*p = -3, F2 -> -eta0*E*n
        assert F1 == pytest.approx(-3.0, abs=2e-6)

    def test_zero_field_kills_reaction_terms(self):
        params = PhysParams(alpha1=5.0, eta0=3.0)
        F1, F2 = truncated_sources(1.0, 2.0, 0.0, (1.0, 0.5), (0.25, -1.0),
                                   (2.0, 4.0), 10.0, params)
        assert F1 == -(1.0 * 2.0 + 0.5 * 4.0)
        assert F2 == -(0.25 * 2.0 + (-1.0) * 4.0)

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            truncated_sources(1.0, 1.0, 1.0, ZERO2, ZERO2, ZERO2, 0.0, PhysParams())

    @given(
        p=st.floats(min_value=1e-3, max_value=50.0),
        n=st.floats(min_value=0.0, max_value=50.0),
        E=st.floats(min_value=0.0, max_value=30.0),
    )
    @settings(max_examples=150, deadline=None)
    def test_weaker_sink_than_original(self, p, n, E):
        # the truncated attachment factor M*p/(1+M*p) <= 1 weakens the sink,
        # so the modified electron source is never below the original one
        params = PhysParams(mu_minus=0.7, alpha1=0.9, alpha2=1.1, eta0=0.6)
        _, F2 = truncated_sources(p, n, E, ZERO2, ZERO2, ZERO2, 1e3, params)
        F = float(ionization_source(n, E, params))
        assert F2 >= F - 1e-12 * max(1.0, abs(F))

    def test_limit_rate_one_over_M(self):
        rng = np.random.default_rng(8)
        p = rng.uniform(0.5, 3.0, size=40)
        n = rng.uniform(0.0, 3.0, size=40)
        E = rng.uniform(0.0, 5.0, size=40)
        params = PhysParams(mu_minus=0.7, alpha1=0.9, alpha2=1.1, eta0=0.6)
        muE = params.mu_minus * E
        growth = np.where(E > 0, params.alpha1 * np.exp(-params.alpha2 / np.maximum(E, 1e-300)), 0.0)
        F1_lim = muE * (growth * n - params.eta0 * n)           # -Mn/(1+Mp) -> -n/p, times p
        F2_lim = muE * (growth * n - params.eta0 * n)           # -Mp/(1+Mp) -> -1, times n
        errs = []
        for M in (1e2, 1e3, 1e4):
            F1, F2 = truncated_sources(p, n, E, ZERO2, ZERO2, ZERO2, M, params)
            errs.append(max(np.abs(F1 - F1_lim).max(), np.abs(F2 - F2_lim).max()))
        assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.2)
        assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.2)


def _small_problem(amplitude, V=1.5):
    mesh = build_mesh(DomainSpec(r=0.5, profile=Rectangle(h=1.0), nx=10, ny=10))
    params = PhysParams(eps_plus=0.4, eps_minus=0.5, mu_plus=0.3, mu_minus=0.5,
                        alpha1=0.8, alpha2=1.0, eta0=0.4, V=V,
                        theta_p=1.0, theta_n=1.0)
    vel = build_velocity(mesh, Zero())
    cfg = StepConfig(dt=2e-3, t_end=1e-2)
    init = init_state(mesh, params, amplitude)
    return mesh, params, vel, cfg, init


class TestRuns:
    def test_clamp_inactive_in_small_regime(self):
        mesh, params, vel, cfg, init = _small_problem(0.5)
        traj = run_auxiliary(mesh, params, vel, cfg, init, M=1e6)
        assert traj.early_stop is None
        assert not any(r.clamp_active for r in traj.records[1:])

    def test_clamp_flag_when_level_too_small(self):
        mesh, params, vel, cfg, init = _small_problem(0.5)
        gap = np.abs(init.p - init.n).max()
        traj = run_auxiliary(mesh, params, vel, cfg, init, M=max(gap / 2, 1e-3))
        flagged = [r.clamp_active for r in traj.records[1:]]
        if gap > 0:
            assert flagged[0]

    def test_large_M_matches_original(self):
        from discharge_sim.transport import run_simulation

        mesh, params, vel, cfg, init = _small_problem(0.5)
        aux = run_auxiliary(mesh, params, vel, cfg, init, M=1e6)
        orig = run_simulation(mesh, params, vel, cfg, init)
        num = spacetime_l2_difference(aux, orig, "p")
        den = np.sqrt(np.trapezoid(
            [np.sum(mesh.node_weights * s.p**2) for s in orig.states],
            dx=cfg.dt))
        assert num / den <= 1e-4


class TestSweep:
    def test_stationary_all_zero(self):
        mesh, params, vel, cfg, init = _small_problem(0.0, V=1e-14)
        rep = m_sweep(mesh, params, vel, cfg, init, (10.0, 20.0, 40.0))
        assert not rep.failures
        assert all(d <= 1e-12 for d in rep.diffs_p + rep.diffs_n)

    def test_decay_per_doubling(self):
        mesh, params, vel, cfg, init = _small_problem(0.5, V=2.0)
        rep = m_sweep(mesh, params, vel, cfg, init, (5.0, 10.0, 20.0, 40.0))
        assert not rep.failures
        for r in rep.ratios_p + rep.ratios_n:
            assert 1.5 <= r <= 2.5

    def test_level_validation(self):
        mesh, params, vel, cfg, init = _small_problem(0.0)
        with pytest.raises(ValueError):
            m_sweep(mesh, params, vel, cfg, init, (10.0, 5.0, 20.0))
        with pytest.raises(ValueError):
            m_sweep(mesh, params, vel, cfg, init, (10.0, 20.0))
        with pytest.raises(ValueError):
            TruncationConfig(M=1.0, sweep_levels=(1.0, 1.0))


class TestConfig:
    def test_truncation_config(self):
        TruncationConfig(M=2.0, sweep_levels=(1.0, 2.0, 4.0))
        with pytest.raises(ValueError):
            TruncationConfig(M=-1.0)
        with pytest.raises(ValueError):
            TruncationConfig(M=1.0, sweep_levels=(1.0, -2.0))

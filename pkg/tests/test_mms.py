import numpy as np
import pytest

from discharge_sim.geometry import DomainSpec, Rectangle, TouchDown
from discharge_sim.mms import MMSConfig, manufactured_fields, verify_mms
from discharge_sim.model import PhysParams

PARAMS = PhysParams(eps_plus=0.5, eps_minus=0.5, mu_plus=0.4, mu_minus=0.6,
                    alpha1=0.8, alpha2=1.0, eta0=0.4, V=2.0,
                    theta_p=1.0, theta_n=1.0)
TD = DomainSpec(r=0.5, profile=TouchDown(g0=0.3, c=0.8), nx=8, ny=8)
RECT = DomainSpec(r=0.5, profile=Rectangle(h=1.0), nx=8, ny=8)


class TestManufacturedFields:
    def test_electrode_traces_match_time_zero_values(self):
        fields = manufactured_fields(TD, PARAMS, drift=True)
        xs = np.linspace(-0.5, 0.5, 9)
        assert np.abs(fields["p"](xs, np.zeros_like(xs), 0.3)
                      - fields["p"](xs, np.zeros_like(xs), 0.0)).max() <= 1e-15
        # potential is linear-plus-sine in y only through smooth terms
        assert np.all(np.isfinite(fields["phi"](xs, 0.5 + 0 * xs, 0.0)))

    def test_side_wall_neumann_of_density(self):
        fields = manufactured_fields(TD, PARAMS, drift=True)
        ys = np.linspace(0.05, 0.25, 5)
        eps = 1e-6
        for xw in (-0.5, 0.5):
            d = (fields["p"](np.full_like(ys, xw - eps), ys, 0.1)
                 - fields["p"](np.full_like(ys, xw + eps), ys, 0.1))
            # one-sided difference ~ first derivative, which vanishes at the wall
            assert np.abs(d).max() <= 1e-10

    def test_residuals_vanish_for_consistent_fields(self):
        # the Poisson residual evaluated where the densities actually source
        # the potential must make the corrected right-hand side consistent:
        # -lap(phi*) = (p*-n*)/eps0 + rho_res by construction
        fields = manufactured_fields(RECT, PARAMS, drift=True)
        xs = np.linspace(-0.4, 0.4, 7)
        ys = np.linspace(0.1, 0.9, 7)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        lhs = fields["rho_res"](X, Y, 0.0)
        rhs = -(fields["p"](X, Y, 0.0) - fields["n"](X, Y, 0.0)) / PARAMS.eps0
        h = 1e-3
        lap = (fields["phi"](X + h, Y, 0.0) + fields["phi"](X - h, Y, 0.0)
               + fields["phi"](X, Y + h, 0.0) + fields["phi"](X, Y - h, 0.0)
               - 4 * fields["phi"](X, Y, 0.0)) / h**2
        assert np.abs(lhs - (rhs - lap)).max() <= 1e-5


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            MMSConfig(domain=RECT, params=PARAMS, mode="magic")
        with pytest.raises(ValueError):
            MMSConfig(domain=RECT, params=PARAMS, levels=1)


class TestOrders:
    def test_poisson_second_order_touchdown(self):
        dom = DomainSpec(r=0.5, profile=TouchDown(g0=0.3, c=0.8), nx=16, ny=16)
        rep = verify_mms(MMSConfig(domain=dom, params=PARAMS, mode="poisson",
                                   levels=3))
        assert all(1.8 <= o <= 2.2 for o in rep.orders["phi"])

    def test_transport_second_order(self):
        rep = verify_mms(MMSConfig(domain=TD, params=PARAMS, mode="transport",
                                   levels=2, dt0=2e-3, t_end=0.02))
        for f in ("p", "n"):
            assert all(o >= 1.8 for o in rep.orders[f]), rep.orders

    def test_coupled_second_order(self):
        rep = verify_mms(MMSConfig(domain=TD, params=PARAMS, mode="coupled",
                                   levels=2, dt0=2e-3, t_end=0.02))
        for f in ("p", "n", "phi"):
            assert all(o >= 1.8 for o in rep.orders[f]), rep.orders

    def test_report_rows_shape(self):
        rep = verify_mms(MMSConfig(domain=RECT, params=PARAMS, mode="poisson",
                                   levels=2))
        rows = rep.rows()
        assert len(rows) == 2
        assert rows[0][0] == "phi"
        assert np.isnan(rows[0][4]) and np.isfinite(rows[1][4])

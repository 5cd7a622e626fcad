import numpy as np
import pytest

from discharge_sim.geometry import DomainSpec, Rectangle, TouchDown, build_mesh
from discharge_sim.model import PhysParams


@pytest.fixture
def unit_square():
    """Rectangle of unit area: x in [-1/2, 1/2], y in [0, 1]."""
    return DomainSpec(r=0.5, profile=Rectangle(h=1.0), nx=16, ny=16)


@pytest.fixture
def unit_mesh(unit_square):
    return build_mesh(unit_square)


@pytest.fixture
def touchdown_spec():
    return DomainSpec(r=0.5, profile=TouchDown(g0=0.3, c=0.8), nx=16, ny=16)


@pytest.fixture
def touchdown_mesh(touchdown_spec):
    return build_mesh(touchdown_spec)


@pytest.fixture
def desk_params():
    """Moderate constants for short coupled runs."""
    return PhysParams(eps0=1.0, eps_plus=0.5, eps_minus=0.5, mu_plus=0.4,
                      mu_minus=0.6, alpha1=0.8, alpha2=1.0, eta0=0.4,
                      V=2.0, theta_p=1.0, theta_n=1.0)


def l2(mesh, u):
    return float(np.sqrt(np.sum(mesh.node_weights * np.asarray(u) ** 2)))

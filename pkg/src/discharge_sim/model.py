"""Physical parameters, evolving state, compatible initial data and the
prescribed divergence-free gas velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import Mesh, Rectangle
from .poisson import build_operator, electrode_dirichlet

__all__ = [
    "PhysParams",
    "State",
    "Zero",
    "StreamFunction",
    "VelocityField",
    "build_velocity",
    "discrete_divergence",
    "init_state",
    "default_bump",
]


@dataclass(frozen=True)
class PhysParams:
    """Constants of the discharge model plus electrode boundary values.

    eps0: permittivity; eps_plus/eps_minus: ion/electron diffusion;
    mu_plus/mu_minus: mobilities; alpha1, alpha2: ionization constants;
    eta0: attachment constant; V: potential of the top electrode A;
    theta_p, theta_n: constant electrode densities.  R_a/R_b optionally
    bound the electrode densities.
    """

    eps0: float = 1.0
    eps_plus: float = 1.0
    eps_minus: float = 1.0
    mu_plus: float = 1.0
    mu_minus: float = 1.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    eta0: float = 1.0
    V: float = 1.0
    theta_p: float = 1.0
    theta_n: float = 1.0
    R_a: float | None = None
    R_b: float | None = None

    def __post_init__(self):
        for name in ("eps0", "eps_plus", "eps_minus", "mu_plus", "mu_minus",
                     "alpha1", "alpha2", "eta0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"params.{name} must be > 0, got {getattr(self, name)}")
        for name in ("theta_p", "theta_n"):
            v = getattr(self, name)
            if v <= 0:
                raise ValueError(f"params.{name} must be > 0, got {v}")
            if self.R_a is not None and v < self.R_a:
                raise ValueError(f"params.{name}={v} below configured R_a={self.R_a}")
            if self.R_b is not None and v > self.R_b:
                raise ValueError(f"params.{name}={v} above configured R_b={self.R_b}")
        if self.R_a is not None and self.R_b is not None and self.R_a > self.R_b:
            raise ValueError("R_a must not exceed R_b")


@dataclass(frozen=True)
class State:
    """Field triple (p, n, phi) at time t; a value type, never mutated."""

    t: float
    p: np.ndarray
    n: np.ndarray
    phi: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.p.copy(), self.n.copy(), self.phi.copy())

    def with_fields(self, **kw) -> "State":
        return replace(self, **kw)


@dataclass(frozen=True)
class Zero:
    """No gas motion."""


@dataclass(frozen=True)
class StreamFunction:
    """v = curl(psi) with psi = v0 * sin(kx*pi*(xi+r)/(2r)) * sin(ky*pi*eta).

    psi vanishes on the whole boundary, so v is tangential there, and the
    face fluxes built from psi differences are exactly divergence-free.
    """

    v0: float
    kx: int = 1
    ky: int = 1

    def __post_init__(self):
        if self.kx < 1 or self.ky < 1:
            raise ValueError("stream-function mode counts must be >= 1")


@dataclass(frozen=True)
class VelocityField:
    """Nodal velocity components plus the dual-face volumetric fluxes used
    by the finite-volume advection (flux through a dual face equals the
    stream-function difference between its endpoints).
    """

    spec: Zero | StreamFunction
    vx: np.ndarray    # (nx+1, ny+1)
    vy: np.ndarray    # (nx+1, ny+1)
    Uxi: np.ndarray   # flux in +x through faces between columns i, i+1: (nx, ny+1)
    Ueta: np.ndarray  # flux in +eta through faces between rows j, j+1: (nx+1, ny)

    @property
    def is_zero(self) -> bool:
        return isinstance(self.spec, Zero)


def _psi_logical(spec: StreamFunction, mesh: Mesh, xi, eta):
    r = mesh.spec.r
    return (
        spec.v0
        * np.sin(spec.kx * np.pi * (xi + r) / (2 * r))
        * np.sin(spec.ky * np.pi * eta)
    )


def build_velocity(mesh: Mesh, spec: Zero | StreamFunction) -> VelocityField:
    nx, ny = mesh.nx, mesh.ny
    if isinstance(spec, Zero):
        z = np.zeros(mesh.shape)
        return VelocityField(spec, z, z.copy(),
                             np.zeros((nx, ny + 1)), np.zeros((nx + 1, ny)))

    r = mesh.spec.r
    xi = np.linspace(-r, r, nx + 1)
    eta = mesh.eta
    kxp = spec.kx * np.pi / (2 * r)
    kyp = spec.ky * np.pi

    # analytic nodal velocity via the chain rule of the map y = eta*w(xi)
    s_x = np.sin(kxp * (xi + r))[:, None]
    c_x = np.cos(kxp * (xi + r))[:, None]
    s_e = np.sin(kyp * eta)[None, :]
    c_e = np.cos(kyp * eta)[None, :]
    w = mesh.w[:, None]
    psi_xi = spec.v0 * kxp * c_x * s_e
    psi_eta = spec.v0 * kyp * s_x * c_e
    # d/dx = d/dxi - (eta*w'/w) d/deta ; d/dy = (1/w) d/deta
    vx = psi_eta / w
    vy = -(psi_xi - mesh.dydxi / w * psi_eta)

    # dual-face fluxes from psi at dual points (exact telescoping)
    xif = 0.5 * (xi[:-1] + xi[1:])                       # (nx,)
    etaf = 0.5 * (eta[:-1] + eta[1:])                    # (ny,)
    eta_lo = np.clip(eta - mesh.deta / 2, 0.0, 1.0)      # (ny+1,)
    eta_hi = np.clip(eta + mesh.deta / 2, 0.0, 1.0)
    xi_lo = np.clip(xi - mesh.dxi / 2, -r, r)            # (nx+1,)
    xi_hi = np.clip(xi + mesh.dxi / 2, -r, r)

    Uxi = _psi_logical(spec, mesh, xif[:, None], eta_hi[None, :]) - _psi_logical(
        spec, mesh, xif[:, None], eta_lo[None, :]
    )
    Ueta = _psi_logical(spec, mesh, xi_lo[:, None], etaf[None, :]) - _psi_logical(
        spec, mesh, xi_hi[:, None], etaf[None, :]
    )
    return VelocityField(spec, vx, vy, Uxi, Ueta)


def discrete_divergence(mesh: Mesh, vel: VelocityField) -> np.ndarray:
    """Net volumetric outflux per dual cell, divided by its area."""
    net = np.zeros(mesh.shape)
    net[:-1, :] += vel.Uxi   # out through the right face of node (i, j)
    net[1:, :] -= vel.Uxi    # in through the left face of node (i+1, j)
    net[:, :-1] += vel.Ueta
    net[:, 1:] -= vel.Ueta
    return net / mesh.node_weights


def default_bump(mesh: Mesh) -> np.ndarray:
    """Compatible bump: vanishes on the electrodes, discrete zero normal
    difference at the side walls (side columns copied from neighbors).
    """
    r = mesh.spec.r
    xi = mesh.x[:, 0][:, None]
    eta = mesh.eta[None, :]
    B = np.sin(np.pi * eta) ** 2 * np.cos(np.pi * xi / (2 * r)) ** 2
    B[0, :] = B[1, :]
    B[-1, :] = B[-2, :]
    return B


def init_state(mesh: Mesh, params: PhysParams, amplitude: float = 0.0,
               shape: str = "bump", poisson_tol: float = 1e-10) -> State:
    """Compatible initial data: p0 = theta_p + amplitude*B, same bump on n0,
    with phi from one Poisson solve on (p0 - n0)/eps0.
    """
    if shape != "bump":
        raise ValueError(f"unknown bump shape {shape!r}")
    if amplitude < -min(params.theta_p, params.theta_n):
        raise ValueError(
            f"amplitude {amplitude} would make initial densities negative "
            f"(theta_p={params.theta_p}, theta_n={params.theta_n})"
        )
    B = default_bump(mesh)
    p0 = params.theta_p + amplitude * B
    n0 = params.theta_n + amplitude * B
    if p0.min() < 0 or n0.min() < 0:
        raise ValueError("initial densities must be non-negative")
    if mesh.all_neumann:
        phi0 = np.zeros(mesh.shape)
    else:
        op = build_operator(mesh)
        phi0 = op.solve((p0 - n0) / params.eps0,
                        electrode_dirichlet(mesh, params.V), tol=poisson_tol)
    return State(t=0.0, p=p0, n=n0, phi=phi0)


def velocity_at(mesh_spec, vspec: Zero | StreamFunction, x, y):
    """Closed-form velocity at arbitrary physical points (used by the
    spectral cross-check, which has its own quadrature grid).
    """
    from .geometry import gap_profile, gap_profile_derivative

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(vspec, Zero):
        return np.zeros_like(x), np.zeros_like(y)
    r = mesh_spec.r
    w = np.asarray(gap_profile(x, mesh_spec))
    wp = np.asarray(gap_profile_derivative(x, mesh_spec))
    eta = y / w
    kxp = vspec.kx * np.pi / (2 * r)
    kyp = vspec.ky * np.pi
    psi_xi = vspec.v0 * kxp * np.cos(kxp * (x + r)) * np.sin(kyp * eta)
    psi_eta = vspec.v0 * kyp * np.sin(kxp * (x + r)) * np.cos(kyp * eta)
    vx = psi_eta / w
    vy = -(psi_xi - eta * wp / w * psi_eta)
    return vx, vy

"""Spectral Galerkin cross-check on rectangular gaps.

Uses the closed-form eigenbasis of -lap + 1 with Dirichlet electrodes and
Neumann side walls (cosine in x, sine in y), a spectral Poisson solve by
eigenvalue division, and pseudo-spectral evaluation of the nonlinear terms
on a Gauss-Legendre grid.  Integrates the coefficient ODEs with classical
RK4 at fixed step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auxiliary import clamp_G
from .geometry import DomainSpec, Rectangle
from .model import PhysParams, StreamFunction, Zero, velocity_at

__all__ = [
    "SpectralBasis",
    "CoeffState",
    "build_basis",
    "project_field",
    "spectral_poisson",
    "galerkin_rhs",
    "GalerkinTrajectory",
    "run_galerkin",
]


@dataclass(frozen=True)
class SpectralBasis:
    domain: DomainSpec
    modes: tuple            # ((k, m), ...) ordered by eigenvalue, then (k, m)
    lambdas: np.ndarray     # eigenvalues of -lap + 1 per mode
    xq: np.ndarray          # Gauss-Legendre abscissae in x, (nqx,)
    yq: np.ndarray
    wx: np.ndarray          # quadrature weights
    wy: np.ndarray
    W: np.ndarray           # mode values on the grid, (nmodes, nqx, nqy)
    Wx: np.ndarray          # d/dx of each mode
    Wy: np.ndarray

    @property
    def nmodes(self) -> int:
        return len(self.modes)

    @property
    def quad_weights(self) -> np.ndarray:
        return self.wx[:, None] * self.wy[None, :]

    def grid(self):
        return np.meshgrid(self.xq, self.yq, indexing="ij")

    def reconstruct(self, coeffs, x=None, y=None):
        """Sum of modes; on the quadrature grid by default, or at given
        coordinate arrays (modes are closed-form).
        """
        if x is None:
            return np.tensordot(coeffs, self.W, axes=1)
        Wv = _eval_modes(self.domain, self.modes, np.asarray(x), np.asarray(y))[0]
        return np.tensordot(coeffs, Wv, axes=1)


@dataclass(frozen=True)
class CoeffState:
    t: float
    a: np.ndarray   # coefficients of p - p_D
    b: np.ndarray   # coefficients of n - n_D


def _eval_modes(domain: DomainSpec, modes, x, y):
    r = domain.r
    h = domain.profile.h
    nm = len(modes)
    W = np.empty((nm,) + x.shape)
    Wx = np.empty_like(W)
    Wy = np.empty_like(W)
    for idx, (k, m) in enumerate(modes):
        kx = k * np.pi / (2 * r)
        ky = m * np.pi / h
        nx = 1.0 / np.sqrt(2 * r) if k == 0 else 1.0 / np.sqrt(r)
        ny = np.sqrt(2.0 / h)
        cx = np.cos(kx * (x + r))
        sy = np.sin(ky * y)
        W[idx] = nx * ny * cx * sy
        Wx[idx] = -nx * ny * kx * np.sin(kx * (x + r)) * sy
        Wy[idx] = nx * ny * ky * cx * np.cos(ky * y)
    return W, Wx, Wy


def build_basis(domain: DomainSpec, K: int, Mo: int, quad_n: int = 48) -> SpectralBasis:
    """Tensor eigenmodes cos(k*pi*(x+r)/(2r)) * sin(m*pi*y/h), k < K, 1 <= m <= Mo."""
    if not isinstance(domain.profile, Rectangle):
        raise ValueError("the spectral basis is closed-form on Rectangle gaps only")
    if K < 1 or Mo < 1:
        raise ValueError("mode counts must be >= 1")
    r, h = domain.r, domain.profile.h

    def lam(k, m):
        return 1.0 + (k * np.pi / (2 * r)) ** 2 + (m * np.pi / h) ** 2

    modes = sorted(((k, m) for k in range(K) for m in range(1, Mo + 1)),
                   key=lambda km: (lam(*km), km))
    lambdas = np.array([lam(k, m) for k, m in modes])

    gx, gw = np.polynomial.legendre.leggauss(quad_n)
    xq = r * gx
    wx = r * gw
    yq = 0.5 * h * (gx + 1.0)
    wy = 0.5 * h * gw
    X, Y = np.meshgrid(xq, yq, indexing="ij")
    W, Wx, Wy = _eval_modes(domain, modes, X, Y)
    return SpectralBasis(domain=domain, modes=tuple(modes), lambdas=lambdas,
                         xq=xq, yq=yq, wx=wx, wy=wy, W=W, Wx=Wx, Wy=Wy)


def project_field(basis: SpectralBasis, field: np.ndarray) -> np.ndarray:
    """L2 inner products of a quadrature-grid field against each mode."""
    qw = basis.quad_weights
    return np.tensordot(basis.W, qw * field, axes=([1, 2], [0, 1]))


def spectral_poisson(basis: SpectralBasis, rhs_coeffs: np.ndarray, phiD_lift):
    """Potential with -lap(phi) = rhs and the Dirichlet lift added.

    Mode c = <rhs, w>/(lambda - 1), well-posed since every lambda > 1.
    phiD_lift may be a grid array or None (zero lift).
    """
    c = rhs_coeffs / (basis.lambdas - 1.0)
    phi = basis.reconstruct(c)
    if phiD_lift is not None:
        phi = phi + phiD_lift
    return phi, c


def _linear_lift(basis: SpectralBasis, V: float):
    """phi_lift = V*y/h: harmonic, matches both electrode potentials and
    the side-wall Neumann condition.
    """
    _, Y = basis.grid()
    h = basis.domain.profile.h
    return V * Y / h, V / h


def galerkin_rhs(coeffs: CoeffState, basis: SpectralBasis, params: PhysParams,
                 vspec: Zero | StreamFunction, M: float):
    """Time derivatives (da/dt, db/dt) of the coefficient ODE system.

    Diffusion is exact on the eigenbasis; drift, advection and the
    truncated sources are evaluated by collocation on the quadrature grid
    and projected back (pseudo-spectral treatment).
    """
    qw = basis.quad_weights
    X, Y = basis.grid()
    p = params.theta_p + basis.reconstruct(coeffs.a)
    n = params.theta_n + basis.reconstruct(coeffs.b)

    rhs_phi = clamp_G(M, p - n) / params.eps0
    rc = project_field(basis, rhs_phi)
    cphi = rc / (basis.lambdas - 1.0)
    lift, dlift_dy = _linear_lift(basis, params.V)
    phi_x = np.tensordot(cphi, basis.Wx, axes=1)
    phi_y = np.tensordot(cphi, basis.Wy, axes=1) + dlift_dy
    # -lap(phi) equals the projection of the right-hand side onto the span
    lap_phi = -np.tensordot(rc, basis.W, axes=1)
    Emag = np.hypot(phi_x, phi_y)

    p_x = np.tensordot(coeffs.a, basis.Wx, axes=1)
    p_y = np.tensordot(coeffs.a, basis.Wy, axes=1)
    n_x = np.tensordot(coeffs.b, basis.Wx, axes=1)
    n_y = np.tensordot(coeffs.b, basis.Wy, axes=1)
    vx, vy = velocity_at(basis.domain, vspec, X, Y)

    growth = np.zeros_like(Emag)
    pos = Emag > 0
    growth[pos] = params.alpha1 * np.exp(-params.alpha2 / Emag[pos])
    with np.errstate(divide="ignore", invalid="ignore"):
        m_p = np.minimum(M, -M * n / (1.0 + M * p))
        m_n = np.minimum(M, -M * p / (1.0 + M * p))
    muE = params.mu_minus * Emag
    F1 = muE * (growth * n + params.eta0 * m_p * p) - (p_x * vx + p_y * vy)
    F2 = muE * (growth * n + params.eta0 * m_n * n) - (n_x * vx + n_y * vy)
    if not (np.all(np.isfinite(F1)) and np.all(np.isfinite(F2))):
        raise FloatingPointError("non-finite quadrature values in the sources")

    drift_p = params.mu_plus * (p_x * phi_x + p_y * phi_y + p * lap_phi)
    drift_n = params.mu_minus * (n_x * phi_x + n_y * phi_y + n * lap_phi)

    da = params.eps_plus * (1.0 - basis.lambdas) * coeffs.a + np.tensordot(
        basis.W, qw * (drift_p + F1), axes=([1, 2], [0, 1]))
    db = params.eps_minus * (1.0 - basis.lambdas) * coeffs.b + np.tensordot(
        basis.W, qw * (-drift_n + F2), axes=([1, 2], [0, 1]))
    return da, db


@dataclass
class GalerkinTrajectory:
    basis: SpectralBasis
    params: PhysParams
    vspec: Zero | StreamFunction
    M: float
    dt: float
    coeffs: list          # CoeffState per step
    records: list         # lightweight per-step diagnostics dicts

    @property
    def times(self) -> np.ndarray:
        return np.array([c.t for c in self.coeffs])

    def fields_at(self, index: int, x=None, y=None):
        """Reconstructed (p, n) at a step, on the quadrature grid or at
        arbitrary coordinates.
        """
        c = self.coeffs[index]
        p = self.params.theta_p + self.basis.reconstruct(c.a, x, y)
        n = self.params.theta_n + self.basis.reconstruct(c.b, x, y)
        return p, n


def run_galerkin(basis: SpectralBasis, params: PhysParams,
                 vspec: Zero | StreamFunction, M: float, dt: float,
                 t_end: float, amplitude: float = 0.0,
                 a0: np.ndarray | None = None,
                 b0: np.ndarray | None = None) -> GalerkinTrajectory:
    """Integrate the coefficient ODEs with classical RK4 at fixed dt."""
    if dt <= 0 or t_end < dt:
        raise ValueError("need dt > 0 and t_end >= dt")
    X, Y = basis.grid()
    if a0 is None:
        r = basis.domain.r
        h = basis.domain.profile.h
        bump = amplitude * np.sin(np.pi * Y / h) ** 2 * np.cos(np.pi * X / (2 * r)) ** 2
        a0 = project_field(basis, bump)
        b0 = a0.copy()
    state = CoeffState(t=0.0, a=np.asarray(a0, dtype=float),
                       b=np.asarray(b0, dtype=float))

    def rhs(c: CoeffState):
        return galerkin_rhs(c, basis, params, vspec, M)

    qw = basis.quad_weights
    traj = [state]
    records = [_galerkin_record(basis, params, state, qw)]
    nsteps = int(round(t_end / dt))
    for _ in range(nsteps):
        k1a, k1b = rhs(state)
        s2 = CoeffState(state.t + dt / 2, state.a + dt / 2 * k1a, state.b + dt / 2 * k1b)
        k2a, k2b = rhs(s2)
        s3 = CoeffState(state.t + dt / 2, state.a + dt / 2 * k2a, state.b + dt / 2 * k2b)
        k3a, k3b = rhs(s3)
        s4 = CoeffState(state.t + dt, state.a + dt * k3a, state.b + dt * k3b)
        k4a, k4b = rhs(s4)
        a = state.a + dt / 6 * (k1a + 2 * k2a + 2 * k3a + k4a)
        b = state.b + dt / 6 * (k1b + 2 * k2b + 2 * k3b + k4b)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise FloatingPointError("Galerkin coefficients became non-finite")
        state = CoeffState(t=state.t + dt, a=a, b=b)
        traj.append(state)
        records.append(_galerkin_record(basis, params, state, qw))
    return GalerkinTrajectory(basis=basis, params=params, vspec=vspec, M=M,
                              dt=dt, coeffs=traj, records=records)


def _galerkin_record(basis, params, state, qw):
    p = params.theta_p + basis.reconstruct(state.a)
    n = params.theta_n + basis.reconstruct(state.b)
    return {
        "t": state.t,
        "min_p": float(p.min()),
        "min_n": float(n.min()),
        "L2_p": float(np.sqrt(np.sum(qw * p * p))),
        "L2_n": float(np.sqrt(np.sum(qw * n * n))),
    }

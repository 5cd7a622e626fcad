"""Implicit drift-diffusion transport of the carrier densities.

One step is a Gummel cycle: Poisson solve with lagged densities, then
implicit-Euler solves of the two linearized transport systems with
Scharfetter-Gummel fluxes for drift-diffusion, first-order upwinding for
gas advection, and metric cross terms on mapped meshes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import Mesh
from .model import PhysParams, State, VelocityField
from .poisson import EllipticOperator, build_operator, electrode_dirichlet, gradient_field

__all__ = [
    "OriginalF",
    "AuxiliaryM",
    "StepConfig",
    "StepError",
    "bernoulli",
    "sg_face_flux",
    "ionization_source",
    "SpeciesOperator",
    "build_species_operator",
    "advance_step",
    "Trajectory",
    "run_simulation",
]


@dataclass(frozen=True)
class OriginalF:
    """Untruncated ionization source of the base model."""


@dataclass(frozen=True)
class AuxiliaryM:
    """Truncated system: clamp on the Poisson right-hand side and
    min-modified sources, at truncation level M.
    """

    M: float

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError(f"truncation level M must be > 0, got {self.M}")


@dataclass(frozen=True)
class StepConfig:
    dt: float
    t_end: float
    scheme: OriginalF | AuxiliaryM = field(default_factory=OriginalF)
    source_treatment: str = "semi_implicit_sink"  # or "explicit"
    poisson_tol: float = 1e-10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}")
        if self.source_treatment not in ("explicit", "semi_implicit_sink"):
            raise ValueError(f"unknown source treatment {self.source_treatment!r}")


class StepError(RuntimeError):
    """Raised on dt-bound violation or linear-solve failure."""


def bernoulli(x):
    """B(x) = x/(exp(x)-1), B(0) = 1; series below 1e-4, saturations far out."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    mid = ~small & (np.abs(x) <= 500.0)
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs * xs / 12.0
    xm = x[mid]
    out[mid] = xm / np.expm1(xm)
    out[x > 500.0] = 0.0
    big_neg = x < -500.0
    out[big_neg] = -x[big_neg]
    return out if out.ndim else float(out)


def sg_face_flux(uL, uR, d, eps, h):
    """Scharfetter-Gummel two-point flux across a face.

    flux = (eps/h) * (B(-d/eps)*uL - B(d/eps)*uR); d is the drift
    potential difference across the face, oriented L -> R.
    """
    eps = np.asarray(eps, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("face spacing h must be > 0")
    if np.any(eps <= 0):
        raise ValueError("diffusion eps must be > 0")
    x = np.asarray(d, dtype=float) / eps
    return eps / h * (bernoulli(-x) * np.asarray(uL) - bernoulli(x) * np.asarray(uR))


def ionization_source(n, Emag, params: PhysParams):
    """F = mu_- * n * E * (alpha1*exp(-alpha2/E) - eta0), with F = 0 at E = 0."""
    n = np.asarray(n, dtype=float)
    E = np.asarray(Emag, dtype=float)
    if np.any(E < 0):
        raise ValueError("field magnitude must be non-negative")
    coef = _ionization_coefficient(E, params)
    return params.mu_minus * n * E * coef


def _ionization_coefficient(E, params: PhysParams):
    """alpha1*exp(-alpha2/E) - eta0, evaluated without dividing at E = 0."""
    E = np.asarray(E, dtype=float)
    out = np.full_like(E, -params.eta0)
    pos = E > 0
    # alpha2/E may overflow to inf for subnormal E; exp(-inf) = 0 is the limit
    with np.errstate(over="ignore"):
        out[pos] = params.alpha1 * np.exp(-params.alpha2 / E[pos]) - params.eta0
    return out


def _growth_rate(E, params: PhysParams):
    """mu_- * E * alpha1 * exp(-alpha2/E); 0 at E = 0."""
    E = np.asarray(E, dtype=float)
    out = np.zeros_like(E)
    pos = E > 0
    with np.errstate(over="ignore"):
        out[pos] = params.mu_minus * E[pos] * params.alpha1 * np.exp(-params.alpha2 / E[pos])
    return out


def _logical_derivative_ops(mesh: Mesh):
    """Sparse d/dxi and d/deta (central interior, one-sided ends) on flat nodes."""

    def d1(n, h):
        D = sp.lil_matrix((n, n))
        for k in range(1, n - 1):
            D[k, k - 1] = -0.5 / h
            D[k, k + 1] = 0.5 / h
        D[0, 0], D[0, 1] = -1.0 / h, 1.0 / h
        D[n - 1, n - 2], D[n - 1, n - 1] = -1.0 / h, 1.0 / h
        return D.tocsr()

    nxp, nyp = mesh.nx + 1, mesh.ny + 1
    Dxi = sp.kron(d1(nxp, mesh.dxi), sp.eye(nyp), format="csr")
    Deta = sp.kron(sp.eye(nxp), d1(nyp, mesh.deta), format="csr")
    return Dxi, Deta


@dataclass
class SpeciesOperator:
    """Outflux operator A (so that dV p/dt + A p = sources) plus the face
    flux maps used for the charge-continuity audit.
    """

    A: sp.csr_matrix
    Fxi: sp.csr_matrix    # p -> flux through each xi-face (L -> R)
    Feta: sp.csr_matrix   # p -> flux through each eta-face (bottom -> top)
    xi_L: np.ndarray      # flat node index left of each xi-face
    xi_R: np.ndarray
    eta_B: np.ndarray
    eta_T: np.ndarray


def build_species_operator(mesh: Mesh, eps: float, smu: float, phi: np.ndarray,
                           vel: VelocityField) -> SpeciesOperator:
    """Assemble fluxes for one species with drift velocity smu*grad(phi)
    (smu = -mu_plus for ions, +mu_minus for electrons) plus gas advection.
    """
    nx, ny = mesh.nx, mesh.ny
    nyp = ny + 1
    N = (nx + 1) * nyp
    dxi, deta = mesh.dxi, mesh.deta
    eta = mesh.eta

    Dxi, Deta = _logical_derivative_ops(mesh)
    phiflat = phi.ravel()
    phi_xi = (Dxi @ phiflat).reshape(mesh.shape)
    phi_eta = (Deta @ phiflat).reshape(mesh.shape)

    def sel(idx):
        m = idx.size
        return sp.csr_matrix((np.ones(m), (np.arange(m), idx)), shape=(m, N))

    # ---- xi-faces: between columns i and i+1, one per j ------------------
    iL, jj = np.meshgrid(np.arange(nx), np.arange(nyp), indexing="ij")
    fL = (iL * nyp + jj).ravel()
    fR = ((iL + 1) * nyp + jj).ravel()
    len_eta = np.where((jj == 0) | (jj == ny), 0.5 * deta, deta).ravel()
    # the gap slope is discretized with the same stencil as the field
    # derivative it multiplies, so the kinked logical-coordinate parts of
    # the two cancel even where the profile has a curvature cusp
    w_f = 0.5 * (mesh.w[iL] + mesh.w[iL + 1]).ravel()
    wp_f = ((mesh.w[iL + 1] - mesh.w[iL]) / dxi).ravel()
    eta_f = eta[jj].ravel()

    dphi_xi = (phiflat[fR] - phiflat[fL]) / dxi
    phi_eta_f = 0.5 * (phi_eta.ravel()[fL] + phi_eta.ravel()[fR])
    phi_x_face = dphi_xi - eta_f * wp_f / w_f * phi_eta_f

    D_f = eps * w_f
    d_f = smu * w_f * phi_x_face * dxi
    x = d_f / D_f
    cL = D_f / dxi * bernoulli(-x) * len_eta
    cR = -D_f / dxi * bernoulli(x) * len_eta

    PL, PR = sel(fL), sel(fR)
    Fxi = sp.diags(cL) @ PL + sp.diags(cR) @ PR
    # metric cross term: +eps * eta * w' * p_eta, averaged across the face
    cross = sp.diags(eps * eta_f * wp_f * len_eta) @ (0.5 * (PL + PR)) @ Deta
    Fxi = (Fxi + cross).tocsr()
    # gas advection, upwinded on the face-integrated volumetric flux
    U = vel.Uxi.ravel()
    Fxi = (Fxi + sp.diags(np.maximum(U, 0.0)) @ PL + sp.diags(np.minimum(U, 0.0)) @ PR).tocsr()

    # ---- eta-faces: between rows j and j+1, one per i --------------------
    ii, jB = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="ij")
    gB = (ii * nyp + jB).ravel()
    gT = (ii * nyp + jB + 1).ravel()
    len_xi = np.where((ii == 0) | (ii == nx), 0.5 * dxi, dxi).ravel()
    w_i = mesh.w[ii].ravel()
    # gap slope with the stencil of the central xi-derivative (see above)
    wc = np.gradient(mesh.w, dxi, edge_order=1)
    wp_i = wc[ii].ravel()
    eta_mid = 0.5 * (eta[jB] + eta[jB + 1]).ravel()
    gg = (eta_mid * wp_i) ** 2 + 1.0

    dphi_eta = (phiflat[gT] - phiflat[gB]) / deta
    phi_xi_f = 0.5 * (phi_xi.ravel()[gB] + phi_xi.ravel()[gT])
    a_hat = smu * (gg / w_i * dphi_eta - eta_mid * wp_i * phi_xi_f)

    D_g = eps * gg / w_i
    d_g = a_hat * deta
    xg = d_g / D_g
    cB = D_g / deta * bernoulli(-xg) * len_xi
    cT = -D_g / deta * bernoulli(xg) * len_xi

    PB, PT = sel(gB), sel(gT)
    Feta = sp.diags(cB) @ PB + sp.diags(cT) @ PT
    cross2 = sp.diags(eps * eta_mid * wp_i * len_xi) @ (0.5 * (PB + PT)) @ Dxi
    Feta = (Feta + cross2).tocsr()
    Ue = vel.Ueta.ravel()
    Feta = (Feta + sp.diags(np.maximum(Ue, 0.0)) @ PB + sp.diags(np.minimum(Ue, 0.0)) @ PT).tocsr()

    # divergence: each face flux leaves its L/B node and enters its R/T node
    A = ((PL - PR).T @ Fxi + (PB - PT).T @ Feta).tocsr()
    return SpeciesOperator(A=A, Fxi=Fxi, Feta=Feta, xi_L=fL, xi_R=fR, eta_B=gB, eta_T=gT)


def boundary_outflux(mesh: Mesh, op: SpeciesOperator, u: np.ndarray) -> float:
    """Net discrete flux of u out of the free node set into Dirichlet nodes."""
    dmask = mesh.dirichlet_mask().ravel()
    uflat = u.ravel()
    fxi = op.Fxi @ uflat
    feta = op.Feta @ uflat
    s = 0.0
    sgn_xi = (~dmask[op.xi_L]).astype(float) - (~dmask[op.xi_R]).astype(float)
    sgn_eta = (~dmask[op.eta_B]).astype(float) - (~dmask[op.eta_T]).astype(float)
    s += float(np.dot(sgn_xi, fxi))
    s += float(np.dot(sgn_eta, feta))
    return s


def _source_split(scheme, treatment, p_old, n_old, Emag, params):
    """Explicit source fields and implicit sink coefficients per scheme.

    Returns (S_p, S_n, sink_p, sink_n, source_finite); the implicit sink
    enters the p (resp. n) equation as -sink*p with sink >= 0 in the
    positive-solution regime.
    """
    growth = _growth_rate(Emag, params) * n_old
    muE = params.mu_minus * Emag
    if isinstance(scheme, OriginalF):
        sinkrate = muE * params.eta0
        if treatment == "explicit":
            S_p = growth - sinkrate * n_old
            S_n = growth - sinkrate * n_old
            sink_p = np.zeros_like(p_old)
            sink_n = np.zeros_like(n_old)
        else:
            S_p = growth - sinkrate * n_old
            S_n = growth
            sink_p = np.zeros_like(p_old)
            sink_n = sinkrate
    else:
        M = scheme.M
        with np.errstate(divide="ignore", invalid="ignore"):
            m_p = np.minimum(M, -M * n_old / (1.0 + M * p_old))
            m_n = np.minimum(M, -M * p_old / (1.0 + M * p_old))
        if treatment == "explicit":
            S_p = growth + muE * params.eta0 * m_p * p_old
            S_n = growth + muE * params.eta0 * m_n * n_old
            sink_p = np.zeros_like(p_old)
            sink_n = np.zeros_like(n_old)
        else:
            S_p = growth
            S_n = growth
            sink_p = -muE * params.eta0 * m_p
            sink_n = -muE * params.eta0 * m_n
    finite = bool(
        np.all(np.isfinite(S_p)) and np.all(np.isfinite(S_n))
        and np.all(np.isfinite(sink_p)) and np.all(np.isfinite(sink_n))
    )
    return S_p, S_n, sink_p, sink_n, finite


@dataclass(frozen=True)
class DirichletData:
    """Nodal Dirichlet values for (p, n, phi); read only on electrode nodes."""

    p: np.ndarray
    n: np.ndarray
    phi: np.ndarray


def _default_dirichlet(mesh: Mesh, params: PhysParams) -> DirichletData:
    return DirichletData(
        p=np.full(mesh.shape, params.theta_p),
        n=np.full(mesh.shape, params.theta_n),
        phi=electrode_dirichlet(mesh, params.V),
    )


def _pin_dirichlet(A: sp.csr_matrix, rhs: np.ndarray, dir_idx: np.ndarray,
                   values: np.ndarray):
    A = A.tolil()
    A[dir_idx, :] = 0.0
    A[dir_idx, dir_idx] = 1.0
    rhs[dir_idx] = values
    return A.tocsr(), rhs


@dataclass
class StepDiagnostics:
    clamp_active: bool = False
    source_finite: bool = True
    Emax: float = 0.0


def advance_step(state: State, mesh: Mesh, params: PhysParams,
                 velocity: VelocityField, cfg: StepConfig, *,
                 poisson_op: EllipticOperator | None = None,
                 dirichlet: DirichletData | None = None,
                 forcing_p: np.ndarray | None = None,
                 forcing_n: np.ndarray | None = None,
                 rho_forcing: np.ndarray | None = None) -> State:
    new, _ = advance_step_diag(
        state, mesh, params, velocity, cfg, poisson_op=poisson_op,
        dirichlet=dirichlet, forcing_p=forcing_p, forcing_n=forcing_n,
        rho_forcing=rho_forcing,
    )
    return new


def advance_step_diag(state: State, mesh: Mesh, params: PhysParams,
                      velocity: VelocityField, cfg: StepConfig, *,
                      poisson_op: EllipticOperator | None = None,
                      dirichlet: DirichletData | None = None,
                      forcing_p: np.ndarray | None = None,
                      forcing_n: np.ndarray | None = None,
                      rho_forcing: np.ndarray | None = None):
    """One Gummel cycle; returns (new state, diagnostics)."""
    from .auxiliary import clamp_G

    diag = StepDiagnostics()
    dt = cfg.dt
    if dirichlet is None:
        dirichlet = _default_dirichlet(mesh, params)

    # (1) Poisson solve with lagged densities
    if isinstance(cfg.scheme, AuxiliaryM):
        rho = clamp_G(cfg.scheme.M, state.p - state.n) / params.eps0
        diag.clamp_active = bool(np.any(np.abs(state.p - state.n) > cfg.scheme.M))
    else:
        rho = (state.p - state.n) / params.eps0
    if rho_forcing is not None:
        rho = rho + rho_forcing
    if mesh.all_neumann:
        phi = np.zeros(mesh.shape)
    else:
        if poisson_op is None:
            poisson_op = build_operator(mesh)
        phi = poisson_op.solve(rho, dirichlet.phi, tol=cfg.poisson_tol)

    # second-order boundary differences: the source term is evaluated on
    # side-wall nodes too, and a first-order strip there would cap the
    # spatial convergence of the coupled system below second order
    gx, gy, Emag = gradient_field(mesh, phi, edge_order=2)
    diag.Emax = float(Emag.max())

    # explicit-source stability bound
    bound = dt * params.mu_minus * diag.Emax * max(params.alpha1, params.eta0)
    if bound > 1.0:
        raise StepError(
            f"time step violates the explicit-source bound: "
            f"dt*mu_-*max|E|*max(alpha1,eta0) = {bound:.3g} > 1"
        )

    S_p, S_n, sink_p, sink_n, finite = _source_split(
        cfg.scheme, cfg.source_treatment, state.p, state.n, Emag, params
    )
    diag.source_finite = finite
    if not finite:
        raise StepError("non-finite source term (truncated-source denominator "
                        "crossed zero); run halted")

    Vw = mesh.node_weights.ravel()
    dir_idx = np.flatnonzero(mesh.dirichlet_mask().ravel())

    def solve_species(u_old, eps, smu, S_expl, sink, forcing, u_dir):
        op = build_species_operator(mesh, eps, smu, phi, velocity)
        lhs = sp.diags(Vw / dt + Vw * sink.ravel()) + op.A
        rhs = Vw / dt * u_old.ravel() + Vw * S_expl.ravel()
        if forcing is not None:
            rhs = rhs + Vw * forcing.ravel()
        lhs, rhs = _pin_dirichlet(lhs.tocsr(), rhs, dir_idx, u_dir.ravel()[dir_idx])
        u_new = spla.spsolve(lhs.tocsc(), rhs)
        if not np.all(np.isfinite(u_new)):
            raise StepError("transport solve produced non-finite values")
        return u_new.reshape(mesh.shape)

    p_new = solve_species(state.p, params.eps_plus, -params.mu_plus,
                          S_p, sink_p, forcing_p, dirichlet.p)
    n_new = solve_species(state.n, params.eps_minus, +params.mu_minus,
                          S_n, sink_n, forcing_n, dirichlet.n)

    return State(t=state.t + dt, p=p_new, n=n_new, phi=phi), diag


@dataclass
class Trajectory:
    """Time history of one run: states at every step plus monitor records."""

    mesh: Mesh
    params: PhysParams
    velocity: VelocityField
    cfg: StepConfig
    states: list
    records: list
    early_stop: str | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> State:
        return self.states[-1]


def run_simulation(mesh: Mesh, params: PhysParams, velocity: VelocityField,
                   cfg: StepConfig, init: State, *,
                   blowup_threshold: float | None = None,
                   monitor_constants=None) -> Trajectory:
    """Advance from the initial state to t_end, emitting one MonitorRecord
    per step; deterministic for fixed inputs.  Halts early on blow-up
    detection or numerical failure, recording the cause.
    """
    from . import monitors

    nsteps = int(round(cfg.t_end / cfg.dt))
    op = None if mesh.all_neumann else build_operator(mesh)
    states = [init]
    records = [monitors.make_record(mesh, params, velocity, None, init, cfg,
                                    StepDiagnostics(), monitor_constants,
                                    records_so_far=[])]
    if blowup_threshold is not None:
        r0 = records[0]
        if blowup_threshold <= max(r0.L2_p, r0.L2_n):
            raise ValueError("blow-up threshold must exceed the initial norms")
    early = None
    state = init
    for _ in range(nsteps):
        try:
            new, diag = advance_step_diag(state, mesh, params, velocity, cfg,
                                          poisson_op=op)
        except StepError as exc:
            early = f"step failure: {exc}"
            break
        rec = monitors.make_record(mesh, params, velocity, state, new, cfg,
                                   diag, monitor_constants, records_so_far=records)
        states.append(new)
        records.append(rec)
        state = new
        if blowup_threshold is not None and max(rec.L2_p, rec.L2_n) > blowup_threshold:
            early = f"blow-up detected at t={new.t:.12g}"
            break
    return Trajectory(mesh=mesh, params=params, velocity=velocity, cfg=cfg,
                      states=states, records=records, early_stop=early)

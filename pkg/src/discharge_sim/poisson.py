"""Mapped-mesh Poisson solver: -lap(phi) = rho with Dirichlet electrodes
and homogeneous Neumann side walls.

The operator is assembled in conservative (bilinear-form) fashion on the
mapped quadrilaterals with 2x2 Gauss quadrature, which makes it exactly
symmetric; Neumann conditions are natural.  The linear system is solved
with diagonally preconditioned conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import Mesh

__all__ = [
    "PoissonSolveError",
    "EllipticOperator",
    "build_operator",
    "electrode_dirichlet",
    "solve_poisson",
    "gradient_field",
    "field_norms",
]

_GAUSS = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


class PoissonSolveError(RuntimeError):
    """Raised when CG fails to reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Q1 isoparametric stiffness matrix over all nodes (no BCs applied)."""
    nx, ny = mesh.nx, mesh.ny
    nnode = (nx + 1) * (ny + 1)

    def nid(i, j):
        return i * (ny + 1) + j

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    # local corner order: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
    conn = np.stack(
        [nid(ii, jj), nid(ii + 1, jj), nid(ii + 1, jj + 1), nid(ii, jj + 1)],
        axis=-1,
    ).reshape(-1, 4)

    xc = mesh.x.ravel()[conn]  # (ncell, 4)
    yc = mesh.y.ravel()[conn]

    ke = np.zeros((conn.shape[0], 4, 4))
    for gx in _GAUSS:
        for gy in _GAUSS:
            # reference gradients of the 4 bilinear shape functions
            dN_dxi = 0.25 * np.array([-(1 - gy), (1 - gy), (1 + gy), -(1 + gy)])
            dN_deta = 0.25 * np.array([-(1 - gx), -(1 + gx), (1 + gx), (1 - gx)])
            j11 = xc @ dN_dxi
            j12 = xc @ dN_deta
            j21 = yc @ dN_dxi
            j22 = yc @ dN_deta
            det = j11 * j22 - j12 * j21
            # physical gradients: J^{-T} @ [dN_dxi; dN_deta]
            gx_phys = (j22[:, None] * dN_dxi[None, :] - j21[:, None] * dN_deta[None, :]) / det[:, None]
            gy_phys = (-j12[:, None] * dN_dxi[None, :] + j11[:, None] * dN_deta[None, :]) / det[:, None]
            ke += (
                gx_phys[:, :, None] * gx_phys[:, None, :]
                + gy_phys[:, :, None] * gy_phys[:, None, :]
            ) * det[:, None, None]

    rows = np.repeat(conn, 4, axis=1).ravel()
    cols = np.tile(conn, (1, 4)).ravel()
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(nnode, nnode))
    return K.tocsr()


@dataclass(frozen=True)
class EllipticOperator:
    """Assembled mapped Laplacian with its Dirichlet partition."""

    mesh: Mesh
    K: sp.csr_matrix          # full symmetric stiffness, all nodes
    free: np.ndarray          # flat indices of non-Dirichlet nodes
    dirichlet: np.ndarray     # flat indices of Dirichlet nodes
    Kff: sp.csr_matrix
    Kfd: sp.csr_matrix
    precond_diag: np.ndarray  # 1/diag(Kff)

    def solve(self, rho: np.ndarray, phiD: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Solve -lap(phi) = rho with phi = phiD on the electrodes.

        rho and phiD are nodal arrays of the mesh shape; phiD is read only
        at Dirichlet nodes.  Raises PoissonSolveError on non-convergence.
        """
        if not (0.0 < tol <= 1e-4):
            raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
        mesh = self.mesh
        rho = np.asarray(rho, dtype=float)
        if not np.all(np.isfinite(rho)):
            raise ValueError("rho must be finite")
        b_full = (mesh.node_weights * rho).ravel()
        ud = np.asarray(phiD, dtype=float).ravel()[self.dirichlet]
        b = b_full[self.free] - self.Kfd @ ud

        maxiter = 50 * mesh.nx * mesh.ny
        M = spla.LinearOperator(
            self.Kff.shape, matvec=lambda v: self.precond_diag * v
        )
        # warm start from the mean electrode value: constants are in the
        # stencil's null direction, so a constant Dirichlet trace converges
        # immediately and exactly
        u0 = np.full(self.free.size, ud.mean() if ud.size else 0.0)
        uf, info = spla.cg(self.Kff, b, x0=u0, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
        bnorm = np.linalg.norm(b)
        res = np.linalg.norm(b - self.Kff @ uf)
        if info != 0 or (bnorm > 0 and res > tol * bnorm * 10):
            raise PoissonSolveError(
                f"CG did not converge within {maxiter} iterations "
                f"(relative residual {res / max(bnorm, 1e-300):.3e})",
                residual=res,
            )
        phi = np.empty(mesh.x.size)
        phi[self.free] = uf
        phi[self.dirichlet] = ud
        return phi.reshape(mesh.shape)


def build_operator(mesh: Mesh) -> EllipticOperator:
    K = _assemble_stiffness(mesh)
    dmask = mesh.dirichlet_mask().ravel()
    if not dmask.any():
        raise ValueError("Poisson operator needs a non-empty Dirichlet part")
    free = np.flatnonzero(~dmask)
    dirichlet = np.flatnonzero(dmask)
    Kff = K[free][:, free].tocsr()
    Kfd = K[free][:, dirichlet].tocsr()
    diag = Kff.diagonal()
    return EllipticOperator(
        mesh=mesh,
        K=K,
        free=free,
        dirichlet=dirichlet,
        Kff=Kff,
        Kfd=Kfd,
        precond_diag=1.0 / diag,
    )


def electrode_dirichlet(mesh: Mesh, V: float) -> np.ndarray:
    """Nodal Dirichlet data: V on electrode A, 0 on electrode B."""
    from .geometry import BoundaryTag

    phiD = np.zeros(mesh.shape)
    phiD[mesh.tags == BoundaryTag.ELECTRODE_A] = V
    return phiD


def solve_poisson(mesh: Mesh, rho: np.ndarray, phiD: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """One-shot convenience wrapper; see EllipticOperator.solve."""
    return build_operator(mesh).solve(rho, phiD, tol=tol)


def _logical_derivatives(u: np.ndarray, dxi: float, deta: float, edge_order=1):
    du_dxi = np.gradient(u, dxi, axis=0, edge_order=edge_order)
    du_deta = np.gradient(u, deta, axis=1, edge_order=edge_order)
    return du_dxi, du_deta


def gradient_field(mesh: Mesh, phi: np.ndarray, edge_order: int = 1):
    """Physical gradient (gx, gy) and magnitude on nodes.

    Central differences in the logical frame with the chain rule of the
    terrain-following map: d/dx = d/dxi - (eta*w'/w) d/deta, d/dy = (1/w) d/deta.
    Boundary rows use one-sided differences of the given order.
    """
    phi = np.asarray(phi, dtype=float)
    du_dxi, du_deta = _logical_derivatives(phi, mesh.dxi, mesh.deta, edge_order)
    winv = 1.0 / mesh.w[:, None]
    gx = du_dxi - mesh.dydxi * winv * du_deta
    gy = du_deta * winv
    mag = np.hypot(gx, gy)
    return gx, gy, mag


def field_norms(mesh: Mesh, u: np.ndarray, gradient=None) -> dict:
    """Discrete norms via mass-lumped nodal quadrature."""
    u = np.asarray(u, dtype=float)
    wts = mesh.node_weights
    au = np.abs(u)
    out = {
        "L2": float(np.sqrt(np.sum(wts * u * u))),
        "Linf": float(au.max()),
        "L3": float(np.sum(wts * au**3) ** (1.0 / 3.0)),
        "L6": float(np.sum(wts * au**6) ** (1.0 / 6.0)),
    }
    if gradient is None:
        gx, gy, _ = gradient_field(mesh, u)
    else:
        gx, gy = gradient[0], gradient[1]
    out["H1_seminorm"] = float(np.sqrt(np.sum(wts * (gx * gx + gy * gy))))
    return out

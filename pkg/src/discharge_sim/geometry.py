"""Gap-domain geometry: profiles, boundary tagging and the mapped structured mesh.

The physical domain is Omega = {(x, y): |x| <= r, 0 <= y <= w(x)} with a
flat bottom electrode (B, grounded), the gap profile w(x) as the top
electrode (A, at potential V) and artificial side walls at |x| = r where
homogeneous Neumann conditions apply.  The mesh is a logically rectangular
grid obtained from the terrain-following map (xi, eta) -> (xi, eta*w(xi)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

__all__ = [
    "Rectangle",
    "TouchDown",
    "DomainSpec",
    "BoundaryTag",
    "Mesh",
    "gap_profile",
    "gap_profile_derivative",
    "build_mesh",
]


@dataclass(frozen=True)
class Rectangle:
    """Constant gap of height h (identity map)."""

    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"Rectangle height must be positive, got h={self.h}")


@dataclass(frozen=True)
class TouchDown:
    """Near-touch-down gap w(x) = g0 + c*|x|**exponent.

    The floor g0 > 0 regularizes the cusp so the mapped mesh stays
    nondegenerate; c = 0 recovers a flat gap of height g0.
    """

    g0: float
    c: float = 1.0
    exponent: float = 4.0 / 3.0

    def __post_init__(self):
        if self.g0 <= 0:
            raise ValueError(f"TouchDown minimum gap must be positive, got g0={self.g0}")
        if self.c < 0:
            raise ValueError(f"TouchDown coefficient must be >= 0, got c={self.c}")
        if self.exponent <= 0:
            raise ValueError(f"TouchDown exponent must be positive, got {self.exponent}")


@dataclass(frozen=True)
class DomainSpec:
    """Half-width r, gap profile, and cell counts of the logical grid."""

    r: float
    profile: Rectangle | TouchDown
    nx: int
    ny: int

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"half-width must be positive, got r={self.r}")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"cell counts must be >= 2, got nx={self.nx}, ny={self.ny}")


class BoundaryTag(IntEnum):
    INTERIOR = 0
    ELECTRODE_A = 1  # y = w(x), Dirichlet, potential V
    ELECTRODE_B = 2  # y = 0, Dirichlet, potential 0
    SIDE_C = 3       # |x| = r, homogeneous Neumann


def gap_profile(x, spec: DomainSpec):
    """Gap width w(x); even in x, minimized at x = 0 for TouchDown."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > spec.r * (1 + 1e-12)):
        raise ValueError(f"|x| exceeds half-width r={spec.r}")
    p = spec.profile
    if isinstance(p, Rectangle):
        w = np.full_like(x, p.h)
    else:
        w = p.g0 + p.c * np.abs(x) ** p.exponent
    return w if w.ndim else float(w)


def gap_profile_derivative(x, spec: DomainSpec):
    """dw/dx of the gap profile (0 for Rectangle)."""
    x = np.asarray(x, dtype=float)
    p = spec.profile
    if isinstance(p, Rectangle):
        d = np.zeros_like(x)
    else:
        d = p.c * p.exponent * np.abs(x) ** (p.exponent - 1.0) * np.sign(x)
    return d if d.ndim else float(d)


@dataclass(frozen=True)
class Mesh:
    """Mapped structured mesh; all arrays are indexed [i, j] on the
    (nx+1) x (ny+1) node grid with i along x and j along y.

    Immutable after construction; safe to share read-only.
    """

    spec: DomainSpec
    x: np.ndarray            # node x coordinates, (nx+1, ny+1)
    y: np.ndarray            # node y coordinates, (nx+1, ny+1)
    w: np.ndarray            # gap width w(x_i) per column, (nx+1,)
    wprime: np.ndarray       # w'(x_i) per column, (nx+1,)
    dydxi: np.ndarray        # metric term dy/dxi = eta * w'(xi), (nx+1, ny+1)
    tags: np.ndarray         # BoundaryTag per node, (nx+1, ny+1)
    cell_areas: np.ndarray   # physical quad areas, (nx, ny)
    node_weights: np.ndarray # lumped quadrature weights, (nx+1, ny+1)
    dxi: float               # logical spacing in x
    deta: float              # logical spacing in eta (unit interval / ny)
    all_neumann: bool = field(default=False)

    @property
    def nx(self) -> int:
        return self.spec.nx

    @property
    def ny(self) -> int:
        return self.spec.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.spec.nx + 1, self.spec.ny + 1)

    @property
    def eta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.spec.ny + 1)

    def dirichlet_mask(self) -> np.ndarray:
        return (self.tags == BoundaryTag.ELECTRODE_A) | (self.tags == BoundaryTag.ELECTRODE_B)

    def neumann_mask(self) -> np.ndarray:
        return self.tags == BoundaryTag.SIDE_C


def build_mesh(spec: DomainSpec, all_neumann: bool = False) -> Mesh:
    """Realize a DomainSpec as a mapped mesh.

    Node (i, j) sits at x = -r + i*(2r/nx), y = (j/ny)*w(x).  Corner
    nodes where the Dirichlet electrodes meet the Neumann side walls are
    tagged with the electrode tag.

    all_neumann=True tags every boundary node SIDE_C; this is a testing
    configuration for conservation checks and has no Dirichlet part.
    """
    nx, ny, r = spec.nx, spec.ny, spec.r
    xi = np.linspace(-r, r, nx + 1)
    eta = np.linspace(0.0, 1.0, ny + 1)
    w = np.asarray(gap_profile(xi, spec))
    wp = np.asarray(gap_profile_derivative(xi, spec))
    if np.any(w <= 0):
        raise ValueError("gap width must be positive over the whole domain")

    x = np.repeat(xi[:, None], ny + 1, axis=1)
    y = w[:, None] * eta[None, :]
    dydxi = wp[:, None] * eta[None, :]

    tags = np.full((nx + 1, ny + 1), BoundaryTag.INTERIOR, dtype=np.int8)
    if all_neumann:
        tags[0, :] = BoundaryTag.SIDE_C
        tags[-1, :] = BoundaryTag.SIDE_C
        tags[:, 0] = BoundaryTag.SIDE_C
        tags[:, -1] = BoundaryTag.SIDE_C
    else:
        tags[0, :] = BoundaryTag.SIDE_C
        tags[-1, :] = BoundaryTag.SIDE_C
        tags[:, 0] = BoundaryTag.ELECTRODE_B   # electrode tag wins at corners
        tags[:, -1] = BoundaryTag.ELECTRODE_A

    # Physical quad areas by the shoelace formula (positively oriented).
    x00, y00 = x[:-1, :-1], y[:-1, :-1]
    x10, y10 = x[1:, :-1], y[1:, :-1]
    x11, y11 = x[1:, 1:], y[1:, 1:]
    x01, y01 = x[:-1, 1:], y[:-1, 1:]
    cell_areas = 0.5 * np.abs(
        (x00 - x11) * (y10 - y01) - (x10 - x01) * (y00 - y11)
    )
    if np.any(cell_areas <= 0):
        raise ValueError("degenerate mesh: non-positive cell area")

    # Lumped nodal weights: each cell contributes a quarter of its area
    # to each of its four corners.
    node_weights = np.zeros((nx + 1, ny + 1))
    q = 0.25 * cell_areas
    node_weights[:-1, :-1] += q
    node_weights[1:, :-1] += q
    node_weights[1:, 1:] += q
    node_weights[:-1, 1:] += q

    return Mesh(
        spec=spec,
        x=x,
        y=y,
        w=w,
        wprime=wp,
        dydxi=dydxi,
        tags=tags,
        cell_areas=cell_areas,
        node_weights=node_weights,
        dxi=2.0 * r / nx,
        deta=1.0 / ny,
        all_neumann=all_neumann,
    )

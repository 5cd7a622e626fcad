"""Truncated auxiliary system: the clamp on the Poisson right-hand side,
the min-modified sources, runs at fixed truncation level M, and the
M-sweep convergence study toward the original system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Mesh
from .model import PhysParams, State, VelocityField
from .poisson import field_norms

__all__ = [
    "TruncationConfig",
    "clamp_G",
    "truncated_sources",
    "run_auxiliary",
    "SweepReport",
    "m_sweep",
]


@dataclass(frozen=True)
class TruncationConfig:
    M: float
    sweep_levels: tuple[float, ...] = ()

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError(f"truncation level M must be > 0, got {self.M}")
        levels = self.sweep_levels
        if levels:
            if any(l <= 0 for l in levels):
                raise ValueError("sweep levels must be strictly positive")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValueError("sweep levels must be strictly increasing")


def clamp_G(M: float, z):
    """G(M, z): z clamped to [-M, M]."""
    if M <= 0:
        raise ValueError(f"clamp level M must be > 0, got {M}")
    z = np.asarray(z, dtype=float)
    out = np.clip(z, -M, M)
    return out if out.ndim else float(out)


def truncated_sources(p, n, Emag, gradp, gradn, v, M: float, params: PhysParams):
    """Modified sources (F1, F2) of the truncated system.

    F1 = mu_-*E*(alpha1*e^{-alpha2/E}*n + eta0*min{M, -M*n/(1+M*p)}*p) - grad(p).v
    F2 = mu_-*E*(alpha1*e^{-alpha2/E}*n + eta0*min{M, -M*p/(1+M*p)}*n) - grad(n).v

    Evaluated exactly as written under IEEE semantics; non-finite values
    (1 + M*p crossing zero) are the caller's monitors' concern.
    """
    if M <= 0:
        raise ValueError(f"truncation level M must be > 0, got {M}")
    p = np.asarray(p, dtype=float)
    n = np.asarray(n, dtype=float)
    E = np.asarray(Emag, dtype=float)
    growth = np.zeros_like(E)
    pos = E > 0
    with np.errstate(over="ignore"):
        growth[pos] = params.alpha1 * np.exp(-params.alpha2 / E[pos])
    with np.errstate(divide="ignore", invalid="ignore"):
        m_p = np.minimum(M, -M * n / (1.0 + M * p))
        m_n = np.minimum(M, -M * p / (1.0 + M * p))
    muE = params.mu_minus * E
    F1 = muE * (growth * n + params.eta0 * m_p * p)
    F2 = muE * (growth * n + params.eta0 * m_n * n)
    gpx, gpy = gradp
    gnx, gny = gradn
    vx, vy = v
    F1 = F1 - (gpx * vx + gpy * vy)
    F2 = F2 - (gnx * vx + gny * vy)
    return F1, F2


def run_auxiliary(mesh: Mesh, params: PhysParams, velocity: VelocityField,
                  cfg, init: State, M: float, **kw):
    """Run the truncated system at level M; identical to run_simulation
    except for the clamped Poisson right-hand side and modified sources.
    """
    from dataclasses import replace

    from .transport import AuxiliaryM, run_simulation

    aux_cfg = replace(cfg, scheme=AuxiliaryM(M))
    return run_auxiliary_cfg(mesh, params, velocity, aux_cfg, init, **kw)


def run_auxiliary_cfg(mesh, params, velocity, aux_cfg, init, **kw):
    from .transport import AuxiliaryM, run_simulation

    if not isinstance(aux_cfg.scheme, AuxiliaryM):
        raise ValueError("run_auxiliary requires an AuxiliaryM scheme")
    return run_simulation(mesh, params, velocity, aux_cfg, init, **kw)


def spacetime_l2_difference(traj_a, traj_b, field: str) -> float:
    """L2(Omega x (0,T)) distance between two trajectories of one mesh,
    by trapezoidal time quadrature of the squared spatial L2 norms.
    """
    if len(traj_a.states) != len(traj_b.states):
        raise ValueError("trajectories must share the step sequence")
    mesh = traj_a.mesh
    dt = traj_a.cfg.dt
    sq = np.array([
        field_norms(mesh, getattr(sa, field) - getattr(sb, field))["L2"] ** 2
        for sa, sb in zip(traj_a.states, traj_b.states)
    ])
    return float(np.sqrt(np.trapezoid(sq, dx=dt)))


@dataclass
class SweepReport:
    levels: tuple[float, ...]
    diffs_p: list          # pairwise consecutive-level differences
    diffs_n: list
    ratios_p: list         # per-doubling decay ratios of the differences
    ratios_n: list
    failures: dict         # level -> error message
    trajectories: dict     # level -> Trajectory (successful runs)


def m_sweep(mesh: Mesh, params: PhysParams, velocity: VelocityField,
            cfg, init: State, levels, *, max_workers: int | None = None) -> SweepReport:
    """Run the auxiliary system at each level and report consecutive-level
    space-time L2 differences; member failures are recorded per level and
    the sweep continues.
    """
    import os
    from concurrent.futures import ThreadPoolExecutor

    levels = tuple(float(l) for l in levels)
    if len(levels) < 3:
        raise ValueError("m_sweep needs at least 3 levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("sweep levels must be strictly increasing")

    if max_workers is None:
        max_workers = int(os.environ.get("DISCHARGE_SIM_THREADS", "1"))
    max_workers = max(1, max_workers)

    def member(M):
        return run_auxiliary(mesh, params, velocity, cfg, init, M)

    results, failures = {}, {}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futs = {M: pool.submit(member, M) for M in levels}
        for M, fut in futs.items():
            try:
                results[M] = fut.result()
            except Exception as exc:  # member failures recorded, sweep continues
                failures[M] = str(exc)

    diffs_p, diffs_n = [], []
    for a, b in zip(levels, levels[1:]):
        if a in results and b in results:
            diffs_p.append(spacetime_l2_difference(results[a], results[b], "p"))
            diffs_n.append(spacetime_l2_difference(results[a], results[b], "n"))
        else:
            diffs_p.append(float("nan"))
            diffs_n.append(float("nan"))

    def ratios(diffs):
        out = []
        for a, b in zip(diffs, diffs[1:]):
            out.append(a / b if b > 0 else float("inf"))
        return out

    return SweepReport(
        levels=levels,
        diffs_p=diffs_p,
        diffs_n=diffs_n,
        ratios_p=ratios(diffs_p),
        ratios_n=ratios(diffs_n),
        failures=failures,
        trajectories=results,
    )

"""Per-run diagnostics and pass/fail property checks: positivity, charge
continuity, the energy functional with its Bihari-type bound and guaranteed
window, level-set tail measures, blow-up detection and continuous
dependence on initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Mesh
from .model import PhysParams, State, VelocityField
from .poisson import field_norms, gradient_field

__all__ = [
    "MonitorRecord",
    "MonitorConstants",
    "TailReport",
    "BeyondWindowError",
    "positivity_report",
    "charge_continuity_residual",
    "compute_energy_Y",
    "bihari_bound",
    "estimate_T1",
    "level_set_tail",
    "blowup_detect",
    "continuous_dependence",
    "fit_monitor_constants",
    "make_record",
]

POSITIVITY_TOL = -1e-12


@dataclass(frozen=True)
class MonitorConstants:
    """User-supplied constants of the energy-bound machinery."""

    H4: float
    H5: float
    H6: float

    def __post_init__(self):
        if self.H4 < 0 or self.H5 < 0 or self.H6 < 0:
            raise ValueError("monitor constants must be non-negative")


@dataclass
class MonitorRecord:
    t: float
    min_p: float
    min_n: float
    L2_p: float
    L2_n: float
    H1_p: float
    H1_n: float
    charge_residual: float | None
    Y: float
    bihari_bound: float | None
    clamp_active: bool
    source_finite: bool
    # running integral of the gradient terms, carried between records
    cum_grad: float = field(default=0.0, repr=False)
    grad_sq: float = field(default=0.0, repr=False)


class BeyondWindowError(ValueError):
    """The queried time lies beyond the guaranteed bound window."""


def positivity_report(state: State) -> dict:
    """Nodal minima of p and n; passes iff both are >= -1e-12."""
    min_p = float(state.p.min())
    min_n = float(state.n.min())
    out = {
        "min_p": min_p,
        "min_n": min_n,
        "pass": min_p >= POSITIVITY_TOL and min_n >= POSITIVITY_TOL,
    }
    if not out["pass"]:
        which, f = ("p", state.p) if min_p < min_n else ("n", state.n)
        i, j = np.unravel_index(int(np.argmin(f)), f.shape)
        out["location"] = (which, int(i), int(j))
    return out


def charge_continuity_residual(prev: State, next: State, mesh: Mesh,
                               params: PhysParams, velocity: VelocityField,
                               dt: float) -> float:
    """|d/dt int(p-n) + discrete boundary flux of (j+ + j-)|.

    Rebuilds the exact face fluxes of the step (implicit states, lagged
    potential), so the residual isolates the discrete source mismatch.
    """
    from .transport import boundary_outflux, build_species_operator

    if prev.p.shape != mesh.shape or next.p.shape != mesh.shape:
        raise ValueError("states do not match the mesh")
    Vw = mesh.node_weights
    Q_prev = float(np.sum(Vw * (prev.p - prev.n)))
    Q_next = float(np.sum(Vw * (next.p - next.n)))
    op_p = build_species_operator(mesh, params.eps_plus, -params.mu_plus,
                                  next.phi, velocity)
    op_n = build_species_operator(mesh, params.eps_minus, +params.mu_minus,
                                  next.phi, velocity)
    outflux = boundary_outflux(mesh, op_p, next.p) - boundary_outflux(mesh, op_n, next.n)
    return abs((Q_next - Q_prev) / dt + outflux)


def compute_energy_Y(traj, t: float) -> float:
    """Y(t) = |p(t)|_L2^2 + |n(t)|_L2^2 + int_0^t (|grad p|^2 + |grad n|^2) ds
    with trapezoidal time quadrature over the trajectory steps.
    """
    times = traj.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError(f"t={t} outside trajectory range [{times[0]}, {times[-1]}]")
    k = int(np.argmin(np.abs(times - t)))
    mesh = traj.mesh

    def grad_sq(state):
        nm_p = field_norms(mesh, state.p)["H1_seminorm"]
        nm_n = field_norms(mesh, state.n)["H1_seminorm"]
        return nm_p**2 + nm_n**2

    g = np.array([grad_sq(s) for s in traj.states[: k + 1]])
    integral = float(np.trapezoid(g, times[: k + 1])) if k > 0 else 0.0
    s = traj.states[k]
    return (field_norms(mesh, s.p)["L2"] ** 2
            + field_norms(mesh, s.n)["L2"] ** 2 + integral)


def _h_window(c: MonitorConstants, t: float) -> float:
    k = c.H4 + c.H5 * t
    return 1.0 + k - k * math.exp(c.H6 * t)


def bihari_bound(c: MonitorConstants, t: float) -> float:
    """(H4 + H5*t)*e^{H6*t} / (1 + H4 + H5*t - (H4 + H5*t)*e^{H6*t})."""
    h = _h_window(c, t)
    if h <= 0:
        raise BeyondWindowError(
            f"t={t} lies beyond the guaranteed window (h(t)={h:.3g} <= 0)")
    k = c.H4 + c.H5 * t
    return k * math.exp(c.H6 * t) / h


def estimate_T1(c: MonitorConstants) -> float:
    """Smallest root of h(t) = 1 + (H4+H5*t)*(1 - e^{H6*t}), or infinity
    when h is bounded below by a positive constant.
    """
    if (c.H4 == 0 and c.H5 == 0) or c.H6 == 0:
        return math.inf
    hi = 1.0
    while _h_window(c, hi) > 0:
        hi *= 2.0
        if hi > 1e18:
            return math.inf
    lo = 0.0
    # h is non-increasing: bisect to 1e-12 relative
    while hi - lo > 1e-12 * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if _h_window(c, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class TailReport:
    deltas: np.ndarray
    w: np.ndarray
    a1: float | None
    a2: float | None


def level_set_tail(traj, deltas) -> TailReport:
    """Space-time measure of the level sets {p > delta} and {n > delta}
    with a log-linear envelope fit where the measure is positive.
    """
    deltas = np.asarray(sorted(float(d) for d in deltas))
    if len(traj.states) < 2:
        raise ValueError("level_set_tail needs a completed trajectory")
    mesh = traj.mesh
    dt = traj.cfg.dt
    w = np.zeros_like(deltas)
    for state in traj.states[1:]:
        for k, d in enumerate(deltas):
            area = float(np.sum(mesh.node_weights[state.p > d]))
            area += float(np.sum(mesh.node_weights[state.n > d]))
            w[k] += dt * area
    if np.any(np.diff(w) > 1e-12 * max(w.max(), 1.0)):
        raise AssertionError("level-set measure failed to be non-increasing")

    pos = w > 0
    a1 = a2 = None
    if pos.sum() >= 2:
        d_pos, logw = deltas[pos], np.log(w[pos])
        wt = np.gradient(d_pos)  # weight samples by their local delta spacing
        coef = np.polyfit(d_pos, logw, 1, w=np.sqrt(wt))
        a2 = float(-coef[0])
        a1 = float(np.exp(coef[1]))
    return TailReport(deltas=deltas, w=w, a1=a1, a2=a2)


def blowup_detect(records, threshold: float):
    """First time max(L2_p, L2_n) exceeds the threshold, else None."""
    if not records:
        return None
    r0 = records[0]
    if threshold <= max(r0.L2_p, r0.L2_n):
        raise ValueError("threshold must exceed the initial L2 norms")
    for r in records:
        if max(r.L2_p, r.L2_n) > threshold:
            return r.t
    return None


@dataclass
class DependenceReport:
    times: np.ndarray
    D: np.ndarray          # L2 p-difference + L2 n-difference per step
    growth_rate: float | None
    prefactor: float | None


def continuous_dependence(mesh: Mesh, params: PhysParams, velocity: VelocityField,
                          cfg, amplitude: float, delta: float, **runkw) -> DependenceReport:
    """Run base and perturbed-initial-data configurations and report the
    difference curve D(t) with a least-squares exponential-growth fit.
    """
    from .model import init_state
    from .transport import run_simulation

    base = run_simulation(mesh, params, velocity, cfg,
                          init_state(mesh, params, amplitude), **runkw)
    pert = run_simulation(mesh, params, velocity, cfg,
                          init_state(mesh, params, amplitude + delta), **runkw)
    if base.early_stop or pert.early_stop:
        raise RuntimeError("continuous dependence needs completed base runs")
    times = base.times
    D = np.array([
        field_norms(mesh, sa.p - sb.p)["L2"] + field_norms(mesh, sa.n - sb.n)["L2"]
        for sa, sb in zip(base.states, pert.states)
    ])
    rate = pref = None
    pos = D > 0
    if pos.sum() >= 2:
        coef = np.polyfit(times[pos], np.log(D[pos]), 1)
        rate = float(coef[0])
        pref = float(np.exp(coef[1]))
    return DependenceReport(times=times, D=D, growth_rate=rate, prefactor=pref)


def fit_monitor_constants(traj, H6_grid=None) -> MonitorConstants:
    """Empirical mode: fit (H4, H5, H6) so the bound envelopes the measured
    energy Y(t) over the trajectory, preferring the tightest envelope.
    """
    times = traj.times
    Y = np.array([compute_energy_Y(traj, t) for t in times])
    H4 = max(float(Y[0]), 0.0)
    if H6_grid is None:
        H6_grid = np.linspace(0.0, 2.0, 21)
    best = None
    for H6 in H6_grid:
        for H5 in np.linspace(0.0, 10.0, 41):
            c = MonitorConstants(H4=H4, H5=float(H5), H6=float(H6))
            try:
                vals = np.array([bihari_bound(c, t) for t in times])
            except BeyondWindowError:
                continue
            if np.all(vals >= Y - 1e-9):
                slack = float(np.sum(vals - Y))
                if best is None or slack < best[0]:
                    best = (slack, c)
    if best is None:
        raise RuntimeError("no envelope found on the search grid")
    return best[1]


def make_record(mesh: Mesh, params: PhysParams, velocity: VelocityField,
                prev: State | None, state: State, cfg, diag,
                constants: MonitorConstants | None, records_so_far) -> MonitorRecord:
    """Assemble the per-step diagnostics row."""
    gp = gradient_field(mesh, state.p)
    gn = gradient_field(mesh, state.n)
    norms_p = field_norms(mesh, state.p, gradient=gp)
    norms_n = field_norms(mesh, state.n, gradient=gn)
    grad_sq = norms_p["H1_seminorm"] ** 2 + norms_n["H1_seminorm"] ** 2

    if prev is None or not records_so_far:
        cum = 0.0
    else:
        last = records_so_far[-1]
        cum = last.cum_grad + 0.5 * (last.grad_sq + grad_sq) * cfg.dt
    Y = norms_p["L2"] ** 2 + norms_n["L2"] ** 2 + cum

    residual = None
    if prev is not None:
        residual = charge_continuity_residual(prev, state, mesh, params,
                                              velocity, cfg.dt)
    bound = None
    if constants is not None:
        try:
            bound = bihari_bound(constants, state.t)
        except BeyondWindowError:
            bound = None

    return MonitorRecord(
        t=state.t,
        min_p=float(state.p.min()),
        min_n=float(state.n.min()),
        L2_p=norms_p["L2"],
        L2_n=norms_n["L2"],
        H1_p=norms_p["H1_seminorm"],
        H1_n=norms_n["H1_seminorm"],
        charge_residual=residual,
        Y=Y,
        bihari_bound=bound,
        clamp_active=bool(getattr(diag, "clamp_active", False)),
        source_finite=bool(getattr(diag, "source_finite", True)),
        cum_grad=cum,
        grad_sq=grad_sq,
    )

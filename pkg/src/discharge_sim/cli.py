"""Command-line driver: run orchestration and file outputs.

Subcommands: run, galerkin, msweep, verify, tail, dependence.  Exit codes:
0 success, 1 configuration/validation error, 2 numerical failure (cause
recorded in meta.json).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .auxiliary import m_sweep
from .config import ConfigError, RunConfig, parse_config, serialize_config
from .galerkin import build_basis, run_galerkin
from .geometry import build_mesh
from .mms import MMSConfig, verify_mms
from .model import build_velocity, init_state
from .monitors import continuous_dependence, level_set_tail
from .outputs import (write_convergence_report, write_dependence_report,
                      write_fields, write_meta, write_sweep_report,
                      write_tail_report, write_timeseries)
from .poisson import PoissonSolveError
from .transport import StepError, run_simulation

__all__ = ["main"]


def _load(args) -> tuple[RunConfig, str]:
    with open(args.config, encoding="utf-8") as f:
        text = f.read()
    cfg = parse_config(text)
    if args.out is not None:
        from dataclasses import replace

        from .config import OutputConfig
        cfg = replace(cfg, output=OutputConfig(directory=args.out,
                                               stride=cfg.output.stride))
    return cfg, serialize_config(cfg)


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.output.directory, exist_ok=True)
    return cfg.output.directory


def _snapshot_steps(nsteps: int, stride: int):
    steps = {0, nsteps}
    if stride > 0:
        steps.update(range(0, nsteps + 1, stride))
    return sorted(steps)


def _cmd_run(args) -> int:
    cfg, echo = _load(args)
    outdir = _outdir(cfg)
    mesh = build_mesh(cfg.domain)
    velocity = build_velocity(mesh, cfg.velocity)
    threshold = args.threshold if args.threshold is not None else cfg.blowup_threshold
    t0 = time.perf_counter()
    try:
        init = init_state(mesh, cfg.params, cfg.amplitude,
                          poisson_tol=cfg.step.poisson_tol)
        traj = run_simulation(mesh, cfg.params, velocity, cfg.step, init,
                              blowup_threshold=threshold,
                              monitor_constants=cfg.monitors)
    except (StepError, PoissonSolveError) as exc:
        write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
                   cause=f"numerical failure: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    write_timeseries(os.path.join(outdir, "timeseries.csv"), traj.records)
    nsteps = len(traj.states) - 1
    for k in _snapshot_steps(nsteps, cfg.output.stride):
        write_fields(outdir, k, mesh, traj.states[k])
    cause = traj.early_stop
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
               early_stop=cause, cause=cause)
    if cause is not None and cause.startswith("step failure"):
        print(cause, file=sys.stderr)
        return 2
    return 0


def _cmd_galerkin(args) -> int:
    from .config import GalerkinConfig
    cfg, echo = _load(args)
    gal = cfg.galerkin or GalerkinConfig()
    outdir = _outdir(cfg)
    t0 = time.perf_counter()
    try:
        basis = build_basis(cfg.domain, gal.kx_modes, gal.eta_modes, gal.quad_n)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        traj = run_galerkin(basis, cfg.params, cfg.velocity, cfg.truncation.M,
                            dt=cfg.step.dt, t_end=cfg.step.t_end,
                            amplitude=cfg.amplitude)
    except FloatingPointError as exc:
        write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
                   cause=f"numerical failure: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_timeseries(os.path.join(outdir, "timeseries.csv"), traj.records)
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0)
    return 0


def _cmd_msweep(args) -> int:
    cfg, echo = _load(args)
    if args.levels:
        levels = tuple(float(x) for x in args.levels.split(","))
    else:
        levels = cfg.truncation.sweep_levels
    if len(levels) < 3:
        print("msweep needs at least 3 levels (--levels or "
              "truncation.sweep_levels)", file=sys.stderr)
        return 1
    outdir = _outdir(cfg)
    mesh = build_mesh(cfg.domain)
    velocity = build_velocity(mesh, cfg.velocity)
    t0 = time.perf_counter()
    try:
        init = init_state(mesh, cfg.params, cfg.amplitude,
                          poisson_tol=cfg.step.poisson_tol)
        report = m_sweep(mesh, cfg.params, velocity, cfg.step, init, levels)
    except (ValueError, StepError, PoissonSolveError) as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (StepError, PoissonSolveError)) else 1
    write_sweep_report(os.path.join(outdir, "sweep_report.csv"), report)
    for M, traj in report.trajectories.items():
        subdir = os.path.join(outdir, f"M_{M:g}")
        os.makedirs(subdir, exist_ok=True)
        write_timeseries(os.path.join(subdir, "timeseries.csv"), traj.records)
    cause = "; ".join(f"M={M:g}: {msg}" for M, msg in report.failures.items()) or None
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
               cause=cause)
    return 0 if not report.failures else 2


def _cmd_verify(args) -> int:
    from .config import VerifyConfig
    cfg, echo = _load(args)
    ver = cfg.verify or VerifyConfig()
    outdir = _outdir(cfg)
    t0 = time.perf_counter()
    mms_cfg = MMSConfig(domain=cfg.domain, params=cfg.params, mode=ver.mode,
                        levels=ver.levels, dt0=cfg.step.dt,
                        t_end=cfg.step.t_end)
    try:
        report = verify_mms(mms_cfg)
    except (StepError, PoissonSolveError) as exc:
        write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
                   cause=f"numerical failure: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_convergence_report(os.path.join(outdir, "convergence_report.csv"),
                             report)
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0)
    return 0


def _cmd_tail(args) -> int:
    cfg, echo = _load(args)
    deltas = cfg.tail_deltas
    if args.delta is not None:
        deltas = tuple(float(x) for x in args.delta.split(","))
    if len(deltas) < 2:
        print("tail needs at least 2 level values (--delta or "
              "monitors.tail_deltas)", file=sys.stderr)
        return 1
    outdir = _outdir(cfg)
    mesh = build_mesh(cfg.domain)
    velocity = build_velocity(mesh, cfg.velocity)
    t0 = time.perf_counter()
    try:
        init = init_state(mesh, cfg.params, cfg.amplitude,
                          poisson_tol=cfg.step.poisson_tol)
        traj = run_simulation(mesh, cfg.params, velocity, cfg.step, init,
                              monitor_constants=cfg.monitors)
        report = level_set_tail(traj, deltas)
    except (StepError, PoissonSolveError) as exc:
        write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
                   cause=f"numerical failure: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_tail_report(os.path.join(outdir, "tail_report.csv"), report)
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
               early_stop=traj.early_stop)
    return 0


def _cmd_dependence(args) -> int:
    cfg, echo = _load(args)
    delta = args.delta if args.delta is not None else cfg.dependence_delta
    outdir = _outdir(cfg)
    mesh = build_mesh(cfg.domain)
    velocity = build_velocity(mesh, cfg.velocity)
    t0 = time.perf_counter()
    try:
        report = continuous_dependence(mesh, cfg.params, velocity, cfg.step,
                                       cfg.amplitude, delta)
    except (RuntimeError, StepError, PoissonSolveError) as exc:
        write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
                   cause=f"numerical failure: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_dependence_report(os.path.join(outdir, "dependence.csv"), report)
    write_meta(outdir, config_text=echo, wall_time=time.perf_counter() - t0,
               extra={"growth_rate": report.growth_rate,
                      "prefactor": report.prefactor})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="discharge-sim",
        description="Capacitor-gap discharge simulator and verification harness",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to config file")
        p.add_argument("--out", default=None, help="output directory override")

    p = sub.add_parser("run", help="time-dependent simulation")
    common(p)
    p.add_argument("--threshold", type=float, default=None,
                   help="blow-up detection threshold on max L2 norm")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("galerkin", help="spectral cross-check run")
    common(p)
    p.set_defaults(fn=_cmd_galerkin)

    p = sub.add_parser("msweep", help="truncation-level convergence sweep")
    common(p)
    p.add_argument("--levels", default=None, help="comma list of M levels")
    p.set_defaults(fn=_cmd_msweep)

    p = sub.add_parser("verify", help="manufactured-solution convergence study")
    common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("tail", help="level-set tail measure of a run")
    common(p)
    p.add_argument("--delta", default=None, help="comma list of level values")
    p.set_defaults(fn=_cmd_tail)

    p = sub.add_parser("dependence", help="initial-data perturbation study")
    common(p)
    p.add_argument("--delta", type=float, default=None,
                   help="perturbation amplitude")
    p.set_defaults(fn=_cmd_dependence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

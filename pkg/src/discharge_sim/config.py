"""Structured-text run configuration: parsing with line-precise
diagnostics, validation against the domain types, and exact round-trip
serialization.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .auxiliary import TruncationConfig
from .geometry import DomainSpec, Rectangle, TouchDown
from .model import PhysParams, StreamFunction, Zero
from .monitors import MonitorConstants
from .transport import AuxiliaryM, OriginalF, StepConfig

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config"]


class ConfigError(ValueError):
    """Configuration rejected: syntax error (with line number) or
    constraint violation (with the offending key path).
    """


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    stride: int = 0          # snapshot every N steps; 0 = first and last only

    def __post_init__(self):
        if self.stride < 0:
            raise ValueError(f"output.stride must be >= 0, got {self.stride}")


@dataclass(frozen=True)
class VerifyConfig:
    mode: str = "poisson"
    levels: int = 3

    def __post_init__(self):
        if self.mode not in ("poisson", "transport", "coupled"):
            raise ValueError(f"verify.mode must be poisson/transport/coupled, "
                             f"got {self.mode!r}")
        if self.levels < 2:
            raise ValueError(f"verify.levels must be >= 2, got {self.levels}")


@dataclass(frozen=True)
class GalerkinConfig:
    kx_modes: int = 8
    eta_modes: int = 8
    quad_n: int = 48

    def __post_init__(self):
        if self.kx_modes < 1 or self.eta_modes < 1:
            raise ValueError("galerkin mode counts must be >= 1")
        if self.quad_n < 2:
            raise ValueError("galerkin.quad_n must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    params: PhysParams
    velocity: Zero | StreamFunction
    step: StepConfig
    truncation: TruncationConfig
    output: OutputConfig
    amplitude: float = 0.0
    monitors: MonitorConstants | None = None
    blowup_threshold: float | None = None
    tail_deltas: tuple[float, ...] = ()
    dependence_delta: float = 0.0
    verify: VerifyConfig | None = None
    galerkin: GalerkinConfig | None = None


_SCHEMA = {
    "domain": {"r", "profile", "h", "g0", "c", "exponent", "nx", "ny"},
    "params": {"eps0", "eps_plus", "eps_minus", "mu_plus", "mu_minus",
               "alpha1", "alpha2", "eta0", "V", "theta_p", "theta_n",
               "amplitude"},
    "velocity": {"type", "v0", "kx", "ky"},
    "step": {"dt", "t_end", "scheme", "source_treatment", "poisson_tol"},
    "truncation": {"M", "sweep_levels"},
    "monitors": {"H4", "H5", "H6", "blowup_threshold", "tail_deltas",
                 "dependence_delta"},
    "output": {"dir", "stride"},
    "verify": {"mode", "levels"},
    "galerkin": {"kx_modes", "eta_modes", "quad_n"},
}


class _Section:
    """One parsed section with typed getters that report the key path."""

    def __init__(self, name, mapping):
        self.name = name
        self.map = dict(mapping)

    def _get(self, key, conv, default, required):
        if key not in self.map:
            if required:
                raise ConfigError(f"missing required key {self.name}.{key}")
            return default
        raw = self.map[key]
        try:
            return conv(raw)
        except ConfigError:
            raise
        except Exception:
            raise ConfigError(
                f"invalid value for {self.name}.{key}: {raw!r}") from None

    def num(self, key, default=None, required=False):
        return self._get(key, float, default, required)

    def integer(self, key, default=None, required=False):
        def conv(s):
            v = float(s)
            if v != int(v):
                raise ValueError(s)
            return int(v)
        return self._get(key, conv, default, required)

    def word(self, key, default=None, required=False):
        return self._get(key, str.strip, default, required)

    def numlist(self, key, default=()):
        def conv(s):
            parts = [p for p in s.split(",") if p.strip()]
            return tuple(float(p) for p in parts)
        return self._get(key, conv, tuple(default), False)


def _read_sections(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        where = f" (line {lineno})" if lineno else ""
        raise ConfigError(f"config syntax error{where}: {exc.message}") from None
    out = {}
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in {k.lower() for k in _SCHEMA[sec]}:
                raise ConfigError(f"unknown key {sec}.{key}")
        # configparser lower-cases keys; recover schema-cased names
        cased = {k.lower(): k for k in _SCHEMA[sec]}
        out[sec] = _Section(sec, {cased[k]: v for k, v in cp[sec].items()})
    return out


def _wrap(name, fn, *args, **kw):
    """Run a dataclass constructor, rewriting its ValueError as ConfigError
    with the section prefix.
    """
    try:
        return fn(*args, **kw)
    except ValueError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith(name) else f"{name}: {msg}") from None


def parse_config(text: str) -> RunConfig:
    secs = _read_sections(text)

    def section(name):
        return secs.get(name, _Section(name, {}))

    dom = section("domain")
    profile_name = dom.word("profile", "rectangle")
    if profile_name == "rectangle":
        profile = _wrap("domain", Rectangle, h=dom.num("h", 1.0))
    elif profile_name == "touchdown":
        kw = {"g0": dom.num("g0", required=True), "c": dom.num("c", 1.0)}
        if "exponent" in dom.map:
            kw["exponent"] = dom.num("exponent")
        profile = _wrap("domain", TouchDown, **kw)
    else:
        raise ConfigError(f"domain.profile must be rectangle or touchdown, "
                          f"got {profile_name!r}")
    domain = _wrap("domain", DomainSpec, r=dom.num("r", 1.0), profile=profile,
                   nx=dom.integer("nx", 32), ny=dom.integer("ny", 32))

    par = section("params")
    pkw = {}
    for name in ("eps0", "eps_plus", "eps_minus", "mu_plus", "mu_minus",
                 "alpha1", "alpha2", "eta0", "V", "theta_p", "theta_n"):
        if name in par.map:
            pkw[name] = par.num(name)
    params = _wrap("params", PhysParams, **pkw)
    amplitude = par.num("amplitude", 0.0)
    if amplitude < -min(params.theta_p, params.theta_n):
        raise ConfigError(
            f"params.amplitude = {amplitude} makes the initial densities "
            f"negative")

    vel = section("velocity")
    vtype = vel.word("type", "zero")
    if vtype == "zero":
        velocity = Zero()
    elif vtype == "stream":
        velocity = _wrap("velocity", StreamFunction, v0=vel.num("v0", required=True),
                         kx=vel.integer("kx", 1), ky=vel.integer("ky", 1))
    else:
        raise ConfigError(f"velocity.type must be zero or stream, got {vtype!r}")

    trn = section("truncation")
    truncation = _wrap("truncation", TruncationConfig, M=trn.num("M", 1e6),
                       sweep_levels=trn.numlist("sweep_levels"))

    stp = section("step")
    scheme_name = stp.word("scheme", "auxiliary")
    if scheme_name == "auxiliary":
        scheme = AuxiliaryM(truncation.M)
    elif scheme_name == "original":
        scheme = OriginalF()
    else:
        raise ConfigError(f"step.scheme must be auxiliary or original, "
                          f"got {scheme_name!r}")
    step = _wrap("step", StepConfig,
                 dt=stp.num("dt", required=True),
                 t_end=stp.num("t_end", required=True),
                 scheme=scheme,
                 source_treatment=stp.word("source_treatment", "semi_implicit_sink"),
                 poisson_tol=stp.num("poisson_tol", 1e-10))

    mon = section("monitors")
    monitors = None
    if any(k in mon.map for k in ("H4", "H5", "H6")):
        monitors = _wrap("monitors", MonitorConstants, H4=mon.num("H4", 0.0),
                         H5=mon.num("H5", 0.0), H6=mon.num("H6", 0.0))
    blowup = mon.num("blowup_threshold", None)
    tail_deltas = mon.numlist("tail_deltas")
    dep_delta = mon.num("dependence_delta", 0.0)

    out = section("output")
    output = _wrap("output", OutputConfig, directory=out.word("dir", "out"),
                   stride=out.integer("stride", 0))

    verify = None
    if "verify" in secs:
        ver = secs["verify"]
        verify = _wrap("verify", VerifyConfig, mode=ver.word("mode", "poisson"),
                       levels=ver.integer("levels", 3))
    galerkin = None
    if "galerkin" in secs:
        gal = secs["galerkin"]
        galerkin = _wrap("galerkin", GalerkinConfig,
                         kx_modes=gal.integer("kx_modes", 8),
                         eta_modes=gal.integer("eta_modes", 8),
                         quad_n=gal.integer("quad_n", 48))

    return RunConfig(domain=domain, params=params, velocity=velocity,
                     step=step, truncation=truncation, output=output,
                     amplitude=amplitude, monitors=monitors,
                     blowup_threshold=blowup, tail_deltas=tail_deltas,
                     dependence_delta=dep_delta, verify=verify,
                     galerkin=galerkin)


def _fmt(x) -> str:
    return repr(float(x))


def serialize_config(cfg: RunConfig) -> str:
    """Write a config text that parses back to an identical RunConfig."""
    buf = io.StringIO()

    def sec(name, pairs):
        pairs = [(k, v) for k, v in pairs if v is not None]
        if not pairs:
            return
        buf.write(f"[{name}]\n")
        for k, v in pairs:
            buf.write(f"{k} = {v}\n")
        buf.write("\n")

    d = cfg.domain
    prof = d.profile
    if isinstance(prof, Rectangle):
        sec("domain", [("r", _fmt(d.r)), ("profile", "rectangle"),
                       ("h", _fmt(prof.h)), ("nx", d.nx), ("ny", d.ny)])
    else:
        sec("domain", [("r", _fmt(d.r)), ("profile", "touchdown"),
                       ("g0", _fmt(prof.g0)), ("c", _fmt(prof.c)),
                       ("exponent", _fmt(prof.exponent)),
                       ("nx", d.nx), ("ny", d.ny)])

    p = cfg.params
    sec("params", [(k, _fmt(getattr(p, k))) for k in
                   ("eps0", "eps_plus", "eps_minus", "mu_plus", "mu_minus",
                    "alpha1", "alpha2", "eta0", "V", "theta_p", "theta_n")]
        + [("amplitude", _fmt(cfg.amplitude))])

    v = cfg.velocity
    if isinstance(v, Zero):
        sec("velocity", [("type", "zero")])
    else:
        sec("velocity", [("type", "stream"), ("v0", _fmt(v.v0)),
                         ("kx", v.kx), ("ky", v.ky)])

    s = cfg.step
    sec("step", [("dt", _fmt(s.dt)), ("t_end", _fmt(s.t_end)),
                 ("scheme", "auxiliary" if isinstance(s.scheme, AuxiliaryM)
                  else "original"),
                 ("source_treatment", s.source_treatment),
                 ("poisson_tol", _fmt(s.poisson_tol))])

    t = cfg.truncation
    sec("truncation", [("M", _fmt(t.M)),
                       ("sweep_levels",
                        ",".join(_fmt(x) for x in t.sweep_levels)
                        if t.sweep_levels else None)])

    mon_pairs = []
    if cfg.monitors is not None:
        mon_pairs += [("H4", _fmt(cfg.monitors.H4)), ("H5", _fmt(cfg.monitors.H5)),
                      ("H6", _fmt(cfg.monitors.H6))]
    if cfg.blowup_threshold is not None:
        mon_pairs.append(("blowup_threshold", _fmt(cfg.blowup_threshold)))
    if cfg.tail_deltas:
        mon_pairs.append(("tail_deltas", ",".join(_fmt(x) for x in cfg.tail_deltas)))
    if cfg.dependence_delta:
        mon_pairs.append(("dependence_delta", _fmt(cfg.dependence_delta)))
    sec("monitors", mon_pairs)

    sec("output", [("dir", cfg.output.directory), ("stride", cfg.output.stride)])
    if cfg.verify is not None:
        sec("verify", [("mode", cfg.verify.mode), ("levels", cfg.verify.levels)])
    if cfg.galerkin is not None:
        sec("galerkin", [("kx_modes", cfg.galerkin.kx_modes),
                         ("eta_modes", cfg.galerkin.eta_modes),
                         ("quad_n", cfg.galerkin.quad_n)])
    return buf.getvalue()

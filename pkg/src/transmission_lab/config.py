"""Scenario configuration: INI sections mapped onto dataclasses.

Every key is validated; unknown sections or keys raise ConfigError naming
``section.key``.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError, TransmissionLabError
from .geometry import SpdTensor2


@dataclass
class GeometryConfig:
    r_inner: float = 1.0
    r_outer: float = 2.0
    h: float = 0.1


@dataclass
class CoefficientsConfig:
    alpha_i: float = 1.0
    alpha_e: float = 1.0
    beta_e: float = -1.0
    beta_i: float = 0.0
    gamma: float = 1.0
    c0: float = 0.0


@dataclass
class ConductivitiesConfig:
    """Each tensor is 'm11, m12, m22' or a single scalar."""

    M_i: tuple = (1.0, 0.0, 1.0)
    M_e: tuple = (1.0, 0.0, 1.0)
    M_b: tuple = (1.0, 0.0, 1.0)


@dataclass
class CardioConfig:
    sigma_i: float = 1.0
    sigma_e: float = 2.0
    chi: float = 1.0
    C_m: float = 1.0
    eps_eps0: float = 0.5
    a1: float = 0.0
    a2: float = 0.0
    a0: float = 0.0


@dataclass
class CableConfig:
    mu_i: float = 1.0
    mu_e: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    a0: float = 0.0
    dt: float = 0.005
    n_steps: int = 20
    theta: float = 1.0


@dataclass
class ElasticityConfig:
    lam_i: float = 2.0
    mu_i: float = 1.0
    lam_e: float = 1.0
    mu_e: float = 0.5
    lam_b: float = 1.0
    mu_b: float = 1.0


@dataclass
class ExperimentConfig:
    lambdas: tuple = (1e-2, 1e-4, 1e-6, 1e-8)
    bump_center: tuple = (0.0, 0.0)
    bump_radius: float = 1.0
    bump_amplitude: float = 1.0
    h0: float = 0.0
    modes: tuple = (0, 1, 2)
    degree: int = 3
    f0_amp: float = 1.0
    f1_amp: float = 0.5


@dataclass
class RunConfig:
    seed: int = 0


@dataclass
class ScenarioConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    coefficients: CoefficientsConfig = field(default_factory=CoefficientsConfig)
    conductivities: ConductivitiesConfig = field(default_factory=ConductivitiesConfig)
    cardio: CardioConfig = field(default_factory=CardioConfig)
    cable: CableConfig = field(default_factory=CableConfig)
    elasticity: ElasticityConfig = field(default_factory=ElasticityConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def tensors(self):
        c = self.conductivities
        return SpdTensor2(*c.M_i), SpdTensor2(*c.M_e), SpdTensor2(*c.M_b)

    def transmission_coefficients(self):
        from .transmission import TransmissionCoefficients

        return TransmissionCoefficients(**vars(self.coefficients))

    def cardio_constants(self):
        from .transmission import CardioConstants

        return CardioConstants(**vars(self.cardio))

    def lame_parameters(self):
        from .elasticity import LameParameters

        e = self.elasticity
        return LameParameters(e.lam_i, e.mu_i), LameParameters(e.lam_e, e.mu_e), LameParameters(e.lam_b, e.mu_b)

    def cable_coefficients(self):
        from .parabolic import CableCoefficients

        k, c = self.coefficients, self.cable
        return CableCoefficients(c.mu_i, c.mu_e, k.alpha_i, k.alpha_e, k.gamma, c.a1, c.a2, c.a0)


def _floats(text: str, key: str) -> tuple:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers, got {text!r}") from exc


def _parse(value: str, default, key: str):
    if isinstance(default, bool):
        raise ConfigError(f"{key}: boolean keys are not supported")
    if isinstance(default, int):
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from exc
    if isinstance(default, float):
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from exc
    return _floats(value, key)


def _tensor(vals: tuple, key: str) -> tuple:
    if len(vals) == 1:
        vals = (vals[0], 0.0, vals[0])
    if len(vals) != 3:
        raise ConfigError(f"{key}: a tensor needs 1 or 3 entries, got {len(vals)}")
    try:
        SpdTensor2(*vals)
    except TransmissionLabError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    return vals


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    g = cfg.geometry
    if not g.r_inner > 0:
        raise ConfigError(f"geometry.r_inner must be positive, got {g.r_inner}")
    if not g.r_inner < g.r_outer:
        raise ConfigError(f"geometry.r_inner ({g.r_inner}) must be smaller than geometry.r_outer ({g.r_outer})")
    if not 0 < g.h <= g.r_inner:
        raise ConfigError(f"geometry.h must lie in (0, r_inner], got {g.h}")
    for name in ("M_i", "M_e", "M_b"):
        setattr(cfg.conductivities, name, _tensor(tuple(getattr(cfg.conductivities, name)), f"conductivities.{name}"))
    checks = [("coefficients", cfg.transmission_coefficients), ("cardio", cfg.cardio_constants),
              ("elasticity", cfg.lame_parameters), ("cable", cfg.cable_coefficients)]
    for section, build in checks:
        try:
            build()
        except (TransmissionLabError, ValueError) as exc:
            raise ConfigError(f"{section}: {exc}") from exc
    lam = cfg.experiment.lambdas
    if not lam or any(v <= 0 for v in lam):
        raise ConfigError("experiment.lambdas must be a non-empty list of positive numbers")
    if len(cfg.experiment.bump_center) != 2:
        raise ConfigError("experiment.bump_center needs two entries")
    if not cfg.experiment.bump_radius > 0:
        raise ConfigError("experiment.bump_radius must be positive")
    if any(m < 0 or m != int(m) for m in cfg.experiment.modes):
        raise ConfigError("experiment.modes must be non-negative integers")
    cfg.experiment.modes = tuple(int(m) for m in cfg.experiment.modes)
    if cfg.experiment.degree < 2:
        raise ConfigError("experiment.degree must be at least 2")
    c = cfg.cable
    if not c.dt > 0:
        raise ConfigError("cable.dt must be positive")
    if c.n_steps < 1:
        raise ConfigError("cable.n_steps must be at least 1")
    if not 0 <= c.theta <= 1:
        raise ConfigError("cable.theta must lie in [0, 1]")
    return cfg


def load_config(path=None, seed: int | None = None) -> ScenarioConfig:
    """Read an INI file (or use defaults when path is None) and validate it."""
    cfg = ScenarioConfig()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {str(p)!r} not found")
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read(p)
        except configparser.Error as exc:
            raise ConfigError(f"config: {exc}") from exc
        sections = {f.name: f for f in fields(ScenarioConfig)}
        for sec in parser.sections():
            if sec not in sections:
                raise ConfigError(f"{sec}: unknown section")
            target = getattr(cfg, sec)
            known = {f.name: f for f in fields(target)}
            for key, value in parser.items(sec):
                if key not in known:
                    raise ConfigError(f"{sec}.{key}: unknown key")
                setattr(target, key, _parse(value, getattr(target, key), f"{sec}.{key}"))
    if seed is not None:
        cfg.run.seed = int(seed)
    return validate(cfg)


def dump_config(cfg: ScenarioConfig) -> str:
    out = []
    for f in fields(ScenarioConfig):
        out.append(f"[{f.name}]")
        for g in fields(getattr(cfg, f.name)):
            v = getattr(getattr(cfg, f.name), g.name)
            out.append(f"{g.name} = {', '.join(repr(float(x)) for x in v) if isinstance(v, tuple) else v}")
        out.append("")
    return "\n".join(out)

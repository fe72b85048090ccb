"""Run configuration: a flat TOML table with a fixed key set."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .surfaces import PROFILE_NAMES, PerturbedSphereSpec, StarSurface, make_profile, perturbed_sphere, sphere


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 3
    family: str = "perturbed"          # "sphere" or "perturbed"
    center: list | None = None         # default e_n
    r0: float = 1.0
    eps: float = 0.05                  # amplitude for analyze
    profile: str = "mixed"
    frame: str = "random"              # "identity" or "random" (seeded)
    samples: int = 4000
    directions: int = 12
    eps_grid: list = field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    tol_s: float = 1e-9
    seed: int = 0
    out: str = "out"
    mc_samples: int = 100000
    configs: int = 200
    margin: float = 0.05
    negative_control: bool = False
    svg: bool = False

    def center_point(self):
        if self.center is None:
            c = np.zeros(self.n)
            c[-1] = 1.0
            return c
        return np.asarray(self.center, dtype=float)

    def frame_matrix(self):
        if self.frame == "identity":
            return np.eye(self.n)
        rng = np.random.default_rng([self.seed, 7])
        Q, _ = np.linalg.qr(rng.normal(size=(self.n, self.n)))
        return Q

    def template(self) -> PerturbedSphereSpec:
        prof = make_profile(self.profile, self.n) if self.family == "perturbed" else None
        return PerturbedSphereSpec(self.center_point(), self.r0, prof, 0.0, self.frame_matrix())

    def surface(self, eps=None) -> StarSurface:
        if self.family == "sphere":
            return sphere(self.center_point(), self.r0, self.samples)
        t = self.template()
        e = self.eps if eps is None else eps
        return perturbed_sphere(PerturbedSphereSpec(t.center, t.r0, t.profile, e, t.frame), self.samples)


_TYPES = {
    "n": int, "family": str, "center": list, "r0": float, "eps": float, "profile": str,
    "frame": str, "samples": int, "directions": int, "eps_grid": list, "tol_s": float,
    "seed": int, "out": str, "mc_samples": int, "configs": int, "margin": float,
    "negative_control": bool, "svg": bool,
}


def _coerce(key, value):
    want = _TYPES[key]
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if want is int and isinstance(value, bool):
        raise ConfigError(f"field '{key}': expected integer, got boolean")
    if not isinstance(value, want):
        raise ConfigError(f"field '{key}': expected {want.__name__}, got {type(value).__name__}")
    if want is list:
        try:
            value = [float(v) for v in value]
        except (TypeError, ValueError):
            raise ConfigError(f"field '{key}': expected a list of numbers") from None
    return value


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.n < 2:
        raise ConfigError("field 'n': dimension must be >= 2")
    if cfg.family not in ("sphere", "perturbed"):
        raise ConfigError("field 'family': expected 'sphere' or 'perturbed'")
    if cfg.profile not in PROFILE_NAMES:
        raise ConfigError(f"field 'profile': expected one of {', '.join(PROFILE_NAMES)}")
    if cfg.frame not in ("identity", "random"):
        raise ConfigError("field 'frame': expected 'identity' or 'random'")
    if cfg.center is not None:
        if len(cfg.center) != cfg.n:
            raise ConfigError(f"field 'center': expected {cfg.n} coordinates")
        if not cfg.center[-1] > 0:
            raise ConfigError("field 'center': last coordinate must be positive")
    if not cfg.r0 > 0:
        raise ConfigError("field 'r0': must be positive")
    if cfg.eps < 0:
        raise ConfigError("field 'eps': must be nonnegative")
    if cfg.samples < 100:
        raise ConfigError("field 'samples': must be >= 100")
    if cfg.directions < 0:
        raise ConfigError("field 'directions': must be nonnegative")
    g = cfg.eps_grid
    if not g:
        raise ConfigError("field 'eps_grid': empty grid")
    if not (all(e > 0 for e in g) or all(e == 0 for e in g) and len(g) == 1):
        raise ConfigError("field 'eps_grid': values must be strictly positive or exactly [0]")
    if any(b >= a for a, b in zip(g, g[1:])):
        raise ConfigError("field 'eps_grid': values must be strictly decreasing")
    if not cfg.tol_s > 0:
        raise ConfigError("field 'tol_s': must be positive")
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("field 'seed': must be an unsigned 64-bit integer")
    if cfg.mc_samples < 0 or cfg.configs < 0:
        raise ConfigError("counts must be nonnegative")
    if not 0 <= cfg.margin < 1:
        raise ConfigError("field 'margin': must lie in [0, 1)")
    return cfg


def from_dict(data: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    kw = {k: _coerce(k, v) for k, v in data.items()}
    return validate(RunConfig(**kw))


def load(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None

"""Run configuration: defaults, JSON loading and validation."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields

from .exceptions import ConfigError

SEED_ENV = "COIN_SEED"


@dataclass(frozen=True)
class Config:
    context_fraction: float = 0.08
    radius_factor: float = 0.5
    min_cluster_fraction: float = 0.03
    ps_threshold: float = 0.8
    ps_splits: int = 5
    max_L: int = 10
    lambda_grid: tuple = (0.001, 0.003, 0.01, 0.03, 0.1, 0.3)
    theta_rel: float = 0.1
    beta: object = 1.0  # scalar or one value per attribute
    p: object = 0  # scalar or one value per attribute, each in {-1, 0, 1}
    master_seed: int = 42
    k_min: int = 10
    holdout_fraction: float = 0.2
    kmeans_restarts: int = 10
    solver_max_iter: int = 5000
    solver_tol: float = 1e-6
    report_threshold: float = 0.5  # d below this is flagged as a likely misdetection
    noise_scale: float = 0.1
    simulated_scale: float = 1.0
    cal_alpha_grid: tuple = (0.001, 0.003, 0.01, 0.03, 0.1, 0.3)
    cal_folds: int = 5

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in _as_list(self.lambda_grid)))
        object.__setattr__(self, "cal_alpha_grid", tuple(float(v) for v in _as_list(self.cal_alpha_grid)))
        if isinstance(self.beta, (list, tuple)):
            object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        if isinstance(self.p, (list, tuple)):
            object.__setattr__(self, "p", tuple(int(v) for v in self.p))
        self.validate()

    def validate(self):
        for name in ("context_fraction", "min_cluster_fraction", "theta_rel", "holdout_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        if not 0 < self.radius_factor < 1:
            raise ConfigError(f"radius_factor must lie in (0, 1), got {self.radius_factor}")
        if not 0 <= self.ps_threshold <= 1:
            raise ConfigError(f"ps_threshold must lie in [0, 1], got {self.ps_threshold}")
        for name in ("ps_splits", "max_L", "k_min", "kmeans_restarts", "solver_max_iter", "cal_folds"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("report_threshold", "noise_scale", "simulated_scale", "solver_tol"):
            v = getattr(self, name)
            if not v >= 0:
                raise ConfigError(f"{name} must be nonnegative, got {v}")
        if not self.lambda_grid or min(self.lambda_grid) < 0:
            raise ConfigError("lambda_grid must be a nonempty list of nonnegative values")
        if not self.cal_alpha_grid or min(self.cal_alpha_grid) <= 0:
            raise ConfigError("cal_alpha_grid must be a nonempty list of positive values")
        betas = _as_list(self.beta)
        if any(b < 0 or b != b for b in betas):
            raise ConfigError("beta entries must be finite and nonnegative")
        if any(v not in (-1, 0, 1) for v in _as_list(self.p)):
            raise ConfigError("p entries must be -1, 0 or 1")

    def replace(self, **changes) -> "Config":
        data = self.to_dict()
        data.update(changes)
        return Config.from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        for k, v in data.items():
            if isinstance(v, tuple):
                data[k] = list(v)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def load_config(path=None, env=None) -> Config:
    """Read a JSON config (defaults when ``path`` is None); COIN_SEED overrides master_seed."""
    data = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            data["master_seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    return Config.from_dict(data)

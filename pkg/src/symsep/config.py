"""Run configuration and the tolerance policy shared by every check."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Tuple

MC_SIGMAS = 5.0
# absorbs roundoff for zero-variance Monte Carlo estimators only
MC_FLOOR = 1e-12
EXACT_TOL = 1e-10


class ConfigError(ValueError):
    """Invalid run configuration (exit status 2 on the command line)."""


@dataclass(frozen=True)
class RunConfig:
    """All knobs of a run.  ``N`` is half the set size of the structured inputs."""

    N: int = 8
    D: int = 2
    d_hat: Optional[int] = None
    L_grid: Tuple[int, ...] = (0, 1, 2, 4, 8, 16)
    mc_samples: int = 100000
    approx_samples: int = 2000
    burn_in: Optional[int] = None
    thin: Optional[int] = None
    epsilon_target: float = 1e-2
    J: Optional[int] = None
    seed: int = 0
    output_format: str = "json"
    output_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "L_grid", tuple(int(L) for L in self.L_grid))

    def validate(self) -> "RunConfig":
        for name in ("N", "D", "mc_samples", "approx_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("d_hat", "J", "burn_in", "thin"):
            value = getattr(self, name)
            if value is not None and value < (0 if name == "burn_in" else 1):
                raise ConfigError(f"{name} must be positive")
        if self.d_hat is not None and self.d_hat > self.D:
            raise ConfigError("d_hat cannot exceed D")
        if not self.L_grid or any(L < 0 for L in self.L_grid):
            raise ConfigError("L_grid must be a non-empty list of non-negative integers")
        if not 0 < self.epsilon_target <= 1e-2:
            raise ConfigError("epsilon_target must lie in (0, 0.01]")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("output_format must be json or csv")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["L_grid"] = list(self.L_grid)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

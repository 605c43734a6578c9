"""Experiment configuration and dataset construction."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from ..ambiguity import RadiusConstants, RadiusInputs
from ..errors import InvalidInputs
from ..regression import (
    NoiseSpec,
    OlsFit,
    RegressionDataset,
    generate_synthetic,
    linear_beta,
    pinned_dataset,
)

DEFAULT_GRID = (0.0, 0.00625, 0.0125, 0.01875, 0.025, 0.03125, 0.0375, 0.04375, 0.05)
DEFAULT_SAFETY_GRID = (0.0, 0.0025, 0.005, 0.01, 0.02, 0.04, 0.08)


@dataclass(frozen=True)
class ExperimentConfig:
    # regression layer
    n: int = 100
    p: int = 10
    beta_step: float = 0.1
    beta: Optional[tuple] = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    data_seed: int = 42
    # pin beta_hat[pin_component] = pin_value; None keeps the natural draw
    pin_component: Optional[int] = None
    pin_value: Optional[float] = 0.006
    # optimization layer
    k: int = 30
    gamma: float = 0.05
    Delta: float = 0.1
    measure: str = "cvar"
    epsilon_grid: tuple = DEFAULT_GRID
    repetitions: int = 20
    # radius
    radius_mode: str = "tuned"
    radius_delta: float = 0.05
    radius_constants: RadiusConstants = field(default_factory=RadiusConstants)
    # safety Monte Carlo
    safety_trials: int = 500
    safety_grid: tuple = DEFAULT_SAFETY_GRID
    reference_draws: int = 20000
    # bookkeeping
    seed: int = 2024
    output_dir: str = "out"
    jobs: int = 1

    def __post_init__(self):
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid or any(e < 0 for e in grid) or list(grid) != sorted(grid):
            raise InvalidInputs("epsilon grid must be non-empty, non-negative and sorted")
        object.__setattr__(self, "epsilon_grid", grid)
        sgrid = tuple(float(e) for e in self.safety_grid)
        if not sgrid or any(e < 0 for e in sgrid) or list(sgrid) != sorted(sgrid):
            raise InvalidInputs("safety grid must be non-empty, non-negative and sorted")
        object.__setattr__(self, "safety_grid", sgrid)
        if self.repetitions < 1:
            raise InvalidInputs("repetitions must be >= 1")
        if self.radius_mode not in ("tuned", "theoretical"):
            raise InvalidInputs(f"unknown radius mode {self.radius_mode!r}")
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
            if len(self.beta) != self.p:
                raise InvalidInputs("beta must have length p")
        if self.pin_component is not None and not 0 <= self.pin_component < self.p:
            raise InvalidInputs("pin_component out of range")

    @property
    def beta_true(self) -> np.ndarray:
        if self.beta is not None:
            return np.asarray(self.beta)
        return linear_beta(self.p, self.beta_step)

    @property
    def pinned_index(self) -> int:
        # default: the largest true coefficient, where a near-zero estimate does the most damage
        if self.pin_component is not None:
            return self.pin_component
        return int(np.argmax(self.beta_true))

    def replace(self, **changes) -> "ExperimentConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return ExperimentConfig(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["noise"] = self.noise.to_dict()
        d["radius_constants"] = asdict(self.radius_constants)
        d["epsilon_grid"] = list(self.epsilon_grid)
        d["safety_grid"] = list(self.safety_grid)
        if self.beta is not None:
            d["beta"] = list(self.beta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputs(f"unknown config keys: {sorted(unknown)}")
        if isinstance(d.get("noise"), dict):
            d["noise"] = NoiseSpec.from_dict(d["noise"])
        if isinstance(d.get("radius_constants"), dict):
            d["radius_constants"] = RadiusConstants(**d["radius_constants"])
        for key in ("epsilon_grid", "safety_grid", "beta"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def build_dataset(config: ExperimentConfig) -> RegressionDataset:
    if config.pin_value is None:
        return generate_synthetic(config.n, config.p, config.beta_true, config.noise, config.data_seed)
    return pinned_dataset(
        config.n,
        config.p,
        config.beta_true,
        config.noise,
        config.data_seed,
        config.pinned_index,
        config.pin_value,
    )


def radius_inputs(config: ExperimentConfig, fit: OlsFit) -> RadiusInputs:
    psi = config.noise.orlicz_psi_alpha
    if psi is None:
        raise InvalidInputs("theoretical radius needs an Orlicz norm; set noise.psi_alpha")
    return RadiusInputs(
        n=fit.n,
        k=config.k,
        p=fit.p,
        delta=config.radius_delta,
        alpha=config.noise.alpha,
        sigma=config.noise.sigma,
        psi_alpha=psi,
        L=fit.L,
        Lbar=fit.Lbar,
        constants=config.radius_constants,
    )

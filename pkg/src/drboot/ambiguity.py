"""Wasserstein ambiguity sets around the bootstrap distribution.

The finite-sample radius is ``eps = eps1 + eps2 + eps3``:

* ``eps1`` covers the gap between the bootstrap law and its k-sample
  empirical version,
* ``eps2`` the gap between the true and the estimated residual empirical
  laws, mapped into parameter space,
* ``eps3`` the gap between the residual law and its n-sample empirical
  version, mapped into parameter space.

Each of eps1 and eps3 switches formula at a threshold where the two branches
coincide. The concentration constants are inputs (default 1); in practice the
radius is usually tuned directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .bootstrap import EmpiricalDistribution
from .errors import InvalidInputs, NegativeRadius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadiusConstants:
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "c"):
            if not getattr(self, name) > 0:
                raise InvalidInputs(f"constant {name} must be positive")


@dataclass(frozen=True)
class RadiusInputs:
    n: int
    k: int
    p: int
    delta: float
    alpha: float
    sigma: float
    psi_alpha: float
    L: float
    Lbar: float
    constants: RadiusConstants = field(default_factory=RadiusConstants)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidInputs(f"delta must lie in (0, 1), got {self.delta}")
        if not self.alpha > 2:
            raise InvalidInputs(f"alpha must be > 2, got {self.alpha}")
        for name in ("n", "k", "p"):
            if not getattr(self, name) >= 1:
                raise InvalidInputs(f"{name} must be >= 1")
        for name in ("sigma", "psi_alpha", "L", "Lbar"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputs(f"{name} must be positive and finite, got {v}")


class RadiusTerm(NamedTuple):
    value: float
    branch: str


@dataclass(frozen=True)
class RadiusBreakdown:
    epsilon: float
    eps1: float
    eps2: float
    eps3: float
    eps1_branch: str
    eps3_branch: str

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "eps3": self.eps3,
            "eps1_branch": self.eps1_branch,
            "eps3_branch": self.eps3_branch,
        }


def epsilon1(inputs: RadiusInputs) -> RadiusTerm:
    c = inputs.constants
    log_term = math.log(3.0 * c.c1 / inputs.delta)
    base = log_term / (c.c2 * inputs.k)
    if inputs.k >= log_term / c.c2:
        return RadiusTerm(base ** (1.0 / max(inputs.p, 2)), "small-t")
    return RadiusTerm(base ** (1.0 / inputs.alpha), "large-t")


def epsilon2(inputs: RadiusInputs) -> float:
    c = inputs.constants
    scale = math.sqrt(inputs.n) * inputs.L
    tail = (inputs.Lbar * inputs.psi_alpha * math.log(6.0 / inputs.delta) / c.c) ** (1.0 / inputs.alpha)
    mean = inputs.sigma * math.sqrt((inputs.p + 1) / inputs.n)
    return scale * tail + scale * mean


def epsilon3(inputs: RadiusInputs) -> RadiusTerm:
    c = inputs.constants
    scale = math.sqrt(inputs.n) * inputs.L
    log_term = math.log(3.0 * c.c3 / inputs.delta)
    # c4 in both the gate and the large-t denominator; the gate fixes which
    # constant pair the inverted tail bound uses
    base = log_term / (c.c4 * inputs.n)
    if inputs.n >= log_term / c.c4:
        return RadiusTerm(scale * base, "small-t")
    return RadiusTerm(scale * base ** (2.0 / inputs.alpha), "large-t")


def theoretical_radius(inputs: RadiusInputs) -> RadiusBreakdown:
    e1 = epsilon1(inputs)
    e2 = epsilon2(inputs)
    e3 = epsilon3(inputs)
    out = RadiusBreakdown(
        epsilon=e1.value + e2 + e3.value,
        eps1=e1.value,
        eps2=e2,
        eps3=e3.value,
        eps1_branch=e1.branch,
        eps3_branch=e3.branch,
    )
    logger.debug("radius breakdown: %s", out.as_dict())
    return out


@dataclass(frozen=True)
class AmbiguitySet:
    center: EmpiricalDistribution
    radius: float
    q: int = 1
    mode: str = "tuned"
    breakdown: RadiusBreakdown | None = None

    def __post_init__(self):
        if not self.radius >= 0:
            raise NegativeRadius(f"radius must be >= 0, got {self.radius}")
        if self.q != 1:
            raise InvalidInputs("only order-1 Wasserstein balls are supported")
        if self.mode not in ("tuned", "theoretical"):
            raise InvalidInputs(f"unknown radius mode {self.mode!r}")


def make_ambiguity_set(
    center: EmpiricalDistribution,
    mode: str,
    inputs_or_radius: Union[RadiusInputs, float],
) -> AmbiguitySet:
    if mode == "tuned":
        radius = float(inputs_or_radius)
        if radius < 0:
            raise NegativeRadius(f"radius must be >= 0, got {radius}")
        return AmbiguitySet(center=center, radius=radius, mode="tuned")
    if mode == "theoretical":
        if not isinstance(inputs_or_radius, RadiusInputs):
            raise InvalidInputs("theoretical mode needs RadiusInputs")
        b = theoretical_radius(inputs_or_radius)
        return AmbiguitySet(center=center, radius=b.epsilon, mode="theoretical", breakdown=b)
    raise InvalidInputs(f"unknown radius mode {mode!r}")

"""Residual bootstrap for fixed-design regression.

Seeds are split deterministically: replicate ``i`` of an ensemble seeded with
``SeedSequence(entropy, spawn_key=key)`` draws from
``SeedSequence(entropy, spawn_key=key + (i,))``. Replicates are therefore
independent of how many are generated and of the order they are generated in.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DimensionMismatch, InvalidInputs
from .regression import OlsFit

SeedLike = Union[int, np.random.SeedSequence]


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def child_seed(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    """Deterministic sub-seed addressed by ``key`` under ``seed``."""
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(key))


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Equal-weight atoms in R^d, stored as an (m, d) array."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise InvalidInputs("an empirical distribution needs at least one atom of dimension >= 1")
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    @property
    def values(self) -> np.ndarray:
        """Atoms as a flat vector (only for d = 1)."""
        if self.dim != 1:
            raise DimensionMismatch("values is only defined for one-dimensional atoms")
        return self.atoms[:, 0]

    def mean(self) -> np.ndarray:
        return self.atoms.mean(axis=0)

    def pushforward(self, A: np.ndarray) -> "EmpiricalDistribution":
        """Image of the distribution under the linear map ``a -> A a``."""
        return EmpiricalDistribution(self.atoms @ np.asarray(A, dtype=float).T)


@dataclass(frozen=True)
class BootstrapEnsemble:
    beta_stars: np.ndarray  # (k, p)
    source_fit: OlsFit
    seed: int
    spawn_key: tuple = ()
    resamples: Optional[np.ndarray] = None  # (k, n) when kept

    @property
    def k(self) -> int:
        return self.beta_stars.shape[0]

    @property
    def p(self) -> int:
        return self.beta_stars.shape[1]


def center_residuals(residuals_hat) -> EmpiricalDistribution:
    r = np.asarray(residuals_hat, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise InvalidInputs("residuals must be a non-empty vector")
    return EmpiricalDistribution(r - r.mean())


def resample(dist: EmpiricalDistribution, m: int, rng) -> np.ndarray:
    """``m`` iid draws from ``dist``; flat for d = 1, else (m, d)."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    idx = rng.integers(0, dist.size, size=m)
    draws = dist.atoms[idx]
    return draws[:, 0] if dist.dim == 1 else draws


def bootstrap_ensemble(
    fit: OlsFit,
    X: np.ndarray,
    k: int,
    seed: SeedLike,
    *,
    keep_resamples: bool = False,
) -> BootstrapEnsemble:
    """Draw ``k`` residual-bootstrap estimates ``beta* = beta_hat + M eps*``.

    ``M`` is the fit's pseudoinverse map; this equals refitting on
    ``y* = X beta_hat + eps*``.
    """
    if k < 1:
        raise InvalidInputs("k must be >= 1")
    X = np.asarray(X, dtype=float)
    n = fit.n
    if X.shape != (n, fit.p):
        raise DimensionMismatch(f"X has shape {X.shape}, fit expects ({n}, {fit.p})")
    centered = center_residuals(fit.residuals_hat).values
    ss = as_seed_sequence(seed)
    eps_star = np.empty((k, n))
    for i in range(k):
        rng = np.random.default_rng(child_seed(ss, i))
        eps_star[i] = centered[rng.integers(0, n, size=n)]
    beta_stars = fit.beta_hat + eps_star @ fit.pseudoinverse_map.T
    return BootstrapEnsemble(
        beta_stars=beta_stars,
        source_fit=fit,
        seed=int(ss.entropy),
        spawn_key=tuple(ss.spawn_key),
        resamples=eps_star if keep_resamples else None,
    )


def ensemble_to_distribution(ens: BootstrapEnsemble) -> EmpiricalDistribution:
    return EmpiricalDistribution(ens.beta_stars)


def save_ensemble(ens: BootstrapEnsemble, path, dataset_hash: Optional[str] = None) -> Path:
    """Write ``<path>.csv`` (k rows x p columns) and ``<path>.json``."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"beta{j + 1}" for j in range(ens.p)])
        for row in ens.beta_stars:
            w.writerow([repr(float(v)) for v in row])
    meta = {
        "seed": ens.seed,
        "spawn_key": list(ens.spawn_key),
        "k": ens.k,
        "p": ens.p,
        "dataset_sha256_16": dataset_hash,
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2))
    return csv_path


def load_ensemble_atoms(path) -> np.ndarray:
    with open(Path(path).with_suffix(".csv"), newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array(rows[1:], dtype=float)

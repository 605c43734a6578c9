"""Linear regression layer: synthetic data, OLS fits and Lipschitz constants.

The model is ``y = X beta + eps`` with a fixed design ``X`` (n x p, n > p)
and iid zero-mean noise. Fits go through a reduced QR factorization; the
inverse Gram matrix is never formed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, InvalidNoiseSpec, RankDeficient

RANK_TOL = 1e-10

_FAMILIES = ("uniform", "gaussian", "custom")


@dataclass(frozen=True)
class NoiseSpec:
    """Residual distribution used to generate synthetic data.

    ``family`` is one of ``uniform`` (on ``[a, b]``, requires ``a = -b``),
    ``gaussian`` (with standard deviation ``scale``) or ``custom`` (iid
    resampling of ``samples``). ``alpha`` is the sub-exponential tail
    exponent and must exceed 2. ``psi_alpha`` overrides the Orlicz norm.
    """

    family: str = "uniform"
    a: float = -1.0
    b: float = 1.0
    scale: float = 1.0
    samples: Optional[tuple] = None
    alpha: float = 3.0
    psi_alpha: Optional[float] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidNoiseSpec(f"unsupported noise family {self.family!r}")
        if not self.alpha > 2:
            raise InvalidNoiseSpec(f"tail exponent alpha must be > 2, got {self.alpha}")
        if self.family == "uniform":
            if not self.b > self.a:
                raise InvalidNoiseSpec("uniform noise needs a < b")
            if abs(self.a + self.b) > 1e-12 * max(1.0, abs(self.b)):
                raise InvalidNoiseSpec("uniform noise must have mean zero (a = -b)")
        elif self.family == "gaussian":
            if not self.scale > 0:
                raise InvalidNoiseSpec("gaussian noise needs scale > 0")
        else:
            if self.samples is None or len(self.samples) == 0:
                raise InvalidNoiseSpec("custom noise needs a non-empty sample set")
            s = np.asarray(self.samples, dtype=float)
            if abs(s.mean()) > 1e-9 * (1.0 + np.abs(s).max()):
                raise InvalidNoiseSpec("custom noise samples must have mean zero")
            object.__setattr__(self, "samples", tuple(float(v) for v in s))
        if self.psi_alpha is not None and not self.psi_alpha > 0:
            raise InvalidNoiseSpec("psi_alpha must be positive")

    @property
    def sigma(self) -> float:
        if self.family == "uniform":
            return (self.b - self.a) / math.sqrt(12.0)
        if self.family == "gaussian":
            return float(self.scale)
        return float(np.std(np.asarray(self.samples)))

    @property
    def orlicz_psi_alpha(self) -> Optional[float]:
        """Orlicz norm of order alpha, or None when it cannot be supplied.

        For a variable bounded by ``B`` we have E exp((|e|/t)^alpha) <= 2 as
        soon as t >= B / (ln 2)^(1/alpha), so that value is a valid (upper)
        norm. Gaussian tails are not alpha-sub-exponential for alpha > 2, so
        the norm must be passed explicitly.
        """
        if self.psi_alpha is not None:
            return float(self.psi_alpha)
        if self.family == "uniform":
            bound = max(abs(self.a), abs(self.b))
        elif self.family == "custom":
            bound = float(np.abs(np.asarray(self.samples)).max())
            if bound == 0.0:
                return None
        else:
            return None
        return bound / math.log(2.0) ** (1.0 / self.alpha)

    @property
    def orlicz_gamma(self) -> Optional[float]:
        # E exp(gamma |e|^alpha) < 2 for gamma = psi^-alpha
        psi = self.orlicz_psi_alpha
        return None if psi is None else psi ** (-self.alpha)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "uniform":
            return rng.uniform(self.a, self.b, size=size)
        if self.family == "gaussian":
            return rng.normal(0.0, self.scale, size=size)
        s = np.asarray(self.samples, dtype=float)
        return s[rng.integers(0, len(s), size=size)]

    def to_dict(self) -> dict:
        d = {"family": self.family, "alpha": self.alpha}
        if self.family == "uniform":
            d.update(a=self.a, b=self.b)
        elif self.family == "gaussian":
            d.update(scale=self.scale)
        else:
            d.update(samples=list(self.samples))
        if self.psi_alpha is not None:
            d["psi_alpha"] = self.psi_alpha
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        d = dict(d)
        if "sigma" in d and d.get("family") == "gaussian":
            d["scale"] = d.pop("sigma")
        if d.get("samples") is not None:
            d["samples"] = tuple(d["samples"])
        return cls(**d)


@dataclass(frozen=True)
class RegressionDataset:
    X: np.ndarray
    y: np.ndarray
    beta_true: Optional[np.ndarray] = None
    eps_true: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch("X must be a 2-D array")
        if y.shape != (X.shape[0],):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        n, p = X.shape
        if not n > p >= 1:
            raise DimensionMismatch(f"need n > p >= 1, got n={n}, p={p}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        for name, size in (("beta_true", p), ("eps_true", n)):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (size,):
                    raise DimensionMismatch(f"{name} has shape {v.shape}, expected ({size},)")
                object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.X.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class OlsFit:
    """Result of an OLS fit.

    ``pseudoinverse_map`` is ``(X^T X)^-1 X^T`` (p x n). The projection
    matrix is materialized lazily because it is n x n.
    """

    beta_hat: np.ndarray
    residuals_hat: np.ndarray
    pseudoinverse_map: np.ndarray
    L: float
    Lbar: float
    _Q: np.ndarray = field(repr=False)

    @cached_property
    def projection(self) -> np.ndarray:
        return self._Q @ self._Q.T

    def project(self, v: np.ndarray) -> np.ndarray:
        """Apply the projection onto col(X) without forming the n x n matrix."""
        return self._Q @ (self._Q.T @ v)

    @property
    def n(self) -> int:
        return self.residuals_hat.shape[0]

    @property
    def p(self) -> int:
        return self.beta_hat.shape[0]


def _check_rank(X: np.ndarray, rank_tol: float) -> np.ndarray:
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] < rank_tol * sv[0] or sv[-1] == 0.0:
        raise RankDeficient(
            f"design matrix is rank deficient (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})"
        )
    return sv


def _lbar_from_q(Q: np.ndarray) -> float:
    # nonzero spectrum of (1/n) 11^T + QQ^T equals that of G^T G, G = [1/sqrt(n), Q]
    n = Q.shape[0]
    G = np.column_stack([np.full(n, 1.0 / math.sqrt(n)), Q])
    lam_max = np.linalg.eigvalsh(G.T @ G)[-1]
    return math.sqrt(lam_max) / math.sqrt(n)


def compute_lipschitz_constants(X: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[float, float]:
    """Return ``(L, Lbar)``.

    ``L`` is the spectral norm of ``(X^T X)^-1 X^T``, i.e. ``1/sigma_min(X)``.
    ``Lbar`` is ``n^-1/2 * ||((1/n) 11^T + Pi)^(1/2)||``.
    """
    X = np.asarray(X, dtype=float)
    sv = _check_rank(X, rank_tol)
    Q, _ = np.linalg.qr(X, mode="reduced")
    return 1.0 / sv[-1], _lbar_from_q(Q)


def ols_fit(data: RegressionDataset, rank_tol: float = RANK_TOL) -> OlsFit:
    X, y = data.X, data.y
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch("len(y) must equal the number of rows of X")
    sv = _check_rank(X, rank_tol)
    Q, R = np.linalg.qr(X, mode="reduced")
    beta_hat = solve_triangular(R, Q.T @ y)
    pinv_map = solve_triangular(R, Q.T)
    residuals = y - X @ beta_hat
    return OlsFit(
        beta_hat=beta_hat,
        residuals_hat=residuals,
        pseudoinverse_map=pinv_map,
        L=1.0 / sv[-1],
        Lbar=_lbar_from_q(Q),
        _Q=Q,
    )


def linear_beta(p: int, step: float = 0.1) -> np.ndarray:
    """beta_i = step * i for i = 1..p."""
    return step * np.arange(1, p + 1, dtype=float)


def generate_design(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, p))


def generate_synthetic(n: int, p: int, beta_true, noise: NoiseSpec, seed) -> RegressionDataset:
    """Gaussian design, iid noise from ``noise``; deterministic per seed."""
    if not n > p >= 1:
        raise DimensionMismatch(f"need n > p >= 1, got n={n}, p={p}")
    if not isinstance(noise, NoiseSpec):
        raise InvalidNoiseSpec("noise must be a NoiseSpec")
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_true.shape != (p,):
        raise DimensionMismatch(f"beta_true must have length {p}")
    rng = np.random.default_rng(seed)
    X = generate_design(n, p, rng)
    eps = noise.sample(rng, n)
    return RegressionDataset(X=X, y=X @ beta_true + eps, beta_true=beta_true, eps_true=eps)


def construct_adversarial_realization(
    X: np.ndarray,
    beta_true,
    target_component: int,
    target_value: float,
    base_noise: Optional[np.ndarray] = None,
) -> RegressionDataset:
    """Build a noise realization whose OLS estimate hits a prescribed value.

    The fitted coefficients equal ``beta_true`` except component
    ``target_component`` (0-based), which equals ``target_value``. Without
    ``base_noise`` the noise lies entirely in the column space of ``X``,
    ``eps = X (beta_target - beta_true)``, and the fitted residuals vanish.
    With ``base_noise`` the component of it orthogonal to col(X) is kept, so
    the residuals are ``(I - Pi) base_noise`` and remain informative for the
    bootstrap while the estimate is still pinned exactly.
    """
    X = np.asarray(X, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    n, p = X.shape
    if not 0 <= target_component < p:
        raise IndexError(f"target_component must be in [0, {p}), got {target_component}")
    _check_rank(X, RANK_TOL)
    beta_target = beta_true.copy()
    beta_target[target_component] = target_value
    eps = X @ (beta_target - beta_true)
    if base_noise is not None:
        base_noise = np.asarray(base_noise, dtype=float)
        if base_noise.shape != (n,):
            raise DimensionMismatch(f"base_noise must have length {n}")
        Q, _ = np.linalg.qr(X, mode="reduced")
        eps = eps + (base_noise - Q @ (Q.T @ base_noise))
    return RegressionDataset(X=X, y=X @ beta_true + eps, beta_true=beta_true, eps_true=eps)


# -- serialization -------------------------------------------------------------


def save_dataset(data: RegressionDataset, path, *, seed=None, noise: Optional[NoiseSpec] = None):
    """Write ``<path>.csv`` (header x1..xp,y) and ``<path>.json`` metadata."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(data.p)] + ["y"])
        for row, yi in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])
    meta = {
        "n": data.n,
        "p": data.p,
        "seed": seed,
        "noise": noise.to_dict() if noise is not None else None,
        "beta_true": None if data.beta_true is None else data.beta_true.tolist(),
        "sha256_16": data.digest(),
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2))
    return csv_path


def load_dataset(path) -> RegressionDataset:
    path = Path(path)
    with open(path.with_suffix(".csv"), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    if header[-1] != "y":
        raise DimensionMismatch("last CSV column must be y")
    beta_true = None
    meta_path = path.with_suffix(".json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        if meta.get("beta_true") is not None:
            beta_true = np.asarray(meta["beta_true"], dtype=float)
    return RegressionDataset(X=body[:, :-1], y=body[:, -1], beta_true=beta_true)


def fit_summary(fit: OlsFit) -> dict:
    return {
        "beta_hat": fit.beta_hat.tolist(),
        "L": fit.L,
        "Lbar": fit.Lbar,
        "residual_norm": float(np.linalg.norm(fit.residuals_hat)),
    }


def pinned_dataset(
    n: int,
    p: int,
    beta_true: Sequence[float],
    noise: NoiseSpec,
    seed,
    target_component: int,
    target_value: float,
) -> RegressionDataset:
    """Gaussian design plus a noise draw adjusted so one estimate is pinned."""
    base = generate_synthetic(n, p, beta_true, noise, seed)
    return construct_adversarial_realization(
        base.X, base.beta_true, target_component, target_value, base_noise=base.eps_true
    )

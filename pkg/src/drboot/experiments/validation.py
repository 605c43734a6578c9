"""Empirical validation of the inequalities behind the radius formula.

Each check returns a :class:`ClaimResult`. Deterministic inequalities are
checked draw by draw with exact transport on both sides and report the
smallest slack (``margin``); expectation bounds compare a Monte Carlo mean
against the bound plus three standard errors. Where an unknown law has to be
stood in for (the true residual law, the exact bootstrap law) a large
empirical reference sample is used and its size is reported.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..bootstrap import EmpiricalDistribution, bootstrap_ensemble, center_residuals, child_seed
from ..regression import NoiseSpec, RegressionDataset, generate_design, ols_fit
from ..wasserstein import w1, wq_1d
from .config import ExperimentConfig

SLACK = 1e-9

GAUSSIAN = NoiseSpec(family="gaussian", scale=1.0)
UNIFORM = NoiseSpec(family="uniform", a=-1.0, b=1.0)


@dataclass
class ClaimResult:
    claim: str
    trials: int
    violations: int
    margin: float
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.claim}: trials={self.trials} violations={self.violations} margin={self.margin:.3e}"


def _rng(seed, *key) -> np.random.Generator:
    return np.random.default_rng(child_seed(seed, *key))


def residual_gap_bound(fit, eps: np.ndarray) -> float:
    """n^-1/2 ||((1/n) 11^T + Pi)^(1/2) eps||_2, without forming Pi."""
    n = eps.shape[0]
    mean = eps.sum() / n
    proj = fit.project(eps)
    return math.sqrt(mean**2 + proj @ proj / n)


def check_residual_gap_bound(
    ns: Sequence[int] = (20, 50, 100),
    noises: Sequence[NoiseSpec] = (GAUSSIAN, UNIFORM),
    draws: int = 10_000,
    p: int = 5,
    seed: int = 0,
) -> ClaimResult:
    """d_2(F_n, F_hat_n) <= n^-1/2 ||((1/n)11^T + Pi)^(1/2) eps_n|| on every draw."""
    trials = violations = 0
    margin = math.inf
    per_case = {}
    for ci, (n, noise) in enumerate(itertools.product(ns, noises)):
        rng = _rng(seed, 10, ci)
        X = generate_design(n, min(p, n - 1), rng)
        fit = ols_fit(RegressionDataset(X=X, y=np.zeros(n)))
        M = fit.pseudoinverse_map
        E = noise.sample(rng, (draws, n))
        case_margin = math.inf
        case_viol = 0
        for eps in E:
            resid = eps - X @ (M @ eps)
            d2 = wq_1d(EmpiricalDistribution(eps), center_residuals(resid), q=2)
            slack = residual_gap_bound(fit, eps) - d2
            case_margin = min(case_margin, slack)
            case_viol += int(slack < -SLACK)
        per_case[f"n={n},{noise.family}"] = {"margin": case_margin, "violations": case_viol}
        trials += draws
        violations += case_viol
        margin = min(margin, case_margin)
    return ClaimResult("residual_gap_bound", trials, violations, margin, violations == 0, per_case)


def check_expected_residual_gap(
    cases: Sequence[tuple] = ((100, 10, 1.0), (50, 5, 0.5)),
    draws: int = 10_000,
    seed: int = 0,
) -> ClaimResult:
    """E d_2(F_n, F_hat_n) <= sigma sqrt((p+1)/n), Monte Carlo with 3 SE slack."""
    details = {}
    violations = 0
    margin = math.inf
    for ci, (n, p, sigma) in enumerate(cases):
        rng = _rng(seed, 11, ci)
        X = generate_design(n, p, rng)
        fit = ols_fit(RegressionDataset(X=X, y=np.zeros(n)))
        M = fit.pseudoinverse_map
        E = rng.normal(0.0, sigma, size=(draws, n))
        d2 = np.empty(draws)
        mid = np.empty(draws)
        for i, eps in enumerate(E):
            resid = eps - X @ (M @ eps)
            d2[i] = wq_1d(EmpiricalDistribution(eps), center_residuals(resid), q=2)
            mid[i] = residual_gap_bound(fit, eps)
        bound = sigma * math.sqrt((p + 1) / n)
        se = d2.std(ddof=1) / math.sqrt(draws)
        ok = d2.mean() <= bound + 3 * se
        violations += int(not ok)
        margin = min(margin, bound + 3 * se - d2.mean())
        details[f"n={n},p={p},sigma={sigma}"] = {
            "mean_d2": float(d2.mean()),
            "se": float(se),
            "mean_intermediate": float(mid.mean()),
            "bound": bound,
            "passed": bool(ok),
        }
    return ClaimResult("expected_residual_gap", draws * len(cases), violations, margin, violations == 0, details)


def check_affine_contraction(trials: int = 500, seed: int = 0) -> ClaimResult:
    """d_1(A mu, A nu) <= ||A|| d_1(mu, nu) for random empirical mu, nu and A."""
    rng = _rng(seed, 12)
    violations = 0
    margin = math.inf
    for _ in range(trials):
        m = int(rng.integers(2, 7))
        dim = int(rng.integers(2, 7))
        p = int(rng.integers(1, 5))
        mu = EmpiricalDistribution(rng.standard_normal((m, dim)))
        nu = EmpiricalDistribution(rng.standard_normal((m, dim)) + rng.normal(0, 0.5, dim))
        A = rng.standard_normal((p, dim))
        lhs = w1(mu.pushforward(A), nu.pushforward(A))
        rhs = np.linalg.norm(A, 2) * w1(mu, nu)
        slack = rhs - lhs
        margin = min(margin, slack)
        violations += int(slack < -SLACK)
    return ClaimResult("affine_contraction", trials, violations, margin, violations == 0)


def _product_atoms(atoms: np.ndarray, n: int) -> np.ndarray:
    return np.array(list(itertools.product(atoms, repeat=n)))


def check_affine_chain(trials: int = 100, n: int = 4, p: int = 2, support: int = 3, seed: int = 0) -> ClaimResult:
    """d_1(M U, M V) <= sqrt(n) ||M|| d_2(F_a, F_b) for product laws U = F_a^n, V = F_b^n.

    With ``support``-point component laws the product laws are exact
    empirical distributions with ``support**n`` atoms.
    """
    rng = _rng(seed, 13)
    violations = 0
    margin = math.inf
    lift_margin = math.inf
    for _ in range(trials):
        X = rng.standard_normal((n, p))
        fit = ols_fit(RegressionDataset(X=X, y=np.zeros(n)))
        a = UNIFORM.sample(rng, support)
        b = GAUSSIAN.sample(rng, support)
        U = EmpiricalDistribution(_product_atoms(a, n))
        V = EmpiricalDistribution(_product_atoms(b, n))
        d2 = wq_1d(EmpiricalDistribution(a), EmpiricalDistribution(b), q=2)
        lhs = w1(U.pushforward(fit.pseudoinverse_map), V.pushforward(fit.pseudoinverse_map))
        rhs = math.sqrt(n) * fit.L * d2
        lift_margin = min(lift_margin, math.sqrt(n) * d2 - w1(U, V))
        slack = rhs - lhs
        margin = min(margin, slack)
        violations += int(slack < -SLACK)
    ok = violations == 0 and lift_margin >= -SLACK
    return ClaimResult(
        "affine_chain", trials, violations, margin, ok,
        {"sqrt_n_lift_margin": lift_margin, "atoms_per_side": support**n},
    )


def check_triangle_splits(trials: int = 30, n: int = 50, p: int = 3, k: int = 30, ref_atoms: int = 200, seed: int = 0) -> ClaimResult:
    """Both triangle splits, on sampled stand-ins for the unknown laws.

    Parameter space: d_1(Phi(F), Phi*_k) <= d_1(Phi(F), Phi(F_hat)) + d_1(Phi(F_hat), Phi*_k).
    Residual space: d_2(F, F_hat) <= d_2(F, F_n) + d_2(F_n, F_hat).
    """
    rng = _rng(seed, 14)
    beta = np.linspace(0.5, 1.5, p)
    X = generate_design(n, p, rng)
    F_ref = EmpiricalDistribution(UNIFORM.sample(rng, 10_000))
    violations = 0
    margin = math.inf
    for t in range(trials):
        eps = UNIFORM.sample(rng, n)
        fit = ols_fit(RegressionDataset(X=X, y=X @ beta + eps))
        M = fit.pseudoinverse_map
        phi_F = EmpiricalDistribution(beta + UNIFORM.sample(rng, (ref_atoms, n)) @ M.T)
        F_hat = center_residuals(fit.residuals_hat)
        phi_Fhat = EmpiricalDistribution(fit.beta_hat + F_hat.values[rng.integers(0, n, (ref_atoms, n))] @ M.T)
        boot = EmpiricalDistribution(bootstrap_ensemble(fit, X, k, child_seed(seed, 14, t)).beta_stars)
        s1 = w1(phi_F, phi_Fhat) + w1(phi_Fhat, boot) - w1(phi_F, boot)
        F_n = EmpiricalDistribution(eps)
        s2 = wq_1d(F_ref, F_n, 2) + wq_1d(F_n, F_hat, 2) - wq_1d(F_ref, F_hat, 2)
        for s in (s1, s2):
            margin = min(margin, s)
            violations += int(s < -SLACK)
    return ClaimResult(
        "triangle_splits", 2 * trials, violations, margin, violations == 0,
        {"parameter_reference_atoms": ref_atoms, "residual_reference_atoms": 10_000},
    )


def check_additive_prob(samples: int = 100_000, thresholds: int = 20, seed: int = 0) -> ClaimResult:
    """P(a >= e_b + e_c) <= P(b >= e_b) + P(c >= e_c) whenever a <= b + c."""
    rng = _rng(seed, 15)
    b = rng.standard_normal(samples)
    c = rng.exponential(1.0, samples)
    a = b + c - np.abs(rng.normal(0.0, 0.3, samples))
    violations = 0
    margin = math.inf
    for _ in range(thresholds):
        eb, ec = rng.uniform(-1.0, 2.0), rng.uniform(0.0, 3.0)
        pa = np.mean(a >= eb + ec)
        pb, pc = np.mean(b >= eb), np.mean(c >= ec)
        se = math.sqrt(max(pa * (1 - pa), 1e-12) / samples)
        slack = pb + pc + 3 * se - pa
        margin = min(margin, slack)
        violations += int(slack < 0)
    return ClaimResult("additive_prob", thresholds, violations, margin, violations == 0, {"samples": samples})


def check_lbar_lipschitz(trials: int = 2000, n: int = 40, p: int = 4, seed: int = 0) -> ClaimResult:
    """The residual gap bound is Lbar-Lipschitz in the noise vector."""
    rng = _rng(seed, 16)
    X = generate_design(n, p, rng)
    fit = ols_fit(RegressionDataset(X=X, y=np.zeros(n)))
    violations = 0
    margin = math.inf
    for _ in range(trials):
        e1, e2 = rng.standard_normal(n), rng.standard_normal(n) * rng.uniform(0.01, 2.0)
        slack = fit.Lbar * np.linalg.norm(e1 - e2) - abs(residual_gap_bound(fit, e1) - residual_gap_bound(fit, e2))
        margin = min(margin, slack)
        violations += int(slack < -SLACK)
    return ClaimResult("lbar_lipschitz", trials, violations, margin, violations == 0, {"Lbar": fit.Lbar})


def check_concentration_decay(reps: int = 5, seed: int = 0) -> ClaimResult:
    """Mean empirical-to-reference distances shrink with the sample size.

    Residual space: d_2(F, F_n) for n in {25, 100, 400}, F stood in for by
    10^4 uniform draws. Parameter space: d_1(Phi(F_hat), Phi*_k) for k in
    {10, 40, 160}, Phi(F_hat) stood in for by 1600 bootstrap draws.
    """
    rng = _rng(seed, 17)
    F_ref = EmpiricalDistribution(UNIFORM.sample(rng, 10_000))
    resid_means = []
    for n in (25, 100, 400):
        resid_means.append(float(np.mean([wq_1d(F_ref, UNIFORM.sample(rng, n), 2) for _ in range(reps)])))

    n, p = 60, 3
    X = generate_design(n, p, rng)
    fit = ols_fit(RegressionDataset(X=X, y=X @ np.ones(p) + UNIFORM.sample(rng, n)))
    ref = EmpiricalDistribution(bootstrap_ensemble(fit, X, 1600, child_seed(seed, 17, 0)).beta_stars)
    boot_means = []
    for ki, k in enumerate((10, 40, 160)):
        vals = [w1(ref, bootstrap_ensemble(fit, X, k, child_seed(seed, 17, 1 + ki, r)).beta_stars) for r in range(reps)]
        boot_means.append(float(np.mean(vals)))
    steps = np.diff(resid_means).tolist() + np.diff(boot_means).tolist()
    violations = int(sum(s >= 0 for s in steps))
    return ClaimResult(
        "concentration_decay", len(steps), violations, float(-max(steps)), violations == 0,
        {
            "residual_d2_means": resid_means,
            "bootstrap_d1_means": boot_means,
            "residual_reference_atoms": 10_000,
            "bootstrap_reference_atoms": 1600,
        },
    )


def run_bound_validation(config: Optional[ExperimentConfig] = None, draws: int = 10_000, out_dir=None) -> list:
    """Run every check; ``draws`` scales the Monte Carlo suites."""
    seed = (config or ExperimentConfig()).seed
    results = [
        check_residual_gap_bound(draws=draws, seed=seed),
        check_expected_residual_gap(draws=draws, seed=seed),
        check_affine_contraction(seed=seed),
        check_affine_chain(seed=seed),
        check_triangle_splits(seed=seed),
        check_additive_prob(seed=seed),
        check_lbar_lipschitz(seed=seed),
        check_concentration_decay(seed=seed),
    ]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps([asdict(r) for r in results], indent=2, default=float))
    return results

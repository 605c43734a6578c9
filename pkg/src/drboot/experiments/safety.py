"""Monte Carlo check of the out-of-sample safety guarantee.

Each trial draws a fresh noise vector through the fixed design, fits,
bootstraps and solves the robust program for every radius. The decision is
then scored against the true sampling law of the estimator, approximated by
a bank of ``reference_draws`` independent estimates ``beta + M eps``: the
trial fails at a radius when the true risk of any constraint exceeds its
limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..bootstrap import bootstrap_ensemble, child_seed, ensemble_to_distribution
from ..ambiguity import make_ambiguity_set
from ..dro import RobustLinearProblem, empirical_cvar, solve_dro
from ..errors import InvalidInputs
from ..regression import RegressionDataset, generate_design, ols_fit
from .config import ExperimentConfig
from .tradeoff import map_jobs, problem_for

DESIGN_STREAM = 0
NOISE_STREAM = 2
BOOTSTRAP_STREAM = 3
REFERENCE_STREAM = 4

RISK_TOL = 1e-9


@dataclass(frozen=True)
class SafetyCell:
    epsilon: float
    trials: int
    failures: int
    solver_failures: int
    frequency: float
    ci_low: float
    ci_high: float
    mean_objective: float
    max_residual: float = 0.0  # largest substitution residual among optimal solves


@dataclass
class SafetyReport:
    cells: list
    kendall_tau: float
    kendall_p: float
    reference_draws: int

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency for c in self.cells])

    def as_dict(self) -> dict:
        return {
            "kendall_tau": self.kendall_tau,
            "kendall_p": self.kendall_p,
            "reference_draws": self.reference_draws,
            "cells": [c.__dict__ for c in self.cells],
        }


def true_risk(prob: RobustLinearProblem, x: np.ndarray, beta_draws: np.ndarray) -> np.ndarray:
    """Risk of each constraint at ``x`` under the sampled estimator law."""
    out = []
    for con in prob.constraints:
        z = con.value(x, beta_draws)
        if prob.risk.measure == "cvar":
            out.append(empirical_cvar(z, prob.risk.gamma))
        else:
            out.append(float(np.mean(z)))
    return np.array(out)


def reference_estimates(X: np.ndarray, beta: np.ndarray, noise, draws: int, seed) -> np.ndarray:
    """``draws`` iid OLS estimates under fresh noise through the fixed design."""
    rng = np.random.default_rng(child_seed(seed, REFERENCE_STREAM))
    fit = ols_fit(RegressionDataset(X=X, y=X @ beta))
    out = np.empty((draws, X.shape[1]))
    chunk = 5000
    for start in range(0, draws, chunk):
        stop = min(start + chunk, draws)
        eps = noise.sample(rng, (stop - start, X.shape[0]))
        out[start:stop] = beta + eps @ fit.pseudoinverse_map.T
    return out


def fixed_design(config: ExperimentConfig) -> np.ndarray:
    return generate_design(config.n, config.p, np.random.default_rng(child_seed(config.seed, DESIGN_STREAM)))


def _run_trial(args):
    config, X, reference, epsilons, trial = args
    prob = problem_for(config)
    beta = config.beta_true
    eps_noise = config.noise.sample(np.random.default_rng(child_seed(config.seed, NOISE_STREAM, trial)), config.n)
    fit = ols_fit(RegressionDataset(X=X, y=X @ beta + eps_noise))
    ens = bootstrap_ensemble(fit, X, config.k, child_seed(config.seed, BOOTSTRAP_STREAM, trial))
    center = ensemble_to_distribution(ens)
    rows = []
    for eps in epsilons:
        sol = solve_dro(prob, ens, make_ambiguity_set(center, "tuned", eps))
        if sol.status != "optimal":
            rows.append((False, True, np.nan, np.nan))
            continue
        risk = true_risk(prob, sol.x, reference)
        ok = bool(np.all(risk <= prob.risk.Delta + RISK_TOL))
        rows.append((ok, False, sol.objective, sol.result.max_primal_residual))
    return rows


def run_safety_mc(
    config: ExperimentConfig,
    epsilons: Optional[Sequence[float]] = None,
    num_trials: Optional[int] = None,
    jobs: Optional[int] = None,
    out_dir=None,
) -> SafetyReport:
    epsilons = tuple(config.safety_grid if epsilons is None else epsilons)
    num_trials = config.safety_trials if num_trials is None else num_trials
    if num_trials < 100:
        raise InvalidInputs("the safety Monte Carlo needs at least 100 trials")
    X = fixed_design(config)
    reference = reference_estimates(X, config.beta_true, config.noise, config.reference_draws, config.seed)
    tasks = [(config, X, reference, epsilons, t) for t in range(num_trials)]
    results = map_jobs(_run_trial, tasks, jobs or config.jobs)

    cells = []
    for i, eps in enumerate(epsilons):
        col = [r[i] for r in results]
        failures = sum(not row[0] for row in col)
        solver_failures = sum(row[1] for row in col)
        ci = stats.binomtest(failures, num_trials).proportion_ci(method="wilson")
        objs = [row[2] for row in col if np.isfinite(row[2])]
        resid = [row[3] for row in col if np.isfinite(row[3])]
        cells.append(
            SafetyCell(
                epsilon=float(eps),
                trials=num_trials,
                failures=failures,
                solver_failures=solver_failures,
                frequency=failures / num_trials,
                ci_low=float(ci.low),
                ci_high=float(ci.high),
                mean_objective=float(np.mean(objs)) if objs else float("nan"),
                max_residual=float(max(resid, default=0.0)),
            )
        )
    freqs = np.array([c.frequency for c in cells])
    if len(cells) >= 2 and np.ptp(freqs) > 0:
        kt = stats.kendalltau(np.asarray(epsilons), freqs)
        tau, pval = float(kt.statistic), float(kt.pvalue)
    else:
        tau, pval = 0.0, 1.0
    report = SafetyReport(cells, tau, pval, config.reference_draws)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "safety.json").write_text(json.dumps(report.as_dict(), indent=2))
    return report

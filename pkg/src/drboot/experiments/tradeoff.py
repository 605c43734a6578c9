"""Performance/robustness trade-off sweep over the Wasserstein radius.

One data realization is fixed. For every repetition a bootstrap ensemble is
drawn and the robust program is solved for every radius in the grid. The
ensemble seed depends on the repetition only, so a repetition sees the same
ensemble at every radius (common random numbers); each repetition's optimal
value is then exactly monotone in the radius.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from ..ambiguity import RadiusBreakdown, make_ambiguity_set, theoretical_radius
from ..bootstrap import bootstrap_ensemble, child_seed, ensemble_to_distribution
from ..dro import RobustLinearProblem, evaluate_true_violation, budget_problem, solve_dro
from ..regression import OlsFit, RegressionDataset, ols_fit
from .config import ExperimentConfig, build_dataset, radius_inputs
from .plotting import box_stats, boxplot_svg

logger = logging.getLogger(__name__)

BOOTSTRAP_STREAM = 1


@dataclass(frozen=True)
class TradeoffRecord:
    epsilon: float
    rep: int
    objective: float
    violation: float
    status: str
    residual: float = float("nan")  # substitution residual of the solve
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    eps3: Optional[float] = None


@dataclass
class TradeoffResult:
    records: list
    summary: list
    dataset: RegressionDataset
    fit: OlsFit
    breakdown: Optional[RadiusBreakdown] = None

    def medians(self, metric: str) -> np.ndarray:
        return np.array([row[f"{metric}_median"] for row in self.summary])

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([row["epsilon"] for row in self.summary])

    def trend(self, metric: str) -> float:
        """Spearman correlation of the per-radius medians with the radius."""
        eps, med = self.epsilons, self.medians(metric)
        if len(eps) < 2 or np.ptp(med) == 0:
            return 0.0
        return float(stats.spearmanr(eps, med).statistic)


def problem_for(config: ExperimentConfig) -> RobustLinearProblem:
    return budget_problem(config.p, Delta=config.Delta, gamma=config.gamma, measure=config.measure)


def _run_rep(args) -> list:
    config, fit, X, epsilons, rep, breakdown = args
    prob = problem_for(config)
    beta_true = config.beta_true
    ens = bootstrap_ensemble(fit, X, config.k, child_seed(config.seed, BOOTSTRAP_STREAM, rep))
    center = ensemble_to_distribution(ens)
    out = []
    for eps in epsilons:
        amb = make_ambiguity_set(center, "tuned", eps)
        sol = solve_dro(prob, ens, amb)
        if sol.x is not None and sol.status == "optimal":
            viol = max(evaluate_true_violation(sol.x, beta_true, c) for c in prob.constraints)
            obj = sol.objective
        else:
            viol = obj = float("nan")
        extra = {}
        if breakdown is not None:
            extra = dict(eps1=breakdown.eps1, eps2=breakdown.eps2, eps3=breakdown.eps3)
        resid = sol.result.max_primal_residual
        out.append(TradeoffRecord(float(eps), rep, float(obj), float(viol), sol.status, resid, **extra))
    return out


def map_jobs(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def summarize(records: list) -> list:
    rows = []
    for eps in sorted({r.epsilon for r in records}):
        cell = [r for r in records if r.epsilon == eps]
        row = {"epsilon": eps, "reps": len(cell), "optimal": sum(r.status == "optimal" for r in cell)}
        for metric in ("objective", "violation"):
            for key, val in box_stats([getattr(r, metric) for r in cell]).items():
                row[f"{metric}_{key}"] = val
        rows.append(row)
    return rows


def run_tradeoff(config: ExperimentConfig, out_dir=None, jobs: Optional[int] = None) -> TradeoffResult:
    data = build_dataset(config)
    fit = ols_fit(data)
    breakdown = None
    epsilons = config.epsilon_grid
    if config.radius_mode == "theoretical":
        breakdown = theoretical_radius(radius_inputs(config, fit))
        epsilons = (breakdown.epsilon,)
        logger.info("theoretical radius %.6g (%s)", breakdown.epsilon, breakdown.as_dict())
    tasks = [(config, fit, data.X, epsilons, rep, breakdown) for rep in range(config.repetitions)]
    records = [r for chunk in map_jobs(_run_rep, tasks, jobs or config.jobs) for r in chunk]
    records.sort(key=lambda r: (r.epsilon, r.rep))
    result = TradeoffResult(records, summarize(records), data, fit, breakdown)
    if out_dir is not None:
        write_tradeoff_outputs(result, Path(out_dir))
    return result


def write_tradeoff_outputs(result: TradeoffResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with_radius = result.breakdown is not None
    with open(out / "records.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["epsilon", "rep", "objective", "violation", "status"]
        w.writerow(header + (["eps1", "eps2", "eps3"] if with_radius else []))
        for r in result.records:
            row = [repr(r.epsilon), r.rep, repr(r.objective), repr(r.violation), r.status]
            w.writerow(row + ([repr(r.eps1), repr(r.eps2), repr(r.eps3)] if with_radius else []))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(result.summary[0]))
        w.writeheader()
        w.writerows(result.summary)
    labels = [f"{e:g}" for e in result.epsilons]
    for metric, ylabel in (("objective", "objective 1'x"), ("violation", "true violation beta'x - 1")):
        groups = [[getattr(r, metric) for r in result.records if r.epsilon == e] for e in result.epsilons]
        svg = boxplot_svg(labels, groups, f"Trade-off: {metric} vs Wasserstein radius", "radius epsilon", ylabel)
        (out / f"tradeoff_{metric}.svg").write_text(svg)
    if with_radius:
        (out / "radius.json").write_text(json.dumps(result.breakdown.as_dict(), indent=2))

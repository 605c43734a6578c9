"""Command-line entry point: ``drboot <subcommand> [--config FILE] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .ambiguity import make_ambiguity_set, theoretical_radius
from .bootstrap import bootstrap_ensemble, child_seed, ensemble_to_distribution, save_ensemble
from .dro import (
    build_dro,
    evaluate_true_violation,
    load_problem,
    solve_certainty_equivalent,
    solve_dro,
)
from .experiments.config import ExperimentConfig, build_dataset, load_config, radius_inputs
from .experiments.safety import run_safety_mc
from .experiments.tradeoff import problem_for, run_tradeoff
from .experiments.validation import run_bound_validation
from .regression import fit_summary, ols_fit, save_dataset

log = logging.getLogger("drboot")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    return cfg.replace(**changes) if changes else cfg


def _write_json(out: Path, name: str, payload) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(payload, indent=2, default=float))
    return path


def cmd_fit(cfg: ExperimentConfig, args) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = build_dataset(cfg)
    fit = ols_fit(data)
    save_dataset(data, out / "dataset", seed=cfg.data_seed, noise=cfg.noise)
    path = _write_json(out, "fit.json", fit_summary(fit))
    print(f"beta_hat = {np.array2string(fit.beta_hat, precision=4)}")
    print(f"L = {fit.L:.6g}, Lbar = {fit.Lbar:.6g}  -> {path}")
    return 0


def cmd_bootstrap(cfg: ExperimentConfig, args) -> int:
    out = Path(cfg.output_dir)
    data = build_dataset(cfg)
    fit = ols_fit(data)
    ens = bootstrap_ensemble(fit, data.X, cfg.k, child_seed(cfg.seed, 1, 0))
    out.mkdir(parents=True, exist_ok=True)
    path = save_ensemble(ens, out / "ensemble", dataset_hash=data.digest())
    print(f"{ens.k} bootstrap estimates in R^{ens.p} -> {path}")
    return 0


def cmd_radius(cfg: ExperimentConfig, args) -> int:
    fit = ols_fit(build_dataset(cfg))
    b = theoretical_radius(radius_inputs(cfg, fit))
    path = _write_json(Path(cfg.output_dir), "radius.json", b.as_dict())
    print(
        f"epsilon = {b.epsilon:.6g} (eps1 = {b.eps1:.4g} [{b.eps1_branch}], eps2 = {b.eps2:.4g}, "
        f"eps3 = {b.eps3:.4g} [{b.eps3_branch}]) -> {path}"
    )
    return 0


def cmd_solve(cfg: ExperimentConfig, args) -> int:
    out = Path(cfg.output_dir)
    data = build_dataset(cfg)
    fit = ols_fit(data)
    prob = load_problem(args.problem) if args.problem else problem_for(cfg)
    ens = bootstrap_ensemble(fit, data.X, cfg.k, child_seed(cfg.seed, 1, 0))
    if cfg.radius_mode == "theoretical":
        amb = make_ambiguity_set(ensemble_to_distribution(ens), "theoretical", radius_inputs(cfg, fit))
    else:
        amb = make_ambiguity_set(ensemble_to_distribution(ens), "tuned", args.epsilon)
    sol = solve_dro(prob, ens, amb)
    ce = solve_certainty_equivalent(prob, fit.beta_hat)
    payload = {
        "epsilon": amb.radius,
        "status": sol.status,
        "objective": sol.objective,
        "x": None if sol.x is None else sol.x.tolist(),
        "max_primal_residual": sol.result.max_primal_residual,
        "certainty_equivalent": {"status": ce.status, "objective": ce.objective},
    }
    if data.beta_true is not None:
        for key, s in (("true_violation", sol), ("ce_true_violation", ce)):
            if s.x is not None:
                payload[key] = max(evaluate_true_violation(s.x, data.beta_true, c) for c in prob.constraints)
    if args.dump:
        out.mkdir(parents=True, exist_ok=True)
        (out / "program.txt").write_text(build_dro(prob, ens, amb).program.to_text())
    path = _write_json(out, "solution.json", payload)
    print(f"status={sol.status} objective={sol.objective:.6g} epsilon={amb.radius:.6g} -> {path}")
    return 0 if sol.status == "optimal" else 1


def cmd_tradeoff(cfg: ExperimentConfig, args) -> int:
    res = run_tradeoff(cfg, out_dir=cfg.output_dir)
    print("epsilon   median_objective   median_violation")
    for row in res.summary:
        print(f"{row['epsilon']:<9.5g} {row['objective_median']:<18.6g} {row['violation_median']:.6g}")
    print(f"spearman(objective) = {res.trend('objective'):.3f}, spearman(violation) = {res.trend('violation'):.3f}")
    print(f"outputs in {cfg.output_dir}")
    return 0


def cmd_safety(cfg: ExperimentConfig, args) -> int:
    rep = run_safety_mc(cfg, num_trials=args.trials, out_dir=cfg.output_dir)
    print("epsilon   failures/trials   frequency   95% CI")
    for c in rep.cells:
        print(f"{c.epsilon:<9.5g} {c.failures:>5}/{c.trials:<10} {c.frequency:<11.4f} [{c.ci_low:.4f}, {c.ci_high:.4f}]")
    print(f"kendall tau = {rep.kendall_tau:.3f} (p = {rep.kendall_p:.3g})")
    return 0


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    results = run_bound_validation(cfg, draws=args.draws, out_dir=cfg.output_dir)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="drboot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="generate data and fit OLS").set_defaults(fn=cmd_fit)
    sub.add_parser("bootstrap", parents=[common], help="draw a bootstrap ensemble").set_defaults(fn=cmd_bootstrap)
    sub.add_parser("radius", parents=[common], help="theoretical Wasserstein radius").set_defaults(fn=cmd_radius)
    p = sub.add_parser("solve", parents=[common], help="solve one robust program")
    p.add_argument("--problem", type=Path, help="problem spec (JSON); default is the config's instance")
    p.add_argument("--epsilon", type=float, default=0.0, help="tuned radius")
    p.add_argument("--dump", action="store_true", help="write the conic program as text")
    p.set_defaults(fn=cmd_solve)
    sub.add_parser("tradeoff", parents=[common], help="radius sweep with boxplots").set_defaults(fn=cmd_tradeoff)
    p = sub.add_parser("safety-mc", parents=[common], help="Monte Carlo safety check")
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(fn=cmd_safety)
    p = sub.add_parser("validate-bounds", parents=[common], help="empirical checks of the radius inequalities")
    p.add_argument("--draws", type=int, default=10_000)
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.fn(_config(args), args)


if __name__ == "__main__":
    sys.exit(main())

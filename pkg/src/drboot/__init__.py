"""Distributionally robust bootstrap optimization.

A regression layer (OLS with a residual bootstrap) feeds a Wasserstein
ambiguity set to a CVaR-constrained optimization layer that is solved as an
exact second-order cone program.
"""

from .ambiguity import (
    AmbiguitySet,
    RadiusConstants,
    RadiusInputs,
    epsilon1,
    epsilon2,
    epsilon3,
    make_ambiguity_set,
    theoretical_radius,
)
from .bootstrap import (
    BootstrapEnsemble,
    EmpiricalDistribution,
    bootstrap_ensemble,
    center_residuals,
    ensemble_to_distribution,
    resample,
)
from .conic import ConicProgram, SocBlock, SolveResult, solve
from .dro import (
    AffineConstraint,
    RiskSpec,
    RobustLinearProblem,
    budget_problem,
    build_certainty_equivalent,
    build_dro_cvar,
    build_dro_expectation,
    empirical_cvar,
    evaluate_true_violation,
)
from .regression import (
    NoiseSpec,
    OlsFit,
    RegressionDataset,
    compute_lipschitz_constants,
    construct_adversarial_realization,
    generate_synthetic,
    ols_fit,
)
from .wasserstein import TransportPlan, brute_force_w1, w1_discrete, wq_1d

__version__ = "0.1.0"

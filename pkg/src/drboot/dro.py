"""Optimization layer: nominal, certainty-equivalent and robust programs.

Constraint ``j`` is affine in both the decision ``x`` (length d) and the
regression parameter ``beta`` (length p)::

    g_j(x, beta) = x^T (A_j beta + a0_j) - (D_j^T beta + e_j)  <= 0

so ``A_j`` is d x p and the gradient of ``g_j`` in ``beta`` is
``A_j^T x - D_j``. The nominal instance used throughout the experiments has
``A = I``, ``a0 = 0``, ``D = 0``, ``e = 1``: ``beta^T x <= 1``.

Robust constraints use a 1-Wasserstein ball (Euclidean ground metric) around
the bootstrap ensemble. For CVaR the exact reformulation introduces, per
constraint, ``s_j`` (k), ``tau_j`` and ``lambda_j``::

    eps * lambda_j + mean(s_j) <= gamma * Delta_j
    g_j(x, beta*_i) - (1 - gamma) tau_j <= s_ji
    gamma tau_j <= s_ji
    ||A_j^T x - D_j||_2 <= lambda_j

The left side of the first row minimized over (s, tau) is gamma times the
worst-case CVaR, hence the ``gamma * Delta_j`` limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ambiguity import AmbiguitySet
from .bootstrap import BootstrapEnsemble
from .conic import ConicProgram, SocBlock, SolveResult, solve
from .errors import DimensionMismatch, InvalidInputs, UnsupportedOrder, UnsupportedRisk


@dataclass(frozen=True)
class AffineConstraint:
    A: np.ndarray  # (d, p)
    a0: np.ndarray  # (d,)
    D: np.ndarray  # (p,)
    e: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        d, p = A.shape
        a0 = np.asarray(self.a0, dtype=float).reshape(-1)
        D = np.asarray(self.D, dtype=float).reshape(-1)
        if a0.shape != (d,) or D.shape != (p,):
            raise DimensionMismatch(f"constraint blocks inconsistent: A {A.shape}, a0 {a0.shape}, D {D.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "e", float(self.e))

    @classmethod
    def linear(cls, p: int, rhs: float = 1.0) -> "AffineConstraint":
        """``beta^T x <= rhs``."""
        return cls(np.eye(p), np.zeros(p), np.zeros(p), rhs)

    def coefficients(self, beta: np.ndarray) -> tuple[np.ndarray, float]:
        """(row, rhs) with ``g(x, beta) = row @ x - rhs``; vectorized over beta rows."""
        beta = np.asarray(beta, dtype=float)
        return beta @ self.A.T + self.a0, beta @ self.D + self.e

    def value(self, x: np.ndarray, beta: np.ndarray):
        row, rhs = self.coefficients(beta)
        return row @ x - rhs

    def beta_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.A.T @ x - self.D


@dataclass(frozen=True)
class RiskSpec:
    measure: str = "cvar"
    gamma: float = 0.05
    Delta: Sequence[float] = (0.1,)

    def __post_init__(self):
        if self.measure not in ("cvar", "expectation"):
            raise UnsupportedRisk(f"unsupported risk measure {self.measure!r}")
        if not 0 < self.gamma <= 1:
            raise InvalidInputs(f"gamma must lie in (0, 1], got {self.gamma}")
        Delta = np.atleast_1d(np.asarray(self.Delta, dtype=float))
        if not np.all(np.isfinite(Delta)):
            raise InvalidInputs("risk limits must be finite")
        object.__setattr__(self, "Delta", Delta)


@dataclass(frozen=True)
class RobustLinearProblem:
    objective: np.ndarray
    constraints: tuple
    sense: str = "maximize"
    nonneg: bool = True
    risk: RiskSpec = field(default_factory=RiskSpec)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.sense not in ("maximize", "minimize"):
            raise InvalidInputs("sense must be 'maximize' or 'minimize'")
        if not self.constraints:
            raise InvalidInputs("at least one constraint is required")
        ps = {con.A.shape[1] for con in self.constraints}
        if any(con.A.shape[0] != c.size for con in self.constraints) or len(ps) != 1:
            raise DimensionMismatch("constraint blocks disagree with the decision or parameter dimension")
        if self.risk.Delta.size != len(self.constraints):
            raise DimensionMismatch("need one risk limit per constraint")

    @property
    def d(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def p(self) -> int:
        return self.constraints[0].A.shape[1]

    def minimize_vector(self) -> np.ndarray:
        return -self.objective if self.sense == "maximize" else self.objective

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.objective @ x)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.tolist(),
            "sense": self.sense,
            "nonneg": self.nonneg,
            "risk": {
                "measure": self.risk.measure,
                "gamma": self.risk.gamma,
                "Delta": self.risk.Delta.tolist(),
            },
            "constraints": [
                {"A": c.A.tolist(), "a0": c.a0.tolist(), "D": c.D.tolist(), "e": c.e}
                for c in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RobustLinearProblem":
        cons = []
        for c in d["constraints"]:
            if "A" in c:
                cons.append(AffineConstraint(c["A"], c["a0"], c["D"], c["e"]))
            else:
                cons.append(AffineConstraint.linear(int(c["p"]), float(c.get("e", 1.0))))
        return cls(
            objective=d["objective"],
            constraints=tuple(cons),
            sense=d.get("sense", "maximize"),
            nonneg=d.get("nonneg", True),
            risk=RiskSpec(**d.get("risk", {})),
        )


def load_problem(path) -> RobustLinearProblem:
    return RobustLinearProblem.from_dict(json.loads(Path(path).read_text()))


def save_problem(prob: RobustLinearProblem, path) -> None:
    Path(path).write_text(json.dumps(prob.to_dict(), indent=2))


def budget_problem(p: int = 10, Delta: float = 0.1, gamma: float = 0.05, measure: str = "cvar") -> RobustLinearProblem:
    """maximize 1^T x  s.t.  risk(beta^T x - 1) <= Delta,  x >= 0."""
    return RobustLinearProblem(
        objective=np.ones(p),
        constraints=(AffineConstraint.linear(p, 1.0),),
        sense="maximize",
        nonneg=True,
        risk=RiskSpec(measure=measure, gamma=gamma, Delta=(Delta,)),
    )


@dataclass(frozen=True)
class ReformulatedProgram:
    program: ConicProgram
    x: slice
    s: tuple  # slice per constraint
    tau: tuple  # index per constraint (None when absent)
    lam: tuple  # index per constraint

    def extract_x(self, result: SolveResult) -> Optional[np.ndarray]:
        return None if result.v is None else result.v[self.x]


def _sign_bounds(prob: RobustLinearProblem, nvars: int) -> np.ndarray:
    lower = np.full(nvars, -np.inf)
    if prob.nonneg:
        lower[: prob.d] = 0.0
    return lower


def build_certainty_equivalent(prob: RobustLinearProblem, beta_hat) -> ConicProgram:
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != (prob.p,):
        raise DimensionMismatch(f"beta has shape {beta_hat.shape}, expected ({prob.p},)")
    rows, rhs = zip(*(con.coefficients(beta_hat) for con in prob.constraints))
    return ConicProgram(
        objective=prob.minimize_vector(),
        A_ub=np.vstack(rows),
        b_ub=np.array(rhs, dtype=float),
        lower=_sign_bounds(prob, prob.d),
    )


def _check_robust_inputs(prob: RobustLinearProblem, ensemble: BootstrapEnsemble, amb: AmbiguitySet):
    if amb.q != 1:
        raise UnsupportedOrder("only the 1-Wasserstein ball has an exact reformulation here")
    if ensemble.p != prob.p:
        raise DimensionMismatch(f"ensemble dimension {ensemble.p} != problem parameter dimension {prob.p}")


def build_dro_cvar(prob: RobustLinearProblem, ensemble: BootstrapEnsemble, amb: AmbiguitySet) -> ReformulatedProgram:
    if prob.risk.measure != "cvar":
        raise UnsupportedRisk("build_dro_cvar needs a CVaR risk spec")
    _check_robust_inputs(prob, ensemble, amb)
    d, m, k = prob.d, prob.m, ensemble.k
    gamma, eps = prob.risk.gamma, amb.radius
    nvars = d + m * (k + 2)
    xs = slice(0, d)
    s_sl, tau_ix, lam_ix = [], [], []
    A_rows, b_rows, socs = [], [], []
    for j, con in enumerate(prob.constraints):
        base = d + j * (k + 2)
        s = slice(base, base + k)
        t, lam = base + k, base + k + 1
        s_sl.append(s)
        tau_ix.append(t)
        lam_ix.append(lam)

        row = np.zeros(nvars)
        row[lam] = eps
        row[s] = 1.0 / k
        A_rows.append(row)
        b_rows.append(gamma * prob.risk.Delta[j])

        coef, rhs = con.coefficients(ensemble.beta_stars)  # (k, d), (k,)
        block = np.zeros((k, nvars))
        block[:, xs] = coef
        block[:, t] = -(1.0 - gamma)
        block[np.arange(k), base + np.arange(k)] = -1.0
        A_rows.append(block)
        b_rows.append(rhs)

        block = np.zeros((k, nvars))
        block[:, t] = gamma
        block[np.arange(k), base + np.arange(k)] = -1.0
        A_rows.append(block)
        b_rows.append(np.zeros(k))

        F = np.zeros((prob.p, nvars))
        F[:, xs] = con.A.T
        h = np.zeros(nvars)
        h[lam] = 1.0
        socs.append(SocBlock(F=F, g=-con.D, h=h, r=0.0))

    c = np.zeros(nvars)
    c[xs] = prob.minimize_vector()
    program = ConicProgram(
        objective=c,
        A_ub=np.vstack([np.atleast_2d(r) for r in A_rows]),
        b_ub=np.concatenate([np.atleast_1d(b) for b in b_rows]),
        soc_blocks=tuple(socs),
        lower=_sign_bounds(prob, nvars),
    )
    return ReformulatedProgram(program, xs, tuple(s_sl), tuple(tau_ix), tuple(lam_ix))


def build_dro_expectation(
    prob: RobustLinearProblem, ensemble: BootstrapEnsemble, amb: AmbiguitySet
) -> ReformulatedProgram:
    """Worst-case expectation: ``mean_i g_j(x, beta*_i) + eps lambda_j <= Delta_j``."""
    if prob.risk.measure != "expectation":
        raise UnsupportedRisk("build_dro_expectation needs an expectation risk spec")
    _check_robust_inputs(prob, ensemble, amb)
    d, m = prob.d, prob.m
    nvars = d + m
    xs = slice(0, d)
    A_rows, b_rows, socs, lam_ix = [], [], [], []
    for j, con in enumerate(prob.constraints):
        lam = d + j
        lam_ix.append(lam)
        coef, rhs = con.coefficients(ensemble.beta_stars)
        row = np.zeros(nvars)
        row[xs] = coef.mean(axis=0)
        row[lam] = amb.radius
        A_rows.append(row)
        b_rows.append(prob.risk.Delta[j] + rhs.mean())
        F = np.zeros((prob.p, nvars))
        F[:, xs] = con.A.T
        h = np.zeros(nvars)
        h[lam] = 1.0
        socs.append(SocBlock(F=F, g=-con.D, h=h, r=0.0))
    c = np.zeros(nvars)
    c[xs] = prob.minimize_vector()
    program = ConicProgram(
        objective=c,
        A_ub=np.vstack(A_rows),
        b_ub=np.array(b_rows),
        soc_blocks=tuple(socs),
        lower=_sign_bounds(prob, nvars),
    )
    empty = tuple(slice(d, d) for _ in range(m))
    return ReformulatedProgram(program, xs, empty, tuple(None for _ in range(m)), tuple(lam_ix))


def build_dro(prob: RobustLinearProblem, ensemble: BootstrapEnsemble, amb: AmbiguitySet) -> ReformulatedProgram:
    if prob.risk.measure == "cvar":
        return build_dro_cvar(prob, ensemble, amb)
    return build_dro_expectation(prob, ensemble, amb)


def empirical_cvar(z_samples, gamma: float) -> float:
    """min over tau of ``tau + mean(max(z - tau, 0)) / gamma``.

    The objective is convex piecewise linear in tau with kinks at the
    samples, so it is minimized at one of them.
    """
    if not 0 < gamma <= 1:
        raise InvalidInputs(f"gamma must lie in (0, 1], got {gamma}")
    z = np.sort(np.asarray(z_samples, dtype=float).ravel())[::-1]
    if z.size == 0:
        raise InvalidInputs("need at least one sample")
    k = z.size
    # at tau = z[j] (descending) the positive parts are z[:j] - z[j]
    head = np.concatenate([[0.0], np.cumsum(z)[:-1]])
    j = np.arange(k)
    vals = z + (head - j * z) / (gamma * k)
    return float(vals.min())


def worst_case_cvar(z_samples, gamma: float, radius: float, lipschitz: float) -> float:
    """Worst-case CVaR of an affine loss over a 1-Wasserstein ball.

    Shifting mass along the gradient raises the upper tail; the worst case is
    the empirical CVaR plus ``radius * lipschitz / gamma``.
    """
    return empirical_cvar(z_samples, gamma) + radius * lipschitz / gamma


def evaluate_true_violation(x, beta_true, constraint: AffineConstraint) -> float:
    """``g_j(x, beta_true)``; positive means the true constraint is violated."""
    return float(constraint.value(np.asarray(x, dtype=float), np.asarray(beta_true, dtype=float)))


@dataclass(frozen=True)
class RobustSolution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    result: SolveResult


def solve_certainty_equivalent(prob: RobustLinearProblem, beta_hat, **tol) -> RobustSolution:
    res = solve(build_certainty_equivalent(prob, beta_hat), **tol)
    x = res.v
    return RobustSolution(res.status, x, prob.objective_value(x) if x is not None else np.nan, res)


def solve_dro(prob: RobustLinearProblem, ensemble: BootstrapEnsemble, amb: AmbiguitySet, **tol) -> RobustSolution:
    ref = build_dro(prob, ensemble, amb)
    res = solve(ref.program, **tol)
    x = ref.extract_x(res)
    return RobustSolution(res.status, x, prob.objective_value(x) if x is not None else np.nan, res)

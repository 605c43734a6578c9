"""Linear and second-order cone programs in a small canonical form.

A :class:`ConicProgram` is::

    minimize    c^T v
    subject to  A_ub v <= b_ub
                A_eq v  = b_eq
                ||F_i v + g_i||_2 <= h_i^T v + r_i     for each SOC block
                v >= lower                              (entrywise, -inf allowed)

Solving delegates to the Clarabel interior-point method. Every solve is
re-checked by substituting the returned point into the original constraints;
a point that fails the check is never reported as optimal.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import clarabel
import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InvalidInputs

logger = logging.getLogger(__name__)

TOL_FEAS = 1e-8
TOL_OPT = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SocBlock:
    """``||F v + g||_2 <= h^T v + r``."""

    F: np.ndarray
    g: np.ndarray
    h: np.ndarray
    r: float = 0.0


def _matrix(a, ncols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, ncols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[1] != ncols:
        raise DimensionMismatch(f"constraint matrix has {a.shape[1]} columns, expected {ncols}")
    return a


def _vector(b, size: int, name: str) -> np.ndarray:
    b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (size,):
        raise DimensionMismatch(f"{name} has shape {b.shape}, expected ({size},)")
    return b


@dataclass(frozen=True)
class ConicProgram:
    objective: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    soc_blocks: tuple = ()
    lower: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        n = c.size
        object.__setattr__(self, "objective", c)
        A_ub = _matrix(self.A_ub, n)
        A_eq = _matrix(self.A_eq, n)
        object.__setattr__(self, "A_ub", A_ub)
        object.__setattr__(self, "b_ub", _vector(self.b_ub, A_ub.shape[0], "b_ub"))
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", _vector(self.b_eq, A_eq.shape[0], "b_eq"))
        lower = np.full(n, -np.inf) if self.lower is None else _vector(self.lower, n, "lower")
        object.__setattr__(self, "lower", lower)
        blocks = []
        for blk in self.soc_blocks:
            F = _matrix(blk.F, n)
            g = _vector(blk.g, F.shape[0], "soc g")
            h = _vector(blk.h, n, "soc h")
            blocks.append(SocBlock(F, g, h, float(blk.r)))
        object.__setattr__(self, "soc_blocks", tuple(blocks))
        data = [c, A_ub, self.b_ub, A_eq, self.b_eq]
        data += [x for b in blocks for x in (b.F, b.g, b.h, np.array([b.r]))]
        if not all(np.all(np.isfinite(x)) for x in data):
            raise InvalidInputs("program data must be finite")
        if np.any(np.isposinf(lower)) or np.any(np.isnan(lower)):
            raise InvalidInputs("lower bounds must be finite or -inf")

    @property
    def nvars(self) -> int:
        return self.objective.size

    def residuals(self, v: np.ndarray) -> dict:
        """Largest violation of each constraint family at ``v``."""
        v = np.asarray(v, dtype=float)
        out = {"linear_ineq": 0.0, "linear_eq": 0.0, "soc": 0.0, "bounds": 0.0}
        if self.A_ub.shape[0]:
            out["linear_ineq"] = float(max(0.0, np.max(self.A_ub @ v - self.b_ub)))
        if self.A_eq.shape[0]:
            out["linear_eq"] = float(np.max(np.abs(self.A_eq @ v - self.b_eq)))
        for b in self.soc_blocks:
            gap = np.linalg.norm(b.F @ v + b.g) - (b.h @ v + b.r)
            out["soc"] = max(out["soc"], float(gap))
        finite = np.isfinite(self.lower)
        if finite.any():
            out["bounds"] = float(max(0.0, np.max(self.lower[finite] - v[finite])))
        return out

    def max_residual(self, v: np.ndarray) -> float:
        return max(self.residuals(v).values())

    def to_text(self) -> str:
        """Plain-text dump: one line per objective/row/bound/block, in order."""
        buf = io.StringIO()
        fmt = lambda a: " ".join(repr(float(x)) for x in np.ravel(a))  # noqa: E731
        buf.write(f"NVARS {self.nvars}\n")
        buf.write(f"MINIMIZE {fmt(self.objective)}\n")
        for row, b in zip(self.A_ub, self.b_ub):
            buf.write(f"LE {fmt(row)} | {float(b)!r}\n")
        for row, b in zip(self.A_eq, self.b_eq):
            buf.write(f"EQ {fmt(row)} | {float(b)!r}\n")
        for i, lo in enumerate(self.lower):
            if np.isfinite(lo):
                buf.write(f"LB {i} {float(lo)!r}\n")
        for b in self.soc_blocks:
            buf.write(f"SOC {b.F.shape[0]} h {fmt(b.h)} r {b.r!r}\n")
            for row, gi in zip(b.F, b.g):
                buf.write(f"  F {fmt(row)} | {float(gi)!r}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class SolveResult:
    status: str
    v: Optional[np.ndarray]
    objective_value: float
    max_primal_residual: float
    solver_status: str = ""
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _to_clarabel(prog: ConicProgram):
    """Stack rows as zero cone, nonnegative cone, then one SOC per block.

    Row order is eq rows, ub rows, finite lower bounds, SOC blocks in
    declaration order; this ordering is the (bijective) translation.
    """
    n = prog.nvars
    A_parts, b_parts, cones = [], [], []
    if prog.A_eq.shape[0]:
        A_parts.append(prog.A_eq)
        b_parts.append(prog.b_eq)
        cones.append(clarabel.ZeroConeT(prog.A_eq.shape[0]))
    finite = np.flatnonzero(np.isfinite(prog.lower))
    n_nonneg = prog.A_ub.shape[0] + finite.size
    if n_nonneg:
        A_parts.append(prog.A_ub)
        b_parts.append(prog.b_ub)
        # -v_i <= -lower_i
        A_parts.append(-np.eye(n)[finite])
        b_parts.append(-prog.lower[finite])
        cones.append(clarabel.NonnegativeConeT(n_nonneg))
    for blk in prog.soc_blocks:
        # s = b - A v = (h^T v + r, F v + g)
        A_parts.append(np.vstack([-blk.h[None, :], -blk.F]))
        b_parts.append(np.concatenate([[blk.r], blk.g]))
        cones.append(clarabel.SecondOrderConeT(1 + blk.F.shape[0]))
    A = sp.csc_matrix(np.vstack(A_parts)) if A_parts else sp.csc_matrix((0, n))
    b = np.concatenate(b_parts) if b_parts else np.zeros(0)
    return A, b, cones


def solve(prog: ConicProgram, tol_feas: float = TOL_FEAS, tol_opt: float = TOL_OPT) -> SolveResult:
    if not (0 < tol_feas <= 1e-2 and 0 < tol_opt <= 1e-2):
        raise InvalidInputs("tolerances must lie in (0, 1e-2]")
    n = prog.nvars
    A, b, cones = _to_clarabel(prog)
    logger.debug("clarabel form: %d vars, %d rows, cones=%s", n, A.shape[0], [str(c) for c in cones])

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    # the interior-point tolerances are set well below the contract
    # tolerances so that the substitution check below has headroom
    settings.tol_feas = min(tol_feas, 1e-10)
    settings.tol_gap_abs = min(tol_opt, 1e-10)
    settings.tol_gap_rel = min(tol_opt, 1e-10)
    settings.tol_ktratio = 1e-8
    settings.max_iter = 400
    P = sp.csc_matrix((n, n))
    sol = clarabel.DefaultSolver(P, prog.objective, A, b, cones, settings).solve()
    raw = str(sol.status)
    S = clarabel.SolverStatus

    if sol.status in (S.PrimalInfeasible, S.AlmostPrimalInfeasible):
        return SolveResult(INFEASIBLE, None, np.inf, np.inf, raw, sol.iterations)
    if sol.status in (S.DualInfeasible, S.AlmostDualInfeasible):
        return SolveResult(UNBOUNDED, None, -np.inf, np.inf, raw, sol.iterations)
    v = np.asarray(sol.x, dtype=float)
    if sol.status not in (S.Solved, S.AlmostSolved) or not np.all(np.isfinite(v)):
        return SolveResult(NUMERICAL_FAILURE, None, np.nan, np.inf, raw, sol.iterations)

    resid = prog.max_residual(v)
    obj = float(prog.objective @ v)
    gap = abs(obj - float(sol.obj_val_dual))
    status = OPTIMAL
    if resid > tol_feas or gap > tol_opt * max(1.0, abs(obj)):
        logger.warning("solution rejected: residual=%.3e gap=%.3e (%s)", resid, gap, raw)
        status = NUMERICAL_FAILURE
    return SolveResult(status, v, obj, resid, raw, sol.iterations)

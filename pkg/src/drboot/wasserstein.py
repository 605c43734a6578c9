"""Exact Wasserstein distances between empirical distributions.

Only the Euclidean ground metric is supported. In one dimension the
quantile coupling is optimal; in higher dimension the transportation LP is
solved exactly: as an assignment problem when both measures can be written
as uniform measures on a common number of atoms (at most 2000), otherwise
with the HiGHS dual simplex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix
from scipy.spatial.distance import cdist

from .bootstrap import EmpiricalDistribution
from .errors import DimensionMismatch, InvalidInputs, SizeLimitExceeded

MAX_ATOMS = 5000
MAX_BRUTE_FORCE = 8
# unequal sizes whose lcm is at most this are solved as an assignment problem
MAX_REPLICATED = 2000


@dataclass(frozen=True)
class TransportPlan:
    cost: float
    plan: np.ndarray


def _as_dist(d) -> EmpiricalDistribution:
    return d if isinstance(d, EmpiricalDistribution) else EmpiricalDistribution(d)


def wq_1d(mu, nu, q: int = 1) -> float:
    """Exact d_q between two one-dimensional empirical distributions."""
    if q not in (1, 2):
        raise InvalidInputs(f"q must be 1 or 2, got {q}")
    mu, nu = _as_dist(mu), _as_dist(nu)
    if mu.dim != 1 or nu.dim != 1:
        raise DimensionMismatch("wq_1d needs one-dimensional atoms")
    a = np.sort(mu.values)
    b = np.sort(nu.values)
    m, k = a.size, b.size
    if m == k:
        return float(np.mean(np.abs(a - b) ** q) ** (1.0 / q))
    # merged quantile breakpoints i/m and j/k, integrated piecewise
    cuts = np.union1d(np.arange(m + 1) / m, np.arange(k + 1) / k)
    widths = np.diff(cuts)
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    ia = np.minimum((mids * m).astype(int), m - 1)
    ib = np.minimum((mids * k).astype(int), k - 1)
    return float(np.sum(widths * np.abs(a[ia] - b[ib]) ** q) ** (1.0 / q))


def _cost_matrix(mu: EmpiricalDistribution, nu: EmpiricalDistribution) -> np.ndarray:
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"atom dimensions differ: {mu.dim} vs {nu.dim}")
    if max(mu.size, nu.size) > MAX_ATOMS:
        raise SizeLimitExceeded(f"at most {MAX_ATOMS} atoms per side")
    return cdist(mu.atoms, nu.atoms, metric="euclidean")


def w1_discrete(mu, nu, norm: str = "euclidean") -> TransportPlan:
    """Optimal transport plan and d_1 cost between two empirical distributions."""
    if norm != "euclidean":
        raise InvalidInputs("only the euclidean ground metric is supported")
    mu, nu = _as_dist(mu), _as_dist(nu)
    C = _cost_matrix(mu, nu)
    m, k = C.shape
    if m == k:
        # an optimal coupling of two uniform m-point measures is a permutation
        rows, cols = linear_sum_assignment(C)
        plan = np.zeros((m, k))
        plan[rows, cols] = 1.0 / m
        return TransportPlan(cost=float(C[rows, cols].sum() / m), plan=plan)

    size = math.lcm(m, k)
    if size <= MAX_REPLICATED:
        # uniform on m atoms == uniform on `size` atoms with each repeated size/m times
        rm, rk = size // m, size // k
        rows, cols = linear_sum_assignment(np.repeat(np.repeat(C, rm, axis=0), rk, axis=1))
        plan = np.zeros((m, k))
        np.add.at(plan, (rows // rm, cols // rk), 1.0 / size)
        return TransportPlan(cost=float(np.sum(plan * C)), plan=plan)

    # rows: sum_j P_ij = 1/m ; cols: sum_i P_ij = 1/k
    ii, jj = np.meshgrid(np.arange(m), np.arange(k), indexing="ij")
    var = (ii * k + jj).ravel()
    A_eq = coo_matrix(
        (
            np.ones(2 * m * k),
            (np.concatenate([ii.ravel(), m + jj.ravel()]), np.concatenate([var, var])),
        ),
        shape=(m + k, m * k),
    ).tocsc()
    b_eq = np.concatenate([np.full(m, 1.0 / m), np.full(k, 1.0 / k)])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    plan = np.maximum(res.x.reshape(m, k), 0.0)
    return TransportPlan(cost=float(np.sum(plan * C)), plan=plan)


def w1(mu, nu) -> float:
    return w1_discrete(mu, nu).cost


def brute_force_w1(mu, nu) -> float:
    """d_1 by enumerating every matching; equal atom counts up to 8."""
    mu, nu = _as_dist(mu), _as_dist(nu)
    if mu.size != nu.size:
        raise InvalidInputs("brute force needs equal atom counts")
    if mu.size > MAX_BRUTE_FORCE:
        raise SizeLimitExceeded(f"brute force limited to {MAX_BRUTE_FORCE} atoms")
    C = _cost_matrix(mu, nu)
    m = mu.size
    best = math.inf
    for perm in itertools.permutations(range(m)):
        best = min(best, sum(C[i, perm[i]] for i in range(m)))
    return best / m

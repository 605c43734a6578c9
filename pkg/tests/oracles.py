"""Independent reference computations used by several test modules."""

import itertools

import numpy as np
from scipy.optimize import linprog


def vertex_enumeration(c, A, b, tol=1e-9):
    """min c'v over {A v <= b} by enumerating every basic solution.

    The polytope must be bounded and non-empty.
    """
    A, b, c = np.asarray(A, float), np.asarray(b, float), np.asarray(c, float)
    n = c.size
    best, arg = np.inf, None
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ v <= b + tol) and c @ v < best:
            best, arg = float(c @ v), v
    return best, arg


def random_box_lp(rng, n, extra):
    """A bounded LP: the box [-1, 2]^n plus ``extra`` random cuts holding at 0."""
    A = np.vstack([np.eye(n), -np.eye(n), rng.normal(size=(extra, n))])
    b = np.concatenate([np.full(n, 2.0), np.ones(n), rng.uniform(0.2, 1.5, size=extra)])
    return rng.normal(size=n), A, b


def saa_cvar_lp(Z_coef, z0, gamma, Delta, objective):
    """max objective'x over x >= 0 subject to CVaR_gamma of the scenario losses <= Delta.

    Scenario i has loss Z_coef[i] @ x + z0[i]. This uses the Rockafellar-Uryasev
    form with risk level gamma (upper tail of mass gamma):
        t + 1/(gamma k) sum_i u_i <= Delta,   u_i >= loss_i - t,   u >= 0.
    Variables are ordered (x, t, u).
    """
    Z_coef = np.atleast_2d(Z_coef)
    k, d = Z_coef.shape
    nv = d + 1 + k
    c = np.zeros(nv)
    c[:d] = -np.asarray(objective, float)
    rows, rhs = [], []
    for i in range(k):
        r = np.zeros(nv)
        r[:d] = Z_coef[i]
        r[d] = -1.0
        r[d + 1 + i] = -1.0
        rows.append(r)
        rhs.append(-z0[i])
    r = np.zeros(nv)
    r[d] = 1.0
    r[d + 1:] = 1.0 / (gamma * k)
    rows.append(r)
    rhs.append(Delta)
    bounds = [(0, None)] * d + [(None, None)] + [(0, None)] * k
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    return res

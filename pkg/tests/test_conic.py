import math

import numpy as np
import pytest

from drboot.conic import ConicProgram, SocBlock, solve
from drboot.errors import DimensionMismatch, InvalidInputs
from oracles import random_box_lp, vertex_enumeration


class TestExamples:
    def test_lower_bound(self):
        res = solve(ConicProgram(objective=[1.0], lower=[1.0]))
        assert res.optimal
        assert res.v[0] == pytest.approx(1.0, abs=1e-8)
        assert res.objective_value == pytest.approx(1.0, abs=1e-8)

    def test_disc(self):
        prog = ConicProgram(objective=[-1.0, -1.0], soc_blocks=(SocBlock(np.eye(2), np.zeros(2), np.zeros(2), 1.0),))
        res = solve(prog)
        assert res.optimal
        np.testing.assert_allclose(res.v, [math.sqrt(2) / 2] * 2, atol=1e-7)
        assert -res.objective_value == pytest.approx(math.sqrt(2), abs=1e-7)

    def test_infeasible(self):
        res = solve(ConicProgram(objective=[1.0], A_ub=[[1.0]], b_ub=[0.0], lower=[1.0]))
        assert res.status == "infeasible"
        assert res.v is None

    def test_unbounded(self):
        res = solve(ConicProgram(objective=[-1.0], lower=[0.0]))
        assert res.status == "unbounded"

    def test_equality(self):
        prog = ConicProgram(objective=[1.0, 2.0], A_eq=[[1.0, 1.0]], b_eq=[3.0], lower=[0.0, 0.0])
        res = solve(prog)
        np.testing.assert_allclose(res.v, [3.0, 0.0], atol=1e-8)

    def test_affine_soc(self):
        # min t s.t. ||v - (3, 4)|| <= t, v = 0  ->  t = 5
        prog = ConicProgram(
            objective=[0.0, 0.0, 1.0],
            A_eq=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            b_eq=[0.0, 0.0],
            soc_blocks=(SocBlock(np.array([[1.0, 0, 0], [0, 1.0, 0]]), np.array([-3.0, -4.0]), np.array([0, 0, 1.0])),),
        )
        res = solve(prog)
        assert res.objective_value == pytest.approx(5.0, abs=1e-7)


class TestContract:
    def test_vertex_enumeration(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            c, A, b = random_box_lp(rng, n, int(rng.integers(0, 4)))
            expect, _ = vertex_enumeration(c, A, b)
            res = solve(ConicProgram(objective=c, A_ub=A, b_ub=b))
            assert res.optimal
            assert res.objective_value == pytest.approx(expect, abs=1e-8)
            assert res.max_primal_residual <= 1e-8

    def test_scaling(self, rng):
        c, A, b = random_box_lp(rng, 3, 3)
        base = solve(ConicProgram(objective=c, A_ub=A, b_ub=b))
        scaled = solve(ConicProgram(objective=7.5 * c, A_ub=A, b_ub=b))
        assert scaled.objective_value == pytest.approx(7.5 * base.objective_value, abs=1e-7)
        np.testing.assert_allclose(scaled.v, base.v, atol=1e-6)

    def test_substitution(self, rng):
        for _ in range(10):
            F = rng.normal(size=(4, 4)) + 3 * np.eye(4)
            prog = ConicProgram(
                objective=rng.normal(size=4),
                A_ub=rng.normal(size=(2, 4)),
                b_ub=np.ones(2),
                soc_blocks=(SocBlock(F, rng.normal(size=4) * 0.1, np.zeros(4), 2.0),),
            )
            res = solve(prog)
            assert res.optimal
            assert prog.max_residual(res.v) <= 1e-8
            assert res.max_primal_residual == pytest.approx(prog.max_residual(res.v))

    def test_deterministic(self, rng):
        c, A, b = random_box_lp(rng, 4, 2)
        prog = ConicProgram(objective=c, A_ub=A, b_ub=b)
        np.testing.assert_array_equal(solve(prog).v, solve(prog).v)

    def test_residuals_report_violation(self):
        prog = ConicProgram(objective=[0.0], A_ub=[[1.0]], b_ub=[1.0], lower=[0.0])
        r = prog.residuals(np.array([3.0]))
        assert r["linear_ineq"] == pytest.approx(2.0)
        assert prog.residuals(np.array([-0.5]))["bounds"] == pytest.approx(0.5)


class TestValidation:
    def test_shape(self):
        with pytest.raises(DimensionMismatch):
            ConicProgram(objective=[1.0, 2.0], A_ub=[[1.0]], b_ub=[1.0])

    def test_non_finite(self):
        with pytest.raises(InvalidInputs):
            ConicProgram(objective=[np.nan])

    def test_tolerance_range(self):
        with pytest.raises(InvalidInputs):
            solve(ConicProgram(objective=[1.0], lower=[0.0]), tol_feas=0.5)


def test_text_dump():
    prog = ConicProgram(
        objective=[1.0, 0.0],
        A_ub=[[1.0, 1.0]],
        b_ub=[2.0],
        lower=[0.0, -np.inf],
        soc_blocks=(SocBlock(np.eye(2), np.zeros(2), np.zeros(2), 1.0),),
    )
    lines = prog.to_text().splitlines()
    assert lines[0] == "NVARS 2"
    assert lines[1] == "MINIMIZE 1.0 0.0"
    assert lines[2] == "LE 1.0 1.0 | 2.0"
    assert "LB 0 0.0" in lines
    assert any(line.startswith("SOC 2") for line in lines)
    assert sum(line.strip().startswith("F ") for line in lines) == 2

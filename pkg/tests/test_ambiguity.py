import math

import numpy as np
import pytest

from drboot.ambiguity import (
    AmbiguitySet,
    RadiusConstants,
    RadiusInputs,
    epsilon1,
    epsilon2,
    epsilon3,
    make_ambiguity_set,
    theoretical_radius,
)
from drboot.bootstrap import EmpiricalDistribution
from drboot.errors import InvalidInputs, NegativeRadius

# delta must lie in (0, 1), so the unit log terms ln(3 c1 / delta) = 1 and
# ln(6 / delta) / c = 1 are reached through the constants instead of delta
DELTA = 0.5
UNIT_C13 = math.e * DELTA / 3.0
UNIT_C = math.log(6.0 / DELTA)


def inputs(**kw):
    base = dict(n=100, k=30, p=10, delta=0.05, alpha=3.0, sigma=1.0, psi_alpha=1.0, L=0.1, Lbar=1.0)
    base.update(kw)
    return RadiusInputs(**base)


def unit_inputs(**kw):
    consts = RadiusConstants(c1=UNIT_C13, c2=1.0, c3=UNIT_C13, c4=1.0, c=UNIT_C)
    return inputs(delta=DELTA, constants=consts, **kw)


class TestEpsilon1:
    def test_branch_boundary(self):
        a = epsilon1(unit_inputs(k=1, p=2, alpha=3.0))
        b = epsilon1(unit_inputs(k=1, p=2, alpha=7.0))
        assert a.value == pytest.approx(1.0, abs=1e-15)
        assert b.value == pytest.approx(1.0, abs=1e-15)

    def test_large_k(self):
        t = epsilon1(unit_inputs(k=16, p=2))
        assert t.value == pytest.approx(0.25, abs=1e-15)
        assert t.branch == "small-t"

    def test_small_k_branch(self):
        t = epsilon1(inputs(k=1, delta=0.05))
        assert t.branch == "large-t"
        assert t.value == pytest.approx(math.log(60.0) ** (1 / 3))

    def test_p_one_uses_square_root(self):
        assert epsilon1(unit_inputs(k=4, p=1)).value == pytest.approx(0.5)

    def test_decreasing_in_k(self):
        vals = [epsilon1(inputs(k=k)).value for k in (1, 2, 4, 8, 30, 100, 10_000)]
        assert np.all(np.diff(vals) < 0)

    def test_dimension_curse(self):
        vals = [epsilon1(inputs(k=30, p=p)).value for p in range(1, 21)]
        assert np.all(np.diff(vals) >= 0)


class TestEpsilon2:
    def test_second_term(self):
        e = epsilon2(inputs(psi_alpha=1e-300))
        assert e == pytest.approx(math.sqrt(0.11), abs=1e-12)
        assert math.sqrt(0.11) == pytest.approx(0.33166, abs=5e-6)

    def test_first_term_unit(self):
        n = 49
        e = epsilon2(unit_inputs(n=n, L=1 / math.sqrt(n), Lbar=1.0, psi_alpha=1.0, sigma=1.0, p=3))
        assert e - math.sqrt(4 / n) == pytest.approx(1.0, abs=1e-12)

    def test_psi_to_zero(self):
        vals = [epsilon2(inputs(psi_alpha=s)) - math.sqrt(0.11) for s in (1.0, 1e-3, 1e-6, 1e-12)]
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 1e-3

    def test_literal_form(self):
        i = inputs(n=50, p=4, delta=0.1, alpha=4.0, sigma=0.7, psi_alpha=2.0, L=0.3, Lbar=0.8)
        scale = math.sqrt(50) * 0.3
        expect = scale * (0.8 * 2.0 * math.log(60.0)) ** 0.25 + scale * 0.7 * math.sqrt(5 / 50)
        assert epsilon2(i) == pytest.approx(expect, rel=1e-14)


class TestEpsilon3:
    def test_branch_boundary(self):
        a = epsilon3(unit_inputs(n=1, L=0.7, alpha=3.0))
        b = epsilon3(unit_inputs(n=1, L=0.7, alpha=9.0))
        assert a.value == pytest.approx(0.7, abs=1e-15)
        assert b.value == pytest.approx(0.7, abs=1e-15)

    def test_arithmetic(self):
        t = epsilon3(unit_inputs(n=100, L=0.1))
        assert t.value == pytest.approx(0.01, abs=1e-15)
        assert t.branch == "small-t"

    def test_large_t_branch(self):
        i = inputs(n=2, L=1.0, delta=0.01, alpha=4.0)
        t = epsilon3(i)
        assert t.branch == "large-t"
        assert t.value == pytest.approx(math.sqrt(2) * (math.log(300.0) / 2) ** 0.5)

    def test_c4_in_both_places(self):
        consts = RadiusConstants(c3=1.0, c4=2.0)
        t = epsilon3(inputs(n=3, L=1.0, delta=0.01, constants=consts))
        # threshold ln(300)/2 > 2.85, so n=3 still takes the small-t branch
        assert t.branch == "small-t"
        assert t.value == pytest.approx(math.sqrt(3) * math.log(300.0) / 6.0)


class TestRadius:
    def test_sum_of_parts(self):
        i = unit_inputs(n=100, k=16, p=2, L=0.1)
        b = theoretical_radius(i)
        assert b.epsilon == pytest.approx(b.eps1 + b.eps2 + b.eps3, abs=0)
        assert b.eps1 == pytest.approx(0.25)
        assert b.eps3 == pytest.approx(0.01)

    def test_strictly_decreasing_in_k(self):
        vals = [theoretical_radius(inputs(k=k)).epsilon for k in (1, 5, 30, 300, 3000)]
        assert np.all(np.diff(vals) < 0)

    def test_non_increasing_in_n(self):
        vals = [theoretical_radius(inputs(n=n, L=1 / math.sqrt(n))).epsilon for n in (20, 50, 100, 1000, 10**5)]
        assert np.all(np.diff(vals) <= 0)

    def test_increasing_as_delta_shrinks(self):
        vals = [theoretical_radius(inputs(delta=d)).epsilon for d in (0.5, 0.2, 0.05, 0.01, 1e-4)]
        assert np.all(np.diff(vals) > 0)

    def test_shrinks_on_doubling_grid(self):
        sizes = [2**j for j in range(4, 21)]
        # Lbar is a 1/sqrt(n) multiple of a norm bounded by sqrt(2) for any design
        vals = [theoretical_radius(inputs(n=s, k=s, p=2, L=s**-0.5, Lbar=s**-0.5)).epsilon for s in sizes]
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 0.1 * vals[0]

    def test_as_dict(self):
        d = theoretical_radius(inputs()).as_dict()
        assert set(d) == {"epsilon", "eps1", "eps2", "eps3", "eps1_branch", "eps3_branch"}


class TestInputsValidation:
    @pytest.mark.parametrize(
        "kw",
        [dict(delta=0.0), dict(delta=1.0), dict(alpha=2.0), dict(n=0), dict(sigma=0.0), dict(L=-1.0), dict(Lbar=math.inf)],
    )
    def test_rejects(self, kw):
        with pytest.raises(InvalidInputs):
            inputs(**kw)

    def test_constants_positive(self):
        with pytest.raises(InvalidInputs):
            RadiusConstants(c3=0.0)


class TestAmbiguitySet:
    center = EmpiricalDistribution(np.eye(3))

    def test_tuned_zero(self):
        amb = make_ambiguity_set(self.center, "tuned", 0.0)
        assert amb.radius == 0.0 and amb.q == 1 and amb.mode == "tuned"

    def test_tuned_sweep_top(self):
        assert make_ambiguity_set(self.center, "tuned", 0.05).radius == 0.05

    def test_theoretical_delegates(self):
        i = inputs()
        amb = make_ambiguity_set(self.center, "theoretical", i)
        assert amb.radius == theoretical_radius(i).epsilon
        assert amb.breakdown == theoretical_radius(i)

    def test_negative(self):
        with pytest.raises(NegativeRadius):
            make_ambiguity_set(self.center, "tuned", -0.1)
        with pytest.raises(NegativeRadius):
            AmbiguitySet(self.center, -1.0)

    def test_bad_mode(self):
        with pytest.raises(InvalidInputs):
            make_ambiguity_set(self.center, "magic", 0.1)
        with pytest.raises(InvalidInputs):
            make_ambiguity_set(self.center, "theoretical", 0.1)

    def test_only_order_one(self):
        with pytest.raises(InvalidInputs):
            AmbiguitySet(self.center, 0.1, q=2)

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drboot.bootstrap import (
    EmpiricalDistribution,
    bootstrap_ensemble,
    center_residuals,
    child_seed,
    ensemble_to_distribution,
    load_ensemble_atoms,
    resample,
    save_ensemble,
)
from drboot.errors import InvalidInputs
from drboot.regression import NoiseSpec, RegressionDataset, generate_synthetic, ols_fit


def test_center_residuals_simple():
    np.testing.assert_allclose(center_residuals([1.0, 2.0, 3.0]).values, [-1.0, 0.0, 1.0])


def test_center_residuals_constant():
    np.testing.assert_array_equal(center_residuals([4.2] * 5).values, np.zeros(5))


def test_center_residuals_on_fit():
    fit = ols_fit(generate_synthetic(100, 10, np.ones(10), NoiseSpec(), 42))
    atoms = center_residuals(fit.residuals_hat).values
    assert abs(atoms.sum()) <= 1e-12 * atoms.size * np.abs(fit.residuals_hat).max()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_centered_mean_is_zero(values):
    atoms = center_residuals(values).values
    scale = max(1.0, np.abs(values).max())
    assert abs(atoms.mean()) <= 1e-12 * scale


class TestResample:
    def test_single_atom(self):
        draws = resample(EmpiricalDistribution([3.5]), 100, 0)
        assert np.all(draws == 3.5)

    def test_frequencies(self):
        dist = EmpiricalDistribution([0.0, 1.0, 2.0, 3.0])
        m = 1_000_000
        draws = resample(dist, m, np.random.default_rng(8))
        freq = np.bincount(draws.astype(int), minlength=4) / m
        se = np.sqrt(0.25 * 0.75 / m)
        assert np.all(np.abs(freq - 0.25) <= 3 * se)

    def test_same_seed_same_draws(self):
        dist = EmpiricalDistribution(np.arange(10.0))
        np.testing.assert_array_equal(resample(dist, 50, 17), resample(dist, 50, 17))

    def test_vector_atoms(self):
        dist = EmpiricalDistribution(np.arange(12.0).reshape(4, 3))
        assert resample(dist, 7, 0).shape == (7, 3)


@pytest.fixture(scope="module")
def setup():
    data = generate_synthetic(40, 3, [1.0, 0.0, -1.0], NoiseSpec(), 11)
    return data, ols_fit(data)


class TestEnsemble:
    def test_zero_residuals(self):
        X = np.random.default_rng(0).standard_normal((10, 2))
        fit = ols_fit(RegressionDataset(X=X, y=X @ np.array([1.0, 2.0])))
        fit = type(fit)(**{**fit.__dict__, "residuals_hat": np.zeros(10)})
        ens = bootstrap_ensemble(fit, X, 5, 1)
        assert np.all(ens.beta_stars == fit.beta_hat)

    def test_shortcut_matches_refit(self, setup):
        data, fit = setup
        ens = bootstrap_ensemble(fit, data.X, 25, 3, keep_resamples=True)
        for b, e in zip(ens.beta_stars, ens.resamples):
            y_star = data.X @ fit.beta_hat + e
            long_route = ols_fit(RegressionDataset(X=data.X, y=y_star)).beta_hat
            np.testing.assert_allclose(b, long_route, atol=1e-10)
            np.testing.assert_allclose(b - fit.beta_hat, fit.pseudoinverse_map @ e, atol=1e-10)

    def test_resamples_come_from_centered_residuals(self, setup):
        data, fit = setup
        ens = bootstrap_ensemble(fit, data.X, 4, 5, keep_resamples=True)
        atoms = set(np.round(center_residuals(fit.residuals_hat).values, 12))
        assert set(np.round(ens.resamples.ravel(), 12)) <= atoms

    def test_conditional_unbiasedness(self, setup):
        data, fit = setup
        k = 100_000
        ens = bootstrap_ensemble(fit, data.X, k, 21)
        se = ens.beta_stars.std(axis=0, ddof=1) / np.sqrt(k)
        assert np.all(np.abs(ens.beta_stars.mean(axis=0) - fit.beta_hat) <= 3 * se)

    def test_replicates_do_not_depend_on_k(self, setup):
        data, fit = setup
        small = bootstrap_ensemble(fit, data.X, 5, child_seed(9, 1, 2))
        large = bootstrap_ensemble(fit, data.X, 50, child_seed(9, 1, 2))
        # same draws; only BLAS blocking may differ in the last bits
        np.testing.assert_allclose(small.beta_stars, large.beta_stars[:5], rtol=0, atol=1e-13)

    def test_default_ensemble_shape(self, pinned_data, pinned_fit):
        ens = bootstrap_ensemble(pinned_fit, pinned_data.X, 30, 0)
        assert ens.beta_stars.shape == (30, 10)

    def test_to_distribution(self, setup):
        data, fit = setup
        ens = bootstrap_ensemble(fit, data.X, 1, 0)
        dist = ensemble_to_distribution(ens)
        assert dist.size == 1 and dist.dim == 3
        np.testing.assert_array_equal(dist.atoms[0], ens.beta_stars[0])
        ens = bootstrap_ensemble(fit, data.X, 12, 0)
        assert ensemble_to_distribution(ens).size == 12

    def test_invalid_k(self, setup):
        data, fit = setup
        with pytest.raises(InvalidInputs):
            bootstrap_ensemble(fit, data.X, 0, 0)

    def test_serialization(self, setup, tmp_path):
        data, fit = setup
        ens = bootstrap_ensemble(fit, data.X, 6, 4)
        save_ensemble(ens, tmp_path / "e", dataset_hash=data.digest())
        np.testing.assert_array_equal(load_ensemble_atoms(tmp_path / "e"), ens.beta_stars)
        meta = json.loads((tmp_path / "e.json").read_text())
        assert meta["k"] == 6 and meta["seed"] == 4 and meta["dataset_sha256_16"] == data.digest()


def test_empirical_distribution_rejects_empty():
    with pytest.raises(InvalidInputs):
        EmpiricalDistribution(np.zeros((0, 2)))

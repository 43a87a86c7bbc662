import numpy as np
import pytest

from qtomo.model import (DegenerateParameters, ModelConfig, PseudoLikelihood,
                         StateParams, factored_form, log_pseudo_likelihood,
                         loss_prob, prior_sample, rho_from_params)
from qtomo.qcore import born_probabilities, validate_density_matrix


def params(y, z):
    return StateParams(y=np.asarray(y, float), z=np.asarray(z, complex))


class TestStateParams:
    def test_rejects_nonpositive_weights(self):
        with pytest.raises(DegenerateParameters):
            params([1.0, 0.0], np.eye(2))
        with pytest.raises(DegenerateParameters):
            params([1.0, -2.0], np.eye(2))

    def test_rejects_zero_vector(self):
        with pytest.raises(DegenerateParameters):
            params([1.0, 1.0], [[1, 0], [0, 0]])

    def test_rejects_bad_shapes(self):
        with pytest.raises(DegenerateParameters):
            params([1.0, 1.0, 1.0], np.eye(2))

    def test_arrays_frozen(self):
        x = prior_sample(3, 1.0, seed=0)
        with pytest.raises(ValueError):
            x.y[0] = 2.0


class TestModelConfig:
    def test_alpha_range(self):
        with pytest.raises(ValueError):
            ModelConfig(lam=1.0, alpha=0.0)
        with pytest.raises(ValueError):
            ModelConfig(lam=1.0, alpha=1.5)
        with pytest.warns(UserWarning):
            ModelConfig(lam=1.0, alpha=1.5, allow_large_alpha=True)

    def test_lam_nonnegative(self):
        ModelConfig(lam=0.0)  # prior-only diagnostics are allowed
        with pytest.raises(ValueError):
            ModelConfig(lam=-1.0)


class TestRhoFromParams:
    def test_diagonal_equal_weights(self):
        rho = rho_from_params(params([1.0, 1.0], np.eye(2)))
        np.testing.assert_allclose(rho, np.diag([0.5, 0.5]), atol=1e-15)

    def test_diagonal_unequal_weights(self):
        rho = rho_from_params(params([2.0, 1.0], np.eye(2)))
        np.testing.assert_allclose(rho, np.diag([2 / 3, 1 / 3]), atol=1e-15)

    def test_random_draws_are_physical(self):
        for seed in range(50):
            rho = rho_from_params(prior_sample(8, 0.5, seed))
            assert np.array_equal(rho, rho.conj().T)  # hermitized exactly
            assert abs(np.trace(rho).real - 1.0) < 1e-12
            assert np.linalg.eigvalsh(rho)[0] >= -1e-12

    def test_scale_invariance(self, rng):
        x = prior_sample(4, 1.0, rng)
        rho = rho_from_params(x)
        scales = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x2 = params(x.y * 17.3, x.z * scales[:, None])
        np.testing.assert_allclose(rho_from_params(x2), rho, atol=1e-12)


class TestPriorSample:
    def test_exponential_mean_alpha_one(self):
        y = np.concatenate([prior_sample(100, 1.0, s).y for s in range(1000)])
        assert abs(y.mean() - 1.0) < 3 / np.sqrt(y.size)

    def test_dirichlet_weight_means(self):
        d = 5
        gammas = np.stack([prior_sample(d, 0.5, s).factored()[0]
                           for s in range(4000)])
        se = gammas.std(axis=0, ddof=1) / np.sqrt(len(gammas))
        assert np.all(np.abs(gammas.mean(axis=0) - 1 / d) < 3 * se)

    def test_unit_complex_variance(self):
        z = np.concatenate([prior_sample(10, 1.0, s).z.ravel()
                            for s in range(100)])
        second_moment = np.mean(np.abs(z) ** 2)
        assert abs(second_moment - 1.0) < 3 / np.sqrt(z.size)

    def test_deterministic(self):
        a = prior_sample(4, 0.8, seed=123)
        b = prior_sample(4, 0.8, seed=123)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.z, b.z)


class TestLossProb:
    def test_zero_on_equal(self, rng):
        p = rng.random((9, 4))
        p /= p.sum(axis=1, keepdims=True)
        assert loss_prob(p, p) == 0.0

    def test_single_cell_delta(self):
        p = np.full((3, 2), 0.5)
        q = p.copy()
        q[1, 0] += 1e-3
        assert loss_prob(p, q) == pytest.approx(1e-6, rel=1e-12)

    def test_hand_computed_value(self):
        p_nu = np.full((3, 2), 0.5)
        p_hat = np.tile([0.7, 0.3], (3, 1))
        assert loss_prob(p_nu, p_hat) == pytest.approx(0.24, abs=1e-14)

    def test_symmetry_and_root_triangle(self, rng):
        tables = rng.random((3, 9, 4))
        a, b, c = tables
        assert loss_prob(a, b) == loss_prob(b, a)
        assert (np.sqrt(loss_prob(a, c))
                <= np.sqrt(loss_prob(a, b)) + np.sqrt(loss_prob(b, c)) + 1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            loss_prob(np.zeros((9, 4)), np.zeros((3, 2)))


class TestLogPseudoLikelihood:
    def test_zero_lambda(self):
        x = prior_sample(4, 1.0, seed=2)
        p_hat = np.full((9, 4), 0.25)
        assert log_pseudo_likelihood(x, p_hat, ModelConfig(lam=0.0)) == 0.0

    def test_perfect_fit(self):
        x = prior_sample(2, 1.0, seed=3)
        p_hat = born_probabilities(rho_from_params(x))
        val = log_pseudo_likelihood(x, p_hat, ModelConfig(lam=123.0))
        assert abs(val) < 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dense_path(self, seed, rng):
        # factored evaluation against the dense Born oracle
        x = prior_sample(4, 1.0, seed)
        p_hat = np.asarray(rng.dirichlet(np.ones(4), size=9))
        cfg = ModelConfig(lam=77.0)
        dense = -cfg.lam * loss_prob(born_probabilities(rho_from_params(x)), p_hat)
        assert log_pseudo_likelihood(x, p_hat, cfg) == pytest.approx(dense, abs=1e-10)

    def test_evaluator_counts_calls(self):
        x = prior_sample(2, 1.0, seed=1)
        gamma, vhat = x.factored()
        ev = PseudoLikelihood(np.full((3, 2), 0.5), ModelConfig(lam=1.0))
        for expected in (1, 2, 3):
            ev.loss(gamma, vhat)
            assert ev.n_evals == expected


class TestFactoredForm:
    def test_unit_rows_and_simplex(self, rng):
        x = prior_sample(6, 1.0, rng)
        gamma, vhat = factored_form(x.y, x.z)
        np.testing.assert_allclose(np.linalg.norm(vhat, axis=1), 1.0, atol=1e-12)
        assert gamma.sum() == pytest.approx(1.0, abs=1e-12)
        assert (gamma > 0).all()

    def test_rho_is_density_matrix(self, rng):
        x = prior_sample(5, 0.9, rng)
        validate_density_matrix(rho_from_params(x))

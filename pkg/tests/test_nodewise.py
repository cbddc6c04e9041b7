import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (kkt_violation, lasso_objective, lasso_projected_gradient,
                     population_betas, residuals_loop)
from precdiff.errors import ConvergenceError, DegenerateColumnError, InvalidArgumentError
from precdiff.models import DataMatrix, build_base_precision, precision_to_covariance, sample_gaussian
from precdiff.nodewise import (center_and_scale, coefficient_matrix, compute_residuals,
                               default_lambda, fit_node_lasso, fit_nodewise, lasso,
                               slot_coefficients)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestCenterAndScale:
    def test_mean_removal_only(self):
        z, s = center_and_scale(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]), standardize=False)
        np.testing.assert_array_equal(z[:, 0], [-1, 0, 1])
        np.testing.assert_array_equal(s, [1, 1])

    def test_constant_column_rejected(self):
        with pytest.raises(DegenerateColumnError) as exc:
            center_and_scale(np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 4.0]]))
        assert exc.value.index == 0

    def test_divisor_n_scale(self):
        z, s = center_and_scale(np.array([[0.0, 1.0], [2.0, 3.0]]))
        np.testing.assert_allclose(z[:, 0], [-1, 1])
        assert s[0] == pytest.approx(1.0)

    def test_data_matrix_passthrough(self):
        dm = DataMatrix(rng().standard_normal((5, 3)), group_label=2, names=("a", "b", "c"))
        out, _ = center_and_scale(dm)
        assert isinstance(out, DataMatrix) and out.names == ("a", "b", "c")


class TestDefaultLambda:
    def test_value(self):
        x = np.ones((200, 100))  # second moment 1
        assert default_lambda(x, 0) == pytest.approx(2 * np.sqrt(np.log(100) / 200), rel=1e-14)
        assert default_lambda(x, 0) == pytest.approx(0.30348, abs=1e-5)

    def test_kappa_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            default_lambda(np.ones((4, 3)), 0, kappa=0)

    def test_homogeneity(self):
        x = np.ones((50, 10))
        assert default_lambda(2 * x, 3) == pytest.approx(2 * default_lambda(x, 3), rel=1e-14)


class TestLasso:
    def test_univariate_soft_threshold(self):
        x = np.array([[1.0], [-1.0]])
        y = np.array([1.0, -1.0])
        assert lasso(x, y, 0.3)[0] == pytest.approx(0.7, abs=1e-12)

    def test_null_threshold(self):
        x = rng(1).standard_normal((20, 5))
        y = rng(2).standard_normal(20)
        lam = np.max(np.abs(x.T @ y / 20))
        np.testing.assert_array_equal(lasso(x, y, lam), 0.0)

    def test_matches_slow_oracle(self):
        x = rng(3).standard_normal((20, 5))
        y = x @ np.array([1.0, 0, -0.5, 0, 0.2]) + 0.3 * rng(4).standard_normal(20)
        lam = 0.1
        beta = lasso(x, y, lam, tol=1e-12)
        ref = lasso_projected_gradient(x, y, lam)
        assert lasso_objective(x, y, beta, lam) <= lasso_objective(x, y, ref, lam) + 1e-6
        assert abs(lasso_objective(x, y, beta, lam) - lasso_objective(x, y, ref, lam)) <= 1e-6
        assert kkt_violation(x, y, beta, lam) <= 1e-6

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(InvalidArgumentError):
            lasso(np.eye(3), np.ones(3), 0.0)

    def test_budget_exhaustion(self):
        x = rng(5).standard_normal((30, 10))
        x[:, 1] = x[:, 0] + 1e-3 * x[:, 1]  # nearly collinear: slow convergence
        y = x[:, 0] + x[:, 1]
        with pytest.raises(ConvergenceError) as exc:
            lasso(x, y, 1e-4, tol=1e-14, max_sweeps=2)
        assert exc.value.gap > 0

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 12), frac=st.floats(0.02, 0.9))
    def test_kkt_property(self, seed, p, frac):
        g = rng(seed)
        x = g.standard_normal((25, p))
        y = g.standard_normal(25)
        lam = frac * np.max(np.abs(x.T @ y / 25))
        beta = lasso(x, y, lam)
        assert kkt_violation(x, y, beta, lam) <= 1e-6


class TestCoefficientLayout:
    def test_slot_order(self):
        betas = np.arange(6.0).reshape(3, 2)
        full = coefficient_matrix(betas)
        # row 0 predictors (1, 2); row 1 predictors (0, 2); row 2 predictors (0, 1)
        np.testing.assert_array_equal(full, [[0, 0, 1], [2, 0, 3], [4, 5, 0]])
        np.testing.assert_array_equal(slot_coefficients(full), betas)

    def test_shape_checked(self):
        with pytest.raises(InvalidArgumentError):
            coefficient_matrix(np.zeros((3, 3)))


class TestResiduals:
    def test_zero_betas_give_centered_data(self):
        x = rng(0).standard_normal((6, 3))
        np.testing.assert_allclose(compute_residuals(x, np.zeros((3, 2))), x - x.mean(axis=0))

    def test_perfect_fit(self):
        x1 = rng(1).standard_normal(10)
        x = np.column_stack([x1, 2 * x1])
        res = compute_residuals(x, np.array([[0.5], [2.0]]))
        np.testing.assert_allclose(res, 0.0, atol=1e-14)

    def test_hand_built_against_loop(self):
        x = np.array([[1.0, 2.0, 0.5], [0.0, -1.0, 1.5], [2.0, 0.0, -0.5], [1.0, 3.0, 2.5]])
        betas = np.array([[0.3, -0.2], [1.1, 0.4], [-0.6, 0.25]])
        np.testing.assert_allclose(compute_residuals(x, betas), residuals_loop(x, betas), rtol=1e-13)

    def test_non_finite_betas(self):
        with pytest.raises(InvalidArgumentError):
            compute_residuals(np.eye(3), np.full((3, 2), np.nan))


def _model_data(d, n, seed):
    om = build_base_precision("model1", d, rng(seed)).omega
    return om, sample_gaussian(n, precision_to_covariance(om), rng(seed + 100)).values


class TestFitNodewise:
    def test_invariants(self):
        _, x = _model_data(20, 80, 0)
        fit = fit_nodewise(x)
        np.testing.assert_allclose(fit.residuals.mean(axis=0), 0.0, atol=1e-10)
        assert np.all(fit.lambdas > 0)
        assert np.all(np.isfinite(fit.betas))
        assert fit.betas.shape == (20, 19) and (fit.n, fit.d) == (80, 20)

    @pytest.mark.parametrize("standardize", [True, False])
    def test_kkt_on_fitting_scale(self, standardize):
        _, x = _model_data(15, 60, 1)
        fit = fit_nodewise(x, standardize=standardize)
        z, scales = center_and_scale(x, standardize)
        full = coefficient_matrix(fit.betas) * scales[None, :] / scales[:, None]
        for i in range(15):
            keep = np.arange(15) != i
            assert kkt_violation(z[:, keep], z[:, i], full[i, keep], fit.lambdas[i]) <= 1e-6

    def test_single_node_matches_full_fit(self):
        _, x = _model_data(10, 50, 2)
        z, _ = center_and_scale(x, standardize=False)
        fit = fit_nodewise(x, standardize=False, lambdas=0.1)
        np.testing.assert_allclose(fit_node_lasso(z, 4, 0.1), fit.betas[4], atol=1e-12)

    def test_explicit_lambdas(self):
        _, x = _model_data(6, 40, 3)
        fit = fit_nodewise(x, lambdas=np.full(6, 10.0))
        np.testing.assert_array_equal(fit.betas, 0.0)
        with pytest.raises(InvalidArgumentError):
            fit_nodewise(x, lambdas=0.0)

    def test_error_decreases_with_n(self):
        d = 30
        om = build_base_precision("model1", d, rng(11)).omega
        sigma = precision_to_covariance(om)
        truth = population_betas(om)
        errs = []
        for n in (400, 1600):
            x = sample_gaussian(n, sigma, rng(12)).values
            errs.append(np.max(np.abs(fit_nodewise(x).betas - truth).sum(axis=1)))
        assert errs[1] < errs[0]

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandit_bo.errors import InvalidInputError, NumericalFailureError
from bandit_bo.gp import (
    FitGrid,
    KernelParams,
    TrainingSet,
    build_state,
    cholesky_with_jitter,
    fit_hyperparameters,
    gram_matrix,
    kernel_eval,
    log_marginal_likelihood,
    posterior,
)

# frozen with mpmath at 30 digits
EXP_M_HALF = 0.606530659712633423
TWO_EXP_M2 = 0.270670566473225384
HALF_LOG_2PI = 0.918938533204672742


def dense_posterior(X, y, Q, p):
    """Textbook formulas with a plain dense solve; shares no code with gp.py."""

    def k(a, b):
        return p.signal_variance * np.exp(-np.sum((a - b) ** 2) / (2 * p.length_scale**2))

    K = np.array([[k(a, b) for b in X] for a in X]) + p.noise_variance * np.eye(len(X))
    Ks = np.array([[k(a, q) for q in Q] for a in X])
    Kss = np.array([[k(a, b) for b in Q] for a in Q])
    mean = Ks.T @ np.linalg.solve(K, y)
    cov = Kss - Ks.T @ np.linalg.solve(K, Ks)
    return mean, cov


class TestKernel:
    def test_zero_distance(self):
        assert kernel_eval([0.3, 0.7], [0.3, 0.7], KernelParams(1.0, 1.0)) == 1.0

    @pytest.mark.parametrize(
        "sv, ls, expected", [(1.0, 1.0, EXP_M_HALF), (2.0, 0.5, TWO_EXP_M2)]
    )
    def test_unit_distance(self, sv, ls, expected):
        assert kernel_eval([0.0], [1.0], KernelParams(sv, ls)) == pytest.approx(expected, abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            kernel_eval([np.nan], [0.0], KernelParams())

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            kernel_eval([0.0, 1.0], [0.0], KernelParams())

    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.floats(0.01, 10),
    )
    def test_symmetric_exactly(self, a, b, ls):
        p = KernelParams(1.3, ls)
        assert kernel_eval(a, b, p) == kernel_eval(b, a, p)

    def test_bad_params(self):
        with pytest.raises(InvalidInputError):
            KernelParams(0.0, 1.0)
        with pytest.raises(InvalidInputError):
            KernelParams(1.0, 1.0, -1e-3)
        with pytest.raises(InvalidInputError):
            KernelParams(np.inf, 1.0)


class TestGram:
    def test_single_point(self):
        np.testing.assert_array_equal(gram_matrix([[0.2, 0.4]], KernelParams(2.5, 0.3)), [[2.5]])

    def test_identical_points(self):
        np.testing.assert_array_equal(gram_matrix([[0.5], [0.5]], KernelParams(1.0, 1.0)), np.ones((2, 2)))

    def test_two_points(self):
        G = gram_matrix([[0.0], [1.0]], KernelParams(1.0, 1.0, 0.5))
        np.testing.assert_allclose(G, [[1, EXP_M_HALF], [EXP_M_HALF, 1]], atol=1e-12)

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            gram_matrix(np.zeros((0, 2)), KernelParams())


class TestCholesky:
    def test_identity(self):
        L, j = cholesky_with_jitter(np.eye(3))
        np.testing.assert_array_equal(L, np.eye(3))
        assert j == 0.0

    def test_hand_2x2(self):
        L, j = cholesky_with_jitter(np.array([[4.0, 2.0], [2.0, 5.0]]))
        np.testing.assert_allclose(L, [[2, 0], [1, 2]], atol=1e-14)
        assert j == 0.0

    def test_singular_gets_diagonal_jitter(self):
        A = np.ones((2, 2))
        L, j = cholesky_with_jitter(A)
        assert 0 < j <= 1e-4 * np.trace(A) / 2
        diff = L @ L.T - A
        np.testing.assert_allclose(diff - np.diag(np.diag(diff)), 0, atol=1e-12)
        np.testing.assert_allclose(np.diag(diff), j, rtol=1e-6)

    def test_failure_carries_diagnostics(self):
        A = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(NumericalFailureError) as info:
            cholesky_with_jitter(A)
        assert info.value.diagnostics["min_eigenvalue"] == pytest.approx(-1.0)

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInputError):
            cholesky_with_jitter(np.array([[1.0, 0.5], [0.0, 1.0]]))


def _state(X, y, p):
    return build_state(TrainingSet(np.asarray(X, float), np.asarray(y, float)), p)


class TestPosterior:
    def test_prior(self):
        st0 = _state(np.zeros((0, 1)), [], KernelParams(1.0, 1.0))
        post = posterior(st0, [[0.4]])
        assert post.mean[0] == 0.0 and post.covariance[0, 0] == 1.0

    def test_one_observation_closed_form(self):
        post = posterior(_state([[0.0]], [1.0], KernelParams(1.0, 1.0, 0.01)), [[1.0]])
        assert post.mean[0] == pytest.approx(0.600525405656072697, abs=1e-12)
        assert post.covariance[0, 0] == pytest.approx(0.635762929533225424, abs=1e-12)

    def test_interpolates_at_tiny_noise(self):
        post = posterior(_state([[0.3, 0.6]], [0.8], KernelParams(1.0, 0.5, 1e-8)), [[0.3, 0.6]])
        assert abs(post.mean[0] - 0.8) < 1e-6
        assert post.covariance[0, 0] <= 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            posterior(_state([[0.1, 0.2]], [1.0], KernelParams()), [[0.1]])

    def test_state_factor_reconstructs(self):
        rng = np.random.default_rng(3)
        X = rng.random((12, 3))
        p = KernelParams(1.5, 0.4, 1e-3)
        s = _state(X, rng.standard_normal(12), p)
        A = gram_matrix(X, p) + p.noise_variance * np.eye(12)
        assert np.max(np.abs(s.chol @ s.chol.T - A)) / np.max(np.abs(A)) < 1e-8

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n, d, q = rng.integers(1, 21), rng.integers(1, 6), rng.integers(1, 8)
        p = KernelParams(rng.uniform(0.1, 3), rng.uniform(0.2, 2), rng.uniform(1e-3, 1e-1))
        X, y, Q = rng.random((n, d)), rng.standard_normal(n), rng.random((q, d))
        post = posterior(_state(X, y, p), Q)
        mean, cov = dense_posterior(X, y, Q, p)
        np.testing.assert_allclose(post.mean, mean, atol=1e-8)
        np.testing.assert_allclose(post.covariance, cov, atol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_psd_and_variance_reduction(self, seed):
        rng = np.random.default_rng(seed)
        n, d = rng.integers(1, 15), rng.integers(1, 4)
        p = KernelParams(rng.uniform(0.1, 3), rng.uniform(0.05, 2), 1e-4)
        X = rng.random((n, d))
        s = _state(X, rng.standard_normal(n), p)
        post = posterior(s, np.vstack([X, rng.random((6, d))]))
        assert np.max(np.abs(post.covariance - post.covariance.T)) <= 1e-10
        assert np.linalg.eigvalsh(post.covariance).min() >= -1e-8
        assert np.all(np.diag(post.covariance) >= 0)
        assert np.all(np.diag(post.covariance)[:n] <= p.signal_variance + 1e-10)


class TestMarginalLikelihood:
    def test_single_zero(self):
        t = TrainingSet(np.array([[0.5]]), np.array([0.0]))
        assert log_marginal_likelihood(t, KernelParams(1.0, 1.0, 0.0)) == pytest.approx(-HALF_LOG_2PI, abs=1e-12)

    def test_single_one(self):
        t = TrainingSet(np.array([[0.5]]), np.array([1.0]))
        assert log_marginal_likelihood(t, KernelParams(1.0, 1.0, 0.0)) == pytest.approx(-0.5 - HALF_LOG_2PI, abs=1e-12)

    def test_doubling_targets_decreases(self):
        rng = np.random.default_rng(0)
        X, y = rng.random((6, 2)), rng.standard_normal(6)
        p = KernelParams(1.0, 0.3, 1e-2)
        assert log_marginal_likelihood(TrainingSet(X, 2 * y), p) < log_marginal_likelihood(TrainingSet(X, y), p)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_direct_determinant(self, seed):
        rng = np.random.default_rng(seed)
        n, d = rng.integers(1, 11), rng.integers(1, 4)
        X, y = rng.random((n, d)), rng.standard_normal(n)
        p = KernelParams(rng.uniform(0.5, 2), rng.uniform(0.2, 1), 0.05)
        K = np.array([[p.signal_variance * np.exp(-np.sum((a - b) ** 2) / (2 * p.length_scale**2)) for b in X] for a in X])
        K += p.noise_variance * np.eye(n)
        direct = -0.5 * y @ np.linalg.inv(K) @ y - 0.5 * np.log(np.linalg.det(K)) - 0.5 * n * np.log(2 * np.pi)
        assert log_marginal_likelihood(TrainingSet(X, y), p) == pytest.approx(direct, abs=1e-8)

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            log_marginal_likelihood(TrainingSet(np.zeros((0, 1)), np.zeros(0)), KernelParams())


class TestFit:
    def test_single_point_returns_default(self):
        grid = FitGrid()
        t = TrainingSet(np.array([[0.5]]), np.array([0.0]))
        assert fit_hyperparameters(t, grid) == grid.default

    def test_constant_targets(self):
        t = TrainingSet.from_raw(np.random.default_rng(1).random((5, 2)), np.full(5, 3.0))
        np.testing.assert_array_equal(t.targets, 0.0)
        assert t.raw_std == 1.0
        grid = FitGrid()
        p = fit_hyperparameters(t, grid)
        assert p.length_scale == max(grid.length_scales)
        assert p.signal_variance == min(grid.signal_variances)

    def test_grid_choice_matches_exhaustive_recomputation(self):
        rng = np.random.default_rng(11)
        X = rng.random((25, 1))
        true = KernelParams(1.0, 0.3, 1e-4)
        K = gram_matrix(X, true) + 1e-4 * np.eye(25)
        y = np.linalg.cholesky(K) @ rng.standard_normal(25)
        t = TrainingSet.from_raw(X, y)
        grid = FitGrid()
        chosen = fit_hyperparameters(t, grid)
        # oracle: recompute every cell with a dense determinant
        scores = {}
        for ls in grid.length_scales:
            for sv in grid.signal_variances:
                p = KernelParams(sv, ls, grid.noise_variance)
                A = gram_matrix(X, p) + grid.noise_variance * np.eye(25)
                sign, logdet = np.linalg.slogdet(A)
                scores[(ls, sv)] = -0.5 * t.targets @ np.linalg.solve(A, t.targets) - 0.5 * logdet
        best_ls, _ = max(scores, key=scores.get)
        ls_list = list(grid.length_scales)
        assert abs(ls_list.index(chosen.length_scale) - ls_list.index(best_ls)) <= 1
        # and the generating length-scale is within one grid step
        nearest = int(np.argmin(np.abs(np.log(ls_list) - np.log(0.3))))
        assert abs(ls_list.index(chosen.length_scale) - nearest) <= 1


class TestTrainingSet:
    def test_rejects_outside_cube(self):
        with pytest.raises(InvalidInputError):
            TrainingSet(np.array([[1.5]]), np.array([0.0]))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            TrainingSet(np.array([[0.5]]), np.array([0.0, 1.0]))

    def test_standardization_roundtrip(self):
        y = np.array([1.0, 4.0, -2.0])
        t = TrainingSet.from_raw(np.array([[0.1], [0.5], [0.9]]), y)
        np.testing.assert_allclose(t.targets * t.raw_std + t.raw_mean, y)

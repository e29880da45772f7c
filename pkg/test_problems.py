"""
Tests de los problemas de prueba y de la validación de sus oráculos
"""
import numpy as np
import pytest

from ldadam.errors import ConfigurationError, LinalgError
from ldadam.problems import (
    LogisticProblem,
    MLPProblem,
    QuadraticProblem,
    RosenbrockProblem,
    finite_diff_check,
    flatten,
    random_spd,
    rayleigh_bounds_check,
    unbiasedness_check,
    unflatten,
)
from ldadam.rng import STREAM_DATA, STREAM_INIT, make_rng


# ==================== FIXTURES ====================#
@pytest.fixture
def logistic():
    return LogisticProblem(n_samples=64, n_features=5, seed=2, batch_size=8)


@pytest.fixture
def mlp():
    return MLPProblem([4, 6, 3], n_samples=32, seed=3, batch_size=8)


# ==================== TESTS: CUADRÁTICA ====================#
@pytest.mark.unit
class TestQuadratic:
    """f(θ) = ½(θ−θ*)ᵀH(θ−θ*)"""

    def test_identity_hessian(self):
        """H = I: f = ½‖u‖² y ∇f = u"""
        problem = QuadraticProblem(np.eye(3), np.zeros(3))
        theta = [np.array([[1.0], [2.0], [-2.0]])]
        assert problem.loss(theta) == pytest.approx(4.5)
        np.testing.assert_array_equal(problem.gradient(theta)[0], theta[0])

    def test_constants_from_spectrum(self):
        """diag(1,100): μ = 1, L = 100, f* = 0"""
        problem = QuadraticProblem(np.diag([1.0, 100.0]), np.zeros(2))
        assert problem.pl_constant == pytest.approx(1.0)
        assert problem.smoothness == pytest.approx(100.0)
        assert problem.f_star == 0.0

    def test_not_positive_definite(self):
        with pytest.raises(ConfigurationError):
            QuadraticProblem(np.diag([1.0, -1.0]), np.zeros(2))

    def test_not_symmetric(self):
        with pytest.raises(ConfigurationError):
            QuadraticProblem(np.array([[2.0, 1.0], [0.0, 2.0]]), np.zeros(2))

    def test_random_spd_condition_number(self):
        H = random_spd(16, 100.0, make_rng(1, STREAM_DATA))
        eigenvalues = np.linalg.eigvalsh(H)
        assert eigenvalues[0] == pytest.approx(1.0, rel=1e-10)
        assert eigenvalues[-1] == pytest.approx(100.0, rel=1e-10)

    def test_finite_differences_exact(self):
        """Diferencias centrales con h=1 son exactas en una cuadrática"""
        problem = QuadraticProblem(np.diag([1.0, 4.0, 9.0]), np.array([1.0, -1.0, 0.5]))
        theta = [np.array([[3.0], [2.0], [-1.0]])]
        assert finite_diff_check(problem, theta, h=1.0) <= 1e-10

    def test_matrix_shapes(self):
        problem = QuadraticProblem(np.eye(6), np.zeros(6), shapes=[(2, 3)])
        assert problem.param_shapes == [(2, 3)]
        assert problem.gradient([np.ones((2, 3))])[0].shape == (2, 3)

    def test_shapes_must_cover_dimension(self):
        with pytest.raises(ConfigurationError):
            QuadraticProblem(np.eye(6), np.zeros(6), shapes=[(2, 2)])

    def test_rayleigh_within_spectrum(self):
        problem = QuadraticProblem(np.diag([1.0, 5.0, 20.0]), np.zeros(3))
        low, high = rayleigh_bounds_check(problem, make_rng(2))
        assert 1.0 - 1e-12 <= low <= high <= 20.0 + 1e-12

    def test_unbiased_noise(self):
        problem = QuadraticProblem(np.eye(8), np.zeros(8), noise_sigma=1.0)
        assert problem.noise_sigma2 == 1.0
        z = unbiasedness_check(problem, [np.ones((8, 1))], make_rng(3), draws=10_000)
        assert z < 4.5

    def test_wrong_param_shape(self):
        problem = QuadraticProblem(np.eye(2), np.zeros(2))
        with pytest.raises(LinalgError):
            problem.gradient([np.zeros((1, 2))])


# ==================== TESTS: ROSENBROCK ====================#
@pytest.mark.unit
class TestRosenbrock:
    """Rosenbrock encadenado por pares"""

    def test_value_at_origin(self):
        problem = RosenbrockProblem(2)
        assert problem.loss([np.zeros((2, 1))]) == 1.0

    def test_minimum(self):
        problem = RosenbrockProblem(4)
        ones = [np.ones((4, 1))]
        assert problem.loss(ones) == 0.0
        np.testing.assert_array_equal(problem.gradient(ones)[0], np.zeros((4, 1)))

    def test_gradient_at_origin(self):
        g = RosenbrockProblem(2).gradient([np.zeros((2, 1))])[0]
        np.testing.assert_array_equal(g.ravel(), [-2.0, 0.0])

    def test_finite_differences(self):
        problem = RosenbrockProblem(4)
        theta = problem.initial_point(make_rng(4, STREAM_INIT))
        assert finite_diff_check(problem, theta, h=1e-6) <= 1e-5

    @pytest.mark.parametrize("d", [1, 3])
    def test_dimension_must_be_even(self, d):
        with pytest.raises(ConfigurationError):
            RosenbrockProblem(d)


# ==================== TESTS: LOGÍSTICA ====================#
@pytest.mark.unit
class TestLogistic:
    """Regresión logística ℓ2 sobre datos sintéticos"""

    def test_full_batch_gradient_is_mean(self, logistic):
        w = make_rng(5).standard_normal(5)
        full = logistic.gradient([w.reshape(-1, 1)])[0].ravel()
        per_sample = [logistic._grad_on(logistic.X[i:i + 1], logistic.y[i:i + 1], w)
                      for i in range(logistic.n_samples)]
        np.testing.assert_allclose(full, np.mean(per_sample, axis=0), rtol=1e-10, atol=1e-14)

    def test_finite_differences(self, logistic):
        theta = [make_rng(6).standard_normal((5, 1))]
        assert finite_diff_check(logistic, theta) <= 1e-5

    def test_constants(self, logistic):
        assert logistic.pl_constant == logistic.reg == 1e-2
        assert logistic.smoothness > logistic.reg

    def test_data_is_deterministic(self):
        a = LogisticProblem(32, 4, seed=9, batch_size=4)
        b = LogisticProblem(32, 4, seed=9, batch_size=4)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
        assert set(np.unique(a.y)) <= {-1.0, 1.0}

    def test_unbiased_minibatches(self, logistic):
        z = unbiasedness_check(logistic, [np.full((5, 1), 0.3)], make_rng(7), draws=10_000)
        assert z < 4.5

    def test_batch_size_range(self):
        with pytest.raises(ConfigurationError):
            LogisticProblem(8, 2, seed=1, batch_size=9)


# ==================== TESTS: MLP ====================#
@pytest.mark.unit
class TestMLP:
    """MLP tanh con maestro de bajo rango"""

    def test_shapes(self, mlp):
        assert mlp.param_shapes == [(4, 6), (6, 3)]
        grads = mlp.gradient(mlp.initial_point(make_rng(1, STREAM_INIT)))
        assert [g.shape for g in grads] == [(4, 6), (6, 3)]

    def test_teacher_is_optimal(self, mlp):
        assert mlp.loss(mlp.teacher) == pytest.approx(0.0, abs=1e-20)

    def test_finite_differences(self, mlp):
        theta = mlp.initial_point(make_rng(2, STREAM_INIT))
        assert finite_diff_check(mlp, theta) <= 1e-4

    def test_three_layers(self):
        problem = MLPProblem([3, 5, 5, 2], n_samples=16, seed=4, batch_size=4)
        theta = problem.initial_point(make_rng(3, STREAM_INIT))
        assert len(theta) == 3
        assert finite_diff_check(problem, theta) <= 1e-4

    def test_invalid_depth(self):
        with pytest.raises(ConfigurationError):
            MLPProblem([3, 2], n_samples=8, seed=1, batch_size=2)


# ==================== TESTS: APLANADO ====================#
@pytest.mark.unit
class TestFlatten:
    """Conversión entre listas de matrices y vectores"""

    def test_unflatten_inverts_flatten(self):
        params = [np.arange(6.0).reshape(2, 3), np.arange(3.0).reshape(3, 1)]
        restored = unflatten(flatten(params), [(2, 3), (3, 1)])
        for original, back in zip(params, restored):
            np.testing.assert_array_equal(original, back)

    def test_size_mismatch(self):
        with pytest.raises(LinalgError):
            unflatten(np.zeros(5), [(2, 3)])

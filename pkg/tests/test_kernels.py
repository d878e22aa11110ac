import numpy as np
import pytest
from scipy.stats import norm
from acquisition import score_bald
from errors import NumericalError
from kernels import (DenseKernel, ProjectionMatrix, acquisition_score_acs, euclidean_inner,
                     fisher_kernel, fisher_linreg_inner, fisher_probit_inner, fisher_probit_norm_sq,
                     project, project_gradients)
from models import GaussianPosterior, LinRegModel, ProbitModel


def random_posterior(rng, d, scale=0.5):
  A = scale * rng.standard_normal((d, d))
  return GaussianPosterior(rng.standard_normal(d), A @ A.T + 0.05 * np.eye(d))


def test_dense_kernel_accessors():
  K = np.array([[4.0, 1.0], [1.0, 9.0]])
  kernel = DenseKernel(K)
  assert kernel.pool_size == 2
  assert np.array_equal(kernel.norms(), [2.0, 3.0])
  assert np.array_equal(kernel.row_sums(), [5.0, 10.0])
  assert kernel.inner(0, 1) == 1.0
  with pytest.raises(IndexError):
    kernel.inner(0, 2)
  with pytest.raises(NumericalError):
    DenseKernel(np.array([[np.nan]]))


def test_projection_matrix_matches_its_gram():
  values = np.random.default_rng(0).standard_normal((6, 4))
  proj = ProjectionMatrix(values)
  gram = values @ values.T
  assert np.allclose(proj.matrix(), gram)
  assert np.allclose(proj.row_sums(), gram.sum(axis=1))
  assert np.allclose(proj.norms() ** 2, np.diag(gram))
  assert euclidean_inner(proj, 1, 4) == pytest.approx(gram[1, 4])


def test_linreg_inner_closed_form():
  model = LinRegModel(GaussianPosterior(np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]])), noise_variance=0.5)
  x, z = np.array([1.0, -1.0]), np.array([0.5, 2.0])
  expected = (x @ z) * (x @ model.posterior.covariance @ z) / 0.25
  assert fisher_linreg_inner(model, x, z) == pytest.approx(expected, rel=1e-12)
  assert fisher_kernel(model, np.vstack([x, z])).inner(0, 1) == pytest.approx(expected, rel=1e-12)


def test_linreg_inner_is_zero_for_orthogonal_inputs():
  model = LinRegModel(GaussianPosterior.prior(2), noise_variance=1.0)
  assert fisher_linreg_inner(model, np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_probit_norm_forms_agree():
  rng = np.random.default_rng(4)
  for _ in range(1000):
    d = rng.integers(1, 6)
    model = ProbitModel(random_posterior(rng, d))
    x = rng.standard_normal(d)
    assert fisher_probit_inner(model, x, x) == pytest.approx(fisher_probit_norm_sq(model, x), abs=1e-8)


def test_probit_kernel_is_symmetric_psd():
  rng = np.random.default_rng(8)
  model = ProbitModel(random_posterior(rng, 3))
  K = fisher_kernel(model, rng.standard_normal((25, 3))).matrix()
  assert np.array_equal(K, K.T)
  assert np.linalg.eigvalsh(K).min() > -1e-10


def _mc_check(samples_n, samples_m):
  products = samples_n * samples_m
  return products.mean(), products.std(ddof=1) / np.sqrt(products.size)


def test_linreg_closed_form_matches_monte_carlo():
  rng = np.random.default_rng(12)
  misses = 0
  checks = 0
  for _ in range(10):
    d = int(rng.integers(1, 6))
    model = LinRegModel(random_posterior(rng, d), noise_variance=float(rng.uniform(0.5, 2.0)))
    X = rng.standard_normal((3, d))
    K = fisher_kernel(model, X).matrix()
    grads = model.expected_loglik_grad(X, model.sample_posterior(100000, seed=rng.integers(2**31)))
    for n in range(3):
      for m in range(n, 3):
        products = np.einsum('jd,jd->j', grads[n], grads[m])
        mean, sem = products.mean(), products.std(ddof=1) / np.sqrt(products.size)
        checks += 1
        misses += abs(mean - K[n, m]) > 3 * sem
  assert misses <= 0.05 * checks + 1


def test_probit_closed_form_matches_monte_carlo():
  # Φ-approximated gradients (p̂_n - Φ(θᵀx_n))x_n
  rng = np.random.default_rng(13)
  misses = 0
  checks = 0
  for _ in range(10):
    d = int(rng.integers(1, 6))
    model = ProbitModel(random_posterior(rng, d))
    X = rng.standard_normal((3, d))
    K = fisher_kernel(model, X).matrix()
    thetas = model.sample_posterior(100000, seed=rng.integers(2**31))
    residual = model.predict(X).prob[:, None] - norm.cdf(X @ thetas.T)
    for n in range(3):
      for m in range(n, 3):
        products = (X[n] @ X[m]) * residual[n] * residual[m]
        mean, sem = products.mean(), products.std(ddof=1) / np.sqrt(products.size)
        checks += 1
        misses += abs(mean - K[n, m]) > 3 * sem
  assert misses <= 0.05 * checks + 1


def test_projection_estimator_converges():
  rng = np.random.default_rng(21)
  model = LinRegModel(random_posterior(rng, 3), noise_variance=1.0)
  X = rng.standard_normal((8, 3))
  oracle = project_gradients(model, X, 200000, seed=0).matrix()
  K = fisher_kernel(model, X).matrix()
  assert np.allclose(oracle, K, rtol=0.05, atol=0.05 * np.abs(K).max())


@pytest.mark.slow
def test_euclidean_projection_error_shrinks_like_inverse_root_j():
  rng = np.random.default_rng(2)
  model = LinRegModel(random_posterior(rng, 3), noise_variance=1.0)
  X = rng.standard_normal((10, 3))
  reference = project(model, X, 400000, seed=99).matrix()
  errors = {}
  for J in (10, 100, 10000):
    errors[J] = np.mean([np.abs(project(model, X, J, seed=s).matrix() - reference).mean() for s in range(20)])
  for small, large in ((10, 100), (100, 10000)):
    ratio = errors[small] / errors[large]
    expected = np.sqrt(large / small)
    assert expected / 3 <= ratio <= expected * 3


def test_project_shapes_and_scaling():
  model = LinRegModel(GaussianPosterior.prior(2), noise_variance=1.0)
  X = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
  proj = project(model, X, 7, seed=1)
  assert proj.values.shape == (3, 7)
  thetas = model.sample_posterior(7, seed=1)
  assert np.allclose(proj.values, model.expected_loglik_term(X, thetas) / np.sqrt(7))
  with pytest.raises(ValueError):
    project(model, X, 0)


def test_acs_over_squared_norm_ranks_like_bald():
  rng = np.random.default_rng(6)
  for _ in range(100):
    d = int(rng.integers(1, 6))
    model = LinRegModel(random_posterior(rng, d), noise_variance=float(rng.uniform(0.3, 3.0)))
    X = rng.standard_normal((30, d))
    normalized = acquisition_score_acs(model, X) / np.einsum('ij,ij->i', X, X)
    assert np.argmax(normalized) == np.argmax(score_bald(model, X))


def test_acs_score_matches_kernel_diagonal():
  rng = np.random.default_rng(9)
  model = ProbitModel(random_posterior(rng, 2))
  X = rng.standard_normal((5, 2))
  assert np.allclose(acquisition_score_acs(model, X), np.diag(fisher_kernel(model, X).matrix()), atol=1e-12)
  with pytest.raises(TypeError):
    fisher_linreg_inner(model, X[0], X[1])


def _assert_cauchy_schwarz(kernel):
  norms = np.array([kernel.norm(n) for n in range(kernel.pool_size)])
  assert np.allclose(norms, kernel.norms(), rtol=1e-12, atol=1e-14)
  K = kernel.matrix()
  bound = np.outer(norms, norms)
  assert np.all(np.abs(K) <= bound * (1 + 1e-9) + 1e-12)


def test_inner_products_obey_cauchy_schwarz():
  rng = np.random.default_rng(21)
  for _ in range(10):
    pool = rng.standard_normal((15, 3))
    _assert_cauchy_schwarz(fisher_kernel(LinRegModel(random_posterior(rng, 3), noise_variance=0.7), pool))
    _assert_cauchy_schwarz(fisher_kernel(ProbitModel(random_posterior(rng, 3)), pool))
    _assert_cauchy_schwarz(ProjectionMatrix(rng.standard_normal((15, 8))))

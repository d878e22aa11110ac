"""
Defines the probabilistic models active learning is run with. Both keep a
Gaussian posterior over their weights:
- LinRegModel - conjugate Bayesian linear regression with known noise variance
- ProbitModel - probit regression with a Laplace approximation to the posterior

Besides predictive posteriors, every model exposes the per-point terms

  L_m(θ) = E_{y_m}[log p(y_m | x_m, θ)] + H[y_m | x_m, D₀]

which the kernels turn into inner products.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields
import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import log_ndtr
from enums import Task
from errors import FitError
from special_fn import bernoulli_entropy, std_normal_cdf, std_normal_logcdf
from util import as_rng

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-10
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-8
LOG_2PI = np.log(2.0 * np.pi)


def _psd_slack(covariance):
  return PSD_TOLERANCE * max(float(np.trace(covariance)), 0.0)


@dataclass(frozen=True)
class GaussianPosterior:
  mean: np.ndarray
  covariance: np.ndarray

  def __post_init__(self):
    mean = np.asarray(self.mean, dtype=float).reshape(-1)
    covariance = np.asarray(self.covariance, dtype=float)
    if covariance.shape != (mean.size, mean.size):
      raise ValueError("covariance shape %s does not match mean of length %d" % (covariance.shape, mean.size))
    scale = max(1.0, float(np.abs(covariance).max(initial=0.0)))
    if not np.allclose(covariance, covariance.T, rtol=0.0, atol=1e-10 * scale):
      raise ValueError("covariance is not symmetric")
    covariance = 0.5 * (covariance + covariance.T)
    if mean.size and np.linalg.eigvalsh(covariance).min() < -_psd_slack(covariance):
      raise ValueError("covariance is not positive semi-definite")
    object.__setattr__(self, "mean", mean)
    object.__setattr__(self, "covariance", covariance)

  @classmethod
  def prior(cls, dim, variance=1.0):
    return cls(np.zeros(dim), variance * np.eye(dim))

  @property
  def dim(self):
    return self.mean.size

  def quad_form(self, X):
    """
    Row-wise xᵀΣx for a matrix of inputs.
    """
    return np.einsum('ij,jk,ik->i', X, self.covariance, X)

  def factor(self):
    """
    A matrix F with FFᵀ = Σ. Cholesky when Σ is positive definite, otherwise
    an eigendecomposition with tiny negative eigenvalues clipped to zero.
    """
    try:
      return np.linalg.cholesky(self.covariance)
    except np.linalg.LinAlgError:
      values, vectors = np.linalg.eigh(self.covariance)
      if values.min() < -_psd_slack(self.covariance):
        raise ValueError("covariance has eigenvalue %.3e below tolerance" % values.min())
      return vectors * np.sqrt(np.clip(values, 0.0, None))

  def sample(self, count, seed=None):
    if count < 1:
      raise ValueError("need at least one posterior sample, got %d" % count)
    rng = as_rng(seed)
    z = rng.standard_normal((count, self.dim))
    return self.mean + z @ self.factor().T


@dataclass(frozen=True)
class PredictiveGaussian:
  mean: object
  variance: object

  @property
  def entropy(self):
    return 0.5 * (LOG_2PI + 1.0 + np.log(self.variance))


@dataclass(frozen=True)
class PredictiveBernoulli:
  prob: object

  @property
  def entropy(self):
    return bernoulli_entropy(self.prob)


class BayesianModel(ABC):
  task = None

  def __init__(self, posterior, prior_variance=1.0):
    if prior_variance <= 0:
      raise ValueError("prior_variance must be positive, got %r" % prior_variance)
    self.posterior = posterior
    self.prior_variance = float(prior_variance)

  @property
  def dim(self):
    return self.posterior.dim

  def _inputs(self, x):
    """
    Returns (X, was_vector): X as an (M, d) float matrix.
    """
    x = np.asarray(x, dtype=float)
    was_vector = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != self.dim:
      raise ValueError("dimension mismatch: model has d=%d, input has shape %s" % (self.dim, x.shape))
    if not np.all(np.isfinite(X)):
      raise ValueError("inputs must be finite")
    return X, was_vector

  def _thetas(self, theta):
    theta = np.asarray(theta, dtype=float)
    thetas = np.atleast_2d(theta)
    if thetas.shape[1] != self.dim:
      raise ValueError("dimension mismatch: model has d=%d, theta has shape %s" % (self.dim, theta.shape))
    if not np.all(np.isfinite(thetas)):
      raise ValueError("theta must be finite")
    return thetas, theta.ndim == 1

  def expected_loglik_term(self, x, theta):
    """
    L(θ) for every pair of input row and parameter row. Returns an (M, J)
    matrix, or a float when both x and theta are single vectors.
    """
    X, x_vector = self._inputs(x)
    thetas, theta_vector = self._thetas(theta)
    values = self._loglik_terms(X, thetas)
    if x_vector and theta_vector:
      return float(values[0, 0])
    if x_vector:
      return values[0]
    if theta_vector:
      return values[:, 0]
    return values

  def expected_loglik_grad(self, x, theta):
    """
    ∇_θ L(θ), shape (M, J, d).
    """
    X, _ = self._inputs(x)
    thetas, _ = self._thetas(theta)
    return self._loglik_grad_coeff(X, thetas)[:, :, None] * X[:, None, :]

  def sample_posterior(self, count, seed=None):
    return self.posterior.sample(count, seed)

  def predictive_entropy(self, x):
    X, was_vector = self._inputs(x)
    entropy = self._predictive(X).entropy
    return float(entropy[0]) if was_vector else entropy

  def predict(self, x):
    X, was_vector = self._inputs(x)
    predictive = self._predictive(X)
    if not was_vector:
      return predictive
    return predictive.__class__(*(float(getattr(predictive, f.name)[0]) for f in fields(predictive)))

  @abstractmethod
  def _predictive(self, X):
    pass

  @abstractmethod
  def _loglik_terms(self, X, thetas):
    pass

  @abstractmethod
  def _loglik_grad_coeff(self, X, thetas):
    pass

  @abstractmethod
  def impute_labels(self, x):
    pass

  @abstractmethod
  def refit(self, X, y):
    """
    Fits a new model of the same kind and hyperparameters on (X, y).
    """
    pass


class LinRegModel(BayesianModel):
  task = Task.REGRESSION

  def __init__(self, posterior, noise_variance, prior_variance=1.0):
    super().__init__(posterior, prior_variance)
    if noise_variance <= 0:
      raise ValueError("noise_variance must be positive, got %r" % noise_variance)
    self.noise_variance = float(noise_variance)

  @classmethod
  def fit(cls, X, y, noise_variance=1.0, prior_variance=1.0, dim=None):
    X, y = _training_arrays(X, y, dim)
    d = X.shape[1]
    if noise_variance <= 0 or prior_variance <= 0:
      raise ValueError("variances must be positive")
    if X.shape[0] == 0:
      return cls(GaussianPosterior.prior(d, prior_variance), noise_variance, prior_variance)
    precision = X.T @ X / noise_variance + np.eye(d) / prior_variance
    try:
      factor = cho_factor(precision, lower=True)
    except LinAlgError:
      raise FitError("normal equations are singular")
    covariance = cho_solve(factor, np.eye(d))
    mean = cho_solve(factor, X.T @ y / noise_variance)
    return cls(GaussianPosterior(mean, 0.5 * (covariance + covariance.T)), noise_variance, prior_variance)

  def refit(self, X, y):
    return LinRegModel.fit(X, y, self.noise_variance, self.prior_variance, dim=self.dim)

  def _predictive(self, X):
    return PredictiveGaussian(X @ self.posterior.mean, self.noise_variance + self.posterior.quad_form(X))

  def _loglik_terms(self, X, thetas):
    predictive = self._predictive(X)
    s2 = predictive.variance[:, None]
    residual = predictive.mean[:, None] - X @ thetas.T
    nv = self.noise_variance
    return (-0.5 * (LOG_2PI + np.log(nv)) - (s2 + residual ** 2) / (2.0 * nv)
            + 0.5 * (LOG_2PI + 1.0 + np.log(s2)))

  def _loglik_grad_coeff(self, X, thetas):
    return ((X @ self.posterior.mean)[:, None] - X @ thetas.T) / self.noise_variance

  def impute_labels(self, x):
    X, _ = self._inputs(x)
    return X @ self.posterior.mean

  def __repr__(self):
    return "LinRegModel(d={}, noise_variance={}, prior_variance={})".format(
        self.dim, self.noise_variance, self.prior_variance)


class ProbitModel(BayesianModel):
  task = Task.PROBIT

  def __init__(self, posterior, prior_variance=1.0, impute_threshold=0.5):
    super().__init__(posterior, prior_variance)
    self.impute_threshold = float(impute_threshold)

  @staticmethod
  def _log_joint(X, signs, theta, prior_variance):
    return np.sum(std_normal_logcdf(signs * (X @ theta))) - theta @ theta / (2.0 * prior_variance)

  @classmethod
  def fit(cls, X, y, prior_variance=1.0, dim=None, impute_threshold=0.5,
          max_iter=NEWTON_MAX_ITER, tol=NEWTON_TOL):
    """
    Laplace approximation: the mean is the MAP of the probit likelihood under
    a N(0, prior_variance·I) prior, found with damped Newton steps, and the
    covariance is the inverse Hessian of the negative log joint there.
    """
    X, y = _training_arrays(X, y, dim)
    if not np.all((y == 0) | (y == 1)):
      raise ValueError("probit targets must be 0 or 1")
    if prior_variance <= 0:
      raise ValueError("prior_variance must be positive")
    d = X.shape[1]
    if X.shape[0] == 0:
      return cls(GaussianPosterior.prior(d, prior_variance), prior_variance, impute_threshold)
    signs = 2.0 * y - 1.0
    theta = np.zeros(d)
    eye = np.eye(d)
    for iteration in range(max_iter + 1):
      z = signs * (X @ theta)
      # inverse Mills ratio φ(z)/Φ(z), computed in log space
      mills = np.exp(-0.5 * z * z - 0.5 * LOG_2PI - log_ndtr(z))
      grad = -X.T @ (signs * mills) + theta / prior_variance
      hessian = (X.T * (mills * (z + mills))) @ X + eye / prior_variance
      grad_norm = float(np.linalg.norm(grad))
      logger.debug("probit newton iteration %d: |grad| = %.3e", iteration, grad_norm)
      if grad_norm <= tol:
        break
      if iteration == max_iter:
        raise FitError("probit MAP did not converge", iterations=iteration, grad_norm=grad_norm)
      try:
        step = cho_solve(cho_factor(hessian, lower=True), grad)
      except LinAlgError:
        raise FitError("probit Hessian is singular", iterations=iteration, grad_norm=grad_norm)
      current = cls._log_joint(X, signs, theta, prior_variance)
      decrease = grad @ step
      t = 1.0
      while t > 1e-10 and \
          cls._log_joint(X, signs, theta - t * step, prior_variance) < current + 1e-4 * t * decrease:
        t *= 0.5
      theta = theta - t * step
    try:
      covariance = cho_solve(cho_factor(hessian, lower=True), eye)
    except LinAlgError:
      raise FitError("probit Hessian is singular at the MAP")
    return cls(GaussianPosterior(theta, 0.5 * (covariance + covariance.T)), prior_variance, impute_threshold)

  def refit(self, X, y):
    return ProbitModel.fit(X, y, self.prior_variance, dim=self.dim, impute_threshold=self.impute_threshold)

  def zeta(self, X):
    """
    ζ = μᵀx / √(1 + xᵀΣx), the probit argument of the predictive probability.
    """
    return (X @ self.posterior.mean) / np.sqrt(1.0 + self.posterior.quad_form(X))

  def _predictive(self, X):
    return PredictiveBernoulli(std_normal_cdf(self.zeta(X)))

  def _loglik_terms(self, X, thetas):
    p = self._predictive(X).prob[:, None]
    f = X @ thetas.T
    return p * std_normal_logcdf(f) + (1.0 - p) * std_normal_logcdf(-f) + bernoulli_entropy(p)

  def _loglik_grad_coeff(self, X, thetas):
    p = self._predictive(X).prob[:, None]
    f = X @ thetas.T
    log_pdf = -0.5 * f * f - 0.5 * LOG_2PI
    return p * np.exp(log_pdf - log_ndtr(f)) - (1.0 - p) * np.exp(log_pdf - log_ndtr(-f))

  def impute_labels(self, x):
    X, _ = self._inputs(x)
    return (self._predictive(X).prob >= self.impute_threshold).astype(float)

  def __repr__(self):
    return "ProbitModel(d={}, prior_variance={})".format(self.dim, self.prior_variance)


def _training_arrays(X, y, dim=None):
  X = np.asarray(X, dtype=float)
  y = np.asarray(y, dtype=float).reshape(-1)
  if X.size == 0:
    if dim is None and X.ndim == 2:
      dim = X.shape[1]
    if not dim:
      raise ValueError("cannot infer the input dimension of an empty training set")
    X = X.reshape(0, dim)
  if X.ndim != 2 or X.shape[1] < 1:
    raise ValueError("training inputs must be an N×d matrix with d >= 1")
  if dim is not None and X.shape[1] != dim:
    raise ValueError("dimension mismatch: expected d=%d, got %d" % (dim, X.shape[1]))
  if X.shape[0] != y.size:
    raise ValueError("got %d inputs but %d targets" % (X.shape[0], y.size))
  if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
    raise ValueError("training data must be finite")
  return X, y


def linreg_fit(X, y, noise_variance=1.0, prior_variance=1.0):
  return LinRegModel.fit(X, y, noise_variance, prior_variance)


def linreg_predict(model, x):
  return model.predict(x)


def probit_fit(X, y, prior_variance=1.0):
  return ProbitModel.fit(X, y, prior_variance)


def probit_predict(model, x):
  return model.predict(x)


def expected_loglik_term(model, x, theta):
  return model.expected_loglik_term(x, theta)


def sample_posterior(model, count, seed=None):
  return model.sample_posterior(count, seed)


def fit_model(task, X, y, noise_variance=1.0, prior_variance=1.0, impute_threshold=0.5, dim=None):
  if task == Task.REGRESSION:
    return LinRegModel.fit(X, y, noise_variance, prior_variance, dim=dim)
  elif task == Task.PROBIT:
    return ProbitModel.fit(X, y, prior_variance, dim=dim, impute_threshold=impute_threshold)
  else:
    raise ValueError("Task %s is not supported." % task)

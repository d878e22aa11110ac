"""
Defines the inner-product providers the Frank-Wolfe batch construction works
with. A provider exposes ⟨L_n, L_m⟩ and the norms σ_n for a pool of points:
- DenseKernel - an explicit M×M matrix, built from the closed-form weighted
  Fisher inner products of linear and probit regression
- ProjectionMatrix - the J-dimensional random projection L̂_n of each point,
  estimating the weighted Euclidean inner product for any model
"""

import logging
from abc import ABC, abstractmethod
import numpy as np
from errors import NumericalError
from models import LinRegModel, ProbitModel
from special_fn import bvn_cdf, owens_t, std_normal_cdf

logger = logging.getLogger(__name__)

NORM_SQ_TOLERANCE = 1e-12


class KernelProvider(ABC):

  @property
  @abstractmethod
  def pool_size(self):
    pass

  @abstractmethod
  def inner(self, n, m):
    pass

  @abstractmethod
  def norms(self):
    """
    σ_n for every pool point, shape (M,).
    """
    pass

  @abstractmethod
  def column(self, n):
    """
    ⟨L_m, L_n⟩ for every m, shape (M,).
    """
    pass

  @abstractmethod
  def row_sums(self):
    """
    ⟨L_m, L⟩ for every m where L = Σ_n L_n, shape (M,).
    """
    pass

  def norm(self, n):
    return float(np.sqrt(max(self.inner(n, n), 0.0)))

  def matrix(self):
    return np.column_stack([self.column(n) for n in range(self.pool_size)])

  def _check_index(self, *indices):
    for i in indices:
      if not 0 <= i < self.pool_size:
        raise IndexError("pool index %d out of range for pool of size %d" % (i, self.pool_size))


class DenseKernel(KernelProvider):
  def __init__(self, matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
      raise ValueError("kernel matrix must be square, got shape %s" % (matrix.shape,))
    if not np.all(np.isfinite(matrix)):
      raise NumericalError("kernel matrix has non-finite entries")
    self._matrix = 0.5 * (matrix + matrix.T)

  @property
  def pool_size(self):
    return self._matrix.shape[0]

  def inner(self, n, m):
    self._check_index(n, m)
    return float(self._matrix[n, m])

  def norms(self):
    return np.sqrt(np.clip(np.diag(self._matrix), 0.0, None))

  def column(self, n):
    return self._matrix[:, n]

  def row_sums(self):
    return self._matrix.sum(axis=1)

  def matrix(self):
    return self._matrix.copy()


class ProjectionMatrix(KernelProvider):
  """
  Row n is L̂_n = (1/√J)[L_n(θ_1), ..., L_n(θ_J)], so L̂_nᵀL̂_m estimates the
  weighted Euclidean inner product. Columns and row sums cost O(MJ); the
  M×M kernel is never formed.
  """

  def __init__(self, values):
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
      raise ValueError("projection must be an M×J matrix, got shape %s" % (values.shape,))
    if not np.all(np.isfinite(values)):
      raise NumericalError("projection has non-finite entries")
    self.values = values

  @property
  def pool_size(self):
    return self.values.shape[0]

  @property
  def num_projections(self):
    return self.values.shape[1]

  def inner(self, n, m):
    self._check_index(n, m)
    return float(self.values[n] @ self.values[m])

  def norms(self):
    return np.sqrt(np.einsum('ij,ij->i', self.values, self.values))

  def column(self, n):
    return self.values @ self.values[n]

  def row_sums(self):
    return self.values @ self.values.sum(axis=0)


def _pair(model, x_n, x_m=None):
  X, _ = model._inputs(x_n if x_m is None else np.vstack([x_n, x_m]))
  if X.shape[0] != (1 if x_m is None else 2):
    raise ValueError("expected single input vectors")
  return X


def _require(model, cls):
  if not isinstance(model, cls):
    raise TypeError("expected a %s, got %s" % (cls.__name__, type(model).__name__))


def fisher_linreg_inner(model, x_n, x_m):
  """
  ⟨L_n, L_m⟩ = (x_nᵀx_m / σ₀⁴) x_nᵀΣx_m
  """
  _require(model, LinRegModel)
  X = _pair(model, x_n, x_m)
  return float(_linreg_matrix(model, X)[0, 1])


def _linreg_matrix(model, X):
  return (X @ X.T) * (X @ model.posterior.covariance @ X.T) / model.noise_variance ** 2


def _probit_norm_sq(model, X):
  quad = model.posterior.quad_form(X)
  zeta = model.zeta(X)
  cdf = std_normal_cdf(zeta)
  bracket = cdf * (1.0 - cdf) - 2.0 * owens_t(zeta, 1.0 / np.sqrt(1.0 + 2.0 * quad))
  if np.any(bracket < -NORM_SQ_TOLERANCE):
    raise NumericalError("probit Fisher norm is negative (%.3e)" % bracket.min())
  return np.einsum('ij,ij->i', X, X) * np.clip(bracket, 0.0, None)


def _probit_offdiag(model, X, rows, cols):
  covariance = model.posterior.covariance
  scale = np.sqrt(1.0 + model.posterior.quad_form(X))
  zeta = model.zeta(X)
  cross = np.einsum('ij,jk,ik->i', X[rows], covariance, X[cols])
  rho = np.clip(cross / (scale[rows] * scale[cols]), -1.0, 1.0)
  cdf = std_normal_cdf(zeta)
  joint = bvn_cdf(zeta[rows], zeta[cols], rho)
  return np.einsum('ij,ij->i', X[rows], X[cols]) * (joint - cdf[rows] * cdf[cols])


def _probit_matrix(model, X):
  M = X.shape[0]
  K = np.zeros((M, M))
  rows, cols = np.triu_indices(M, 1)
  if rows.size:
    K[rows, cols] = _probit_offdiag(model, X, rows, cols)
  K = K + K.T
  K[np.diag_indices(M)] = _probit_norm_sq(model, X)
  return K


def fisher_probit_inner(model, x_n, x_m):
  """
  ⟨L_n, L_m⟩ = x_nᵀx_m (BvN(ζ_n, ζ_m, ρ_nm) - Φ(ζ_n)Φ(ζ_m)) with
  ρ_nm = x_nᵀΣx_m / (√(1 + x_nᵀΣx_n) √(1 + x_mᵀΣx_m)).
  """
  _require(model, ProbitModel)
  X = _pair(model, x_n, x_m)
  return float(_probit_offdiag(model, X, np.array([0]), np.array([1]))[0])


def fisher_probit_norm_sq(model, x_n):
  """
  ⟨L_n, L_n⟩ = x_nᵀx_n (Φ(ζ_n)(1 - Φ(ζ_n)) - 2T(ζ_n, 1/√(1 + 2x_nᵀΣx_n)))
  """
  _require(model, ProbitModel)
  return float(_probit_norm_sq(model, _pair(model, x_n))[0])


def fisher_kernel(model, pool):
  """
  The closed-form weighted Fisher kernel over a pool as a DenseKernel.
  Off-diagonal probit entries use the bivariate normal form, the diagonal
  the Owen's T form.
  """
  X, _ = model._inputs(pool)
  if isinstance(model, LinRegModel):
    K = _linreg_matrix(model, X)
  elif isinstance(model, ProbitModel):
    K = _probit_matrix(model, X)
  else:
    raise TypeError("no closed-form Fisher kernel for %s" % type(model).__name__)
  logger.debug("built %d×%d Fisher kernel for %r", X.shape[0], X.shape[0], model)
  return DenseKernel(K)


def acquisition_score_acs(model, x):
  """
  The Fisher norm ⟨L_n, L_n⟩ of each input, read as an acquisition score
  (for diagnostics and plots; batches are built by Frank-Wolfe).
  """
  X, was_vector = model._inputs(x)
  if isinstance(model, LinRegModel):
    scores = np.einsum('ij,ij->i', X, X) * model.posterior.quad_form(X) / model.noise_variance ** 2
  elif isinstance(model, ProbitModel):
    scores = _probit_norm_sq(model, X)
  else:
    raise TypeError("no closed-form Fisher norm for %s" % type(model).__name__)
  return float(scores[0]) if was_vector else scores


def project(model, pool, J, seed=None):
  """
  Random projection of every pool point against one shared set of J
  posterior samples.
  """
  if J < 1:
    raise ValueError("need at least one projection, got %d" % J)
  X, _ = model._inputs(pool)
  if X.shape[0] < 1:
    raise ValueError("cannot project an empty pool")
  thetas = model.sample_posterior(J, seed)
  return ProjectionMatrix(model.expected_loglik_term(X, thetas) / np.sqrt(J))


def project_gradients(model, pool, J, seed=None):
  """
  Monte Carlo projection for the weighted Fisher inner product: row n
  stacks ∇_θL_n(θ_j)/√J over J shared samples, giving an (M, J·d) matrix.
  Only practical for low-dimensional models.
  """
  X, _ = model._inputs(pool)
  thetas = model.sample_posterior(J, seed)
  grads = model.expected_loglik_grad(X, thetas)
  return ProjectionMatrix(grads.reshape(X.shape[0], -1) / np.sqrt(J))


def euclidean_inner(proj, n, m):
  return proj.inner(n, m)

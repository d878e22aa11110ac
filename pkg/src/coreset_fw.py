"""
Defines the Frank-Wolfe batch construction. The pool's summed vector
L = Σ_n L_n is approximated by a sparse non-negative combination
L(w) = Σ_n w_n L_n on the polytope {w >= 0, Σ_n w_n σ_n = σ}; each
iteration moves towards one vertex (σ/σ_f)1_f with an exact line search.
Points with a positive final weight form the batch.
"""

import logging
from dataclasses import dataclass, field
import numpy as np
from errors import EmptyPoolError, NumericalError, ResidualConverged
from kernels import fisher_kernel, project
from util import argmax_lowest

logger = logging.getLogger(__name__)

# stop once ‖L - L(w)‖² falls below this fraction of ‖L‖²
CONVERGED_FRACTION = 1e-12


@dataclass
class FWState:
  weights: np.ndarray
  sigma_n: np.ndarray
  sigma: float
  total_inner: np.ndarray  # ⟨L, L_n⟩
  weighted_inner: np.ndarray  # ⟨L(w), L_n⟩
  total_norm_sq: float  # ‖L‖²
  iteration: int = 0
  selected: list = field(default_factory=list)
  objectives: list = field(default_factory=list)

  @classmethod
  def initial(cls, kernel):
    sigma_n = np.asarray(kernel.norms(), dtype=float)
    total_inner = np.asarray(kernel.row_sums(), dtype=float)
    if not (np.all(np.isfinite(sigma_n)) and np.all(np.isfinite(total_inner))):
      raise NumericalError("kernel produced non-finite inner products")
    sigma = float(sigma_n.sum())
    if not sigma > 0:
      raise EmptyPoolError("every pool point has zero norm")
    total_norm_sq = float(total_inner.sum())
    state = cls(
        weights=np.zeros(sigma_n.size),
        sigma_n=sigma_n,
        sigma=sigma,
        total_inner=total_inner,
        weighted_inner=np.zeros(sigma_n.size),
        total_norm_sq=total_norm_sq,
    )
    state.objectives.append(state.residual_norm_sq)
    return state

  @property
  def residual_inner(self):
    """
    ⟨L - L(w), L_n⟩ for every n.
    """
    return self.total_inner - self.weighted_inner

  @property
  def residual_norm_sq(self):
    """
    (1 - w)ᵀK(1 - w) = ‖L - L(w)‖²
    """
    return max(float((1.0 - self.weights) @ self.residual_inner), 0.0)

  @property
  def objective(self):
    return self.objectives[-1]

  @property
  def candidates(self):
    return self.sigma_n > 0


@dataclass(frozen=True)
class Batch:
  indices: np.ndarray
  weights: np.ndarray

  def __len__(self):
    return self.indices.size


def select_vertex(state):
  """
  f = argmax_n ⟨L - L(w), L_n/σ_n⟩ over points with σ_n > 0; ties go to
  the lowest index.
  """
  mask = state.candidates
  scores = state.residual_inner / np.where(mask, state.sigma_n, 1.0)
  return argmax_lowest(scores, mask)


def fw_step_gamma(kernel, state, f):
  """
  Exact line search from L(w) towards (σ/σ_f)L_f, clamped to [0, 1].
  """
  if not state.sigma_n[f] > 0:
    raise ValueError("vertex %d has zero norm" % f)
  scale = state.sigma / state.sigma_n[f]
  w = state.weights
  residual_inner = state.residual_inner
  weighted_norm_sq = float(w @ state.weighted_inner)
  # ⟨(σ/σ_f)L_f - L(w), L - L(w)⟩
  numerator = scale * residual_inner[f] - float(w @ residual_inner)
  # ‖(σ/σ_f)L_f - L(w)‖²
  denominator = scale ** 2 * state.sigma_n[f] ** 2 - 2.0 * scale * state.weighted_inner[f] + weighted_norm_sq
  if denominator <= CONVERGED_FRACTION * max(state.total_norm_sq, np.finfo(float).tiny):
    raise ResidualConverged("line search denominator is zero at vertex %d" % f)
  return float(np.clip(numerator / denominator, 0.0, 1.0))


def fw_update(kernel, state, f, gamma):
  scale = state.sigma / state.sigma_n[f]
  state.weights *= (1.0 - gamma)
  state.weights[f] += gamma * scale
  state.weighted_inner = (1.0 - gamma) * state.weighted_inner + gamma * scale * np.asarray(kernel.column(f))
  state.iteration += 1
  state.selected.append(f)
  state.objectives.append(state.residual_norm_sq)
  return state


def fw_construct(kernel, budget):
  """
  Runs 'budget' Frank-Wolfe iterations over the kernel, stopping early once
  the residual vanishes. An index may be selected more than once; the
  support never grows by more than one point per iteration.
  """
  if budget < 1:
    raise ValueError("budget must be at least 1, got %d" % budget)
  state = FWState.initial(kernel)
  threshold = CONVERGED_FRACTION * state.total_norm_sq
  for _ in range(budget):
    if state.objective <= threshold:
      logger.debug("residual converged after %d iterations", state.iteration)
      break
    f = select_vertex(state)
    try:
      gamma = fw_step_gamma(kernel, state, f)
    except ResidualConverged:
      logger.debug("exact fit reached after %d iterations", state.iteration)
      break
    fw_update(kernel, state, f, gamma)
    logger.debug("fw iteration %d: f=%d gamma=%.4g objective=%.6g",
                 state.iteration, f, gamma, state.objective)
  return state


def binarize(state):
  """
  Projects the continuous weights back to {0, 1}: every point with a
  positive weight is queried.
  """
  return Batch(indices=np.flatnonzero(state.weights > 0), weights=state.weights.copy())


def acs_fw(model, pool, budget):
  """
  Batch from the closed-form weighted Fisher kernel of the model.
  """
  return binarize(fw_construct(fisher_kernel(model, pool), budget))


def acs_fw_projected(model, pool, budget, J, seed=None):
  """
  Batch from J random projections of the weighted Euclidean inner product.
  Each iteration costs O(MJ). The state keeps the M-vector ⟨L - L(w), L̂_n⟩
  rather than the J-vector residual r = Σ_m (1 - w_m)L̂_m; the two are
  equivalent, since ⟨L - L(w), L̂_n⟩ = L̂_nᵀr.
  """
  return binarize(fw_construct(project(model, pool, J, seed), budget))

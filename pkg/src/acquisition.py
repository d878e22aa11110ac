"""
Defines acquisition scores and the batch selection strategies compared in
experiments. Each SelectionStrategy maps a fitted model and an unlabeled pool
to a list of distinct pool indices:
- RandomStrategy - uniform without replacement
- MaxEntStrategy - top-b predictive entropy
- BaldStrategy - top-b expected information gain
- SequentialGreedyStrategy - one MaxEnt pick at a time, refitting in between
  with true (retrain) or imputed (impute) labels
- AcsFwStrategy - Frank-Wolfe sparse subset approximation, closed-form or projected
"""

import logging
from abc import ABC, abstractmethod
import numpy as np
from coreset_fw import binarize, fw_construct
from kernels import fisher_kernel, project
from models import LinRegModel, ProbitModel
from special_fn import bernoulli_entropy, std_normal_cdf
from util import argmax_lowest, as_rng

logger = logging.getLogger(__name__)

BALD_SAMPLES = 1000
RETRAIN = "retrain"
IMPUTE = "impute"


def score_maxent(model, x):
  """
  Predictive entropy: ½log(2πe(σ₀² + xᵀΣx)) for regression, the Bernoulli
  entropy of the predictive probability for probit.
  """
  return model.predictive_entropy(x)


def score_bald(model, x, samples=BALD_SAMPLES, seed=0):
  """
  Mutual information between the label and the parameters. Closed form
  ½log(1 + xᵀΣx/σ₀²) for linear regression; for probit a Monte Carlo
  estimate H[mean_j Φ(θ_jᵀx)] - mean_j H[Φ(θ_jᵀx)] over 'samples' draws.
  """
  X, was_vector = model._inputs(x)
  if isinstance(model, LinRegModel):
    scores = 0.5 * np.log1p(model.posterior.quad_form(X) / model.noise_variance)
  elif isinstance(model, ProbitModel):
    thetas = model.sample_posterior(samples, seed)
    probs = std_normal_cdf(X @ thetas.T)
    scores = bernoulli_entropy(probs.mean(axis=1)) - bernoulli_entropy(probs).mean(axis=1)
    scores = np.clip(scores, 0.0, None)
  else:
    raise TypeError("BALD is not defined for %s" % type(model).__name__)
  return float(scores[0]) if was_vector else scores


def select_top_b(scores, b):
  """
  Indices of the b largest scores, largest first, ties by lowest index.
  Ex:
    scores=[3, 1, 2], b=2 => [0, 2]
  """
  scores = np.asarray(scores, dtype=float)
  return np.argsort(-scores, kind='stable')[:b].tolist()


def select_random(M, b, seed=None):
  if b > M:
    raise ValueError("cannot draw %d points from a pool of %d" % (b, M))
  return as_rng(seed).choice(M, size=b, replace=False).tolist()


def select_sequential_greedy(model, labeled, pool, b, mode=IMPUTE, pool_labels=None):
  """
  Picks b points one at a time by maximum entropy. Between picks the model
  is refit on the labeled data plus the picks so far, labeled with the
  oracle ('retrain') or with the model's own imputed labels ('impute').
  Imputed labels are discarded once the batch is chosen.
  """
  if mode not in (RETRAIN, IMPUTE):
    raise ValueError("unknown sequential greedy mode %r" % mode)
  if mode == RETRAIN and pool_labels is None:
    raise ValueError("retrain mode needs the pool labels")
  pool = np.asarray(pool, dtype=float)
  X_lab, y_lab = (np.asarray(a, dtype=float) for a in labeled)
  X_lab = X_lab.reshape(-1, pool.shape[1])
  available = np.ones(pool.shape[0], dtype=bool)
  picks = []
  current = model
  count = min(b, pool.shape[0])
  for pick in range(count):
    scores = np.where(available, score_maxent(current, pool), -np.inf)
    f = argmax_lowest(scores, available)
    picks.append(f)
    available[f] = False
    if pick == count - 1:
      break
    label = pool_labels[f] if mode == RETRAIN else current.impute_labels(pool[f])
    X_lab = np.vstack([X_lab, pool[f]])
    y_lab = np.append(y_lab, label)
    current = current.refit(X_lab, y_lab)
  return picks


class SelectionStrategy(ABC):
  name = None

  @abstractmethod
  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    """
    Returns distinct indices into 'pool', at most 'budget' of them.
    """
    pass

  def __repr__(self):
    return "<%s>" % self.name


class RandomStrategy(SelectionStrategy):
  name = "random"

  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    return select_random(len(pool), min(budget, len(pool)), rng)


class MaxEntStrategy(SelectionStrategy):
  name = "maxent"

  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    return select_top_b(score_maxent(model, pool), budget)


class BaldStrategy(SelectionStrategy):
  name = "bald"

  def __init__(self, samples=BALD_SAMPLES):
    self.samples = samples

  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    seed = int(rng.integers(2**31))
    return select_top_b(score_bald(model, pool, self.samples, seed), budget)


class SequentialGreedyStrategy(SelectionStrategy):

  def __init__(self, mode):
    self.mode = mode
    self.name = "maxent-sg" if mode == RETRAIN else "maxent-i"

  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    return select_sequential_greedy(model, labeled, pool, budget, self.mode, pool_labels)


class AcsFwStrategy(SelectionStrategy):
  """
  Frank-Wolfe batches. With 'projections' set the weighted Euclidean inner
  product is estimated from that many posterior samples, otherwise the
  closed-form Fisher kernel is used. Batches can be smaller than the budget.
  """

  def __init__(self, projections=None):
    self.projections = projections
    self.name = "acs-fw" if projections is None else "acs-fw-projected"

  def select_batch(self, model, pool, labeled, budget, rng, pool_labels=None):
    if self.projections is None:
      kernel = fisher_kernel(model, pool)
    else:
      kernel = project(model, pool, self.projections, rng)
    state = fw_construct(kernel, budget)
    batch = binarize(state)
    if len(batch) == 0:
      fallback = argmax_lowest(state.sigma_n)
      logger.warning("Frank-Wolfe returned an empty batch; querying highest-norm point %d", fallback)
      return [fallback]
    return batch.indices.tolist()

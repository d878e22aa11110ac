"""
Defines the behavior of the process which runs one active-learning
experiment per seed. Several processes can run in parallel to get averaged
results.
"""

import logging
import time
import numpy as np
from numpy.random import default_rng
from scipy.stats import norm
from acquisition import (IMPUTE, RETRAIN, AcsFwStrategy, BaldStrategy, MaxEntStrategy,
                         RandomStrategy, SequentialGreedyStrategy)
from datasets import Standardizer, check_targets, split
from enums import Strategy, Task
from errors import ConfigError, NumericalError
from models import fit_model
from results import ALRecord
from util import print_progress_bar

logger = logging.getLogger(__name__)

# decorrelates the initial labeled draw from the split drawn with the same seed
INIT_SEED_OFFSET = 7919
PROB_FLOOR = 1e-12


def strategy_maker(config):
  strategy = config.strategy
  if strategy == Strategy.ACS_FW:
    return AcsFwStrategy()
  elif strategy == Strategy.ACS_FW_PROJECTED:
    return AcsFwStrategy(config.projections)
  elif strategy == Strategy.RANDOM:
    return RandomStrategy()
  elif strategy == Strategy.MAXENT:
    return MaxEntStrategy()
  elif strategy == Strategy.BALD:
    return BaldStrategy(config.bald_samples)
  elif strategy == Strategy.MAXENT_SG:
    return SequentialGreedyStrategy(RETRAIN)
  elif strategy == Strategy.MAXENT_I:
    return SequentialGreedyStrategy(IMPUTE)
  else:
    raise ValueError("Strategy %s is not supported." % strategy)


def evaluate(model, inputs, targets, standardizer=None):
  """
  Test-set metric in the original target units: RMSE for regression,
  accuracy at threshold 0.5 for probit. The mean predictive log-likelihood
  is logged alongside.
  """
  predictive = model.predict(inputs)
  if model.task == Task.REGRESSION:
    mean = predictive.mean
    variance = predictive.variance
    if standardizer is not None:
      mean = standardizer.inverse_targets(mean)
      variance = variance * standardizer.target_scale ** 2
    metric = float(np.sqrt(np.mean((mean - targets) ** 2)))
    loglik = float(np.mean(norm.logpdf(targets, mean, np.sqrt(variance))))
  else:
    prob = np.clip(predictive.prob, PROB_FLOOR, 1.0 - PROB_FLOOR)
    metric = float(np.mean((prob >= 0.5) == (targets == 1)))
    loglik = float(np.mean(targets * np.log(prob) + (1.0 - targets) * np.log1p(-prob)))
  logger.debug("%s: metric=%.6g mean predictive loglik=%.6g", model, metric, loglik)
  return metric


class Process:
  def __init__(self, config, dataset, show_progress=False):
    self.config = config
    self.dataset = dataset
    self.show_progress = show_progress
    self.strategy = strategy_maker(config)
    check_targets(dataset, config.task)

  def prepare(self, seed):
    """
    Splits the data and, when the config asks for it, applies training-split
    standardization. Test targets stay in their original units.
    """
    train, test = split(self.dataset, self.config.test_fraction, seed)
    needed = self.config.init_labeled + self.config.budget
    if needed > train.size:
      raise ConfigError("init_labeled + budget = %d exceeds the %d training points" % (needed, train.size))
    standardizer = Standardizer.fit(train, self.config.task) if self.config.standardize else None
    if standardizer is not None:
      train = standardizer.transform(train)
      test_inputs = standardizer.transform_inputs(test.inputs)
    else:
      test_inputs = test.inputs
    return train, test_inputs, test.targets, standardizer

  def fit(self, X, y, dim):
    return fit_model(self.config.task, X, y, self.config.noise_variance, self.config.prior_variance,
                     self.config.impute_threshold, dim=dim)

  def run_seed(self, seed):
    """
    The active-learning loop for one seed: fit on the labeled set, evaluate,
    choose a batch from the pool, reveal its labels and repeat until the
    budget is spent or the pool is empty. A NumericalError ends the seed
    with a failure row.
    """
    cfg = self.config
    train, test_inputs, test_targets, standardizer = self.prepare(seed)
    rng = default_rng(seed + INIT_SEED_OFFSET)
    labeled = rng.choice(train.size, size=cfg.init_labeled, replace=False).tolist()
    pool = np.setdiff1d(np.arange(train.size), labeled)
    X, y = train.inputs, train.targets
    records = []
    queried_total = 0
    iteration = 0
    while True:
      start = time.monotonic()
      try:
        model = self.fit(X[labeled], y[labeled], train.dim)
        metric = evaluate(model, test_inputs, test_targets, standardizer)
        remaining = cfg.budget - queried_total
        if remaining <= 0 or pool.size == 0:
          records.append(self.record(seed, iteration, len(labeled), 0, metric, 0.0, time.monotonic() - start))
          break
        batch_start = time.monotonic()
        picks = self.strategy.select_batch(
            model, X[pool], (X[labeled], y[labeled]), min(cfg.batch_size, remaining, pool.size), rng,
            pool_labels=y[pool])
        batch_time = time.monotonic() - batch_start
      except NumericalError as e:
        logger.warning("seed %d aborted at iteration %d: %s", seed, iteration, e)
        records.append(ALRecord.failure(seed, iteration, len(labeled)))
        break
      assert len(set(picks)) == len(picks) and len(picks) >= 1
      labeled.extend(pool[picks].tolist())
      pool = np.delete(pool, picks)
      queried_total += len(picks)
      records.append(self.record(seed, iteration, len(labeled) - len(picks), len(picks), metric,
                                 batch_time, time.monotonic() - start))
      logger.debug("seed %d iteration %d: queried %d, metric %.6g", seed, iteration, len(picks), metric)
      if self.show_progress:
        print_progress_bar(queried_total, cfg.budget, suffix="seed %d" % seed)
      iteration += 1
    logger.info("seed %d finished after %d iterations, final metric %.6g", seed, iteration, records[-1].metric)
    return records

  def record(self, seed, iteration, labeled_count, queried_count, metric, batch_time, total_time):
    if not self.config.record_timing:
      batch_time = total_time = 0.0
    return ALRecord(seed, iteration, labeled_count, queried_count, metric, batch_time, total_time)

"""
Defines the Dataset container and everything that produces one: numeric CSV
ingestion, seeded train/test splits, training-split standardization and the
synthetic tasks used in experiments.
"""

import logging
import math
from dataclasses import dataclass, field, replace
import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler
from enums import Task
from errors import DataError
from special_fn import std_normal_cdf
from util import as_rng

logger = logging.getLogger(__name__)

SYNTHETIC_PREFIX = "synthetic:"
# one cluster on the decision boundary at radius 3, two off it at radius 2, 120° apart
CLUSTER_CENTERS = np.array([[0.0, 3.0], [-np.sqrt(3.0), -1.0], [np.sqrt(3.0), -1.0]])
CLUSTER_SPREAD = 0.1


@dataclass(frozen=True, eq=False)
class Dataset:
  inputs: np.ndarray
  targets: np.ndarray
  name: str = "dataset"
  index: np.ndarray = None  # row ids in the originating dataset
  columns: tuple = None
  target: str = "y"
  clusters: np.ndarray = field(default=None, repr=False)

  def __post_init__(self):
    inputs = np.asarray(self.inputs, dtype=float)
    targets = np.asarray(self.targets, dtype=float).reshape(-1)
    if inputs.ndim != 2:
      raise DataError("inputs must be an N×d matrix, got shape %s" % (inputs.shape,))
    if inputs.shape[0] != targets.size:
      raise DataError("got %d input rows but %d targets" % (inputs.shape[0], targets.size))
    if inputs.shape[0] < 1:
      raise DataError("dataset %s has no rows" % self.name)
    if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
      raise DataError("dataset %s has non-finite entries" % self.name)
    index = np.arange(targets.size) if self.index is None else np.asarray(self.index, dtype=int)
    columns = tuple("x%d" % i for i in range(inputs.shape[1])) if self.columns is None else tuple(self.columns)
    object.__setattr__(self, "inputs", inputs)
    object.__setattr__(self, "targets", targets)
    object.__setattr__(self, "index", index)
    object.__setattr__(self, "columns", columns)

  @property
  def size(self):
    return self.targets.size

  @property
  def dim(self):
    return self.inputs.shape[1]

  def subset(self, rows):
    rows = np.asarray(rows, dtype=int)
    return replace(
        self,
        inputs=self.inputs[rows],
        targets=self.targets[rows],
        index=self.index[rows],
        clusters=None if self.clusters is None else self.clusters[rows],
    )

  def __repr__(self):
    return "Dataset(name=%s, N=%d, d=%d)" % (self.name, self.size, self.dim)


class Standardizer:
  """
  Zero-mean, unit-variance scaling with statistics from a training split
  only. Targets are scaled for regression and left alone for probit.
  Constant columns keep a scale of 1.
  """

  def __init__(self, input_scaler, target_scaler=None):
    self.input_scaler = input_scaler
    self.target_scaler = target_scaler

  @classmethod
  def fit(cls, train, task=Task.REGRESSION):
    input_scaler = StandardScaler().fit(train.inputs)
    constant = [c for c, var in zip(train.columns, input_scaler.var_) if var == 0]
    if constant:
      logger.warning("constant columns %s in the training split are left unscaled", ", ".join(constant))
    target_scaler = None
    if task == Task.REGRESSION:
      target_scaler = StandardScaler().fit(train.targets.reshape(-1, 1))
    return cls(input_scaler, target_scaler)

  def transform_inputs(self, X):
    return self.input_scaler.transform(np.atleast_2d(X))

  def transform_targets(self, y):
    if self.target_scaler is None:
      return np.asarray(y, dtype=float)
    return self.target_scaler.transform(np.reshape(y, (-1, 1))).reshape(-1)

  def inverse_targets(self, y):
    if self.target_scaler is None:
      return np.asarray(y, dtype=float)
    return self.target_scaler.inverse_transform(np.reshape(y, (-1, 1))).reshape(-1)

  @property
  def target_scale(self):
    return 1.0 if self.target_scaler is None else float(self.target_scaler.scale_[0])

  def transform(self, dataset):
    return replace(
        dataset,
        inputs=self.transform_inputs(dataset.inputs),
        targets=self.transform_targets(dataset.targets),
    )


def _data_line(position):
  # header is line 1 of the file
  return int(position) + 2


def load_csv(path, target_column):
  """
  Reads a numeric CSV with a header row. Every column other than
  'target_column' becomes an input.
  """
  try:
    frame = pd.read_csv(path)
  except FileNotFoundError:
    raise DataError("no such file", path=path)
  except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
    raise DataError("cannot parse CSV: %s" % e, path=path)
  except OSError as e:
    raise DataError(str(e), path=path)
  if target_column not in frame.columns:
    raise DataError("target column not found", path=path, column=target_column)
  if len(frame) == 0:
    raise DataError("no data rows", path=path)
  for column in frame.columns:
    values = pd.to_numeric(frame[column], errors='coerce')
    bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
    if bad.any():
      position = int(np.flatnonzero(bad.to_numpy())[0])
      raise DataError("non-numeric or missing value %r" % (frame[column].iloc[position],),
                      path=path, row=_data_line(position), column=column)
    frame[column] = values.astype(float)
  columns = [c for c in frame.columns if c != target_column]
  if not columns:
    raise DataError("no input columns besides the target", path=path)
  dataset = Dataset(
      inputs=frame[columns].to_numpy(),
      targets=frame[target_column].to_numpy(),
      name=str(path),
      columns=tuple(str(c) for c in columns),
      target=str(target_column),
  )
  logger.info("loaded %r from %s", dataset, path)
  return dataset


def split(dataset, test_fraction, seed):
  """
  Disjoint, exhaustive train/test split with floor(N·test_fraction) test rows.
  """
  if not 0 < test_fraction < 1:
    raise DataError("test_fraction must lie in (0, 1), got %r" % test_fraction)
  n_test = int(math.floor(dataset.size * test_fraction))
  if n_test < 1 or n_test >= dataset.size:
    raise DataError("a test fraction of %g leaves %d of %d rows for testing" % (test_fraction, n_test, dataset.size))
  train_rows, test_rows = train_test_split(np.arange(dataset.size), test_size=n_test, random_state=seed, shuffle=True)
  return dataset.subset(np.sort(train_rows)), dataset.subset(np.sort(test_rows))


def check_targets(dataset, task):
  """
  Probit targets must be 0 or 1. The row reported is the data row of the
  first offending target, counting the header as row 1.
  """
  if Task(task) != Task.PROBIT:
    return
  bad = np.flatnonzero((dataset.targets != 0.0) & (dataset.targets != 1.0))
  if bad.size:
    position = int(bad[0])
    raise DataError("probit targets must be 0 or 1, got %r" % float(dataset.targets[position]),
                    row=_data_line(dataset.index[position]), column=dataset.target)


def make_linreg(n, d=5, noise_variance=1.0, seed=None):
  """
  x ~ N(0, I), θ* ~ N(0, I), y = θ*ᵀx + ε with ε ~ N(0, noise_variance).
  """
  rng = as_rng(seed)
  theta = rng.standard_normal(d)
  X = rng.standard_normal((n, d))
  y = X @ theta + np.sqrt(noise_variance) * rng.standard_normal(n)
  return Dataset(X, y, name="synthetic:linreg")


def make_probit(n, seed=None, slope=5.0):
  """
  x ~ N(0, I₂) labeled y ~ Ber(Φ(slope·x₁)).
  """
  rng = as_rng(seed)
  X = rng.standard_normal((n, 2))
  y = (rng.random(n) < std_normal_cdf(slope * X[:, 0])).astype(float)
  return Dataset(X, y, name="synthetic:probit")


def make_probit_clusters(n_per_cluster=100, seed=None, slope=5.0):
  """
  Three dense 2-D clusters, labeled like make_probit. Uncertainty-only
  scores favour the outer cluster; diverse batches cover all three.
  Cluster membership is kept in 'clusters'.
  """
  rng = as_rng(seed)
  k = CLUSTER_CENTERS.shape[0]
  clusters = np.repeat(np.arange(k), n_per_cluster)
  X = CLUSTER_CENTERS[clusters] + CLUSTER_SPREAD * rng.standard_normal((k * n_per_cluster, 2))
  y = (rng.random(X.shape[0]) < std_normal_cdf(slope * X[:, 0])).astype(float)
  return Dataset(X, y, name="synthetic:clusters", clusters=clusters)


SYNTHETIC = {
    "linreg": lambda seed: make_linreg(2000, 5, 1.0, seed),
    "probit": lambda seed: make_probit(1000, seed),
    "clusters": lambda seed: make_probit_clusters(100, seed),
}


def load_dataset(source, target_column=None, seed=0):
  """
  Resolves a --data argument: 'synthetic:<name>' or a CSV path.
  """
  if str(source).startswith(SYNTHETIC_PREFIX):
    kind = str(source)[len(SYNTHETIC_PREFIX):]
    if kind not in SYNTHETIC:
      raise DataError("unknown synthetic dataset %r, expected one of %s" % (kind, ", ".join(SYNTHETIC)))
    return SYNTHETIC[kind](seed)
  if target_column is None:
    raise DataError("--target is required for CSV data", path=source)
  return load_csv(source, target_column)

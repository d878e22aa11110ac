import numpy as np
import pytest
from datasets import (Dataset, Standardizer, check_targets, load_csv, load_dataset, make_linreg, make_probit,
                      make_probit_clusters, split)
from enums import Task
from errors import DataError


@pytest.fixture
def csv_file(tmp_path):
  path = tmp_path / "data.csv"
  path.write_text("a,b,y\n1.0,2.0,3.0\n4.0,5.0,6.5\n-1.0,0.5,0.0\n")
  return path


def test_load_csv(csv_file):
  dataset = load_csv(csv_file, "y")
  assert dataset.size == 3
  assert dataset.dim == 2
  assert dataset.columns == ("a", "b")
  assert np.array_equal(dataset.targets, [3.0, 6.5, 0.0])
  assert np.array_equal(dataset.inputs[1], [4.0, 5.0])
  assert dataset.target == "y"


def test_load_csv_reports_bad_cell(tmp_path):
  path = tmp_path / "bad.csv"
  path.write_text("a,b,y\n1.0,2.0,3.0\n4.0,oops,6.5\n")
  with pytest.raises(DataError) as info:
    load_csv(path, "y")
  assert info.value.row == 3
  assert info.value.column == "b"
  assert "oops" in str(info.value)


def test_load_csv_missing_file_and_target(tmp_path, csv_file):
  with pytest.raises(DataError):
    load_csv(tmp_path / "nope.csv", "y")
  with pytest.raises(DataError) as info:
    load_csv(csv_file, "target")
  assert info.value.column == "target"


def test_dataset_rejects_non_finite():
  with pytest.raises(DataError):
    Dataset(np.array([[1.0], [np.inf]]), np.array([0.0, 1.0]))
  with pytest.raises(DataError):
    Dataset(np.zeros((0, 2)), np.zeros(0))


def test_split_sizes_and_coverage():
  dataset = Dataset(np.arange(20.0).reshape(10, 2), np.arange(10.0))
  train, test = split(dataset, 0.2, seed=4)
  assert (train.size, test.size) == (8, 2)
  assert set(train.index) | set(test.index) == set(range(10))
  assert not set(train.index) & set(test.index)
  again, _ = split(dataset, 0.2, seed=4)
  assert np.array_equal(train.index, again.index)
  assert np.array_equal(train.targets, dataset.targets[train.index])


def test_split_rejects_degenerate_sizes():
  dataset = Dataset(np.zeros((4, 1)), np.zeros(4))
  with pytest.raises(DataError):
    split(dataset, 0.2, seed=0)
  with pytest.raises(DataError):
    split(dataset, 1.0, seed=0)


def test_standardized_training_split():
  rng = np.random.default_rng(0)
  dataset = Dataset(rng.normal(5.0, 3.0, (50, 3)), rng.normal(-2.0, 4.0, 50))
  train, _ = split(dataset, 0.2, seed=1)
  standardizer = Standardizer.fit(train, Task.REGRESSION)
  scaled = standardizer.transform(train)
  assert np.all(np.abs(scaled.inputs.mean(axis=0)) <= 1e-10)
  assert np.allclose(scaled.inputs.std(axis=0), 1.0, atol=1e-10)
  assert np.allclose(standardizer.inverse_targets(scaled.targets), train.targets)


def test_standardization_ignores_test_outliers():
  rng = np.random.default_rng(2)
  inputs = rng.standard_normal((20, 2))
  dataset = Dataset(inputs, rng.standard_normal(20))
  train, test = split(dataset, 0.25, seed=3)
  extreme = inputs.copy()
  extreme[test.index] = 1e6
  train_extreme, _ = split(Dataset(extreme, dataset.targets), 0.25, seed=3)
  first = Standardizer.fit(train, Task.REGRESSION).transform_inputs(train.inputs)
  second = Standardizer.fit(train_extreme, Task.REGRESSION).transform_inputs(train_extreme.inputs)
  assert np.array_equal(first, second)


def test_constant_column_keeps_unit_scale(caplog):
  dataset = Dataset(np.column_stack([np.ones(10), np.arange(10.0)]), np.zeros(10))
  standardizer = Standardizer.fit(dataset, Task.PROBIT)
  scaled = standardizer.transform(dataset)
  assert np.array_equal(scaled.inputs[:, 0], np.zeros(10))
  assert np.array_equal(scaled.targets, dataset.targets)
  assert "x0" in caplog.text


def test_synthetic_generators():
  linreg = make_linreg(100, 5, 0.5, seed=0)
  assert (linreg.size, linreg.dim) == (100, 5)
  assert np.array_equal(linreg.inputs, make_linreg(100, 5, 0.5, seed=0).inputs)
  probit = make_probit(200, seed=1)
  assert set(np.unique(probit.targets)) <= {0.0, 1.0}
  clusters = make_probit_clusters(30, seed=2)
  assert clusters.size == 90
  assert np.array_equal(np.bincount(clusters.clusters), [30, 30, 30])
  train, _ = split(clusters, 0.2, seed=0)
  assert np.array_equal(train.clusters, clusters.clusters[train.index])


def test_load_dataset_resolves_sources(csv_file):
  assert load_dataset("synthetic:probit", seed=3).name == "synthetic:probit"
  assert load_dataset("synthetic:linreg").size == 2000
  assert load_dataset(str(csv_file), "y").size == 3
  with pytest.raises(DataError):
    load_dataset("synthetic:unknown")
  with pytest.raises(DataError):
    load_dataset(str(csv_file))


def test_probit_targets_must_be_binary(csv_file):
  dataset = load_csv(csv_file, "y")
  check_targets(dataset, Task.REGRESSION)
  with pytest.raises(DataError) as info:
    check_targets(dataset, Task.PROBIT)
  assert info.value.column == "y"
  assert info.value.row == 2
  check_targets(make_probit(50, seed=0), Task.PROBIT)

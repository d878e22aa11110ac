"""
Defines ALRecord, the per-iteration row of an active-learning run, and the
results files they are written to and read from (CSV or JSON lines), plus
the cross-seed summary table.
"""

import json
import logging
from dataclasses import astuple, dataclass, fields
import numpy as np
import pandas as pd
from enums import ResultFormat
from errors import DataError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class ALRecord:
  seed: int
  iteration: int
  labeled_count: int  # points the model was fit on
  queried_count: int  # size of the batch chosen afterwards
  metric: float  # RMSE or accuracy on the test split
  batch_time_s: float
  total_time_s: float

  def __post_init__(self):
    for f in fields(self):
      cast = int if f.name in INT_FIELDS else float
      object.__setattr__(self, f.name, cast(getattr(self, f.name)))

  @property
  def failed(self):
    return np.isnan(self.metric)

  @classmethod
  def failure(cls, seed, iteration, labeled_count):
    return cls(seed, iteration, labeled_count, 0, float("nan"), 0.0, 0.0)


FIELDS = tuple(f.name for f in fields(ALRecord))
INT_FIELDS = ("seed", "iteration", "labeled_count", "queried_count")
HEADER = ",".join(FIELDS)


def records_frame(records):
  frame = pd.DataFrame([astuple(r) for r in records], columns=list(FIELDS))
  return frame.astype({f: "int64" for f in INT_FIELDS}).astype({f: "float64" for f in FIELDS if f not in INT_FIELDS})


def _from_row(row):
  return ALRecord(*(int(row[f]) if f in INT_FIELDS else float(row[f]) for f in FIELDS))


def write_results(records, path, format=None):
  """
  Floats are written with 17 significant digits so files read back into
  identical records.
  """
  format = ResultFormat.from_path(path) if format is None else ResultFormat(format)
  records = sorted(records, key=lambda r: (r.seed, r.iteration))
  try:
    if format == ResultFormat.CSV:
      records_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    else:
      with open(path, "w") as outfile:
        for record in records:
          outfile.write(json.dumps(dict(zip(FIELDS, astuple(record)))) + "\n")
  except OSError as e:
    raise DataError("cannot write results: %s" % e.strerror, path=path)
  logger.info("wrote %d records to %s", len(records), path)


def read_results(path, format=None):
  format = ResultFormat.from_path(path) if format is None else ResultFormat(format)
  try:
    if format == ResultFormat.CSV:
      frame = pd.read_csv(path, float_precision="round_trip")
      if tuple(frame.columns) != FIELDS:
        raise DataError("unexpected header %r, expected %r" % (",".join(frame.columns), HEADER), path=path)
      return [_from_row(row) for row in frame.to_dict("records")]
    with open(path) as infile:
      rows = [json.loads(line) for line in infile if line.strip()]
  except OSError as e:
    raise DataError("cannot read results: %s" % e.strerror, path=path)
  except (ValueError, pd.errors.ParserError) as e:
    raise DataError("malformed results file: %s" % e, path=path)
  for i, row in enumerate(rows):
    if tuple(row) != FIELDS:
      raise DataError("unexpected fields %r" % sorted(row), path=path, row=i + 1)
  return [_from_row(row) for row in rows]


def summarize(records, label=None):
  """
  One summary row: final-iteration metric mean and standard error across
  seeds, mean batch construction time per iteration (BT/it), mean total
  time per iteration (TT/it) and mean cumulative time per seed. Seeds that
  ended in a failure row are counted but left out of the metric.
  """
  frame = records_frame(records)
  if frame.empty:
    raise DataError("no records to summarize")
  finals = frame.sort_values(["seed", "iteration"]).groupby("seed").tail(1)
  completed = finals["metric"].dropna()
  succeeded = frame[frame["metric"].notna()]
  sem = completed.sem() if completed.size > 1 else 0.0
  summary = pd.DataFrame([{
      "strategy": label or "",
      "seeds": int(finals.shape[0]),
      "failed": int(finals.shape[0] - completed.size),
      "final_labeled": int(finals["labeled_count"].max()),
      "metric_mean": completed.mean() if completed.size else float("nan"),
      "metric_sem": 0.0 if np.isnan(sem) else sem,
      "bt_per_it": succeeded["batch_time_s"].mean(),
      "tt_per_it": succeeded["total_time_s"].mean(),
      "total_time": succeeded.groupby("seed")["total_time_s"].sum().mean(),
  }])
  return summary


def format_summary(summary):
  return summary.to_string(index=False, float_format=lambda v: "%.6g" % v)

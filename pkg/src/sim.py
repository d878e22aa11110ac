"""
Defines the absolute top-level behavior of the project. This is the python
file to be run from the command line:

  python sim.py run --data synthetic:linreg --strategy acs-fw-projected --out acs.csv
  python sim.py summarize --in acs.csv random.csv
  python sim.py plot --in acs.csv random.csv --out curves.html
  python sim.py bench --pool-sizes 10000,40000

Experiments can also be run from Python by creating a Sim object and calling it.
"""

import argparse
import logging
import multiprocessing as mp
import sys
import time
from json import dump
from pathlib import Path
import numpy as np
import pandas as pd
from config import ALConfig
from coreset_fw import acs_fw_projected
from datasets import check_targets, load_dataset, make_linreg
from enums import ResultFormat, Strategy, Task
from errors import EXIT_OK, EXIT_USAGE, ALError, ConfigError
from models import LinRegModel
from plot import learning_curves
from process import Process
from results import format_summary, read_results, summarize, write_results
from util import format_elapsed, parse_seeds, print_progress_bar

logger = logging.getLogger(__name__)

BENCH_LABELED = 20
BENCH_DIM = 5


def _run_seed(args):
  config, dataset, seed = args
  return Process(config, dataset).run_seed(seed)


class Sim:
  def __init__(self, config, dataset, show_progress=True):
    check_targets(dataset, config.task)
    self.config = config
    self.dataset = dataset
    self.show_progress = show_progress
    self.start_time = time.time()
    self.records = []

  def multiprocess_sim(self):
    jobs = [(self.config, self.dataset, seed) for seed in self.config.seeds]
    with mp.Pool(self.config.workers) as pool:
      results = pool.map(_run_seed, jobs)
    return [record for seed_records in results for record in seed_records]

  def sequential_sim(self):
    records = []
    for i, seed in enumerate(self.config.seeds):
      records.extend(Process(self.config, self.dataset).run_seed(seed))
      if self.show_progress:
        print_progress_bar(i + 1, len(self.config.seeds), suffix="seeds")
    return records

  def simulate(self):
    """
    Runs every seed and returns the records ordered by (seed, iteration)
    regardless of the order the seeds finished in.
    """
    logger.info("running %s on %r for %d seeds", self.config.strategy, self.dataset, len(self.config.seeds))
    if self.config.workers > 1 and len(self.config.seeds) > 1:
      records = self.multiprocess_sim()
    else:
      records = self.sequential_sim()
    self.records = sorted(records, key=lambda r: (r.seed, r.iteration))
    return self.records

  def save(self, path, format=None):
    write_results(self.records, path, format)
    values_path = Path(path).with_name(Path(path).stem + ".values.json")
    with open(values_path, 'w') as outfile:
      dump(self.get_values(), outfile, indent=2)

  def run(self, out=None, format=None):
    self.simulate()
    logger.info("Time Elapsed: %s", format_elapsed(time.time() - self.start_time))
    if out is not None:
      self.save(out, format)
    return self.records

  def get_values(self):
    values = self.config.to_dict()
    values["data"] = self.dataset.name
    return values


def run_al(config, dataset):
  return Sim(config, dataset, show_progress=False).simulate()


def bench(pool_sizes, projections=10, batch_size=10, repeats=3, seed=0):
  """
  Mean acs_fw_projected batch construction time per pool size, with the
  ratio to the smallest pool.
  """
  rows = []
  labeled = make_linreg(BENCH_LABELED, BENCH_DIM, 1.0, seed)
  model = LinRegModel.fit(labeled.inputs, labeled.targets)
  rng = np.random.default_rng(seed)
  for M in pool_sizes:
    pool = rng.standard_normal((M, BENCH_DIM))
    times = []
    for r in range(repeats):
      start = time.monotonic()
      acs_fw_projected(model, pool, batch_size, projections, seed + r)
      times.append(time.monotonic() - start)
    rows.append({"pool_size": M, "batch_time_s": float(np.mean(times))})
  table = pd.DataFrame(rows)
  table["ratio"] = table["batch_time_s"] / table.loc[table["pool_size"].idxmin(), "batch_time_s"]
  return table


class ArgumentParser(argparse.ArgumentParser):
  def error(self, message):
    self.print_usage(sys.stderr)
    self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _int_list(text):
  try:
    return [int(v) for v in text.split(",") if v.strip()]
  except ValueError:
    raise argparse.ArgumentTypeError("expected comma-separated integers, got %r" % text)


def build_parser():
  parser = ArgumentParser(description="Batch active learning with Frank-Wolfe sparse subset approximation.")
  verbosity = parser.add_mutually_exclusive_group()
  verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
  verbosity.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
  commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

  run = commands.add_parser("run", help="run an active-learning experiment over several seeds")
  run.add_argument("--data", required=True, help="CSV path or synthetic:linreg|synthetic:probit|synthetic:clusters")
  run.add_argument("--target", help="name of the target column of a CSV")
  run.add_argument("--task", type=Task, choices=list(Task), default=Task.REGRESSION)
  run.add_argument("--strategy", type=Strategy, choices=sorted(Strategy), default=Strategy.ACS_FW_PROJECTED)
  run.add_argument("--init-labeled", type=int, default=20)
  run.add_argument("--batch-size", type=int, default=10)
  run.add_argument("--budget", type=int, default=100)
  run.add_argument("--projections", type=int, default=10, help="number of random projections J")
  run.add_argument("--noise-var", type=float, default=1.0)
  run.add_argument("--prior-var", type=float, default=1.0)
  run.add_argument("--seeds", default="0..20", help='e.g. "0..40" (half-open) or "1,5,9"')
  run.add_argument("--test-fraction", type=float, default=0.2)
  run.add_argument("--standardize", action="store_true", help="standardize inputs (and regression targets) per training split")
  run.add_argument("--bald-samples", type=int, default=1000)
  run.add_argument("--impute-threshold", type=float, default=0.5)
  run.add_argument("--workers", type=int, default=1)
  run.add_argument("--no-timing", action="store_true", help="write zero times so repeated runs give identical files")
  run.add_argument("--data-seed", type=int, default=0, help="seed of synthetic data generation")
  run.add_argument("--out", required=True)
  run.add_argument("--format", type=ResultFormat, choices=list(ResultFormat))
  run.set_defaults(func=command_run)

  summ = commands.add_parser("summarize", help="final-metric mean ± standard error per results file")
  summ.add_argument("--in", dest="inputs", nargs="+", required=True)
  summ.add_argument("--out", help="also write the summary as CSV")
  summ.set_defaults(func=command_summarize)

  plot = commands.add_parser("plot", help="learning curves of results files as HTML")
  plot.add_argument("--in", dest="inputs", nargs="+", required=True)
  plot.add_argument("--out", required=True)
  plot.add_argument("--ylabel", default="Test metric")
  plot.add_argument("--show", action="store_true")
  plot.set_defaults(func=command_plot)

  ben = commands.add_parser("bench", help="batch construction time against pool size")
  ben.add_argument("--pool-sizes", type=_int_list, default=[10000, 40000])
  ben.add_argument("--projections", type=int, default=10)
  ben.add_argument("--batch-size", type=int, default=10)
  ben.add_argument("--repeats", type=int, default=3)
  ben.set_defaults(func=command_bench)
  return parser


def config_from_args(args):
  return ALConfig(
      task=args.task,
      strategy=args.strategy,
      init_labeled=args.init_labeled,
      batch_size=args.batch_size,
      budget=args.budget,
      projections=args.projections,
      noise_variance=args.noise_var,
      prior_variance=args.prior_var,
      seeds=parse_seeds(args.seeds),
      test_fraction=args.test_fraction,
      standardize=args.standardize,
      bald_samples=args.bald_samples,
      impute_threshold=args.impute_threshold,
      workers=args.workers,
      record_timing=not args.no_timing,
  )


def command_run(args):
  config = config_from_args(args)
  dataset = load_dataset(args.data, args.target, args.data_seed)
  show_progress = sys.stderr.isatty() and not args.quiet
  Sim(config, dataset, show_progress).run(args.out, args.format)


def command_summarize(args):
  table = pd.concat([summarize(read_results(path), Path(path).stem) for path in args.inputs], ignore_index=True)
  print(format_summary(table))
  if args.out:
    table.to_csv(args.out, index=False)


def command_plot(args):
  figure = learning_curves(args.inputs, args.ylabel)
  figure.write_html(args.out)
  logger.info("wrote %s", args.out)
  if args.show:
    figure.show()


def command_bench(args):
  if not args.pool_sizes or min(args.pool_sizes) < 1:
    raise ConfigError("pool sizes must be positive")
  table = bench(args.pool_sizes, args.projections, args.batch_size, args.repeats)
  print(table.to_string(index=False, float_format=lambda v: "%.4g" % v))


def main(argv=None):
  args = build_parser().parse_args(argv)
  level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
  logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
  try:
    args.func(args)
  except ALError as e:
    logger.error("%s", e)
    return e.exit_code
  return EXIT_OK


if __name__ == "__main__":
  sys.exit(main())

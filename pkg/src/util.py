"""
Defines several helper/utility methods that are used throughout the code-base
for breaking ties, parsing seed ranges, reporting progress, etc.
"""

import sys
import numpy as np
from numpy.random import default_rng
from errors import ConfigError


def as_rng(seed):
  """
  Returns a numpy Generator for an integer seed. A Generator passed in is
  returned unchanged so callers can share one stream.
  """
  if isinstance(seed, np.random.Generator):
    return seed
  return default_rng(seed)


def argmax_lowest(values, mask=None):
  """
  Index of the maximum of 'values', restricted to entries where 'mask' is
  True. Ties resolve to the lowest index.
  Ex:
    values=[4, 1, 4, 2] => 0
    values=[4, 1, 4, 2], mask=[False, True, True, True] => 2
  Returns None when no entry is eligible.
  """
  values = np.asarray(values, dtype=float)
  if mask is not None:
    values = np.where(mask, values, -np.inf)
  if values.size == 0 or not np.any(values > -np.inf):
    return None
  return int(np.argmax(values))


def parse_seeds(text):
  """
  Parses a seed specification into a list of integers.
  Ex:
    "0..4"   => [0, 1, 2, 3]
    "3,7,11" => [3, 7, 11]
    "5"      => [5]
  The range form is half-open, like range().
  """
  text = str(text).strip()
  try:
    if ".." in text:
      start, stop = text.split("..", 1)
      seeds = list(range(int(start), int(stop)))
    else:
      seeds = [int(s) for s in text.split(",") if s.strip()]
  except ValueError:
    raise ConfigError("cannot parse seeds %r" % text)
  if not seeds:
    raise ConfigError("seed specification %r is empty" % text)
  return seeds


def format_elapsed(seconds):
  return "{}h {}m {}s".format(
      int(seconds // (60 * 60)),
      int(seconds // 60 % 60),
      int(seconds % 60)
  )


def print_progress_bar(iteration, total, suffix='', length=50, fill='█', stream=None):
  """
  Call in a loop to draw a terminal progress bar on stderr.
  Parameters:
    iteration - Required : current iteration (Int)
    total     - Required : total iterations (Int)
    suffix    - Optional : suffix string (Str)
    length    - Optional : character length of bar (Int)
    fill      - Optional : bar fill character (Str)
  """
  stream = sys.stderr if stream is None else stream
  percent = "%04.1f" % (100 * (iteration / float(total)))
  filled_length = int(length * iteration // total)
  bar = fill * filled_length + '-' * (length - filled_length)
  space = ' ' if float(percent) < 100 else ''
  end = '\n' if iteration >= total else '\r'
  print(f'\r{space}{percent}% |{bar}| {suffix}', end=end, file=stream)

"""
Defines ALConfig, the full set of parameters of an active-learning
experiment. A copy is saved next to every results file as values.json so a
run can be reproduced.
"""

from dataclasses import asdict, dataclass, field
from enums import Strategy, Task
from errors import ConfigError


@dataclass(frozen=True)
class ALConfig:
  task: Task = Task.REGRESSION
  strategy: Strategy = Strategy.ACS_FW_PROJECTED
  init_labeled: int = 20
  batch_size: int = 10
  budget: int = 100
  projections: int = 10
  noise_variance: float = 1.0
  prior_variance: float = 1.0
  seeds: tuple = field(default_factory=lambda: tuple(range(20)))
  test_fraction: float = 0.2
  standardize: bool = False
  bald_samples: int = 1000
  impute_threshold: float = 0.5
  workers: int = 1
  record_timing: bool = True

  def __post_init__(self):
    try:
      object.__setattr__(self, "task", Task(self.task))
      object.__setattr__(self, "strategy", Strategy(self.strategy))
    except ValueError as e:
      raise ConfigError(str(e))
    object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
    if not 1 <= self.batch_size <= self.budget:
      raise ConfigError("need budget >= batch_size >= 1, got budget=%d, batch_size=%d" % (self.budget, self.batch_size))
    if self.init_labeled < 1:
      raise ConfigError("init_labeled must be at least 1, got %d" % self.init_labeled)
    if not 0 < self.test_fraction < 1:
      raise ConfigError("test_fraction must lie in (0, 1), got %r" % self.test_fraction)
    if self.projections < 1:
      raise ConfigError("projections must be at least 1, got %d" % self.projections)
    if self.noise_variance <= 0 or self.prior_variance <= 0:
      raise ConfigError("noise_variance and prior_variance must be positive")
    if not self.seeds:
      raise ConfigError("at least one seed is required")
    if len(set(self.seeds)) != len(self.seeds):
      raise ConfigError("seeds must be distinct")
    if self.bald_samples < 1:
      raise ConfigError("bald_samples must be at least 1, got %d" % self.bald_samples)
    if not 0 <= self.impute_threshold <= 1:
      raise ConfigError("impute_threshold must lie in [0, 1], got %r" % self.impute_threshold)
    if self.workers < 1:
      raise ConfigError("workers must be at least 1, got %d" % self.workers)

  def to_dict(self):
    values = asdict(self)
    values["task"] = self.task.value
    values["strategy"] = self.strategy.value
    values["seeds"] = list(self.seeds)
    return values

  @classmethod
  def from_dict(cls, values):
    values = dict(values)
    unknown = set(values) - set(cls.__dataclass_fields__)
    if unknown:
      raise ConfigError("unknown configuration keys: %s" % ", ".join(sorted(unknown)))
    return cls(**values)

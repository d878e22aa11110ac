"""
Defines Task (which probabilistic model), Strategy (how a batch is chosen)
and ResultFormat Enums used throughout this project
"""

from enum import Enum


class Task(Enum):
  REGRESSION = "regression"
  PROBIT = "probit"

  def __str__(self):
    return self.value


class Strategy(Enum):
  ACS_FW = "acs-fw"
  ACS_FW_PROJECTED = "acs-fw-projected"
  RANDOM = "random"
  MAXENT = "maxent"
  BALD = "bald"
  MAXENT_SG = "maxent-sg"  # sequential greedy, true labels
  MAXENT_I = "maxent-i"  # sequential greedy, imputed labels

  def __lt__(self, other):
    if self.__class__ is other.__class__:
      return self.value < other.value
    return NotImplemented

  def __str__(self):
    return self.value

  def __repr__(self):
    return str(self)

  @property
  def fixed_batch_size(self):
    return self not in (Strategy.ACS_FW, Strategy.ACS_FW_PROJECTED)


class ResultFormat(Enum):
  CSV = "csv"
  JSONL = "jsonl"

  def __str__(self):
    return self.value

  @classmethod
  def from_path(cls, path):
    return cls.JSONL if str(path).endswith(".jsonl") else cls.CSV

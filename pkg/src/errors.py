"""
Defines the exception hierarchy used throughout the project and the process
exit codes the command line maps them to.
"""


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class ALError(Exception):
  exit_code = EXIT_USAGE


class ConfigError(ALError, ValueError):
  exit_code = EXIT_USAGE


class DataError(ALError, ValueError):
  exit_code = EXIT_DATA

  def __init__(self, message, path=None, row=None, column=None):
    self.path = path
    self.row = row
    self.column = column
    where = []
    if path is not None:
      where.append("file %s" % path)
    if row is not None:
      where.append("row %d" % row)
    if column is not None:
      where.append("column %r" % column)
    super().__init__(message + (" (" + ", ".join(where) + ")" if where else ""))


class NumericalError(ALError, ArithmeticError):
  exit_code = EXIT_NUMERICAL


class FitError(NumericalError):
  """
  Raised when a posterior cannot be computed: singular normal equations or
  a Newton solve that did not reach its gradient tolerance.
  """

  def __init__(self, message, iterations=None, grad_norm=None):
    self.iterations = iterations
    self.grad_norm = grad_norm
    if iterations is not None:
      message = "%s after %d iterations (|grad| = %.3e)" % (message, iterations, grad_norm)
    super().__init__(message)


class EmptyPoolError(NumericalError):
  pass


class ResidualConverged(NumericalError):
  """
  The Frank-Wolfe residual is already zero, so the line search is 0/0.
  """
  pass

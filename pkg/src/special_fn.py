"""
Standard normal PDF/CDF/log-CDF, Owen's T function and the bivariate normal
CDF used by the closed-form probit kernels.

Every function accepts scalars or numpy arrays (broadcast against each other)
and returns a float when all of its inputs are scalars.
"""

import numpy as np
from scipy.special import entr, log_ndtr, ndtr
from scipy.special import owens_t as _owens_t

TWO_PI = 2.0 * np.pi
LOG_CDF_FLOOR = -745.0
RHO_DEGENERATE = 1e-12
# arguments closer to zero than this take the axis formula of bvn_cdf
_ZERO_ARG = 1e-100


def _check_finite(*args):
  for arg in args:
    if not np.all(np.isfinite(arg)):
      raise ValueError("special functions require finite arguments, got %r" % (arg,))


def _as_output(value, *inputs):
  if all(np.ndim(x) == 0 for x in inputs):
    return float(np.reshape(value, -1)[0])
  return value


def std_normal_pdf(z):
  _check_finite(z)
  z = np.asarray(z, dtype=float)
  return _as_output(np.exp(-0.5 * z * z) / np.sqrt(TWO_PI), z)


def std_normal_cdf(z):
  _check_finite(z)
  return _as_output(ndtr(np.asarray(z, dtype=float)), z)


def std_normal_logcdf(z):
  """
  log Φ(z), clamped below at -745 (the log of the smallest subnormal double)
  so downstream products never see -inf.
  """
  _check_finite(z)
  return _as_output(np.maximum(log_ndtr(np.asarray(z, dtype=float)), LOG_CDF_FLOOR), z)


def owens_t(h, a):
  """
  Owen's T function

    T(h, a) = 1/(2π) ∫_0^a exp(-h²(1 + x²)/2) / (1 + x²) dx

  T is even in h and odd in a.
  """
  _check_finite(h, a)
  hb, ab = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(a, dtype=float))
  return _as_output(_owens_t(hb, ab), h, a)


def _bvn_cdf(h, k, rho):
  # flat arrays, |rho| < 1 - RHO_DEGENERATE
  root = np.sqrt((1.0 - rho) * (1.0 + rho))
  out = np.empty(h.shape)
  h_zero = np.abs(h) < _ZERO_ARG
  k_zero = np.abs(k) < _ZERO_ARG
  axis = h_zero | k_zero
  if np.any(axis):
    # BvN(x, 0, ρ) = Φ(x)/2 - T(x, -ρ/√(1-ρ²)), symmetric in the two arguments
    x = np.where(k_zero, h, k)[axis]
    out[axis] = 0.5 * ndtr(x) - _owens_t(x, -rho[axis] / root[axis])
  general = ~axis
  if np.any(general):
    hg, kg, rg, sg = h[general], k[general], rho[general], root[general]
    a_h = (kg - rg * hg) / (hg * sg)
    a_k = (hg - rg * kg) / (kg * sg)
    beta = np.where(hg * kg > 0.0, 0.0, 0.5)
    out[general] = 0.5 * (ndtr(hg) + ndtr(kg)) - _owens_t(hg, a_h) - _owens_t(kg, a_k) - beta
  return out


def bvn_cdf(h, k, rho):
  """
  P(X <= h, Y <= k) for standard normals X, Y with correlation rho.
  Correlations within 1e-12 of ±1 use the comonotone and countermonotone
  limits.
  """
  _check_finite(h, k, rho)
  if np.any(np.abs(rho) > 1.0):
    raise ValueError("correlation must satisfy |rho| <= 1, got %r" % (rho,))
  hb, kb, rb = np.broadcast_arrays(
      np.asarray(h, dtype=float), np.asarray(k, dtype=float), np.asarray(rho, dtype=float))
  hf, kf, rf = hb.ravel(), kb.ravel(), rb.ravel()
  out = np.empty(hf.shape)
  upper = rf >= 1.0 - RHO_DEGENERATE
  lower = rf <= -1.0 + RHO_DEGENERATE
  regular = ~(upper | lower)
  out[upper] = np.minimum(ndtr(hf[upper]), ndtr(kf[upper]))
  out[lower] = np.maximum(0.0, ndtr(hf[lower]) + ndtr(kf[lower]) - 1.0)
  if np.any(regular):
    out[regular] = _bvn_cdf(hf[regular], kf[regular], rf[regular])
  out = np.clip(out, 0.0, 1.0).reshape(hb.shape)
  return _as_output(out, h, k, rho)


def bernoulli_entropy(p):
  """
  Entropy in nats of Ber(p), with 0 log 0 = 0.
  """
  p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
  return _as_output(entr(p) + entr(1.0 - p), p)

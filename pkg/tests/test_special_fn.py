import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm
from special_fn import (LOG_CDF_FLOOR, bernoulli_entropy, bvn_cdf, owens_t, std_normal_cdf,
                        std_normal_logcdf, std_normal_pdf)


def owens_t_oracle(h, a):
  value, _ = quad(lambda x: np.exp(-0.5 * h * h * (1 + x * x)) / (1 + x * x), 0.0, a,
                  epsabs=1e-15, epsrel=1e-13, limit=200)
  return value / (2 * np.pi)


def bvn_oracle(h, k, rho):
  root = np.sqrt(1 - rho * rho)
  value, _ = quad(lambda x: norm.pdf(x) * norm.cdf((k - rho * x) / root), -np.inf, h,
                  epsabs=1e-15, epsrel=1e-13, limit=200)
  return value


def test_normal_basics():
  assert std_normal_pdf(0.0) == pytest.approx(1 / np.sqrt(2 * np.pi), abs=1e-15)
  assert std_normal_cdf(0.0) == 0.5
  assert std_normal_cdf(1.5) + std_normal_cdf(-1.5) == pytest.approx(1.0, abs=1e-15)
  assert isinstance(std_normal_cdf(0.3), float)
  assert std_normal_cdf(np.array([0.0, 1.0])).shape == (2,)


def test_logcdf_is_finite_far_in_the_tail():
  assert std_normal_logcdf(-30.0) == pytest.approx(norm.logcdf(-30.0), rel=1e-12)
  assert std_normal_logcdf(-40.0) == LOG_CDF_FLOOR
  assert std_normal_logcdf(-1e5) == LOG_CDF_FLOOR
  assert std_normal_logcdf(10.0) == pytest.approx(0.0, abs=1e-20)


def test_non_finite_arguments_rejected():
  with pytest.raises(ValueError):
    std_normal_cdf(np.nan)
  with pytest.raises(ValueError):
    owens_t(np.inf, 1.0)


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 3.0, 50.0])
def test_owens_t_at_zero_h(a):
  assert owens_t(0.0, a) == pytest.approx(np.arctan(a) / (2 * np.pi), abs=1e-15)


@pytest.mark.parametrize("h", [0.0, 0.3, 1.0, 1.7, 4.0])
def test_owens_t_at_unit_a(h):
  # T(h, 1) = Φ(h)(1 - Φ(h)) / 2
  phi = norm.cdf(h)
  assert owens_t(h, 1.0) == pytest.approx(0.5 * phi * (1 - phi), abs=1e-14)


def test_owens_t_symmetries():
  h = np.array([0.2, 1.4, 3.0])
  a = np.array([0.7, 2.5, 0.1])
  assert np.allclose(owens_t(-h, a), owens_t(h, a), atol=0)
  assert np.allclose(owens_t(h, -a), -owens_t(h, a), atol=0)
  assert owens_t(1.3, 0.0) == 0.0


def test_owens_t_broadcasts():
  out = owens_t(np.array([[0.5], [2.0]]), np.array([0.5, 1.0, 2.0]))
  assert out.shape == (2, 3)
  assert out[1, 2] == pytest.approx(owens_t_oracle(2.0, 2.0), abs=1e-12)


def test_owens_t_vanishes_for_huge_h():
  assert owens_t(50.0, 3.0) == pytest.approx(0.0, abs=1e-300)


@pytest.mark.slow
def test_owens_t_matches_quadrature_on_grid():
  hs = np.linspace(-5.0, 5.0, 50)
  As = np.linspace(-10.0, 10.0, 50)
  H, A = np.meshgrid(hs, As)
  ours = owens_t(H, A)
  oracle = np.vectorize(owens_t_oracle)(H, A)
  assert np.max(np.abs(ours - oracle)) < 1e-12


def test_bvn_exact_values():
  for rho in (-0.9, -0.3, 0.0, 0.5, 0.95):
    assert bvn_cdf(0.0, 0.0, rho) == pytest.approx(0.25 + np.arcsin(rho) / (2 * np.pi), abs=1e-14)
  assert bvn_cdf(0.7, -1.2, 0.0) == pytest.approx(norm.cdf(0.7) * norm.cdf(-1.2), abs=1e-14)


def test_bvn_degenerate_correlations():
  assert bvn_cdf(0.4, -0.2, 1.0) == pytest.approx(norm.cdf(-0.2), abs=1e-15)
  assert bvn_cdf(0.4, -0.2, -1.0) == pytest.approx(norm.cdf(0.4) + norm.cdf(-0.2) - 1, abs=1e-15)
  assert bvn_cdf(-2.0, -2.0, -1.0) == 0.0


def test_bvn_rejects_invalid_correlation():
  with pytest.raises(ValueError):
    bvn_cdf(0.0, 0.0, 1.5)


def test_bvn_symmetric_and_in_range():
  rng = np.random.default_rng(3)
  h, k = rng.uniform(-4, 4, (2, 200))
  rho = rng.uniform(-0.999, 0.999, 200)
  forward = bvn_cdf(h, k, rho)
  assert np.allclose(forward, bvn_cdf(k, h, rho), atol=1e-13)
  assert np.all((forward >= 0) & (forward <= 1))


def test_bvn_on_the_axes():
  for x, rho in [(1.1, 0.4), (-0.8, -0.6), (2.5, 0.9)]:
    assert bvn_cdf(x, 0.0, rho) == pytest.approx(bvn_oracle(x, 0.0, rho), abs=1e-10)
    assert bvn_cdf(0.0, x, rho) == pytest.approx(bvn_oracle(x, 0.0, rho), abs=1e-10)


@pytest.mark.slow
def test_bvn_matches_quadrature():
  rng = np.random.default_rng(0)
  triples = np.column_stack([rng.uniform(-4, 4, 500), rng.uniform(-4, 4, 500), rng.uniform(-0.99, 0.99, 500)])
  ours = bvn_cdf(triples[:, 0], triples[:, 1], triples[:, 2])
  oracle = np.array([bvn_oracle(*t) for t in triples])
  assert np.max(np.abs(ours - oracle)) < 1e-10


def test_bernoulli_entropy():
  assert bernoulli_entropy(0.5) == pytest.approx(np.log(2), abs=1e-15)
  assert bernoulli_entropy(0.0) == 0.0
  assert bernoulli_entropy(1.0) == 0.0
  assert np.allclose(bernoulli_entropy(np.array([0.2, 0.8])), -0.2 * np.log(0.2) - 0.8 * np.log(0.8))

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite_e
from scipy import integrate, stats

from eigcount.dpp import (
    BinomialLaw,
    counting_law_gue,
    exact_cgf,
    exact_upper_rate,
    gue_kernel,
    kernel_diagonal,
    oscillator_wavefunctions,
    poisson_binomial,
    restrict_kernel,
    truncation_box,
)
from eigcount.spectral import Interval

PSI0_AT_0 = 0.631618777746064701  # (2 pi)^(-1/4)
K1_AT_0 = 0.398942280401432678  # (2 pi)^(-1/2)


def _psi_direct(k, x):
    """Definition with an explicit Hermite polynomial; fine for small k."""
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    return math.exp(-x * x / 4) * hermite_e.hermeval(x, coef) / math.sqrt(math.sqrt(2 * math.pi) * math.factorial(k))


def test_wavefunction_values():
    psi = oscillator_wavefunctions(3, 0.0)
    assert psi[0] == pytest.approx(PSI0_AT_0, abs=1e-15)
    assert psi[1] == 0.0
    assert psi.shape == (4,)


def test_recurrence_matches_definition():
    xs = np.linspace(-6, 6, 25)
    psi = oscillator_wavefunctions(12, xs)
    for k in range(13):
        for j, x in enumerate(xs):
            assert psi[k, j] == pytest.approx(_psi_direct(k, x), abs=1e-13)


def test_recurrence_does_not_overflow():
    psi = oscillator_wavefunctions(2000, np.array([0.0, 30.0, 95.0]))
    assert np.all(np.isfinite(psi))


@pytest.mark.parametrize("k", [0, 3, 10])
def test_wavefunction_normalization(k):
    val, _ = integrate.quad(lambda x: oscillator_wavefunctions(k, x)[k] ** 2, -np.inf, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_wavefunction_orthogonality():
    val, _ = integrate.quad(lambda x: np.prod(oscillator_wavefunctions(5, x)[[2, 5]]), -np.inf, np.inf, epsabs=1e-13)
    assert abs(val) < 1e-10


def test_kernel_values_and_symmetry():
    assert gue_kernel(1, 0.0, 0.0) == pytest.approx(K1_AT_0, abs=1e-15)
    assert gue_kernel(7, 0.3, -1.2) == gue_kernel(7, -1.2, 0.3)


@pytest.mark.parametrize("n", [1, 5, 20])
def test_kernel_trace(n):
    lo, hi = truncation_box(n)
    val, _ = integrate.quad(lambda x: kernel_diagonal(n, x), -np.inf, np.inf, epsabs=1e-12, limit=400,
                            points=None) if n < 10 else integrate.quad(
        lambda x: kernel_diagonal(n, x), lo - 10, hi + 10, epsabs=1e-12, limit=400)
    assert val == pytest.approx(n, abs=1e-8)


@pytest.mark.parametrize("n", [1, 6, 33])
def test_whole_line_restriction(n):
    r = restrict_kernel(n, Interval())
    assert np.all(r.etas >= 1 - 1e-6)
    assert r.etas.sum() == pytest.approx(n, abs=1e-6)
    law = poisson_binomial(r.etas)
    assert law.pmf[n] == pytest.approx(1.0, abs=1e-6)


def test_empty_restriction():
    r = restrict_kernel(9, Interval(0.7, 0.7))
    assert np.all(r.etas <= 1e-12)
    assert poisson_binomial(r.etas).pmf[0] == 1.0


@pytest.mark.parametrize("n", [1, 2, 7, 16, 50])
def test_half_line_mean(n):
    r = restrict_kernel(n, Interval(0.0, math.inf))
    assert r.etas.sum() == pytest.approx(n / 2, abs=1e-6)


@pytest.mark.parametrize("n, lo, hi", [(10, 1.3, 7.0), (10, -math.inf, -2.0), (25, -3.0, math.inf), (4, -0.5, 0.25)])
def test_trace_matches_kernel_quadrature(n, lo, hi):
    r = restrict_kernel(n, Interval(lo, hi))
    blo, bhi = truncation_box(n)
    a, b = max(lo, blo - 20), min(hi, bhi + 20)
    oracle, _ = integrate.quad(lambda x: kernel_diagonal(n, x), a, b, epsabs=1e-12, limit=400)
    assert r.trace == pytest.approx(oracle, abs=1e-7)


@pytest.mark.parametrize("n, y", [(12, 0.7), (12, -3.1), (40, 2.0)])
def test_complement_pairing(n, y):
    inside = restrict_kernel(n, Interval(y, math.inf)).etas
    outside = restrict_kernel(n, Interval(-math.inf, y)).etas
    np.testing.assert_allclose(np.sort(inside), np.sort(1 - outside), atol=1e-6)


def test_complement_route_is_used_for_long_intervals():
    r = restrict_kernel(16, Interval(-7.0, math.inf))
    assert r.report.used_complement
    assert r.report.stabilization_residual <= 1e-8
    assert not restrict_kernel(16, Interval(7.0, math.inf)).report.used_complement


def test_poisson_binomial_examples():
    np.testing.assert_allclose(poisson_binomial([1, 1]).pmf, [0, 0, 1])
    np.testing.assert_allclose(poisson_binomial([0.5]).pmf, [0.5, 0.5])
    np.testing.assert_allclose(poisson_binomial([0.5, 0.5]).pmf, [0.25, 0.5, 0.25])
    with pytest.raises(ValueError):
        poisson_binomial([1.2])


def _enumerate_pmf(etas):
    pmf = np.zeros(len(etas) + 1)
    for bits in itertools.product([0, 1], repeat=len(etas)):
        pmf[sum(bits)] += np.prod([e if b else 1 - e for e, b in zip(etas, bits)])
    return pmf


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_poisson_binomial_against_enumeration(etas):
    law = poisson_binomial(etas)
    np.testing.assert_allclose(law.pmf, _enumerate_pmf(etas), atol=1e-12)
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(law.pmf >= 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=300))
def test_poisson_binomial_moments(etas):
    law = poisson_binomial(etas)
    m, v = law.moments()
    assert m == pytest.approx(law.mean, abs=1e-10)
    assert v == pytest.approx(law.variance, abs=1e-10)
    assert law.mean == pytest.approx(sum(etas), abs=1e-10)


def test_counting_law_whole_line_and_symmetry():
    law = counting_law_gue(11, Interval())
    assert law.pmf[11] == pytest.approx(1.0, abs=1e-6)
    half = counting_law_gue(64, Interval(0.0, math.inf))
    assert half.mean == pytest.approx(32, abs=1e-5)
    np.testing.assert_allclose(half.pmf, half.pmf[::-1], atol=1e-10)


def test_counting_law_matches_small_monte_carlo():
    from eigcount.mdpstats import counting_samples

    n, reps = 8, 10_000
    law = counting_law_gue(n, Interval(0.3, math.inf))
    counts = counting_samples("GUE", n, Interval(0.3, math.inf), reps, seed=31)
    emp = np.bincount(counts, minlength=n + 1) / reps
    assert 0.5 * np.abs(emp - law.pmf).sum() <= 0.03


def test_cgf_basic_values():
    law = poisson_binomial([0.2, 0.5, 0.9])
    assert exact_cgf(law, 0.0, 2.0) == 0.0
    # two-point law: log E exp(theta (xi - 1/2) / S) with S = 1/2, a = 1
    theta = 0.7
    direct = math.log(0.5 * math.exp(theta * 0.5 / 0.5) + 0.5 * math.exp(-theta * 0.5 / 0.5))
    assert exact_cgf([0.5], theta, 1.0) == pytest.approx(direct, abs=1e-14)
    with pytest.raises(ValueError):
        exact_cgf([1.0, 0.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        exact_cgf([0.5], 1.0, 0.0)


def test_cgf_binomial_moderate_scale():
    K = 10**6
    a = K**0.1
    val = exact_cgf(BinomialLaw(K, 0.5), 1.0, a)
    assert abs(val - 0.5) <= 0.08
    # identical etas given as a raw sequence take the same closed form
    assert exact_cgf(np.full(5000, 0.5), 1.0, 2.0) == pytest.approx(exact_cgf(BinomialLaw(5000, 0.5), 1.0, 2.0), rel=1e-12)


def test_cgf_convex_in_theta():
    law = counting_law_gue(32, Interval(0.4, math.inf))
    thetas = np.linspace(-3, 3, 61)
    vals = np.array([exact_cgf(law, t, 1.5) for t in thetas])
    assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-9)


def test_upper_rate_point_mass():
    law = poisson_binomial([1.0, 1.0, 0.0])
    assert exact_upper_rate(law, 1.0, 1.0) == -math.inf
    with pytest.raises(ValueError):
        exact_upper_rate(poisson_binomial([0.5]), 0.0, 1.0)


@pytest.mark.parametrize("K", [10**4, 10**5, 10**6])
@pytest.mark.parametrize("xi", [1.0, -1.0, 2.5])
def test_binomial_rate_against_incomplete_beta(K, xi):
    a = K**0.1
    law = BinomialLaw(K, 0.5)
    thr = law.mean + xi * a * math.sqrt(law.variance)
    if xi > 0:
        oracle = stats.binom.logsf(math.ceil(thr) - 1, K, 0.5)
    else:
        oracle = stats.binom.logcdf(math.floor(thr), K, 0.5)
    assert exact_upper_rate(law, xi, a) == pytest.approx(oracle / a**2, rel=1e-9)


def test_rate_convolution_and_closed_form_agree():
    pb = poisson_binomial(np.full(400, 0.3))
    bl = BinomialLaw(400, 0.3)
    for xi in (-2.0, -0.5, 0.5, 2.0):
        assert exact_upper_rate(pb, xi, 1.3) == pytest.approx(exact_upper_rate(bl, xi, 1.3), rel=1e-10)


def test_rate_symmetric_profile():
    etas = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    law = poisson_binomial(np.concatenate([etas, 1 - etas]))
    for xi in (0.4, 1.0, 1.7):
        assert exact_upper_rate(law, xi, 1.0) == pytest.approx(exact_upper_rate(law, -xi, 1.0), abs=1e-10)


@pytest.mark.xfail(strict=True, reason="a = K^0.1 is too small for the Gaussian prefactor to vanish; exact rate is -0.649")
def test_binomial_rate_within_eight_percent_of_half():
    K = 10**6
    assert abs(exact_upper_rate(BinomialLaw(K, 0.5), 1.0, K**0.1) + 0.5) <= 0.04


def test_variance_growth_slope():
    ns = [64, 128, 256, 512]
    variances = [counting_law_gue(n, Interval(0.0, math.inf)).variance for n in ns]
    slope = np.polyfit(np.log(ns), variances, 1)[0]
    assert abs(slope - 1 / (2 * math.pi**2)) <= 0.25 / (2 * math.pi**2)

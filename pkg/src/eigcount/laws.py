"""Semicircle and Marchenko-Pastur laws.

Densities, distribution functions, quantiles and classical eigenvalue
locations. Semicircle quantities are in normalized units (support [-2, 2]);
Marchenko-Pastur quantities are for ``W = X^* X / n`` with ``X`` of shape
``p x n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "MarchenkoPasturLaw",
    "semicircle_density",
    "semicircle_cdf",
    "semicircle_quantile",
    "semicircle_mass",
    "classical_location",
    "mp_density",
    "mp_cdf",
    "mp_quantile",
]

_MAX_ITER = 100


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"expected finite input, got {x!r}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if arr.ndim == 0 else arr


def semicircle_density(x):
    """Semicircle density ``sqrt(4 - x^2) / (2 pi)`` on [-2, 2], zero elsewhere."""
    x = _check_finite(x)
    inside = np.abs(x) < 2.0
    out = np.zeros_like(x)
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * np.pi)
    return _scalar_or_array(out)


def semicircle_cdf(t):
    """Closed-form semicircle distribution function, clamped to [0, 1]."""
    t = _check_finite(t)
    tc = np.clip(t, -2.0, 2.0)
    out = 0.5 + tc * np.sqrt(4.0 - tc**2) / (4.0 * np.pi) + np.arcsin(tc / 2.0) / np.pi
    out = np.clip(out, 0.0, 1.0)
    out = np.where(t <= -2.0, 0.0, np.where(t >= 2.0, 1.0, out))
    return _scalar_or_array(out)


def semicircle_mass(lower: float, upper: float) -> float:
    """Semicircle probability of ``[lower, upper)``; infinite endpoints allowed."""
    lo = 0.0 if lower == -math.inf else semicircle_cdf(lower)
    hi = 1.0 if upper == math.inf else semicircle_cdf(upper)
    return max(hi - lo, 0.0)


def _safeguarded_newton(f, fprime, target, lo, hi, x0, tol):
    """Solve ``f(x) = target`` on a bracket, falling back to bisection.

    ``f`` must be nondecreasing on ``[lo, hi]`` with ``f(lo) <= target <= f(hi)``.
    """
    x = x0
    best = (math.inf, x0)
    for _ in range(_MAX_ITER):
        r = f(x) - target
        if abs(r) < best[0]:
            best = (abs(r), x)
        if r == 0.0:
            return x
        if r > 0:
            hi = x
        else:
            lo = x
        d = fprime(x)
        step_ok = False
        if d > 0 and math.isfinite(d):
            step = r / d
            x_new = x - step
            step_ok = lo < x_new < hi
            # residual inside tolerance and the Newton step no longer moves x
            if abs(r) <= tol and abs(step) <= 1e-15 * max(1.0, abs(x)):
                return x
        elif abs(r) <= tol:
            return x
        x = x_new if step_ok else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
    if best[0] > tol:
        raise RuntimeError(f"quantile solver did not reach tolerance {tol} (residual {best[0]:.3g})")
    return best[1]


def semicircle_quantile(x: float) -> float:
    """Inverse of :func:`semicircle_cdf` on (0, 1)."""
    x = float(x)
    if not (0.0 < x < 1.0):
        raise ValueError(f"quantile level must lie in (0, 1), got {x}")
    if x == 0.5:
        return 0.0
    # start from the arcsin-free approximation that is exact at the center
    x0 = float(np.clip(2.0 * math.sin(math.pi * (x - 0.5)), -1.999, 1.999))
    return _safeguarded_newton(
        semicircle_cdf, semicircle_density, x, -2.0, 2.0, x0, tol=1e-12
    )


def classical_location(i: int, n: int) -> float:
    """Classical location ``t(i/n)`` of the i-th (1-indexed) eigenvalue."""
    if n < 1 or not (1 <= i <= n):
        raise ValueError(f"index {i} out of range for n={n}")
    if i == n:
        return 2.0
    return semicircle_quantile(i / n)


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    """Finite-n Marchenko-Pastur law with ratio ``p/n >= 1``."""

    p: int
    n: int

    def __post_init__(self):
        if self.n < 1 or self.p < self.n:
            raise ValueError(f"need p >= n >= 1, got p={self.p}, n={self.n}")

    @property
    def gamma(self) -> float:
        return self.p / self.n

    @property
    def alpha(self) -> float:
        return (math.sqrt(self.gamma) - 1.0) ** 2

    @property
    def beta(self) -> float:
        return (math.sqrt(self.gamma) + 1.0) ** 2

    def density(self, x):
        return mp_density(self, x)

    def cdf(self, t):
        return mp_cdf(self, t)

    def quantile(self, x):
        return mp_quantile(self, x)


def mp_density(law: MarchenkoPasturLaw, x):
    x = _check_finite(x)
    a, b = law.alpha, law.beta
    inside = (x > a) & (x < b) & (x > 0)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((xi - a) * (b - xi)) / (2.0 * np.pi * xi)
    return _scalar_or_array(out)


def _mp_lower_mass(law, t):
    # mass of [alpha, t]; algebraic weight absorbs the sqrt edge (or 1/sqrt at 0)
    a, b = law.alpha, law.beta
    if a == 0.0:
        g = lambda x: math.sqrt(b - x) / (2.0 * math.pi)
        wvar = (-0.5, 0.0)
    else:
        g = lambda x: math.sqrt(b - x) / (2.0 * math.pi * x)
        wvar = (0.5, 0.0)
    val, _ = integrate.quad(g, a, t, weight="alg", wvar=wvar, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _mp_upper_mass(law, t):
    a, b = law.alpha, law.beta
    g = lambda x: math.sqrt(x - a) / (2.0 * math.pi * x)
    val, _ = integrate.quad(g, t, b, weight="alg", wvar=(0.0, 0.5), epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _mp_cdf_scalar(law, t):
    a, b = law.alpha, law.beta
    if t <= a:
        return 0.0
    if t >= b:
        return 1.0
    mid = 0.5 * (a + b)
    if t <= mid:
        val = _mp_lower_mass(law, t)
    else:
        val = 1.0 - _mp_upper_mass(law, t)
    return min(max(val, 0.0), 1.0)


def mp_cdf(law: MarchenkoPasturLaw, t):
    """Distribution function of the Marchenko-Pastur law by adaptive quadrature."""
    t = _check_finite(t)
    if t.ndim == 0:
        return _mp_cdf_scalar(law, float(t))
    return np.array([_mp_cdf_scalar(law, float(v)) for v in t.ravel()]).reshape(t.shape)


def mp_quantile(law: MarchenkoPasturLaw, x: float) -> float:
    x = float(x)
    if not (0.0 < x < 1.0):
        raise ValueError(f"quantile level must lie in (0, 1), got {x}")
    a, b = law.alpha, law.beta
    x0 = a + x * (b - a)
    return _safeguarded_newton(
        lambda t: _mp_cdf_scalar(law, t),
        lambda t: mp_density(law, t),
        x, a, b, x0, tol=1e-10,
    )

"""Standardized statistics, rate curves and variance scans."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import dpp
from .ensembles import (
    AtomDistribution,
    EnsembleSpec,
    make_matched_atom,
    sample_spectrum,
)
from .laws import (
    MarchenkoPasturLaw,
    classical_location,
    mp_density,
    mp_quantile,
    semicircle_mass,
)
from .rng import run_replicas
from .spectral import Interval, counting

__all__ = [
    "MdpScaling",
    "RateCurve",
    "VarianceScan",
    "MomentReport",
    "standardized_counting",
    "numerics_counting",
    "bulk_eigenvalue_statistic",
    "covariance_eigenvalue_statistic",
    "rate_curve_exact",
    "rate_curve_mc",
    "wilson_interval",
    "counting_samples",
    "variance_scan",
    "moment_match_report",
    "BULK_GUARD",
]

BULK_GUARD = (0.05, 0.95)
MIN_TAIL_COUNT = 10


class RegimeWarning(UserWarning):
    """The requested deviation scale sits outside ``1 < a < sqrt(V)``."""


@dataclass(frozen=True)
class MdpScaling:
    """Deviation scale ``a_n`` and a note on whether the MDP window is open."""

    a: float
    regime_note: str = "unchecked"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a_n must be positive")

    @classmethod
    def for_variance(cls, a: float, variance: float, warn: bool = True) -> "MdpScaling":
        sd = math.sqrt(variance)
        if a <= 1.0:
            note = f"a_n={a:g} <= 1: central-limit scale"
        elif a >= sd:
            note = f"a_n={a:g} >= sqrt(V)={sd:.4g}: outside the moderate window"
        else:
            note = f"1 < a_n={a:g} < sqrt(V)={sd:.4g}"
        if warn and a >= sd:
            warnings.warn(note, RegimeWarning, stacklevel=2)
        return cls(a, note)


def standardized_counting(N: float, mean: float, variance: float, scaling: MdpScaling) -> float:
    if not variance > 0:
        raise ValueError("variance must be positive")
    return (N - mean) / (scaling.a * math.sqrt(variance))


def numerics_counting(N: float, n: int, interval: Interval, scaling: MdpScaling) -> float:
    """Counting statistic centered at ``n * rho_sc(I)`` with variance ``log(n) / (2 pi^2)``."""
    if n < 3:
        raise ValueError("need n >= 3 so that log n > 1")
    mass = semicircle_mass(interval.lower, interval.upper)
    if interval.length <= 0 or mass <= 0.0 or mass >= 1.0:
        raise ValueError(f"degenerate interval {interval} (semicircle mass {mass:g})")
    return (N - n * mass) / (scaling.a * math.sqrt(math.log(n) / (2 * math.pi**2)))


_PREFACTORS = {
    "GUE": lambda t: math.sqrt((4.0 - t * t) / 2.0),
    "GOE": lambda t: math.sqrt(4.0 - t * t) / 2.0,
    "GSE": lambda t: math.sqrt(4.0 - t * t),
}


def _check_bulk(i, n, guard):
    if not (1 <= i <= n):
        raise ValueError(f"index {i} out of range for n={n}")
    lo, hi = guard
    if not (lo <= i / n <= hi):
        raise ValueError(f"index {i}/{n} is outside the bulk guard [{lo}, {hi}]")


def bulk_eigenvalue_statistic(
    lambda_i, i: int, n: int, kind: str, scaling: MdpScaling, guard=BULK_GUARD
):
    """Rescaled deviation of the i-th normalized eigenvalue from ``t(i/n)``.

    Prefactors: ``sqrt((4-t^2)/2)`` (GUE), ``sqrt(4-t^2)/2`` (GOE),
    ``sqrt(4-t^2)`` (GSE). ``lambda_i`` may be an array of replicas.
    """
    if kind not in _PREFACTORS:
        raise ValueError(f"kind must be one of {sorted(_PREFACTORS)}, got {kind!r}")
    _check_bulk(i, n, guard)
    t = classical_location(i, n)
    factor = _PREFACTORS[kind](t)
    return factor * (np.asarray(lambda_i) - t) * n / (scaling.a * math.sqrt(math.log(n)))


def covariance_eigenvalue_statistic(
    lambda_i, i: int, p: int, n: int, scaling: MdpScaling, guard=BULK_GUARD
):
    law = MarchenkoPasturLaw(p, n)
    _check_bulk(i, n, guard)
    if i == n:
        raise ValueError("i/n must lie strictly inside (0, 1)")
    t = mp_quantile(law, i / n)
    factor = math.sqrt(2.0) * math.pi * mp_density(law, t)
    return factor * (np.asarray(lambda_i) - t) * n / (scaling.a * math.sqrt(math.log(n)))


@dataclass(frozen=True)
class RateCurve:
    xi: np.ndarray
    empirical_rate: np.ndarray
    target_rate: np.ndarray
    method: str
    ci_low: np.ndarray
    ci_high: np.ndarray
    flagged: np.ndarray
    sample_count: Optional[int] = None
    tail_count: Optional[np.ndarray] = None

    def rows(self):
        for j in range(self.xi.size):
            yield {
                "xi": float(self.xi[j]),
                "empirical_rate": float(self.empirical_rate[j]),
                "target_rate": float(self.target_rate[j]),
                "ci_low": float(self.ci_low[j]),
                "ci_high": float(self.ci_high[j]),
            }


def _xi_grid(xi_grid):
    xi = np.asarray(xi_grid, dtype=float).ravel()
    if np.any(xi == 0) or not np.all(np.isfinite(xi)):
        raise ValueError("xi grid must hold finite nonzero values")
    return xi


def rate_curve_exact(dist, scaling: MdpScaling, xi_grid) -> RateCurve:
    """Exact rates on both tails (sign of each xi picks the tail)."""
    xi = _xi_grid(xi_grid)
    if not dist.variance > 0:
        raise ValueError("degenerate law: variance is zero")
    rates = np.array([dpp.exact_upper_rate(dist, x, scaling.a) for x in xi])
    return RateCurve(
        xi=xi, empirical_rate=rates, target_rate=xi**2 / 2, method="exact-pmf",
        ci_low=rates.copy(), ci_high=rates.copy(), flagged=~np.isfinite(rates),
    )


def wilson_interval(successes, trials: int, z: float):
    """Wilson score interval for a binomial proportion."""
    k = np.asarray(successes, dtype=float)
    phat = k / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return np.maximum(center - half, 0.0), np.minimum(center + half, 1.0)


def rate_curve_mc(samples, scaling: MdpScaling, xi_grid, confidence: float = 0.99) -> RateCurve:
    """Empirical tail rates from samples of an already standardized statistic.

    A rate is reported only when at least ten samples fall in the tail;
    other grid points are flagged and carry NaN.
    """
    z = np.asarray(samples, dtype=float).ravel()
    if z.size == 0:
        raise ValueError("no samples")
    if z.size < 1000:
        raise ValueError(f"need at least 1000 samples, got {z.size}")
    xi = _xi_grid(xi_grid)
    counts = np.array([np.sum(z >= x) if x > 0 else np.sum(z <= x) for x in xi])
    zq = stats.norm.ppf(0.5 + confidence / 2)
    lo, hi = wilson_interval(counts, z.size, zq)
    a2 = scaling.a**2
    flagged = counts < MIN_TAIL_COUNT
    with np.errstate(divide="ignore"):
        rate = np.where(flagged, np.nan, np.log(counts / z.size) / a2)
        ci_low = np.where(flagged, np.nan, np.log(lo) / a2)
        ci_high = np.where(flagged, np.nan, np.log(hi) / a2)
    return RateCurve(
        xi=xi, empirical_rate=rate, target_rate=xi**2 / 2, method="monte-carlo",
        ci_low=ci_low, ci_high=ci_high, flagged=flagged, sample_count=z.size, tail_count=counts,
    )


def _spec_for(kind: str, n: int, p_ratio: float = 1.0) -> EnsembleSpec:
    if kind == "wigner-hermitian-matched":
        return EnsembleSpec(
            "wigner-hermitian", n,
            offdiag_atom=make_matched_atom(Fraction(1, 2)), diag_atom=make_matched_atom(1),
        )
    if kind in ("LUE", "covariance-matched"):
        p = int(round(p_ratio * n))
        if kind == "LUE":
            return EnsembleSpec("LUE", n, p=p)
        return EnsembleSpec("covariance", n, p=p, entry_atom=make_matched_atom(Fraction(1, 2)))
    return EnsembleSpec(kind, n)


def counting_samples(
    kind: str, n: int, interval: Interval, replicas: int, seed: int,
    threads: int = 1, method: str = "direct", p_ratio: float = 1.0,
) -> np.ndarray:
    """Monte Carlo counts ``N_I`` on the normalized scale, one per replica."""
    spec = _spec_for(kind, n, p_ratio)

    def one(rng, _):
        spectrum = sample_spectrum(spec, rng, method).normalize()
        return counting(spectrum, interval)

    return np.array(run_replicas(one, replicas, seed, threads), dtype=np.int64)


@dataclass(frozen=True)
class VarianceScan:
    kind: str
    method: str
    ns: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_se: np.ndarray
    slope: float
    intercept: float
    intervals: tuple = field(default=())

    def rows(self):
        for j in range(self.ns.size):
            yield {"n": int(self.ns[j]), "mean": float(self.means[j]), "variance": float(self.variances[j])}


def _sample_variance_se(x: np.ndarray) -> float:
    # standard error of the unbiased sample variance from the fourth central moment
    m = x.size
    c = x - x.mean()
    m2, m4 = np.mean(c**2), np.mean(c**4)
    return float(math.sqrt(max(m4 - (m - 3) / (m - 1) * m2**2, 0.0) / m))


def variance_scan(
    kind: str, ns: Sequence[int], interval: Optional[Interval] = None, method: str = "mc",
    replicas: int = 1000, seed: int = 0, threads: int = 1, p_ratio: float = 1.0,
    sampler: str = "direct",
) -> VarianceScan:
    """Mean and variance of ``N_I`` across dimensions plus a slope against ``log n``.

    For covariance kinds a missing ``interval`` means ``[median, inf)`` of the
    finite-n Marchenko-Pastur law.
    """
    ns = np.asarray(ns, dtype=int)
    if ns.size < 2 or np.any(np.diff(ns) <= 0):
        raise ValueError("n list must be strictly ascending with at least two entries")
    if method not in ("exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact" and kind != "GUE":
        raise ValueError("the exact method is only available for GUE")
    covariance = kind in ("LUE", "covariance-matched")
    if interval is None and not covariance:
        raise ValueError("an interval is required for Wigner kinds")
    means, variances, ses, used = [], [], [], []
    for n in ns:
        iv = interval
        if iv is None:
            law = MarchenkoPasturLaw(int(round(p_ratio * n)), int(n))
            iv = Interval(mp_quantile(law, 0.5), math.inf)
        used.append(iv)
        if method == "exact":
            law = dpp.counting_law_gue(int(n), iv)
            means.append(law.mean)
            variances.append(law.variance)
            ses.append(0.0)
        else:
            x = counting_samples(kind, int(n), iv, replicas, seed + int(n), threads, sampler, p_ratio)
            x = x.astype(float)
            means.append(float(x.mean()))
            variances.append(float(x.var(ddof=1)))
            ses.append(_sample_variance_se(x))
    slope, intercept = np.polyfit(np.log(ns), variances, 1)
    return VarianceScan(
        kind, method, ns, np.array(means), np.array(variances), np.array(ses),
        float(slope), float(intercept), tuple(used),
    )


@dataclass(frozen=True)
class MomentReport:
    atom_kind: str
    target_variance: Fraction
    atom_moments: tuple
    gaussian_moments: tuple
    passed: bool
    first_mismatch: Optional[int]

    def rows(self):
        for k, (m, g) in enumerate(zip(self.atom_moments, self.gaussian_moments), start=1):
            yield {"order": k, "atom": str(m), "gaussian": str(g), "match": m == g}


def moment_match_report(atom: AtomDistribution, target_variance=None) -> MomentReport:
    """Exact comparison of the first four moments with a centered Gaussian."""
    if atom.exact_moments is None:
        raise ValueError("atom carries no exact moment data")
    v = atom.exact_moments[1] if target_variance is None else Fraction(target_variance)
    gauss = (Fraction(0), v, Fraction(0), 3 * v * v)
    mismatch = next((k for k in range(4) if atom.exact_moments[k] != gauss[k]), None)
    return MomentReport(
        atom.kind, v, tuple(atom.exact_moments), gauss, mismatch is None,
        None if mismatch is None else mismatch + 1,
    )

"""Exact law of the GUE counting function.

The GUE eigenvalues (raw scale, density proportional to ``exp(-tr M^2 / 2)``)
form a determinantal process with the rank-n kernel
``K(x, y) = sum_{k<n} psi_k(x) psi_k(y)`` built from oscillator wave
functions. Restricted to an interval ``I`` the kernel has the same nonzero
spectrum as the Gram matrix ``G_jk = int_I psi_j psi_k``, and the number of
points in ``I`` is a sum of independent Bernoulli(eta_k) variables where the
``eta_k`` are the eigenvalues of ``G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .spectral import Interval

__all__ = [
    "QuadratureReport",
    "KernelRestriction",
    "PoissonBinomial",
    "BinomialLaw",
    "oscillator_wavefunctions",
    "gue_kernel",
    "kernel_diagonal",
    "truncation_box",
    "restrict_kernel",
    "poisson_binomial",
    "counting_law_gue",
    "exact_cgf",
    "exact_upper_rate",
]

_GL_ORDER = 8
_MAX_REFINE = 4
_STABLE_TOL = 1e-8
_DRIFT_TOL = 1e-7
_ETA_SLACK = 1e-8
_PB_CUT = 1e-12


def oscillator_wavefunctions(max_degree: int, x) -> np.ndarray:
    """``psi_0(x) .. psi_{max_degree}(x)`` stacked along the first axis.

    ``psi_k(x) = exp(-x^2/4) He_k(x) / sqrt(sqrt(2 pi) k!)`` with probabilists'
    Hermite ``He_k``, evaluated by the normalized three-term recurrence so the
    polynomials themselves never appear.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = np.exp(-(x**2) / 4.0) * (2.0 * math.pi) ** -0.25
    if max_degree >= 1:
        out[1] = x * out[0]
    for k in range(1, max_degree):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def gue_kernel(n: int, x, y):
    """Christoffel-Darboux kernel ``K^(n)(x, y)`` as a direct sum."""
    if n < 1:
        raise ValueError("n must be positive")
    px = oscillator_wavefunctions(n - 1, x)
    py = oscillator_wavefunctions(n - 1, y)
    val = np.sum(px * py, axis=0)
    return float(val) if val.ndim == 0 else val


def kernel_diagonal(n: int, x):
    """One-point density ``K^(n)(x, x)``."""
    return gue_kernel(n, x, x)


def truncation_box(n: int) -> tuple[float, float]:
    half = 2.0 * math.sqrt(n) + 4.0
    return -half, half


def _pieces(interval: Interval, box) -> list[tuple[float, float]]:
    lo, hi = max(interval.lower, box[0]), min(interval.upper, box[1])
    return [(lo, hi)] if hi > lo else []


def _complement_pieces(interval: Interval, box) -> list[tuple[float, float]]:
    out = []
    if interval.lower > box[0]:
        out.append((box[0], min(interval.lower, box[1])))
    if interval.upper < box[1]:
        out.append((max(interval.upper, box[0]), box[1]))
    return [(a, b) for a, b in out if b > a]


def _panel_nodes(pieces, panel_length):
    ref_x, ref_w = np.polynomial.legendre.leggauss(_GL_ORDER)
    xs, ws = [], []
    for a, b in pieces:
        m = max(1, int(math.ceil((b - a) / panel_length)))
        edges = np.linspace(a, b, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs.append((mid[:, None] + half[:, None] * ref_x[None, :]).ravel())
        ws.append((half[:, None] * ref_w[None, :]).ravel())
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def _gram(n, pieces, panel_length):
    x, w = _panel_nodes(pieces, panel_length)
    if x.size == 0:
        return np.zeros((n, n)), 0
    psi = oscillator_wavefunctions(n - 1, x)
    g = (psi * w) @ psi.T
    return 0.5 * (g + g.T), x.size


@dataclass(frozen=True)
class QuadratureReport:
    nodes: int
    box: tuple
    panel_length: float
    refinements: int
    stabilization_residual: float
    used_complement: bool


@dataclass(frozen=True)
class KernelRestriction:
    """Bernoulli parameters of the rank-n GUE kernel restricted to a raw-scale interval."""

    n: int
    interval: Interval
    etas: np.ndarray
    report: QuadratureReport

    @property
    def trace(self) -> float:
        return float(np.sum(self.etas))


def restrict_kernel(n: int, interval: Interval) -> KernelRestriction:
    """Eigenvalues ``eta_k`` of ``K^(n)`` restricted to ``interval`` (raw scale).

    Panels of length ``pi / (2 sqrt n)`` carry an 8-point Gauss-Legendre rule
    and are halved until the sorted etas move by at most 1e-8. When the part
    of the truncation box outside the interval is shorter, its Gram matrix
    ``G_c`` is formed instead and the etas are those of ``Id - G_c``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    box = truncation_box(n)
    direct = _pieces(interval, box)
    comp = _complement_pieces(interval, box)
    use_comp = sum(b - a for a, b in comp) < sum(b - a for a, b in direct)
    pieces = comp if use_comp else direct

    def solve(panel):
        g, nodes = _gram(n, pieces, panel)
        ev = np.linalg.eigvalsh(g)
        if use_comp:
            ev = np.sort(1.0 - ev)
        return ev, nodes

    panel = math.pi / (2.0 * math.sqrt(n))
    etas, nodes = solve(panel)
    residual = math.inf
    refinements = 0
    while refinements < _MAX_REFINE:
        panel /= 2.0
        refinements += 1
        new, nodes = solve(panel)
        residual = max(float(np.max(np.abs(new - etas))), abs(float(new.sum() - etas.sum())))
        etas = new
        if residual <= _STABLE_TOL:
            break
    if residual > _DRIFT_TOL:
        raise RuntimeError(f"kernel quadrature did not stabilize (drift {residual:.3g})")
    if np.any(etas < -_ETA_SLACK) or np.any(etas > 1.0 + _ETA_SLACK):
        raise RuntimeError(
            f"restricted kernel eigenvalues left [0, 1]: min {etas.min():.3g}, max {etas.max():.3g}"
        )
    etas = np.clip(etas, 0.0, 1.0)
    etas.setflags(write=False)
    report = QuadratureReport(nodes, box, panel, refinements, residual, use_comp)
    return KernelRestriction(n, interval, etas, report)


@dataclass(frozen=True)
class PoissonBinomial:
    """Exact law of a sum of independent Bernoulli variables."""

    etas: np.ndarray
    pmf: np.ndarray
    mean: float
    variance: float

    @property
    def support_size(self) -> int:
        return self.pmf.size

    def moments(self) -> tuple[float, float]:
        k = np.arange(self.pmf.size)
        m = float(k @ self.pmf)
        v = float(((k - m) ** 2) @ self.pmf)
        return m, v

    def tail_ge(self, k: int) -> float:
        """``P(N >= k)``."""
        k = max(int(k), 0)
        return float(np.sum(self.pmf[k:])) if k < self.pmf.size else 0.0

    def tail_le(self, k: int) -> float:
        """``P(N <= k)``."""
        k = int(k)
        return float(np.sum(self.pmf[: k + 1])) if k >= 0 else 0.0

    def log_tail_ge(self, k: int) -> float:
        p = self.tail_ge(k)
        return math.log(p) if p > 0 else -math.inf

    def log_tail_le(self, k: int) -> float:
        p = self.tail_le(k)
        return math.log(p) if p > 0 else -math.inf


@dataclass(frozen=True)
class BinomialLaw:
    """Identical-eta profile ``Binomial(size, eta)`` handled in closed form.

    Tails are summed in log space from log-gamma point masses, so sizes far
    beyond what the convolution route can hold are fine.
    """

    size: int
    eta: float

    def __post_init__(self):
        if self.size < 1 or not (0.0 <= self.eta <= 1.0):
            raise ValueError("need size >= 1 and eta in [0, 1]")

    @property
    def mean(self) -> float:
        return self.size * self.eta

    @property
    def variance(self) -> float:
        return self.size * self.eta * (1.0 - self.eta)

    def _logpmf(self, k: np.ndarray) -> np.ndarray:
        n, p = self.size, self.eta
        with np.errstate(divide="ignore"):
            lp, lq = np.log(p), np.log1p(-p)
        k = np.asarray(k, dtype=float)
        out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        out = out + np.where(k > 0, k * lp, 0.0) + np.where(n - k > 0, (n - k) * lq, 0.0)
        return out

    def _log_sum(self, lo: int, hi: int) -> float:
        # terms decay geometrically away from the mode, so stop at 40 nats below the peak
        if lo > hi:
            return -math.inf
        peak = min(max(int(round(self.mean)), lo), hi)
        chunk = 4096
        parts = []
        for direction in (-1, 1):
            start = peak if direction == 1 else peak - 1
            best = -math.inf
            while lo <= start <= hi:
                stop = min(hi, start + chunk - 1) if direction == 1 else max(lo, start - chunk + 1)
                ks = np.arange(start, stop + direction, direction)
                lps = self._logpmf(ks)
                parts.append(lps)
                best = max(best, float(lps.max()))
                if float(lps[-1]) < best - 40.0 - math.log(self.size + 1.0):
                    break
                start = stop + direction
        return float(logsumexp(np.concatenate(parts))) if parts else -math.inf

    def log_tail_ge(self, k: int) -> float:
        return self._log_sum(max(int(k), 0), self.size)

    def log_tail_le(self, k: int) -> float:
        return self._log_sum(0, min(int(k), self.size))


CountLaw = Union[PoissonBinomial, BinomialLaw]


def poisson_binomial(etas: Sequence[float]) -> PoissonBinomial:
    """Exact Poisson-binomial law by sequential convolution."""
    etas = np.asarray(etas, dtype=float).ravel()
    if np.any(etas < 0) or np.any(etas > 1) or np.any(~np.isfinite(etas)):
        raise ValueError("Bernoulli parameters must lie in [0, 1]")
    size = etas.size
    sure = int(np.sum(etas > 1.0 - _PB_CUT))
    active = etas[(etas >= _PB_CUT) & (etas <= 1.0 - _PB_CUT)]
    pmf = np.zeros(size + 1)
    dist = np.ones(1)
    for eta in active:
        nxt = np.empty(dist.size + 1)
        nxt[:-1] = dist * (1.0 - eta)
        nxt[-1] = 0.0
        nxt[1:] += dist * eta
        dist = nxt
    pmf[sure:sure + dist.size] = dist
    pmf /= pmf.sum()
    etas = etas.copy()
    etas.setflags(write=False)
    pmf.setflags(write=False)
    return PoissonBinomial(etas, pmf, float(etas.sum()), float(np.sum(etas * (1.0 - etas))))


def counting_law_gue(n: int, interval: Interval) -> PoissonBinomial:
    """Exact law of ``N_I(M_n / sqrt n)`` for a GUE matrix; ``interval`` is normalized."""
    restriction = restrict_kernel(n, interval.scaled(math.sqrt(n)))
    return poisson_binomial(restriction.etas)


def _law_params(dist):
    """(etas or None, size, eta, mean, variance) for any supported law."""
    if isinstance(dist, BinomialLaw):
        return None, dist.size, dist.eta, dist.mean, dist.variance
    if isinstance(dist, PoissonBinomial):
        etas = np.asarray(dist.etas)
    else:
        etas = np.asarray(dist, dtype=float).ravel()
    if etas.size and np.all(etas == etas[0]):
        eta = float(etas[0])
        return None, etas.size, eta, etas.size * eta, etas.size * eta * (1 - eta)
    return etas, etas.size, None, float(etas.sum()), float(np.sum(etas * (1 - etas)))


def exact_cgf(dist, theta: float, a: float) -> float:
    """``a^-2 log E exp(theta a^2 Z)`` for ``Z = (N - E N) / (a S)``.

    Accepts a :class:`PoissonBinomial`, a :class:`BinomialLaw` or a raw
    sequence of Bernoulli parameters.
    """
    if not a > 0:
        raise ValueError("deviation scale a must be positive")
    etas, size, eta, mean, var = _law_params(dist)
    if not var > 0:
        raise ValueError("degenerate law: variance is zero")
    u = theta * a / math.sqrt(var)
    em1 = math.expm1(u)
    if etas is None:
        total = size * math.log1p(eta * em1)
    else:
        total = float(np.sum(np.log1p(etas * em1)))
    return (total - u * mean) / a**2


def exact_upper_rate(dist, xi: float, a: float) -> float:
    """Exact ``a^-2 log P(Z >= xi)`` for ``xi > 0`` and ``a^-2 log P(Z <= xi)`` for ``xi < 0``.

    ``Z = (N - E N) / (a S)``. Impossible events, including every event for a
    degenerate law, give ``-inf``.
    """
    if xi == 0:
        raise ValueError("xi must be nonzero")
    if not a > 0:
        raise ValueError("deviation scale a must be positive")
    if isinstance(dist, (PoissonBinomial, BinomialLaw)):
        law = dist
    else:
        _, size, eta, _, _ = _law_params(dist)
        law = BinomialLaw(size, eta) if eta is not None else poisson_binomial(dist)
    mean, var = law.mean, law.variance
    if not var > 0:
        return -math.inf
    threshold = mean + xi * a * math.sqrt(var)
    slack = 1e-9 * max(1.0, abs(threshold))
    if xi > 0:
        logp = law.log_tail_ge(math.ceil(threshold - slack))
    else:
        logp = law.log_tail_le(math.floor(threshold + slack))
    return logp / a**2

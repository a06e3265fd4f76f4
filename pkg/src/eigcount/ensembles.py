"""Random matrix ensembles.

Conventions (raw, un-normalized matrices):

* Hermitian Wigner / GUE: off-diagonal ``Z = X + iY`` with ``X, Y`` i.i.d.
  of variance 1/2 (so ``E|Z|^2 = 1`` and ``E Z^2 = 0``), diagonal variance 1.
* Symmetric Wigner / GOE: off-diagonal variance 1, diagonal variance 2.
* Covariance / LUE: ``W = X^* X / n`` with ``X`` of shape ``p x n`` and
  complex entries whose real and imaginary parts have variance 1/2.

GSE spectra are produced from the GOE through alternate order statistics,
never through quaternion algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .spectral import Spectrum, eigenvalues

__all__ = [
    "AtomDistribution",
    "EnsembleSpec",
    "gaussian_atom",
    "rademacher_atom",
    "make_matched_atom",
    "custom_discrete_atom",
    "sample_matrix",
    "sample_spectrum",
    "interlace_even",
    "sample_gue_spectrum_via_interlacing",
    "sample_gse_spectrum",
    "WIGNER_KINDS",
    "COVARIANCE_KINDS",
]

WIGNER_KINDS = ("GUE", "GOE", "wigner-hermitian", "wigner-symmetric")
COVARIANCE_KINDS = ("LUE", "covariance")
ALL_KINDS = WIGNER_KINDS + ("GSE",) + COVARIANCE_KINDS

_ATOM_KINDS = ("gaussian", "rademacher", "three-point-matched", "custom-discrete")


@dataclass(frozen=True)
class AtomDistribution:
    """Law of a single real matrix entry (or of one part of a complex entry).

    ``exact_moments`` holds ``(E X, E X^2, E X^3, E X^4)`` as fractions when
    they are known exactly, otherwise ``None``.
    """

    kind: str
    variance: float
    values: Optional[tuple] = None
    probs: Optional[tuple] = None
    exact_moments: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in _ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if not self.variance > 0:
            raise ValueError("atom variance must be positive")
        if self.kind != "gaussian":
            if self.values is None or self.probs is None or len(self.values) != len(self.probs):
                raise ValueError("discrete atoms need matching values and probs")
            vals = np.asarray(self.values, dtype=float)
            probs = np.asarray(self.probs, dtype=float)
            if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
                raise ValueError("probabilities must be nonnegative and sum to 1")
            if abs(vals @ probs) > 1e-12:
                raise ValueError("atom must have mean zero")
            if abs(vals**2 @ probs - self.variance) > 1e-12 * max(1.0, self.variance):
                raise ValueError("declared variance does not match the support")

    @property
    def scale(self) -> float:
        return math.sqrt(self.variance)

    @property
    def is_discrete(self) -> bool:
        return self.kind != "gaussian"

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(size)
        vals = np.asarray(self.values, dtype=float)
        cum = np.cumsum(np.asarray(self.probs, dtype=float))
        idx = np.searchsorted(cum[:-1], rng.random(size), side="right")
        return vals[idx]


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def gaussian_atom(variance=1) -> AtomDistribution:
    v = _exact(variance)
    return AtomDistribution("gaussian", float(v), exact_moments=(Fraction(0), v, Fraction(0), 3 * v * v))


def rademacher_atom(variance=1) -> AtomDistribution:
    """Symmetric sign atom ``+-sqrt(variance)``."""
    v = _exact(variance)
    s = math.sqrt(v)
    return AtomDistribution(
        "rademacher", float(v), values=(-s, s), probs=(0.5, 0.5),
        exact_moments=(Fraction(0), v, Fraction(0), v * v),
    )


def make_matched_atom(target_variance) -> AtomDistribution:
    """Three-point atom whose first four moments equal those of N(0, v).

    Takes ``+-a`` with probability 1/6 each and 0 with probability 2/3, where
    ``a^2 = 3 v``; then ``E X^2 = v`` and ``E X^4 = 3 v^2``.
    """
    v = _exact(target_variance)
    if v <= 0:
        raise ValueError("target variance must be positive")
    a2 = 3 * v
    q = v / (2 * a2)  # = 1/6
    a = math.sqrt(a2)
    moments = (Fraction(0), 2 * q * a2, Fraction(0), 2 * q * a2 * a2)
    return AtomDistribution(
        "three-point-matched", float(v), values=(-a, 0.0, a),
        probs=(float(q), float(1 - 2 * q), float(q)), exact_moments=moments,
    )


def custom_discrete_atom(values: Sequence, probs: Sequence) -> AtomDistribution:
    """Finite-support atom; moments are exact only for rational inputs.

    Custom atoms are assumed bounded, which covers the stretched-exponential
    tail requirement.
    """
    rational = all(isinstance(x, (int, Fraction)) for x in list(values) + list(probs))
    fvals = [float(x) for x in values]
    fprobs = [float(x) for x in probs]
    variance = float(np.dot(np.square(fvals), fprobs))
    moments = None
    if rational:
        vs = [Fraction(x) for x in values]
        ps = [Fraction(x) for x in probs]
        if sum(ps) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        moments = tuple(sum(p * x**k for x, p in zip(vs, ps)) for k in range(1, 5))
        if moments[0] != 0:
            raise ValueError("atom must have mean zero")
        variance = float(moments[1])
    return AtomDistribution("custom-discrete", variance, tuple(fvals), tuple(fprobs), moments)


@dataclass(frozen=True)
class EnsembleSpec:
    """Which matrix family to draw.

    For Hermitian kinds ``offdiag_atom`` is the law of the real (and of the
    imaginary) part of an off-diagonal entry; for ``covariance`` the
    ``entry_atom`` plays the same role for the entries of ``X``.
    """

    kind: str
    n: int
    p: Optional[int] = None
    offdiag_atom: Optional[AtomDistribution] = None
    diag_atom: Optional[AtomDistribution] = None
    entry_atom: Optional[AtomDistribution] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        kind = self.kind
        if kind in COVARIANCE_KINDS:
            p = self.n if self.p is None else self.p
            if p < self.n:
                raise ValueError(f"covariance kinds need p >= n, got p={p}, n={self.n}")
            object.__setattr__(self, "p", p)
        elif self.p is not None:
            raise ValueError("p only applies to covariance kinds")

        defaults = {
            "GUE": (gaussian_atom(Fraction(1, 2)), gaussian_atom(1), None),
            "GOE": (gaussian_atom(1), gaussian_atom(2), None),
            "LUE": (None, None, gaussian_atom(Fraction(1, 2))),
        }
        if kind in defaults:
            if any(a is not None for a in (self.offdiag_atom, self.diag_atom, self.entry_atom)):
                raise ValueError(f"{kind} has fixed Gaussian atoms")
            off, diag, entry = defaults[kind]
            object.__setattr__(self, "offdiag_atom", off)
            object.__setattr__(self, "diag_atom", diag)
            object.__setattr__(self, "entry_atom", entry)
        elif kind == "wigner-hermitian":
            self._need(self.offdiag_atom, 0.5, "offdiag_atom")
            self._need(self.diag_atom, 1.0, "diag_atom")
        elif kind == "wigner-symmetric":
            self._need(self.offdiag_atom, 1.0, "offdiag_atom")
            self._need(self.diag_atom, 2.0, "diag_atom")
        elif kind == "covariance":
            self._need(self.entry_atom, 0.5, "entry_atom")

    @staticmethod
    def _need(atom, variance, name):
        if atom is None:
            raise ValueError(f"{name} is required")
        if abs(atom.variance - variance) > 1e-12:
            raise ValueError(f"{name} must have variance {variance}, got {atom.variance}")

    @property
    def is_complex(self) -> bool:
        return self.kind in ("GUE", "wigner-hermitian") or self.kind in COVARIANCE_KINDS


def _wigner(n, off, diag, complex_entries, rng):
    upper = off.sample(rng, (n, n))
    if complex_entries:
        upper = upper + 1j * off.sample(rng, (n, n))
    upper = np.triu(upper, 1)
    d = diag.sample(rng, n)
    m = upper + np.conj(upper.T)
    m[np.diag_indices(n)] = d
    return m


def sample_matrix(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one raw Wigner matrix, or a normalized covariance matrix ``X^* X / n``."""
    kind = spec.kind
    if kind == "GSE":
        raise ValueError("GSE matrices are not sampled directly; use sample_gse_spectrum")
    if kind in WIGNER_KINDS:
        return _wigner(spec.n, spec.offdiag_atom, spec.diag_atom, spec.is_complex, rng)
    atom = spec.entry_atom
    x = atom.sample(rng, (spec.p, spec.n)) + 1j * atom.sample(rng, (spec.p, spec.n))
    w = (np.conj(x.T) @ x) / spec.n
    return (w + np.conj(w.T)) / 2


def interlace_even(spectrum_a, spectrum_b) -> np.ndarray:
    """Even order statistics (2nd, 4th, ...) of two superimposed spectra of sizes n, n+1."""
    a = np.asarray(getattr(spectrum_a, "values", spectrum_a), dtype=float)
    b = np.asarray(getattr(spectrum_b, "values", spectrum_b), dtype=float)
    if b.size != a.size + 1:
        raise ValueError(f"sizes must be n and n+1, got {a.size} and {b.size}")
    if np.any(np.diff(a) < 0) or np.any(np.diff(b) < 0):
        raise ValueError("inputs must be sorted ascending")
    merged = np.sort(np.concatenate([a, b]))
    return merged[1::2]


def sample_gue_spectrum_via_interlacing(n: int, rng: np.random.Generator) -> Spectrum:
    """Raw GUE_n spectrum as the even part of independent GOE_n and GOE_{n+1}."""
    if n < 1:
        raise ValueError("n must be positive")
    a = eigenvalues(sample_matrix(EnsembleSpec("GOE", n), rng))
    b = eigenvalues(sample_matrix(EnsembleSpec("GOE", n + 1), rng))
    return Spectrum(interlace_even(a, b), "raw")


def sample_gse_spectrum(n: int, rng: np.random.Generator) -> Spectrum:
    """Raw GSE_n spectrum: even order statistics of GOE_{2n+1}, scaled by 1/sqrt(2)."""
    if n < 1:
        raise ValueError("n must be positive")
    y = eigenvalues(sample_matrix(EnsembleSpec("GOE", 2 * n + 1), rng)).values
    return Spectrum(y[1::2] / math.sqrt(2.0), "raw")


def sample_spectrum(spec: EnsembleSpec, rng: np.random.Generator, method: str = "direct") -> Spectrum:
    """Raw spectrum of one draw from ``spec``.

    ``method`` selects the GUE route (``"direct"`` or ``"interlace"``); covariance
    spectra are already on the normalized scale of ``W``.
    """
    if spec.kind == "GSE":
        return sample_gse_spectrum(spec.n, rng)
    if spec.kind == "GUE" and method == "interlace":
        return sample_gue_spectrum_via_interlacing(spec.n, rng)
    if method not in ("direct", "interlace"):
        raise ValueError(f"unknown sampling method {method!r}")
    spectrum = eigenvalues(sample_matrix(spec, rng))
    if spec.kind in COVARIANCE_KINDS:
        return Spectrum(spectrum.values, "normalized")
    return spectrum

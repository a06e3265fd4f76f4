"""Spectra, intervals, counting functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Spectrum",
    "Interval",
    "eigenvalues",
    "eigenvalues_batch",
    "hermitian_embedding",
    "counting",
    "duality_check",
]

_HERMITIAN_TOL = 1e-12
_PAIR_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues with a scale tag (``"raw"`` or ``"normalized"``)."""

    values: np.ndarray
    scale: str = "raw"
    n: int = field(default=-1)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValueError("spectrum values must be sorted ascending")
        if self.scale not in ("raw", "normalized"):
            raise ValueError(f"unknown scale {self.scale!r}")
        n = vals.size if self.n == -1 else self.n
        if n != vals.size:
            raise ValueError(f"size mismatch: n={n} but {vals.size} values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n", n)

    def __len__(self):
        return self.n

    def normalize(self) -> "Spectrum":
        """Divide by sqrt(n); a normalized spectrum is returned unchanged."""
        if self.scale == "normalized":
            return self
        return Spectrum(self.values / math.sqrt(self.n), "normalized")


@dataclass(frozen=True)
class Interval:
    """``[lower, upper)``; either endpoint may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval: lower {lo} > upper {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"a,b"`` with ``inf``/``-inf`` tokens."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 2:
            raise ValueError(f"interval must look like 'a,b', got {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    def scaled(self, factor: float) -> "Interval":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Interval(self.lower * factor, self.upper * factor)

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, x):
        x = np.asarray(x)
        return (x >= self.lower) & (x < self.upper)

    def __str__(self):
        return f"[{self.lower:g}, {self.upper:g})"


def hermitian_embedding(matrix: np.ndarray) -> np.ndarray:
    """Real symmetric ``[[A, -B], [B, A]]`` for ``A + iB``.

    Works on a single matrix or a stack of matrices.
    """
    a, b = matrix.real, matrix.imag
    top = np.concatenate([a, -b], axis=-1)
    bottom = np.concatenate([b, a], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _check_hermitian(m: np.ndarray):
    if m.shape[-1] != m.shape[-2]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    dev = np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))) if m.size else 0.0
    if dev > _HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3g})")


def eigenvalues_batch(matrices: np.ndarray, method: str = "embed") -> np.ndarray:
    """Sorted eigenvalues of a stack of Hermitian matrices, shape (..., n).

    ``method="embed"`` solves complex input through the doubled real
    symmetric embedding; ``"direct"`` hands it to the complex solver.
    """
    m = np.asarray(matrices)
    _check_hermitian(m)
    if not np.iscomplexobj(m):
        return np.linalg.eigvalsh(m)
    if method == "direct":
        return np.linalg.eigvalsh(m)
    if method != "embed":
        raise ValueError(f"unknown eigen method {method!r}")
    doubled = np.linalg.eigvalsh(hermitian_embedding(m))
    first, second = doubled[..., 0::2], doubled[..., 1::2]
    scale = max(1.0, float(np.max(np.abs(doubled))) if doubled.size else 1.0)
    gap = np.max(np.abs(first - second)) if doubled.size else 0.0
    if gap > _PAIR_TOL * scale:
        raise np.linalg.LinAlgError(f"embedded eigenvalues failed to pair (gap {gap:.3g})")
    return first


def eigenvalues(matrix: np.ndarray, method: str = "embed") -> Spectrum:
    """All eigenvalues of a Hermitian/symmetric matrix as a raw :class:`Spectrum`."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("expected a single 2-D matrix")
    return Spectrum(eigenvalues_batch(m, method), "raw")


def counting(spectrum, interval: Interval) -> int:
    """Number of eigenvalues in ``[lower, upper)``."""
    vals = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    hi = np.searchsorted(vals, interval.upper, side="left")
    lo = np.searchsorted(vals, interval.lower, side="left")
    return int(hi - lo)


def duality_check(spectrum: Spectrum, y: float, i: int) -> bool:
    """Check ``N_[y, inf) <= n - i  iff  lambda_i <= y`` for a 1-indexed ``i``."""
    n = spectrum.n
    if not (1 <= i <= n):
        raise ValueError(f"index {i} out of range for n={n}")
    if np.any(spectrum.values == y):
        raise ValueError("y coincides with an eigenvalue")
    count = counting(spectrum, Interval(y, math.inf))
    return (count <= n - i) == bool(spectrum.values[i - 1] <= y)

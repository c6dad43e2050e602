"""Sensing pipeline: jointly sparse signals, Gaussian projections, 1-bit quantization.

All sensors share one measurement matrix. Row indices are 0-based.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DataError, DimensionError, ParameterError

__all__ = [
    "SignalMatrix",
    "MeasurementMatrix",
    "NoiseModel",
    "BitMatrix",
    "SupportSet",
    "generate_signal_matrix",
    "generate_measurement_matrix",
    "sense",
    "quantize",
    "compute_snr",
]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SignalMatrix:
    """N x P matrix whose columns are the per-sensor signals."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data)
        if arr.ndim == 1:
            arr = _frozen(arr[:, None])
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError(f"signal matrix must be a non-empty 2-D array, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def row_support(self) -> "SupportSet":
        rows = np.flatnonzero(np.any(self.data != 0, axis=1))
        return SupportSet(tuple(int(i) for i in rows), self.n)


@dataclass(frozen=True)
class MeasurementMatrix:
    """M x N projection matrix shared by every sensor."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError(f"measurement matrix must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("measurement matrix has non-finite entries")
        if arr.shape[0] >= arr.shape[1]:
            warnings.warn(
                f"M={arr.shape[0]} >= N={arr.shape[1]}: not a compressive regime",
                RuntimeWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "data", arr)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    sigma_v: float

    def __post_init__(self):
        if not (self.sigma_v > 0 and math.isfinite(self.sigma_v)):
            raise ParameterError(f"sigma_v must be positive and finite, got {self.sigma_v}")

    @classmethod
    def from_variance(cls, sigma_v_sq: float) -> "NoiseModel":
        if not sigma_v_sq > 0:
            raise ParameterError(f"noise variance must be positive, got {sigma_v_sq}")
        return cls(math.sqrt(sigma_v_sq))


@dataclass(frozen=True)
class BitMatrix:
    """M x P matrix of 1-bit measurements, entries exactly 0 or 1."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DimensionError(f"bit matrix must be 2-D, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise DataError("bit matrix entries must be 0 or 1")
        object.__setattr__(self, "data", _frozen(arr, dtype=np.int8))

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def column(self, j: int) -> "BitMatrix":
        return BitMatrix(self.data[:, j : j + 1])


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing row indices in ``[0, n)``."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ParameterError(f"support indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise DimensionError(f"support indices must lie in [0, {self.n}): {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, indices, n: int) -> "SupportSet":
        return cls(tuple(sorted({int(i) for i in indices})), n)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices

    def as_set(self) -> frozenset[int]:
        return frozenset(self.indices)


def generate_signal_matrix(n: int, p: int, k: int, rng: np.random.Generator) -> tuple[SignalMatrix, SupportSet]:
    """Draw an N x P matrix with K nonzero rows of independent +/-1 entries.

    The support is chosen uniformly without replacement; each nonzero entry is
    +1 or -1 with probability 1/2, independently per (row, column).
    """
    if n < 1 or p < 1 or k < 1 or k > n:
        raise DimensionError(f"need 0 < k <= n and p >= 1, got n={n}, p={p}, k={k}")
    rows = np.sort(rng.choice(n, size=k, replace=False))
    s = np.zeros((n, p))
    s[rows] = rng.choice(np.array([-1.0, 1.0]), size=(k, p))
    return SignalMatrix(s), SupportSet(tuple(int(i) for i in rows), n)


def generate_measurement_matrix(m: int, n: int, variance: float, rng: np.random.Generator) -> MeasurementMatrix:
    if m < 1 or n < 1:
        raise DimensionError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    if not variance > 0:
        raise ParameterError(f"variance must be positive, got {variance}")
    return MeasurementMatrix(rng.normal(0.0, math.sqrt(variance), size=(m, n)))


def sense(
    phi: MeasurementMatrix, s: SignalMatrix, noise: NoiseModel | None, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Projections ``Y = phi @ S + V`` with ``V`` i.i.d. N(0, sigma_v^2).

    ``noise=None`` gives the noiseless ``phi @ S`` and draws nothing from ``rng``.
    """
    if phi.n != s.n:
        raise DimensionError(f"phi has {phi.n} columns but signal has {s.n} rows")
    y = phi.data @ s.data
    if noise is None:
        return y
    if rng is None:
        raise ParameterError("a random generator is required for noisy sensing")
    return y + noise.sigma_v * rng.standard_normal((phi.m, s.p))


def quantize(y) -> BitMatrix:
    """1-bit quantizer: bit 1 where ``y >= 0`` (zero included), else 0."""
    y = np.asarray(y, dtype=float)
    if np.isnan(y).any():
        raise DataError("cannot quantize NaN measurements")
    return BitMatrix((y >= 0).astype(np.int8))


def compute_snr(k: int, phi_variance: float, sigma_v: float) -> float:
    """Per-measurement SNR in dB, ``10 log10(k * phi_variance / sigma_v**2)``."""
    if not (k > 0 and phi_variance > 0 and sigma_v > 0):
        raise ParameterError("k, phi_variance and sigma_v must all be positive")
    return 10.0 * math.log10(k * phi_variance / sigma_v**2)

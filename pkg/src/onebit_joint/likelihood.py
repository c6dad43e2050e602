"""Probit negative log-likelihood of 1-bit measurements and its gradient.

With ``X = phi @ S`` and ``xt = X / sigma_v`` the objective is

    f(X) = -sum_ip [ z_ip log Phi(xt_ip) + (1 - z_ip) log Phi(-xt_ip) ]

where ``Phi`` is the standard normal CDF. Writing ``q = 2 z - 1`` this is
``-sum log Phi(q * xt)``, which is how it is evaluated below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .errors import DataError, DimensionError, ParameterError
from .model import BitMatrix, MeasurementMatrix, SignalMatrix

__all__ = [
    "LikelihoodContext",
    "log_normal_cdf",
    "log_normal_pdf",
    "mills_ratio",
    "nll",
    "nll_x",
    "grad_x",
    "grad_s",
    "lipschitz_constant",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT1_2 = math.sqrt(0.5)
# below this the 4-term asymptotic series is accurate to ~1e-13 relative
_ASYMPTOTIC_CUTOFF = -38.0


def _as_data(a) -> np.ndarray:
    return np.asarray(getattr(a, "data", a), dtype=float)


@dataclass(frozen=True)
class LikelihoodContext:
    """Everything the likelihood needs besides the signal: ``phi``, bits ``z``, ``sigma_v``."""

    phi: np.ndarray
    z: np.ndarray
    sigma_v: float

    def __post_init__(self):
        phi = _as_data(self.phi)
        z = np.asarray(getattr(self.z, "data", self.z))
        if z.ndim == 1:
            z = z[:, None]
        if phi.ndim != 2 or z.ndim != 2:
            raise DimensionError("phi and z must be 2-D")
        if phi.shape[0] != z.shape[0]:
            raise DimensionError(f"phi has {phi.shape[0]} rows but z has {z.shape[0]}")
        if not np.all((z == 0) | (z == 1)):
            raise DataError("z must contain only 0/1 entries")
        if not self.sigma_v > 0:
            raise ParameterError(f"sigma_v must be positive, got {self.sigma_v}")
        phi = phi.copy()
        phi.setflags(write=False)
        signs = (2.0 * z - 1.0).astype(float)
        signs.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "z", z.astype(np.int8))
        object.__setattr__(self, "sigma_v", float(self.sigma_v))
        object.__setattr__(self, "_signs", signs)

    @classmethod
    def build(cls, phi: MeasurementMatrix, z: BitMatrix, sigma_v: float) -> "LikelihoodContext":
        return cls(phi.data, z.data, sigma_v)

    @property
    def signs(self) -> np.ndarray:
        """Bits recentred to +/-1."""
        return self._signs

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    @property
    def p(self) -> int:
        return self.z.shape[1]


def log_normal_cdf(t):
    """Stable ``log Phi(t)`` for scalars or arrays.

    Positive arguments use ``log1p(-Phi(-t))``; negative ones use the scaled
    complementary error function, ``Phi(t) = erfcx(-t/sqrt2) exp(-t^2/2) / 2``,
    switching to an asymptotic series far in the left tail.
    """
    t = np.asarray(t, dtype=float)
    if np.isnan(t).any():
        raise DataError("log_normal_cdf got NaN")
    out = np.empty_like(t)
    pos = t >= 0
    tail = t < _ASYMPTOTIC_CUTOFF
    mid = ~pos & ~tail

    tp = t[pos]
    out[pos] = np.log1p(-0.5 * erfc(tp * _SQRT1_2))

    tm = t[mid]
    out[mid] = np.log(0.5 * erfcx(-tm * _SQRT1_2)) - 0.5 * tm * tm

    tt = t[tail]
    r = 1.0 / (tt * tt)
    series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)))
    out[tail] = -0.5 * tt * tt - np.log(-tt) - _LOG_SQRT_2PI + np.log(series)
    return out if out.ndim else float(out)


def log_normal_pdf(t):
    t = np.asarray(t, dtype=float)
    return -0.5 * t * t - _LOG_SQRT_2PI


def mills_ratio(t):
    """``pdf(t) / Phi(t)`` evaluated in log space (finite for all finite t)."""
    return np.exp(log_normal_pdf(t) - log_normal_cdf(t))


def _check_x(x: np.ndarray, ctx: LikelihoodContext):
    if x.shape != ctx.z.shape:
        raise DimensionError(f"X has shape {x.shape}, expected {ctx.z.shape}")


def nll_x(x, ctx: LikelihoodContext) -> float:
    """Negative log-likelihood as a function of ``X = phi @ S``."""
    x = np.asarray(x, dtype=float)
    _check_x(x, ctx)
    return -float(np.sum(log_normal_cdf(ctx.signs * x / ctx.sigma_v)))


def as_signal(s, ctx: LikelihoodContext) -> np.ndarray:
    """``S`` as an (N, P) float array, checked against ``ctx``."""
    s = _as_data(s)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape != (ctx.n, ctx.p):
        raise DimensionError(f"S has shape {s.shape}, expected {(ctx.n, ctx.p)}")
    return s


def nll(s, ctx: LikelihoodContext) -> float:
    """Negative log-likelihood of the bits given the signal matrix ``S``."""
    return nll_x(ctx.phi @ as_signal(s, ctx), ctx)


def nll_terms(x: np.ndarray, ctx: LikelihoodContext) -> np.ndarray:
    """Per-entry ``log Phi(q * xt)``; feed to :func:`nll_from_terms` and :func:`grad_from_terms`."""
    return log_normal_cdf(ctx.signs * x / ctx.sigma_v)


def nll_from_terms(terms: np.ndarray) -> float:
    return -float(terms.sum())


def grad_from_terms(x: np.ndarray, terms: np.ndarray, ctx: LikelihoodContext) -> np.ndarray:
    q = ctx.signs
    return -q * np.exp(log_normal_pdf(x / ctx.sigma_v) - terms) / ctx.sigma_v


def grad_x(x, ctx: LikelihoodContext) -> np.ndarray:
    """Gradient of :func:`nll_x` with respect to ``X``.

    Entry ``(i, p)`` is ``-q * pdf(q xt) / (sigma_v Phi(q xt))`` with ``q = 2z - 1``:
    negative where the bit is 1, positive where it is 0.
    """
    x = np.asarray(x, dtype=float)
    _check_x(x, ctx)
    q = ctx.signs
    return -q * mills_ratio(q * x / ctx.sigma_v) / ctx.sigma_v


def grad_s(s, ctx: LikelihoodContext) -> np.ndarray:
    s = as_signal(s, ctx)
    return ctx.phi.T @ grad_x(ctx.phi @ s, ctx)


def lipschitz_constant(phi, sigma_v: float, tol: float = 1e-6, max_iter: int = 10_000, seed: int = 0) -> float:
    """``sigma_max(phi)^2 / sigma_v^2``, with sigma_max from power iteration.

    Valid because ``d^2/dt^2 [-log Phi(t)]`` lies in (0, 1).
    """
    if not sigma_v > 0:
        raise ParameterError(f"sigma_v must be positive, got {sigma_v}")
    a = _as_data(phi)
    if not a.any():
        return 0.0
    gram = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
    v = np.random.default_rng(seed).standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        lam = float(v @ w)
        # eigen-residual test: error in lam is at most ||w - lam v||
        if np.linalg.norm(w - lam * v) <= tol * lam:
            break
        v = w / np.linalg.norm(w)
    return lam / sigma_v**2

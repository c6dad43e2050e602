"""Proximal operator of the l1,inf mixed norm.

The operator is row separable. For one row ``u`` and weight ``lam_bar`` the
subproblem ``min_s lam_bar ||s||_inf + 0.5 ||s - u||^2`` is solved through its
KKT conditions: the clipping level ``t*`` is the root of

    g(t) = sum_p (|u_p| - t)_+ - lam_bar

on ``[0, ||u||_inf]``, found by bisection, and then

    s_p = sgn(u_p) t*   if |u_p| >= t*
    s_p = u_p           otherwise.

When ``g`` has no sign change on the interval (``||u||_1 <= lam_bar``) the
solution is ``t* = 0``, i.e. the whole row is zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError, ParameterError

__all__ = ["ProxRowProblem", "piecewise_g", "solve_t_star", "solve_row", "prox_matrix", "l1inf_norm"]

WIDTH_RTOL = 1e-14
MAX_BISECT = 200


@dataclass(frozen=True)
class ProxRowProblem:
    u: np.ndarray
    lambda_bar: float

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        if not np.all(np.isfinite(u)):
            raise ParameterError("u must be finite")
        if not self.lambda_bar >= 0:
            raise ParameterError(f"lambda_bar must be >= 0, got {self.lambda_bar}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)


def l1inf_norm(s) -> float:
    """Sum over rows of the largest absolute entry."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    return float(np.abs(s).max(axis=1).sum()) if s.size else 0.0


def piecewise_g(t: float, u, lambda_bar: float) -> float:
    a = np.abs(np.asarray(u, dtype=float))
    return float(np.maximum(a - t, 0.0).sum() - lambda_bar)


@njit(cache=True)
def _bisect(a, lambda_bar):
    # a = |u|; returns t* for one row, 0.0 when g has no sign change
    hi = 0.0
    l1 = 0.0
    for v in a:
        l1 += v
        if v > hi:
            hi = v
    # g(0) = l1 - lambda_bar, g(hi) = -lambda_bar
    if (l1 - lambda_bar) * (-lambda_bar) >= 0.0:
        return 0.0
    lo = 0.0
    width_tol = WIDTH_RTOL * hi
    mid = 0.5 * (lo + hi)
    # stop on bracket width; the residual is then at most P * width_tol
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        g = -lambda_bar
        for v in a:
            if v > mid:
                g += v - mid
        if g == 0.0:
            break
        # g is non-increasing: positive means the root lies to the right
        if g > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= width_tol:
            mid = 0.5 * (lo + hi)
            break
    return mid


@njit(cache=True)
def _prox_rows(u, lambda_bar):
    out = np.empty_like(u)
    a = np.abs(u)
    for i in range(u.shape[0]):
        t = _bisect(a[i], lambda_bar)
        for j in range(u.shape[1]):
            # ties |u_p| == t* take the clipped branch
            out[i, j] = np.sign(u[i, j]) * t if a[i, j] >= t else u[i, j]
    return out


def solve_t_star(u, lambda_bar: float) -> float:
    """Root of :func:`piecewise_g` on ``[0, ||u||_inf]`` by bisection, or 0 without a sign change."""
    a = np.abs(np.asarray(u, dtype=float).ravel())
    if lambda_bar == 0.0:
        # g(||u||_inf) = 0 exactly: no clipping
        return float(a.max()) if a.size else 0.0
    return float(_bisect(a, float(lambda_bar)))


def _clip_row(u: np.ndarray, t: float) -> np.ndarray:
    # sgn(u_p) t where |u_p| >= t, else u_p
    return np.where(np.abs(u) >= t, np.sign(u) * t, u)


def solve_row(prob: ProxRowProblem) -> np.ndarray:
    u = prob.u
    if prob.lambda_bar == 0.0:
        return u.copy()
    t = solve_t_star(u, prob.lambda_bar)
    return _clip_row(u, t)


def prox_matrix(t, grad, l_f: float, lambda_hat: float) -> np.ndarray:
    """Proximal-gradient step ``argmin_S lambda_hat ||S||_{1,inf} + (l_f/2) ||S - (T - grad/l_f)||_F^2``."""
    t = np.asarray(t, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if t.shape != grad.shape:
        raise DimensionError(f"shape mismatch: {t.shape} vs {grad.shape}")
    if not l_f > 0:
        raise ParameterError(f"l_f must be positive, got {l_f}")
    if not lambda_hat >= 0:
        raise ParameterError(f"lambda_hat must be >= 0, got {lambda_hat}")
    u = t - grad / l_f
    if lambda_hat == 0.0:
        return u
    squeeze = u.ndim == 1
    if squeeze:
        u = u[None, :]
    out = _prox_rows(np.ascontiguousarray(u), float(lambda_hat / l_f))
    return out[0] if squeeze else out

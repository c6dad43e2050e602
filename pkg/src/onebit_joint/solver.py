"""ISTA with penalty continuation for l1,inf-regularized 1-bit maximum likelihood.

Minimizes ``nll(S) + lam * ||S||_{1,inf}``. The penalty starts at ``lam_tilde``
and is multiplied by ``alpha`` before each phase until it reaches ``lam``; each
phase runs proximal-gradient steps from the previous phase's solution until the
relative Frobenius change drops below ``epsilon``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import NumericalError, ParameterError
from .likelihood import (
    LikelihoodContext,
    as_signal,
    grad_from_terms,
    grad_x,
    lipschitz_constant,
    nll,
    nll_from_terms,
    nll_terms,
)
from .model import SupportSet
from .prox import l1inf_norm, prox_matrix

__all__ = [
    "Init",
    "KnownK",
    "Threshold",
    "ExtractionMode",
    "SolverConfig",
    "SolverResult",
    "objective",
    "lambda_max",
    "run",
    "extract_support",
]

log = logging.getLogger(__name__)

# the doubling safeguard gives up after this many retries of one step
_MAX_DOUBLINGS = 60
# tolerated floating-point rise in the objective before the step is retried
_DESCENT_RTOL = 1e-12


class Init(enum.Enum):
    ZERO = "zero"
    PSEUDO_INVERSE = "pinv"


@dataclass(frozen=True)
class KnownK:
    """Keep the ``k`` rows with the largest max-abs value."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class Threshold:
    """Keep rows whose max-abs value exceeds ``tau`` times the largest one."""

    tau: float

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ParameterError(f"tau must be in (0, 1), got {self.tau}")


ExtractionMode = Union[KnownK, Threshold]


@dataclass(frozen=True)
class SolverConfig:
    """Continuation-ISTA settings.

    ``lam=None`` means ``lam_ratio * lam_tilde``; ``lam_tilde=None`` means the
    smallest penalty at which ``S = 0`` is stationary (see :func:`lambda_max`).
    """

    lam: float | None = None
    lam_ratio: float = 0.01
    lam_tilde: float | None = None
    alpha: float = 0.5
    epsilon: float = 1e-4
    max_inner_iters: int = 500
    max_total_iters: int = 20_000
    init: Init = Init.ZERO
    l_f_override: float | None = None

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise ParameterError(f"lam must be positive, got {self.lam}")
        if not 0 < self.lam_ratio < 1:
            raise ParameterError(f"lam_ratio must be in (0, 1), got {self.lam_ratio}")
        if self.lam_tilde is not None and not self.lam_tilde > 0:
            raise ParameterError(f"lam_tilde must be positive, got {self.lam_tilde}")
        if self.lam is not None and self.lam_tilde is not None and not self.lam_tilde > self.lam:
            raise ParameterError("lam_tilde must exceed lam")
        if not 0 < self.alpha < 1:
            raise ParameterError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_inner_iters < 1 or self.max_total_iters < 1:
            raise ParameterError("iteration caps must be >= 1")
        if self.l_f_override is not None and not self.l_f_override > 0:
            raise ParameterError(f"l_f_override must be positive, got {self.l_f_override}")
        object.__setattr__(self, "init", Init(self.init))


@dataclass
class SolverResult:
    s_hat: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    trace_phase: list[int] = field(default_factory=list)
    phase_lambdas: list[float] = field(default_factory=list)
    inner_iterations: int = 0
    converged: bool = True
    l_f: float = float("nan")
    lam: float = float("nan")
    lam_tilde: float = float("nan")

    @property
    def phases(self) -> int:
        return len(self.phase_lambdas)


def objective(s, ctx: LikelihoodContext, lambda_hat: float) -> float:
    return nll(s, ctx) + lambda_hat * l1inf_norm(as_signal(s, ctx))


def lambda_max(ctx: LikelihoodContext) -> float:
    """Largest row-wise l1 norm of the gradient at ``S = 0``.

    At or above this penalty the zero matrix is a minimizer.
    """
    g0 = ctx.phi.T @ grad_x(np.zeros(ctx.z.shape), ctx)
    return float(np.abs(g0).sum(axis=1).max())


def _initial(ctx: LikelihoodContext, init: Init) -> np.ndarray:
    if init is Init.PSEUDO_INVERSE:
        return np.linalg.pinv(ctx.phi) @ ctx.signs
    return np.zeros((ctx.n, ctx.p))


def run(ctx: LikelihoodContext, cfg: SolverConfig = SolverConfig(), callback=None) -> SolverResult:
    """Continuation ISTA from ``cfg.init``.

    ``L_f`` is doubled and the step retried whenever a step would raise the
    objective, so every phase's trace is non-increasing. Hitting an iteration
    cap leaves ``converged=False`` rather than raising. ``callback(k, S_k)``
    is called after every accepted step.
    """
    phi = ctx.phi
    l_f = cfg.l_f_override if cfg.l_f_override is not None else lipschitz_constant(phi, ctx.sigma_v)
    lam_tilde = cfg.lam_tilde if cfg.lam_tilde is not None else lambda_max(ctx)
    lam = cfg.lam if cfg.lam is not None else cfg.lam_ratio * lam_tilde
    res = SolverResult(s_hat=_initial(ctx, cfg.init), l_f=l_f, lam=lam, lam_tilde=lam_tilde)
    if l_f == 0.0:
        # phi == 0: the likelihood is constant and S = 0 is optimal
        res.s_hat = np.zeros((ctx.n, ctx.p))
        return res

    s = res.s_hat
    x = phi @ s
    terms = nll_terms(x, ctx)
    lam_hat = lam_tilde
    total = 0
    while lam_hat > lam and total < cfg.max_total_iters:
        lam_hat = max(cfg.alpha * lam_hat, lam)
        phase = len(res.phase_lambdas)
        res.phase_lambdas.append(lam_hat)
        obj = nll_from_terms(terms) + lam_hat * l1inf_norm(s)
        phase_done = False
        for _ in range(cfg.max_inner_iters):
            g = phi.T @ grad_from_terms(x, terms, ctx)
            for _retry in range(_MAX_DOUBLINGS):
                s_new = prox_matrix(s, g, l_f, lam_hat)
                x_new = phi @ s_new
                terms_new = nll_terms(x_new, ctx)
                obj_new = nll_from_terms(terms_new) + lam_hat * l1inf_norm(s_new)
                if obj_new <= obj + _DESCENT_RTOL * abs(obj):
                    break
                l_f *= 2.0
                log.debug("objective rose in phase %d; doubling L_f to %g", phase, l_f)
            if not np.all(np.isfinite(s_new)) or not np.isfinite(obj_new):
                raise NumericalError(f"non-finite iterate in phase {phase}")
            total += 1
            res.objective_trace.append(obj_new)
            res.trace_phase.append(phase)
            step = np.linalg.norm(s_new - s)
            ref = np.linalg.norm(s)
            s, x, terms, obj = s_new, x_new, terms_new, obj_new
            if callback is not None:
                callback(total, s)
            if step <= cfg.epsilon * ref:
                phase_done = True
                break
            if total >= cfg.max_total_iters:
                break
        res.converged = phase_done
    if lam_hat > lam:
        res.converged = False
    res.s_hat = s
    res.inner_iterations = total
    res.l_f = l_f
    if not res.converged:
        log.info("solver stopped at iteration cap (%d iterations, %d phases)", total, res.phases)
    return res


def extract_support(s_hat, mode: ExtractionMode) -> SupportSet:
    s_hat = np.asarray(s_hat, dtype=float)
    if s_hat.ndim == 1:
        s_hat = s_hat[:, None]
    if not np.all(np.isfinite(s_hat)):
        raise ParameterError("s_hat must be finite")
    n = s_hat.shape[0]
    row_max = np.abs(s_hat).max(axis=1)
    if isinstance(mode, KnownK):
        if mode.k > n:
            raise ParameterError(f"k={mode.k} exceeds N={n}")
        # stable sort on the negated key keeps lower indices first among ties
        rows = np.argsort(-row_max, kind="stable")[: mode.k]
    elif isinstance(mode, Threshold):
        top = row_max.max()
        rows = np.flatnonzero(row_max > mode.tau * top) if top > 0 else np.array([], dtype=int)
    else:
        raise ParameterError(f"unknown extraction mode {mode!r}")
    return SupportSet.from_iterable(rows, n)

"""Seeded Monte Carlo sweeps over (M, P) and CSV output.

Every trial draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(m, p, trial))``, so a cell's results depend
only on the master seed and the cell coordinates, never on iteration order or
on how trials are spread across worker processes. Within a trial the draws are
made in a fixed order: signal matrix, measurement matrix, noise. The joint and
baseline methods therefore see identical instances for the same seed.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalError, ParameterError
from .likelihood import LikelihoodContext
from .model import (
    NoiseModel,
    SupportSet,
    generate_measurement_matrix,
    generate_signal_matrix,
    quantize,
    sense,
)
from .solver import ExtractionMode, KnownK, SolverConfig, extract_support, run
from .baseline import majority_fuse

__all__ = [
    "Method",
    "ExperimentConfig",
    "MetricsCell",
    "TrialOutcome",
    "trial_rng",
    "score_trial",
    "run_trial",
    "run_cell",
    "run_sweep",
    "emit_csv",
    "format_csv",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("m", "p", "pct_support_recovered", "prob_exact_support", "non_converged", "trials")


class Method(enum.Enum):
    JOINT = "joint"
    BASELINE = "baseline"


@dataclass(frozen=True)
class ExperimentConfig:
    sigma_v_sq: float
    m_values: tuple[int, ...]
    p_values: tuple[int, ...]
    n: int = 100
    k: int = 5
    phi_variance: float = 0.004
    trials: int = 1000
    seed: int = 0
    method: Method = Method.JOINT
    solver: SolverConfig = field(default_factory=SolverConfig)
    extraction: ExtractionMode | None = None

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "p_values", tuple(int(p) for p in self.p_values))
        object.__setattr__(self, "method", Method(self.method))
        if not self.m_values or not self.p_values:
            raise ParameterError("m_values and p_values must be non-empty")
        if min(self.m_values) < 1 or min(self.p_values) < 1:
            raise ParameterError("m and p values must be >= 1")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.k <= self.n:
            raise ParameterError(f"need 0 < k <= n, got k={self.k}, n={self.n}")
        if not (self.sigma_v_sq > 0 and self.phi_variance > 0):
            raise ParameterError("sigma_v_sq and phi_variance must be positive")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        if self.extraction is None:
            object.__setattr__(self, "extraction", KnownK(self.k))

    @property
    def sigma_v(self) -> float:
        return math.sqrt(self.sigma_v_sq)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        d["solver"]["init"] = self.solver.init.value
        ex = self.extraction
        d["extraction"] = {"known_k": ex.k} if isinstance(ex, KnownK) else {"threshold": ex.tau}
        d["m_values"] = list(self.m_values)
        d["p_values"] = list(self.p_values)
        d["sigma_v"] = self.sigma_v
        d["index_base"] = 0
        return d


@dataclass(frozen=True)
class MetricsCell:
    m: int
    p: int
    pct_support_recovered: float
    prob_exact_support: float
    non_converged: int
    trials: int
    failed: int = 0


@dataclass(frozen=True)
class TrialOutcome:
    pct: float
    exact: bool
    converged: bool
    failed: bool = False


def trial_rng(seed: int, m: int, p: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(m, p, trial))))


def score_trial(estimated: SupportSet | Iterable[int], truth: SupportSet | Iterable[int]) -> tuple[float, bool]:
    """Recall of the true support in percent, and whether the sets match exactly."""
    est = set(estimated)
    true = set(truth)
    if not true:
        raise ParameterError("true support must be non-empty")
    return 100.0 * len(est & true) / len(true), est == true


def run_trial(cfg: ExperimentConfig, m: int, p: int, trial: int) -> TrialOutcome:
    rng = trial_rng(cfg.seed, m, p, trial)
    s, truth = generate_signal_matrix(cfg.n, p, cfg.k, rng)
    phi = generate_measurement_matrix(m, cfg.n, cfg.phi_variance, rng)
    z = quantize(sense(phi, s, NoiseModel(cfg.sigma_v), rng))
    try:
        if cfg.method is Method.JOINT:
            res = run(LikelihoodContext.build(phi, z, cfg.sigma_v), cfg.solver)
            est = extract_support(res.s_hat, cfg.extraction)
            converged = res.converged
        else:
            supports = []
            converged = True
            for j in range(p):
                res = run(LikelihoodContext(phi.data, z.data[:, j : j + 1], cfg.sigma_v), cfg.solver)
                supports.append(extract_support(res.s_hat, cfg.extraction))
                converged &= res.converged
            est = majority_fuse(supports, p)
    except NumericalError as exc:
        log.warning("trial (m=%d, p=%d, #%d) failed: %s", m, p, trial, exc)
        return TrialOutcome(0.0, False, False, failed=True)
    pct, exact = score_trial(est, truth)
    return TrialOutcome(pct, exact, converged)


def _run_trial_task(args) -> TrialOutcome:
    return run_trial(*args)


def _aggregate(m: int, p: int, outcomes: Sequence[TrialOutcome]) -> MetricsCell:
    t = len(outcomes)
    return MetricsCell(
        m=m,
        p=p,
        pct_support_recovered=math.fsum(o.pct for o in outcomes) / t,
        prob_exact_support=sum(o.exact for o in outcomes) / t,
        non_converged=sum(not o.converged for o in outcomes),
        trials=t,
        failed=sum(o.failed for o in outcomes),
    )


def run_cell(cfg: ExperimentConfig, m: int, p: int) -> MetricsCell:
    return _aggregate(m, p, [run_trial(cfg, m, p, i) for i in range(cfg.trials)])


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[MetricsCell]:
    """Evaluate every (m, p) cell of the grid; cells come back sorted by (m, p)."""
    grid = sorted({(m, p) for m in cfg.m_values for p in cfg.p_values})
    tasks = [(cfg, m, p, i) for m, p in grid for i in range(cfg.trials)]
    if workers <= 1:
        outcomes = [_run_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves task order, so aggregation does not depend on scheduling
            outcomes = list(pool.map(_run_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    cells = []
    for c, (m, p) in enumerate(grid):
        cells.append(_aggregate(m, p, outcomes[c * cfg.trials : (c + 1) * cfg.trials]))
        log.info("cell m=%d p=%d done", m, p)
    return cells


def _fmt(x: float) -> str:
    return format(x, "#.6g")


def format_csv(cells: Sequence[MetricsCell]) -> str:
    lines = [",".join(CSV_HEADER)]
    for c in sorted(cells, key=lambda c: (c.m, c.p)):
        lines.append(
            f"{c.m},{c.p},{_fmt(c.pct_support_recovered)},{_fmt(c.prob_exact_support)},{c.non_converged},{c.trials}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(cells: Sequence[MetricsCell], path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(format_csv(cells))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}") from exc

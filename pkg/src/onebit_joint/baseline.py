"""Per-sensor support recovery fused by majority vote.

Each sensor's bits are solved on their own (the single-column case of the joint
solver, where the l1,inf prox reduces to soft-thresholding) and an index enters
the fused support when strictly more than half of the sensors selected it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .likelihood import LikelihoodContext
from .model import BitMatrix, MeasurementMatrix, SupportSet
from .solver import ExtractionMode, SolverConfig, extract_support, run

__all__ = ["FusionRule", "solve_single", "majority_fuse", "fused_support"]


@dataclass(frozen=True)
class FusionRule:
    """Minimum number of votes an index needs to be kept."""

    threshold: int

    @classmethod
    def majority(cls, p: int) -> "FusionRule":
        if p < 1:
            raise ParameterError(f"p must be >= 1, got {p}")
        return cls(p // 2 + 1)

    def apply(self, supports: Sequence[SupportSet]) -> SupportSet:
        if not supports:
            raise ParameterError("need at least one support set to fuse")
        if not 1 <= self.threshold <= len(supports):
            raise ParameterError(f"threshold {self.threshold} outside [1, {len(supports)}]")
        votes = Counter(i for s in supports for i in s)
        return SupportSet.from_iterable((i for i, c in votes.items() if c >= self.threshold), supports[0].n)


def solve_single(
    z_col,
    phi: MeasurementMatrix | np.ndarray,
    sigma_v: float,
    cfg: SolverConfig,
    mode: ExtractionMode,
) -> SupportSet:
    z = np.asarray(getattr(z_col, "data", z_col))
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[1] != 1:
        raise ParameterError(f"expected a single column of bits, got shape {z.shape}")
    ctx = LikelihoodContext(getattr(phi, "data", phi), z, sigma_v)
    return extract_support(run(ctx, cfg).s_hat, mode)


def majority_fuse(supports: Sequence[SupportSet], p: int) -> SupportSet:
    """Indices chosen by strictly more than ``p / 2`` of the per-sensor supports."""
    if not supports:
        raise ParameterError("need at least one support set to fuse")
    if len(supports) != p:
        raise ParameterError(f"got {len(supports)} supports for p={p}")
    return FusionRule.majority(p).apply(supports)


def fused_support(
    z: BitMatrix | np.ndarray,
    phi: MeasurementMatrix | np.ndarray,
    sigma_v: float,
    cfg: SolverConfig,
    mode: ExtractionMode,
) -> SupportSet:
    """Run :func:`solve_single` on every column of ``z`` and fuse the results."""
    z = np.asarray(getattr(z, "data", z))
    if z.ndim == 1:
        z = z[:, None]
    supports = [solve_single(z[:, j], phi, sigma_v, cfg, mode) for j in range(z.shape[1])]
    return majority_fuse(supports, z.shape[1])

"""Joint sparsity-pattern recovery from 1-bit compressive measurements.

Multiple sensors observe signals sharing one row support through a common
Gaussian matrix and keep only the sign of each measurement. The support is
recovered by minimizing the probit negative log-likelihood plus an l1,inf
penalty with continuation ISTA.
"""

from .baseline import majority_fuse, solve_single
from .errors import DataError, DimensionError, NumericalError, ParameterError
from .harness import ExperimentConfig, Method, MetricsCell, emit_csv, run_sweep, score_trial
from .likelihood import LikelihoodContext, grad_s, grad_x, lipschitz_constant, log_normal_cdf, nll
from .model import (
    BitMatrix,
    MeasurementMatrix,
    NoiseModel,
    SignalMatrix,
    SupportSet,
    compute_snr,
    generate_measurement_matrix,
    generate_signal_matrix,
    quantize,
    sense,
)
from .prox import ProxRowProblem, piecewise_g, prox_matrix, solve_row, solve_t_star
from .solver import Init, KnownK, SolverConfig, SolverResult, Threshold, extract_support, objective, run

__version__ = "0.1.0"

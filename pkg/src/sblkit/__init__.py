"""Sparse recovery with vector-stepsize AMP, UTAMP and UTAMP-SBL."""

from .errors import ConfigError, DegenerateSignalError, NumericError, ParameterError
from .problem_gen import (
    MatrixSpec,
    SparseProblem,
    SparseSignal,
    gen_matrix,
    gen_signal,
    make_problem,
    nmse_db,
    synthesize,
)
from .transform import TransformedModel, unitary_transform
from .denoise import BernoulliGaussian, GaussianPrior, bg_denoise, gaussian_denoise
from .result import RunResult
from .amp import amp_run, amp_sbl_run
from .utamp import utamp_run
from .sbl import (
    SblConfig,
    sbl_run,
    update_epsilon_closed,
    update_epsilon_newton,
    update_gamma,
    update_noise_precision,
)
from .oracle import OracleResult, oracle_mmse

__version__ = "0.1.0"

__all__ = [
    "BernoulliGaussian",
    "ConfigError",
    "DegenerateSignalError",
    "GaussianPrior",
    "MatrixSpec",
    "NumericError",
    "OracleResult",
    "ParameterError",
    "RunResult",
    "SblConfig",
    "SparseProblem",
    "SparseSignal",
    "TransformedModel",
    "amp_run",
    "amp_sbl_run",
    "bg_denoise",
    "gaussian_denoise",
    "gen_matrix",
    "gen_signal",
    "make_problem",
    "nmse_db",
    "oracle_mmse",
    "sbl_run",
    "synthesize",
    "unitary_transform",
    "update_epsilon_closed",
    "update_epsilon_newton",
    "update_gamma",
    "update_noise_precision",
    "utamp_run",
]

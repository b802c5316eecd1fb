"""Generalized cointegrating polynomial regressions."""
from ._kernels import BACKEND
from .core import (
    Dataset,
    DegenerateDataError,
    GcprError,
    InputError,
    ModelSpec,
    OptimizerError,
    ParamVector,
    RankDeficientError,
    TrendTerm,
    build_design_matrix,
    preset,
    scaling_matrices,
    validate_theta,
)
from .nls import (
    GcprFit,
    GridSpec,
    detrend,
    fit_at_theta,
    fit_gcpr,
    fit_gcpr_multistart,
    ols_given_theta,
    profile_rss,
    rss_profile_stochastic_power,
)
from .lrv import Kernel, LrvSet, estimate_lrv, lrv_from_fit
from .siminf import SimConfig, SimDraws, confidence_interval, run_sim_inference, simulate_draw, test_coefficient
from .kpss import KpssResult, critical_value, kpss_statistic, run_kpss
from .fmols import FmolsFit, fmols_fit, fmols_pipeline, fmols_t_stat_phi

__version__ = "0.1.0"

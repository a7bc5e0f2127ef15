"""Spectral simulation laboratory for the exponential-interaction
stochastic dynamics on the two-dimensional torus: cutoff Wick calculus,
exact-noise mild solvers, weighted Gibbs ensembles and the experiment
drivers that check their convergence and invariance."""

from .besov import besov_norm, norm
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dynamics import (
    ContractionReport,
    SolutionPath,
    SqeConfig,
    contraction_check,
    measure_product,
    solve_shifted,
    solve_sqe_full,
    solve_sqe_projected,
    time_grid,
)
from .experiments import (
    cmd_invariance,
    cmd_norms_bench,
    cmd_sample_gff,
    cmd_sqe,
    cmd_wick_converge,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .measures import (
    InvarianceReport,
    PartitionEstimate,
    StationaryDraws,
    WeightedEnsemble,
    estimate_partition,
    invariance_test,
    mode0_tilt_mean,
    resample_stationary,
    rn_log_weight,
    rn_weight,
    sample_ensemble,
    standard_observables,
)
from .randomfields import (
    FieldPath,
    OuTrajectory,
    gff_mode_variance,
    gff_sample,
    ou_decay,
    ou_increments,
    ou_noise_variance,
    ou_path,
    ou_transition,
    wiener_increment,
)
from .reports import ExperimentReport, load_fields, save_fields, write_csv, write_report
from .rng import RngStream
from .spectral import (
    NormSpec,
    SpectralField,
    TorusGrid,
    constant_field,
    field_from_coeffs,
    from_spectral,
    green_field,
    grid_quadrature,
    heat_semigroup,
    heat_semigroup_massless,
    hermitian_defect,
    make_grid,
    sobolev_norm,
    to_spectral,
    zero_field,
)
from .wick import (
    ALPHA_MAX,
    CutoffProfile,
    WickOverflowError,
    WickParams,
    analytic_wick_cov,
    apply_PN,
    green_kernel_point,
    hermite,
    l2_time_hneg_norm,
    make_wick_params,
    renorm_constant,
    wick_exp_gff,
    wick_exp_ou,
    wick_exp_values,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_MAX",
    "ConfigError",
    "ContractionReport",
    "CutoffProfile",
    "ExperimentConfig",
    "ExperimentReport",
    "FieldPath",
    "InvarianceReport",
    "KERNEL_BACKEND",
    "NormSpec",
    "OuTrajectory",
    "PartitionEstimate",
    "RngStream",
    "SolutionPath",
    "SpectralField",
    "SqeConfig",
    "StationaryDraws",
    "TorusGrid",
    "WeightedEnsemble",
    "WickOverflowError",
    "WickParams",
    "analytic_wick_cov",
    "apply_PN",
    "besov_norm",
    "cmd_invariance",
    "cmd_norms_bench",
    "cmd_sample_gff",
    "cmd_sqe",
    "cmd_wick_converge",
    "constant_field",
    "contraction_check",
    "estimate_partition",
    "field_from_coeffs",
    "from_spectral",
    "gff_mode_variance",
    "gff_sample",
    "green_field",
    "green_kernel_point",
    "grid_quadrature",
    "heat_semigroup",
    "heat_semigroup_massless",
    "hermite",
    "hermitian_defect",
    "invariance_test",
    "l2_time_hneg_norm",
    "load_config",
    "load_fields",
    "make_grid",
    "make_wick_params",
    "measure_product",
    "mode0_tilt_mean",
    "norm",
    "ou_decay",
    "ou_increments",
    "ou_noise_variance",
    "ou_path",
    "ou_transition",
    "parse_config",
    "renorm_constant",
    "resample_stationary",
    "rn_log_weight",
    "rn_weight",
    "sample_ensemble",
    "save_fields",
    "sobolev_norm",
    "solve_shifted",
    "solve_sqe_full",
    "solve_sqe_projected",
    "standard_observables",
    "time_grid",
    "to_spectral",
    "wick_exp_gff",
    "wick_exp_ou",
    "wick_exp_values",
    "wiener_increment",
    "write_csv",
    "write_report",
    "zero_field",
]

"""Numerical toolkit for elliptic equations with variable exponent p(x).

Computes variable-exponent (Luxemburg/Sobolev) norms, solves the
inhomogeneous p(x)-Laplacian with Dirichlet data by energy minimization, and
measures the inequality family attached to such equations: Harnack and weak
Harnack ratios, Caccioppoli estimates, local bounds, Hoelder oscillation
decay, exponential-barrier subsolutions, strong maximum principle and Hopf
boundary slopes, plus structure-condition checking for general flux pairs.
"""

from .barriers import (
    BarrierParams,
    BarrierScan,
    GaussianBoundScan,
    HopfResult,
    MaxPrincipleResult,
    barrier_eval,
    barrier_smooth,
    barrier_subsolution_scan,
    bracket_subsolution_mu,
    gaussian_lower_bound_scan,
    hopf_slope,
    strong_max_principle_check,
    subsolution_mu_sweep,
)
from .exponent import (
    ExponentField,
    LogHolderCertificate,
    affine_exponent,
    band,
    constant_exponent,
    grid_exponent,
    log_holder_estimate,
    piecewise_exponent,
    radial_exponent,
)
from .grid import Ball, Box, GridFunction, read_gridfunction, write_gridfunction
from .harnack import (
    CaccioppoliResult,
    HarnackReport,
    LocalBoundResult,
    OscillationTrace,
    WeakHarnackResult,
    bump_cutoff,
    caccioppoli_check,
    dependence_probe,
    harnack_check,
    harnack_mu,
    harnack_stability,
    hat_cutoff,
    holder_delta_candidate,
    holder_estimate,
    local_bound_check,
    scale_invariant_ratio,
    weak_harnack_check,
    weak_harnack_t_limit,
)
from .norms import NormConfig, dual_exponent, lt_average, luxemburg_norm, modular, sobolev_norm
from .reports import CheckRecord, load_report_schema, write_reports, write_trend_csv
from .solver import (
    ProblemSpec,
    SmoothFunction,
    SolveResult,
    energy,
    p_laplacian_pointwise,
    solve_dirichlet,
    weak_residual,
)
from .structure import (
    FluxPair,
    SampleSet,
    StructureBounds,
    StructureReport,
    check_conditions,
    check_conditions_natural_growth,
    exponential_transform,
    mu_general,
    p_laplacian_flux,
    structure_sample_lattice,
    zero_flux,
)

__all__ = [
    "Ball", "Box", "GridFunction", "read_gridfunction", "write_gridfunction",
    "ExponentField", "LogHolderCertificate", "band", "log_holder_estimate",
    "constant_exponent", "affine_exponent", "radial_exponent",
    "piecewise_exponent", "grid_exponent",
    "NormConfig", "modular", "luxemburg_norm", "sobolev_norm", "lt_average",
    "dual_exponent",
    "ProblemSpec", "SolveResult", "SmoothFunction", "energy",
    "solve_dirichlet", "weak_residual", "p_laplacian_pointwise",
    "HarnackReport", "OscillationTrace", "WeakHarnackResult",
    "CaccioppoliResult", "LocalBoundResult", "harnack_mu", "harnack_check",
    "weak_harnack_check", "caccioppoli_check", "local_bound_check",
    "holder_estimate", "scale_invariant_ratio", "harnack_stability",
    "dependence_probe", "holder_delta_candidate", "weak_harnack_t_limit",
    "hat_cutoff", "bump_cutoff",
    "BarrierParams", "BarrierScan", "GaussianBoundScan", "MaxPrincipleResult",
    "HopfResult", "barrier_eval", "barrier_smooth", "barrier_subsolution_scan",
    "bracket_subsolution_mu", "subsolution_mu_sweep",
    "gaussian_lower_bound_scan", "strong_max_principle_check", "hopf_slope",
    "StructureBounds", "FluxPair", "SampleSet", "StructureReport",
    "check_conditions", "check_conditions_natural_growth", "mu_general",
    "exponential_transform", "structure_sample_lattice", "p_laplacian_flux",
    "zero_flux",
    "CheckRecord", "write_reports", "write_trend_csv", "load_report_schema",
]

__version__ = "0.1.0"

"""Pseudo-spectral solver for stationary Navier-Stokes flow in a half space.

Tangential directions are periodic Fourier, the vertical direction is resolved
by exact slab integration against exponential kernels, and function spaces are
critical Besov / Chemin-Lerner norms built from a dyadic Littlewood-Paley
partition.
"""

from .besov import (
    BesovIndex,
    BilinearReport,
    BonyParts,
    CLIndex,
    besov_norm,
    bilinear_estimate_check,
    bony_decompose,
    chemin_lerner_norm,
    dyadic_rescale_half,
    dyadic_rescale_tangential,
    product_norm_indices,
    validate_product_exponents,
)
from .calibration import (
    CalibrationRecord,
    data_norm_indices,
    get_solver_calibration,
    solution_norm_indices,
)
from .config import ConfigError, RunConfig, load_run_config
from .fieldio import FieldFormatError, load_field, store_field
from .fields import HalfSpaceField, TangentialField
from .fixed_point import (
    NonconvergenceError,
    PicardResult,
    SmallnessError,
    SolverConfig,
    nonlinear_map,
    picard_solve,
    residual_report,
)
from .grid import DyadicRange, Grid, desk_grid, dyadic_bump, smooth_cutoff
from .kernels import KernelId, kernel_value, l_operator, poisson_apply
from .presets import PRESET_NAMES, PresetData, make_preset
from .profile import (
    LimitResult,
    LimitSmallnessError,
    ProfileLadder,
    limit_force_solve,
    limit_system_solve,
    pde_residual,
    profile_distance,
    profile_ladder,
)
from .stokes import (
    LinearSolution,
    evolution_relation_check,
    linear_solve,
    max_regularity_check,
)

__version__ = "0.1.0"

__all__ = [
    "BesovIndex",
    "BilinearReport",
    "BonyParts",
    "CLIndex",
    "CalibrationRecord",
    "ConfigError",
    "DyadicRange",
    "FieldFormatError",
    "Grid",
    "HalfSpaceField",
    "KernelId",
    "LimitResult",
    "LimitSmallnessError",
    "LinearSolution",
    "NonconvergenceError",
    "PRESET_NAMES",
    "PicardResult",
    "PresetData",
    "ProfileLadder",
    "RunConfig",
    "SmallnessError",
    "SolverConfig",
    "TangentialField",
    "besov_norm",
    "bilinear_estimate_check",
    "bony_decompose",
    "chemin_lerner_norm",
    "data_norm_indices",
    "desk_grid",
    "dyadic_bump",
    "dyadic_rescale_half",
    "dyadic_rescale_tangential",
    "evolution_relation_check",
    "get_solver_calibration",
    "kernel_value",
    "l_operator",
    "limit_force_solve",
    "limit_system_solve",
    "linear_solve",
    "load_field",
    "load_run_config",
    "make_preset",
    "max_regularity_check",
    "nonlinear_map",
    "pde_residual",
    "picard_solve",
    "poisson_apply",
    "product_norm_indices",
    "profile_distance",
    "profile_ladder",
    "residual_report",
    "smooth_cutoff",
    "solution_norm_indices",
    "store_field",
    "validate_product_exponents",
    "__version__",
]

"""Finite-element laboratory for BDF time stepping of the transient Stokes
equation with symmetric pressure stabilization."""

from .bdf import (
    BdfScheme,
    GMatrix,
    NoMultiplierError,
    PositivityReport,
    build_g_matrix,
    g_norm,
    make_scheme,
    multiplier_positivity,
)
from .assembly import ConfigurationError, StokesOperators, assemble_load, assemble_operators
from .diagnostics import (
    POINCARE_UNIT_SQUARE,
    NormReport,
    StabilityReport,
    discrete_norm,
    error_norms,
    fit_rate,
    stability_ratios,
)
from .fem import FeSpace, QuadratureRule, interpolate, make_space
from .march import MarchConfig, MarchResult, build_discretization, run
from .mesh import Mesh, unit_square_mesh
from .mms import ManufacturedCase, case_by_name, paper_case, space_exact_case
from .stokes import SaddleSolver, ritz_project, solve_steady

__version__ = "0.1.0"

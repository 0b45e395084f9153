"""Numerical study of mass-constrained minimization for Schrodinger-Poisson
and nonlinear Schrodinger energies with an L2-critical power term."""

__version__ = "0.1.0"

from .analysis import ScanResult, continuity_probe, monotonicity_check, scan, small_mass_check, subadditivity_check
from .config import SolverConfig
from .eigen import EigenResult, compute_mu1
from .errors import (
    AccuracyError,
    ConfigurationError,
    DiagnosticError,
    DomainError,
    MasslabError,
    ModelError,
    NumericalError,
    ShapeError,
    SolverError,
)
from .functionals import EnergyBreakdown, Model, ModelKind, Potential, energy, gradient
from .grid import Field, RadialGrid, build_grid, integrate
from .groundstate import GroundState, solve_ground_state, solve_ground_state_flow
from .minimize import Classification, classify_infimum, classify_with_evidence, minimize_on_sphere

__all__ = [
    "AccuracyError",
    "Classification",
    "ConfigurationError",
    "DiagnosticError",
    "DomainError",
    "EigenResult",
    "EnergyBreakdown",
    "Field",
    "GroundState",
    "MasslabError",
    "Model",
    "ModelError",
    "ModelKind",
    "NumericalError",
    "Potential",
    "RadialGrid",
    "ScanResult",
    "ShapeError",
    "SolverConfig",
    "SolverError",
    "build_grid",
    "classify_infimum",
    "classify_with_evidence",
    "compute_mu1",
    "continuity_probe",
    "energy",
    "gradient",
    "integrate",
    "minimize_on_sphere",
    "monotonicity_check",
    "scan",
    "small_mass_check",
    "solve_ground_state",
    "solve_ground_state_flow",
]

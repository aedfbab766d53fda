"""Quasinormal frequencies of a degenerate radial operator with polynomial potential."""

from .errors import (
    DomainError,
    EvolutionBlowUp,
    NearSingularError,
    NumericalError,
    QnmError,
    SingularBoundaryError,
)
from .evolve import aretakis_hierarchy, eigenmode_check, evolve, generator_apply, ringdown_fit
from .gevrey import GevreySpec, boundary_seminorm, classify_exp, seminorm, x_norm
from .leaver import asym_coeffs, dispersion, leaver_condition_check, qnf_find, qnf_scan
from .potential import PotentialSpec, load_potential
from .regions import omega_member, sector_angle_phi0, sector_angle_phi1, sigma_interval
from .series import CoeffSeq, leaver_coeffs, series_residual, taylor_at_zero
from .spectral import (
    GridFunction,
    ShiftedProblemSpec,
    assemble_Ls,
    boundary_matrix_A,
    boundary_matrix_B,
    boundary_solve,
    make_disc,
    qnf_collocation,
    resolvent_solve,
)

__version__ = "0.1.0"

__all__ = [
    "CoeffSeq", "DomainError", "EvolutionBlowUp", "GevreySpec", "GridFunction",
    "NearSingularError", "NumericalError", "PotentialSpec", "QnmError",
    "ShiftedProblemSpec", "SingularBoundaryError", "aretakis_hierarchy", "assemble_Ls",
    "asym_coeffs", "boundary_matrix_A", "boundary_matrix_B", "boundary_seminorm",
    "boundary_solve", "classify_exp", "dispersion", "eigenmode_check", "evolve",
    "generator_apply", "leaver_coeffs", "leaver_condition_check", "load_potential",
    "make_disc", "omega_member", "qnf_collocation", "qnf_find", "qnf_scan",
    "resolvent_solve", "ringdown_fit", "sector_angle_phi0", "sector_angle_phi1",
    "seminorm", "series_residual", "sigma_interval", "taylor_at_zero", "x_norm",
]

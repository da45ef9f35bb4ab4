"""Discretisation, evaluation and minimisation of nonlocal phase-transition energies."""

from .audit import AuditReport, audit_assumptions
from .energy import (EnergyBreakdown, EnergyModel, QuadratureConfig, gagliardo_seminorm,
                     gradient, total_energy)
from .errors import DomainError, InputError, NonlocalError, PreconditionError, UsageError
from .grid import Domain, FarField, GridFunction, Profile, make_profile, sample_profile
from .kernels import KernelParams, make_kernel, mean_curvature, p_laplacian
from .minimize import MinimizeConfig, MinimizeResult, minimize, submodularity_gap
from .potentials import Potential, double_well, make_potential, zero_potential

__all__ = [
    "AuditReport", "audit_assumptions", "EnergyBreakdown", "EnergyModel", "QuadratureConfig",
    "gagliardo_seminorm", "gradient", "total_energy", "DomainError", "InputError",
    "NonlocalError", "PreconditionError", "UsageError", "Domain", "FarField", "GridFunction",
    "Profile", "make_profile", "sample_profile", "KernelParams", "make_kernel",
    "mean_curvature", "p_laplacian", "MinimizeConfig", "MinimizeResult", "minimize",
    "submodularity_gap", "Potential", "double_well", "make_potential", "zero_potential",
]

"""2-D incompressible two-phase flow with surfactant.

Thin wrapper over the compiled core: potential evaluation, the cosine-basis
operator toolbox on numpy arrays, and the Simulation driver.
"""

from ._core import (
    Simulation,
    convexity_certificate,
    default_config,
    galerkin_project,
    helmholtz_solve,
    inv_neumann_laplacian,
    laplacian,
    s_phi,
    s_rho,
    s_rho_eps,
    validate_config,
)

__all__ = [
    "Simulation",
    "convexity_certificate",
    "default_config",
    "galerkin_project",
    "helmholtz_solve",
    "inv_neumann_laplacian",
    "laplacian",
    "s_phi",
    "s_rho",
    "s_rho_eps",
    "validate_config",
]

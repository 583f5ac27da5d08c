"""P1 finite elements for sign-changing diffusion on a two-strip domain.

Modules
-------
spectral      closed-form interface eigenvalues, roots and mode profiles
stability     stability verdicts, inverse-norm bounds and critical meshes
assembly      1D/2D matrices, loads, quadrature and the discrete sine basis
harness       manufactured-solution solves, error sweeps and spectral checks
verification  randomised identity suite
cli           command-line entry point
"""
from .errors import SignFemError
from .spectral import MeshConfig, PhysicalConfig, Variant

__all__ = ["MeshConfig", "PhysicalConfig", "SignFemError", "Variant"]

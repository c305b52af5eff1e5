"""
Direct normal form reduced-order models for geometrically nonlinear
mechanical systems.

The package builds second-order normal-form reduced models straight from
the physical dofs of a mechanical system (finite element or discrete),
then solves the reduced dynamics with harmonic balance continuation and
Floquet stability analysis.
"""

from .systems import (MechanicalSystem, NonlinearOperators, SymmetricMatrix,
                      build_discrete_system, load_discrete_json,
                      eval_quadratic, eval_cubic, full_internal_force)
from .spectral import (ModeSet, ComplexSpectrum, solve_modes, build_spectrum,
                       z_from_rs, rs_from_z)

__all__ = [
    "MechanicalSystem", "NonlinearOperators", "SymmetricMatrix",
    "build_discrete_system", "load_discrete_json", "eval_quadratic",
    "eval_cubic", "full_internal_force", "ModeSet", "ComplexSpectrum",
    "solve_modes", "build_spectrum", "z_from_rs", "rs_from_z",
]

__version__ = "0.1.0"

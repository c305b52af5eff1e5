"""Direct normal form engine: resonance detection, homological solves,
cubic coefficients and reduced-model aggregation."""

from .resonance import ResonanceTable, detect_resonances
from .homological import (solve_second_order_pair, realize_quadratic_maps,
                          velocity_map, QuadraticMapSet, solve_all_pairs)
from .cubic import CubicCoefficients, compute_cubic_coefficients
from .reduced import ReducedModel, build_reduced_model

__all__ = ["ResonanceTable", "detect_resonances", "solve_second_order_pair",
           "realize_quadratic_maps", "velocity_map", "QuadraticMapSet",
           "solve_all_pairs", "CubicCoefficients",
           "compute_cubic_coefficients", "ReducedModel",
           "build_reduced_model"]

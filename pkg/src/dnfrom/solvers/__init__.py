"""Harmonic balance continuation, Floquet stability and time integration."""

from .hb import HBConfig, ContinuationConfig, Branch, BranchPoint, hb_continue
from .floquet import floquet_stability
from .timeint import time_integrate, steady_amplitude

__all__ = ["HBConfig", "ContinuationConfig", "Branch", "BranchPoint",
           "hb_continue", "floquet_stability", "time_integrate",
           "steady_amplitude"]

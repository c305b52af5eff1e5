"""
Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so solver code should raise
the most specific class that applies.
"""


class DnfError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DnfError):
    """Invalid configuration, bad input data, or contract violation."""


class MeshError(ConfigError):
    """Malformed mesh file or degenerate geometry."""


class NumericalError(DnfError):
    """A numerical procedure failed (singular solve, no convergence...)."""


class SingularPairError(NumericalError):
    """A quadratic-map solve hit a (near-)singular matrix although the
    pair was not flagged resonant.

    This signals an undetected second-order resonance: the resonance
    tolerance was too tight for the spectrum at hand.
    """

    def __init__(self, sigma_im, nearest_omega, pair):
        self.sigma_im = sigma_im
        self.nearest_omega = nearest_omega
        self.pair = pair
        super().__init__(
            f"map solve for state pair {pair} is singular but the pair was "
            f"not flagged resonant: |sigma| = {abs(sigma_im):.6g} is too close "
            f"to omega_r = {nearest_omega:.6g}; increase the resonance "
            f"tolerance so the pair is solved with the bordered system"
        )

"""
Isotropic Saint-Venant--Kirchhoff material data.

The package is unit-system agnostic; the documented convention for MEMS
problems is micrometres, microseconds and micronewtons, in which Young's
moduli are given in uN/um^2 (= MPa) and densities in the consistent mass
unit per um^3, so frequencies come out in rad/us (MHz after dividing by
2 pi).
"""

import numpy as np

from ..errors import ConfigError

__all__ = ["Material", "POLYSILICON"]


class Material:
    """Isotropic elastic material.

    Parameters
    ----------
    young_modulus : float
        E > 0, stress units.
    poisson_ratio : float
        -1 < nu < 0.5.
    density : float
        Reference density rho_0 > 0, mass/volume.
    """

    def __init__(self, young_modulus, poisson_ratio, density):
        E = float(young_modulus)
        nu = float(poisson_ratio)
        rho = float(density)
        if E <= 0.0:
            raise ConfigError(f"young_modulus must be positive, got {E}")
        if not -1.0 < nu < 0.5:
            raise ConfigError(f"poisson_ratio must lie in (-1, 0.5), got {nu}")
        if rho <= 0.0:
            raise ConfigError(f"density must be positive, got {rho}")
        self.young_modulus = E
        self.poisson_ratio = nu
        self.density = rho

    @property
    def lame_lambda(self):
        E, nu = self.young_modulus, self.poisson_ratio
        return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))

    @property
    def lame_mu(self):
        E, nu = self.young_modulus, self.poisson_ratio
        return E / (2.0 * (1.0 + nu))

    def stress(self, strain):
        """Apply the isotropic elasticity tensor to a symmetric tensor.

        ``strain`` has shape (..., 3, 3); returns
        ``lambda * tr(e) I + 2 mu e`` with matching shape.
        """
        strain = np.asarray(strain)
        tr = np.trace(strain, axis1=-2, axis2=-1)
        out = 2.0 * self.lame_mu * strain
        idx = np.arange(3)
        out[..., idx, idx] += self.lame_lambda * tr[..., None]
        return out

    def __repr__(self):
        return (f"Material(E={self.young_modulus}, nu={self.poisson_ratio}, "
                f"rho={self.density})")


# Polycrystalline silicon in the um / us / uN unit set:
# E = 167 GPa = 1.67e5 uN/um^2, rho = 2330 kg/m^3 = 2.33e-3 consistent units.
POLYSILICON = Material(young_modulus=1.67e5, poisson_ratio=0.22,
                       density=2.33e-3)

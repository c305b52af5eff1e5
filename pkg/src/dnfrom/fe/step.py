"""
Non-intrusive extraction of nonlinear force vectors by imposed static
displacements (the stiffness evaluation procedure).

Only evaluations of the *total* internal force are required, so the
routine works against any black-box solver.  For an exactly cubic force
the even/odd splits below are polynomial identities with no truncation
error; the imposed amplitude merely scales round-off.
"""

import numpy as np

from ..errors import ConfigError

__all__ = ["step_extract"]


def step_extract(full_force, modes, amplitude, stiffness=None):
    """Extract quadratic and cubic force vectors for a set of mode shapes.

    Parameters
    ----------
    full_force : callable
        ``full_force(u) -> ndarray`` evaluating the total internal force.
    modes : sequence of ndarray
        Mode shapes ``phi_i`` (or any displacement patterns).
    amplitude : float
        Imposed modal amplitude ``lambda* > 0``; choose it small enough
        that the displacements stay within assembly validity.
    stiffness : matrix-like or None
        Stiffness operator supporting ``@``.  Required for the cubic
        vectors and for cross terms.

    Returns
    -------
    g_vectors : dict
        ``{(i, j): G(phi_i, phi_j)}`` for ``i <= j`` (0-based positions).
    h_vectors : dict
        ``{i: H(phi_i, phi_i, phi_i)}``.
    """
    lam = float(amplitude)
    if lam == 0.0:
        raise ConfigError("STEP amplitude must be nonzero")
    lam = abs(lam)
    modes = [np.asarray(m, dtype=float) for m in modes]
    if stiffness is None:
        raise ConfigError("stiffness operator required to separate the "
                          "linear part (cubic and cross terms)")

    g_vectors = {}
    h_vectors = {}
    for i, phi in enumerate(modes):
        f_pos = full_force(lam * phi)
        f_neg = full_force(-lam * phi)
        g_vectors[(i, i)] = (f_pos + f_neg) / (2.0 * lam**2)
        k_phi = stiffness @ phi
        h_vectors[i] = (f_pos - f_neg - 2.0 * lam * k_phi) / (2.0 * lam**3)

    for i in range(len(modes)):
        for j in range(i + 1, len(modes)):
            u = modes[i] + modes[j]
            even = (full_force(lam * u) + full_force(-lam * u)) \
                / (2.0 * lam**2)
            g_vectors[(i, j)] = 0.5 * (even - g_vectors[(i, i)]
                                       - g_vectors[(j, j)])
    return g_vectors, h_vectors

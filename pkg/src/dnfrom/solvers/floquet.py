"""
Floquet stability of harmonic balance solutions.

The monodromy matrix is obtained by integrating the variational equation
``Phi' = A(t) Phi`` over one forcing period with a fixed-step classical
Runge-Kutta scheme, where ``A(t)`` is the linearisation of the
second-order system along the periodic orbit (evaluated from its Fourier
representation).  The orbit is stable when every multiplier lies inside
the unit circle (within a small tolerance band).
"""

import numpy as np

__all__ = ["FloquetResult", "floquet_stability", "classify_crossing"]

_UNIT_BAND = 1e-6


class FloquetResult:
    def __init__(self, multipliers, stable):
        self.multipliers = multipliers
        self.stable = stable


def _state_matrix(ode, point, tau):
    """Variational system matrix at phase samples ``tau``; (nt, 2n, 2n)."""
    r, dr_dtau = point.evaluate(tau)
    omega = point.omega
    v = omega * dr_dtau
    Jr, Jv = ode.jacobians(r, v)
    nt = tau.size
    n = ode.n
    A = np.zeros((nt, 2 * n, 2 * n))
    A[:, :n, n:] = np.eye(n)
    A[:, n:, :n] = Jr
    A[:, n:, n:] = Jv
    return A


def floquet_stability(ode, point, steps=600):
    """Floquet multipliers of a converged branch point.

    Parameters
    ----------
    ode : PolynomialODE-like
    point : BranchPoint
    steps : int
        Runge-Kutta steps over one period (each step samples three
        phases, so the matrix grid has ``2 steps + 1`` entries).

    Returns
    -------
    FloquetResult
    """
    omega = point.omega
    T = 2.0 * np.pi / abs(omega)
    nt = 2 * steps + 1
    tau = np.linspace(0.0, 2.0 * np.pi, nt)
    A = _state_matrix(ode, point, tau)
    n2 = A.shape[1]
    Phi = np.eye(n2)
    h = T / steps
    for i in range(steps):
        A0 = A[2 * i]
        Am = A[2 * i + 1]
        A1 = A[2 * i + 2]
        k1 = A0 @ Phi
        k2 = Am @ (Phi + 0.5 * h * k1)
        k3 = Am @ (Phi + 0.5 * h * k2)
        k4 = A1 @ (Phi + h * k3)
        Phi = Phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    multipliers = np.linalg.eigvals(Phi)
    radius = np.max(np.abs(multipliers))
    stable = radius <= 1.0 + _UNIT_BAND
    return FloquetResult(multipliers, stable)


def classify_crossing(prev_point, point):
    """Bifurcation marker between two consecutive branch points.

    Saddle-node when a real positive multiplier crosses +1, Neimark-Sacker
    when a complex pair crosses the unit circle; 'none' otherwise (also
    for period doubling, which the tracked systems do not exhibit).
    """
    if prev_point.multipliers is None or point.multipliers is None:
        return "none"
    if prev_point.stable == point.stable:
        return "none"
    mult = point.multipliers if not point.stable else prev_point.multipliers
    idx = int(np.argmax(np.abs(mult)))
    mu = mult[idx]
    if abs(mu.imag) < 1e-4 * max(1.0, abs(mu)) and mu.real > 0.0:
        return "SN"
    if abs(mu.imag) >= 1e-4 * max(1.0, abs(mu)):
        return "NS"
    return "none"

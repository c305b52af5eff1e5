"""
Executable real-valued reduced dynamics and physical-field reconstruction.

The reduced equations of motion are oscillator-form ODEs in the normal
displacements ``r_p``:

``rddot_p + (omega_I/Q) rdot_p + omega_p^2 r_p + quadratic + cubic =
  kappa delta_pI cos(omega t)``

with the coefficient tables built by the normal-form engine.  Damping is
mass-proportional (identical coefficient on every master equation) and
the forcing drives a single master.

Reconstruction maps normal coordinates back to physical displacement and
velocity fields.  Outside internal resonance the normal velocity equals
``rdot``; under a 1:2 resonance the stored cubic correction terms
``s_p = rdot_p + sum c r_k r_l rdot_q`` are applied before evaluating the
quadratic maps.
"""

import numpy as np

from .errors import ConfigError

__all__ = ["RomState", "ForcingSpec", "DampingSpec", "PolynomialODE",
           "reduced_rhs", "reconstruct_physical", "make_ode",
           "system_ode"]


class RomState:
    """Normal displacements and their time derivatives."""

    def __init__(self, r, rdot):
        self.r = np.asarray(r, dtype=float)
        self.rdot = np.asarray(rdot, dtype=float)
        if self.r.shape != self.rdot.shape:
            raise ConfigError("r and rdot must have matching shapes")


class ForcingSpec:
    """Single-master harmonic drive ``kappa cos(omega t)``."""

    def __init__(self, drive_index, kappa, omega):
        self.drive_index = int(drive_index)
        self.kappa = float(kappa)
        self.omega = float(omega)
        if self.kappa < 0.0:
            raise ConfigError("kappa must be nonnegative")


class DampingSpec:
    """Mass-proportional damping ``omega_ref / Q`` on every master."""

    def __init__(self, quality_factor, omega_ref):
        self.quality_factor = float(quality_factor)
        self.omega_ref = float(omega_ref)
        if self.quality_factor <= 0.0:
            raise ConfigError("quality factor must be positive")

    @property
    def coefficient(self):
        return self.omega_ref / self.quality_factor


class PolynomialODE:
    """Second-order polynomial ODE ``rddot = F(r, rdot) + f0 cos(omega t)``.

    Compiled form of the reduced-dynamics tables; evaluations and state
    Jacobians accept batched states of shape ``(n, m)``.
    """

    def __init__(self, omegas, damping_coeff, quad, cubic_disp, cubic_vel,
                 force_vector=None):
        self.omegas = np.asarray(omegas, dtype=float)
        self.n = self.omegas.size
        self.c = float(damping_coeff)
        self.quad = [(p, k, l, float(v)) for (p, (k, l)), v in
                     sorted(quad.items())]
        self.cubic_disp = [(p, k, l, m, float(v)) for (p, (k, l, m)), v in
                           sorted(cubic_disp.items())]
        self.cubic_vel = [(p, k, l, m, float(v)) for (p, k, (l, m)), v in
                          sorted(cubic_vel.items())]
        self.force_vector = (np.zeros(self.n) if force_vector is None
                             else np.asarray(force_vector, dtype=float))

    def accel(self, r, v):
        """Autonomous acceleration (damping included, forcing excluded)."""
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        a = -(self.omegas**2 * r.T).T - self.c * v
        for p, k, l, coeff in self.quad:
            a[p] -= coeff * r[k] * r[l]
        for p, k, l, m, coeff in self.cubic_disp:
            a[p] -= coeff * r[k] * r[l] * r[m]
        for p, k, l, m, coeff in self.cubic_vel:
            a[p] -= coeff * r[k] * v[l] * v[m]
        return a

    def accel_forced(self, r, v, t, omega):
        return self.accel(r, v) + np.outer(
            self.force_vector, np.cos(omega * np.atleast_1d(t))).reshape(
                np.shape(r))

    def jacobians(self, r, v):
        """State Jacobians ``(dF/dr, dF/dv)`` with shape ``(m, n, n)``."""
        r = np.atleast_2d(np.asarray(r, dtype=float))
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if r.shape[0] != self.n:
            r, v = r.T, v.T
        m = r.shape[1]
        Jr = np.zeros((m, self.n, self.n))
        Jv = np.zeros((m, self.n, self.n))
        idx = np.arange(self.n)
        Jr[:, idx, idx] = -self.omegas**2
        Jv[:, idx, idx] = -self.c
        for p, k, l, coeff in self.quad:
            Jr[:, p, k] -= coeff * r[l]
            Jr[:, p, l] -= coeff * r[k]
        for p, k, l, m_, coeff in self.cubic_disp:
            Jr[:, p, k] -= coeff * r[l] * r[m_]
            Jr[:, p, l] -= coeff * r[k] * r[m_]
            Jr[:, p, m_] -= coeff * r[k] * r[l]
        for p, k, l, m_, coeff in self.cubic_vel:
            Jr[:, p, k] -= coeff * v[l] * v[m_]
            Jv[:, p, l] -= coeff * r[k] * v[m_]
            Jv[:, p, m_] -= coeff * r[k] * v[l]
        return Jr, Jv


def make_ode(model, forcing=None, damping=None):
    """Compile a ReducedModel into a PolynomialODE.

    ``forcing``/``damping`` default to the model's stored descriptors;
    the drive frequency lives in the solver configuration, not here.
    """
    if damping is None:
        c = model.damping_coefficient
    else:
        c = damping.coefficient
    if forcing is None:
        drive, kappa = model.drive_index, model.kappa
    else:
        drive, kappa = forcing.drive_index, forcing.kappa
    f0 = np.zeros(model.n_masters)
    f0[drive] = kappa
    return PolynomialODE(model.omegas, c, model.quad, model.cubic_disp,
                         model.cubic_vel, f0)


def system_ode(system, drive_vector=None, damping_coeff=0.0):
    """Polynomial ODE view of a discrete MechanicalSystem (identity mass).

    Used as the full-order oracle for small systems:
    ``uddot = -K u - G(u,u) - H(u,u,u) - c udot + drive cos(omega t)``.
    """
    M = system.mass.toarray()
    if not np.allclose(M, np.eye(system.dof_count), atol=1e-12):
        raise ConfigError("system_ode requires an identity mass matrix")
    K = system.stiffness.toarray()

    class _SystemODE:
        n = system.dof_count
        c = float(damping_coeff)
        force_vector = (np.zeros(system.dof_count) if drive_vector is None
                        else np.asarray(drive_vector, dtype=float))

        def accel(self, r, v):
            r = np.asarray(r, dtype=float)
            v = np.asarray(v, dtype=float)
            single = r.ndim == 1
            rr = r[:, None] if single else r
            a = -(K @ rr) - self.c * (v[:, None] if single else v)
            for j in range(rr.shape[1]):
                u = rr[:, j]
                a[:, j] -= system.nonlinear.quadratic(u, u)
                a[:, j] -= system.nonlinear.cubic(u, u, u)
            return a[:, 0] if single else a

        def accel_forced(self, r, v, t, omega):
            return self.accel(r, v) + np.outer(
                self.force_vector,
                np.cos(omega * np.atleast_1d(t))).reshape(np.shape(r))

        def jacobians(self, r, v):
            r = np.atleast_2d(np.asarray(r, dtype=float))
            if r.shape[0] != self.n:
                r = r.T
            m = r.shape[1]
            Jr = np.zeros((m, self.n, self.n))
            Jv = np.zeros((m, self.n, self.n))
            idx = np.arange(self.n)
            basis = np.eye(self.n)
            for j in range(m):
                u = r[:, j]
                Jr[j] = -K
                for q in range(self.n):
                    Jr[j, :, q] -= 2.0 * system.nonlinear.quadratic(
                        u, basis[:, q])
                    Jr[j, :, q] -= 3.0 * system.nonlinear.cubic(
                        u, u, basis[:, q])
            Jv[:, idx, idx] = -self.c
            return Jr, Jv

    return _SystemODE()


def reduced_rhs(model, state, t=0.0, forcing=None, damping=None):
    """Time derivative of a RomState under the reduced dynamics.

    Returns
    -------
    (rdot, rddot) : tuple of ndarray
    """
    ode = make_ode(model, forcing, damping)
    omega = forcing.omega if forcing is not None else 0.0
    r = state.r
    v = state.rdot
    a = ode.accel(r[:, None], v[:, None])[:, 0]
    a = a + ode.force_vector * np.cos(omega * t)
    return v.copy(), a


def normal_velocity(model, state):
    """Normal velocity ``s`` from ``(r, rdot)``.

    Identity outside internal resonance; applies the stored cubic
    corrections when a 1:2 resonance was retained.
    """
    s = state.rdot.copy()
    for p, terms in model.s_correction.items():
        for coeff, k, l, q in terms:
            s[p] += coeff * state.r[k] * state.r[l] * state.rdot[q]
    return s


def reconstruct_physical(model, state):
    """Second-order reconstruction of the physical fields ``(U, V)``.

    ``U = Phi r + sum (a_hat r r + b_hat s s)``,
    ``V = Phi s + sum gamma_hat r s``.
    """
    if not model.has_mapping():
        raise ConfigError("model was built without mapping vectors")
    r = state.r
    s = normal_velocity(model, state)
    U = model.phi @ r
    V = model.phi @ s
    n = model.n_masters
    for k in range(n):
        for l in range(k, n):
            mult = 1.0 if k == l else 2.0
            U = U + mult * (model.a_hat[(k, l)] * (r[k] * r[l])
                            + model.b_hat[(k, l)] * (s[k] * s[l]))
    for (k, l), gam in model.gamma_hat.items():
        V = V + gam * (r[k] * s[l])
    return U, V

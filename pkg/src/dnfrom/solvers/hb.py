"""
Harmonic balance with pseudo-arclength continuation for small
second-order polynomial ODE systems (reduced models and desk-scale
full-order oracles).

Unknowns are real Fourier blocks (mean plus cos/sin pairs up to order H)
for every coordinate.  Nonlinear terms are evaluated by alternating
frequency/time on a ``4H + 1`` sample grid, which projects polynomial
nonlinearities up to cubic order without aliasing.  The forcing is
phase-locked to ``cos(omega t)``, so no phase condition is needed and the
frequency serves as the continuation parameter.
"""

import numpy as np

from ..errors import ConfigError, NumericalError
from .floquet import floquet_stability, classify_crossing

__all__ = ["HBConfig", "ContinuationConfig", "BranchPoint", "Branch",
           "hb_continue", "solve_fixed_frequency"]


class HBConfig:
    """Fourier order and Newton settings for the harmonic balance."""

    def __init__(self, order=9, tol=1e-11, max_iter=30):
        self.order = int(order)
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        if self.order < 1:
            raise ConfigError("Fourier order must be >= 1")
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigError("invalid Newton settings")


class ContinuationConfig:
    """Pseudo-arclength continuation settings.

    ``omega_range`` bounds the sweep; the initial point sits at the first
    entry and the sweep is directed toward the second.
    """

    def __init__(self, omega_range, step=None, min_step=None, max_step=None,
                 grow=1.4, shrink=0.4, max_points=2000,
                 stability=True, stability_steps=600):
        lo, hi = float(omega_range[0]), float(omega_range[1])
        if lo == hi:
            raise ConfigError("empty continuation range")
        self.omega_start = lo
        self.omega_end = hi
        span = abs(hi - lo)
        self.step = span / 200.0 if step is None else float(step)
        self.min_step = (self.step * 1e-6 if min_step is None
                         else float(min_step))
        self.max_step = span / 20.0 if max_step is None else float(max_step)
        if self.step <= 0 or self.min_step <= 0 or self.max_step <= 0:
            raise ConfigError("continuation steps must be positive")
        self.grow = float(grow)
        self.shrink = float(shrink)
        self.max_points = int(max_points)
        self.stability = bool(stability)
        self.stability_steps = int(stability_steps)


class BranchPoint:
    """One converged periodic solution."""

    def __init__(self, omega, coeffs, amplitude, multipliers=None,
                 stable=True, bifurcation="none", max_physical_amp=None):
        self.omega = float(omega)
        self.coeffs = coeffs            # (n, 2H+1)
        self.amplitude = amplitude      # (n,) max |r_p| over one period
        self.multipliers = multipliers
        self.stable = bool(stable)
        self.bifurcation = bifurcation
        self.max_physical_amp = max_physical_amp

    def evaluate(self, tau):
        """Evaluate r(tau) (and derivative wrt t times 1/omega) on a grid."""
        H = (self.coeffs.shape[1] - 1) // 2
        G0, G1, _ = _basis(H, np.asarray(tau))
        return self.coeffs @ G0.T, self.coeffs @ G1.T


class Branch:
    """Ordered continuation output with CSV export."""

    def __init__(self, points, diagnostic=""):
        self.points = list(points)
        self.diagnostic = diagnostic

    def __len__(self):
        return len(self.points)

    def omegas(self):
        return np.array([p.omega for p in self.points])

    def amplitudes(self, coord=None):
        amps = np.array([p.amplitude for p in self.points])
        return amps if coord is None else amps[:, coord]

    def to_csv(self, path, master_labels=None, float_fmt=".17g"):
        n = self.points[0].coeffs.shape[0] if self.points else 0
        labels = master_labels or [str(p + 1) for p in range(n)]
        cols = ["omega"] + [f"amp_r{lab}" for lab in labels]
        has_phys = any(p.max_physical_amp is not None for p in self.points)
        if has_phys:
            cols.append("max_physical_amp")
        cols += ["stable", "bifurcation"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for p in self.points:
                row = [format(p.omega, float_fmt)]
                row += [format(a, float_fmt) for a in p.amplitude]
                if has_phys:
                    row.append(format(p.max_physical_amp or 0.0, float_fmt))
                row.append("1" if p.stable else "0")
                row.append(p.bifurcation)
                fh.write(",".join(row) + "\n")


def _basis(H, tau):
    """Fourier basis and its first two tau-derivatives on a grid."""
    tau = np.asarray(tau, dtype=float)
    nt = tau.size
    G0 = np.empty((nt, 2 * H + 1))
    G1 = np.zeros((nt, 2 * H + 1))
    G2 = np.zeros((nt, 2 * H + 1))
    G0[:, 0] = 1.0
    for j in range(1, H + 1):
        c, s = np.cos(j * tau), np.sin(j * tau)
        G0[:, j] = c
        G0[:, H + j] = s
        G1[:, j] = -j * s
        G1[:, H + j] = j * c
        G2[:, j] = -j * j * c
        G2[:, H + j] = -j * j * s
    return G0, G1, G2


class _HBProblem:
    def __init__(self, ode, order):
        self.ode = ode
        self.H = order
        self.n = ode.n
        self.nt = 4 * order + 1
        self.tau = 2.0 * np.pi * np.arange(self.nt) / self.nt
        self.G0, self.G1, self.G2 = _basis(order, self.tau)
        # projection: least-squares inverse of G0 (exact DFT weights)
        P = np.empty((2 * order + 1, self.nt))
        P[0] = 1.0 / self.nt
        P[1:] = (2.0 / self.nt) * self.G0[:, 1:].T
        self.P = P
        self.nc = 2 * order + 1
        self.size = self.n * self.nc
        self.cos_tau = np.cos(self.tau)

    def unpack(self, x):
        return x.reshape(self.n, self.nc)

    def grid_values(self, coeffs, omega):
        r = coeffs @ self.G0.T
        v = omega * (coeffs @ self.G1.T)
        a = omega**2 * (coeffs @ self.G2.T)
        return r, v, a

    def residual(self, x, omega):
        coeffs = self.unpack(x)
        r, v, a = self.grid_values(coeffs, omega)
        F = self.ode.accel(r, v) + np.outer(self.ode.force_vector,
                                            self.cos_tau)
        return ((a - F) @ self.P.T).reshape(-1)

    def jacobian(self, x, omega):
        coeffs = self.unpack(x)
        r, v, a = self.grid_values(coeffs, omega)
        Jr, Jv = self.ode.jacobians(r, v)      # (nt, n, n)
        n, nc, nt = self.n, self.nc, self.nt
        J = np.zeros((n, nc, n, nc))
        base = self.P @ (omega**2 * self.G2)
        for p in range(n):
            J[p, :, p, :] += base
        # chain rule through the grid values
        for p in range(n):
            for q in range(n):
                Dr = Jr[:, p, q]
                Dv = Jv[:, p, q]
                block = -self.P @ (Dr[:, None] * self.G0
                                   + omega * Dv[:, None] * self.G1)
                J[p, :, q, :] += block
        dw = 2.0 * omega * (coeffs @ self.G2.T)
        dv_dw = coeffs @ self.G1.T
        dF_dw = np.einsum("tpq,qt->pt", Jv, dv_dw)
        dres_dw = ((dw - dF_dw) @ self.P.T).reshape(-1)
        return J.reshape(self.size, self.size), dres_dw

    def amplitude(self, coeffs):
        tau_fine = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
        G0f, _, _ = _basis(self.H, tau_fine)
        r = coeffs @ G0f.T
        return np.max(np.abs(r), axis=1)

    def scale(self, x, omega):
        return max(1.0, omega**2 * np.max(np.abs(x)),
                   np.max(np.abs(self.ode.force_vector)))


def _linear_init(problem, omega):
    """Fourier initialisation from the linear forced response."""
    ode = problem.ode
    x = np.zeros(problem.size)
    coeffs = problem.unpack(x)
    denom = ode.omegas**2 - omega**2 + 1j * ode.c * omega
    # guard: start exactly on a linear resonance is pathological
    denom = np.where(np.abs(denom) < 1e-12, 1e-12, denom)
    Hc = ode.force_vector / denom
    coeffs[:, 1] = Hc.real
    coeffs[:, problem.H + 1] = -Hc.imag
    return x


def _newton_fixed(problem, x, omega, cfg):
    for it in range(cfg.max_iter):
        R = problem.residual(x, omega)
        if np.max(np.abs(R)) <= cfg.tol * problem.scale(x, omega):
            return x, True
        J, _ = problem.jacobian(x, omega)
        try:
            dx = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            return x, False
        x = x + dx
    R = problem.residual(x, omega)
    return x, np.max(np.abs(R)) <= cfg.tol * problem.scale(x, omega)


def solve_fixed_frequency(ode, omega, hb=None, init=None):
    """Converge a single periodic solution at fixed drive frequency."""
    cfg = hb or HBConfig()
    problem = _HBProblem(ode, cfg.order)
    x = _linear_init(problem, omega) if init is None else init.reshape(-1)
    x, ok = _newton_fixed(problem, x, omega, cfg)
    if not ok:
        raise NumericalError(f"harmonic balance did not converge at "
                             f"omega = {omega}")
    coeffs = problem.unpack(x)
    return BranchPoint(omega, coeffs, problem.amplitude(coeffs))


def _corrector(problem, y, y_pred, tangent, cfg):
    """Newton on the bordered system [residual; tangent-orthogonality]."""
    x = y[:-1].copy()
    omega = y[-1]
    for it in range(cfg.max_iter):
        R = problem.residual(x, omega)
        arc = tangent @ (np.concatenate([x, [omega]]) - y_pred)
        err = max(np.max(np.abs(R)) / problem.scale(x, omega), abs(arc))
        if err <= cfg.tol:
            return np.concatenate([x, [omega]]), True, it
        J, dRdw = problem.jacobian(x, omega)
        A = np.zeros((problem.size + 1, problem.size + 1))
        A[:-1, :-1] = J
        A[:-1, -1] = dRdw
        A[-1, :] = tangent
        rhs = -np.concatenate([R, [arc]])
        try:
            dy = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return y, False, it
        x = x + dy[:-1]
        omega = omega + dy[-1]
    return np.concatenate([x, [omega]]), False, cfg.max_iter


def _tangent(problem, y, previous, cfg):
    x, omega = y[:-1], y[-1]
    J, dRdw = problem.jacobian(x, omega)
    A = np.zeros((problem.size + 1, problem.size + 1))
    A[:-1, :-1] = J
    A[:-1, -1] = dRdw
    A[-1, :] = previous
    rhs = np.zeros(problem.size + 1)
    rhs[-1] = 1.0
    try:
        t = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        t = previous.copy()
    norm = np.linalg.norm(t)
    if norm == 0.0:
        raise NumericalError("degenerate continuation tangent")
    t = t / norm
    if t @ previous < 0.0:
        t = -t
    return t


def hb_continue(ode, hb=None, cont=None, physical_amp=None):
    """Trace a forced-response branch by pseudo-arclength continuation.

    Parameters
    ----------
    ode : PolynomialODE-like
        Second-order system with ``accel``/``jacobians``/``force_vector``.
    hb : HBConfig
    cont : ContinuationConfig
    physical_amp : callable or None
        ``physical_amp(point) -> float`` filled into the optional
        ``max_physical_amp`` column.

    Returns
    -------
    Branch
        Points ordered along the branch; when Newton fails even at the
        minimum step the branch is truncated and carries a diagnostic.
    """
    cfg = hb or HBConfig()
    if cont is None:
        raise ConfigError("continuation configuration required")
    problem = _HBProblem(ode, cfg.order)

    direction = 1.0 if cont.omega_end >= cont.omega_start else -1.0
    x0 = _linear_init(problem, cont.omega_start)
    x0, ok = _newton_fixed(problem, x0, cont.omega_start, cfg)
    if not ok:
        raise NumericalError(f"no converged starting point at omega = "
                             f"{cont.omega_start}")

    y = np.concatenate([x0, [cont.omega_start]])
    tangent_seed = np.zeros(problem.size + 1)
    tangent_seed[-1] = direction
    tangent = _tangent(problem, y, tangent_seed, cfg)

    points = []
    diagnostic = ""

    def finish_point(yv):
        coeffs = problem.unpack(yv[:-1]).copy()
        pt = BranchPoint(yv[-1], coeffs, problem.amplitude(coeffs))
        if cont.stability:
            mult = floquet_stability(ode, pt, steps=cont.stability_steps)
            pt.multipliers = mult.multipliers
            pt.stable = mult.stable
        if physical_amp is not None:
            pt.max_physical_amp = float(physical_amp(pt))
        points.append(pt)
        return pt

    prev_pt = finish_point(y)

    lo = min(cont.omega_start, cont.omega_end)
    hi = max(cont.omega_start, cont.omega_end)
    h = cont.step
    while len(points) < cont.max_points:
        accepted = False
        while h >= cont.min_step:
            y_pred = y + h * tangent
            y_new, ok, iters = _corrector(problem, y_pred.copy(), y_pred,
                                          tangent, cfg)
            if ok:
                accepted = True
                break
            h *= cont.shrink
        if not accepted:
            diagnostic = (f"continuation stalled at omega = {y[-1]:.8g}: "
                          f"Newton failed at the minimum step")
            break

        y = y_new
        pt = finish_point(y)
        if cont.stability and prev_pt.multipliers is not None:
            pt.bifurcation = classify_crossing(prev_pt, pt)
        prev_pt = pt

        if iters <= 4:
            h = min(h * cont.grow, cont.max_step)
        tangent = _tangent(problem, y, tangent, cfg)
        if not lo <= y[-1] <= hi:
            break
    return Branch(points, diagnostic)

"""
Abstract N-dof mechanical systems with polynomial internal forces.

A system is defined by sparse symmetric mass/stiffness matrices together
with quadratic and cubic internal-force operators ``G(a, b)`` and
``H(a, b, c)``.  The operators are exposed as evaluations only; order-3 and
order-4 coefficient tensors are never materialised, which keeps storage
linear in the dof count for finite element systems.

Discrete (modal-coordinate) systems built from small coefficient tables are
provided for toy problems and for the dense oracles used by the test suite.
"""

import json

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError

__all__ = [
    "SymmetricMatrix",
    "NonlinearOperators",
    "MechanicalSystem",
    "build_discrete_system",
    "load_discrete_json",
    "eval_quadratic",
    "eval_cubic",
    "full_internal_force",
]


class SymmetricMatrix:
    """Sparse symmetric matrix that stores a single triangle.

    Only the upper triangle (including the diagonal) is kept, so symmetry
    is exact by construction.  The full CSR form is materialised lazily
    for matrix-vector products and factorisations.
    """

    def __init__(self, mat):
        mat = sp.csr_matrix(mat)
        if mat.shape[0] != mat.shape[1]:
            raise ConfigError(f"matrix must be square, got {mat.shape}")
        data = mat.tocoo()
        if not np.all(np.isfinite(data.data)):
            raise ConfigError("matrix entries must be finite")
        self._upper = sp.triu(mat, k=0, format="csr")
        self._full = None

    @property
    def shape(self):
        return self._upper.shape

    @property
    def n(self):
        return self._upper.shape[0]

    def full(self):
        """Return the full symmetric matrix in CSR form."""
        if self._full is None:
            strict = sp.triu(self._upper, k=1)
            self._full = (self._upper + strict.T).tocsr()
        return self._full

    def toarray(self):
        return self.full().toarray()

    def matvec(self, x):
        return self.full() @ x

    def __matmul__(self, x):
        return self.full() @ x

    def diagonal(self):
        return self._upper.diagonal()


class NonlinearOperators:
    """Pair of polynomial internal-force evaluators.

    Parameters
    ----------
    quadratic : callable
        ``quadratic(a, b) -> ndarray``, bilinear and symmetric in its
        arguments.
    cubic : callable
        ``cubic(a, b, c) -> ndarray``, trilinear and symmetric under all
        argument permutations.
    full_force : callable or None
        Optional ``full_force(u) -> ndarray`` evaluating the complete
        (non-split) internal force including the linear part.
    """

    def __init__(self, quadratic, cubic, full_force=None):
        self.quadratic = quadratic
        self.cubic = cubic
        self.full_force = full_force


class MechanicalSystem:
    """Conservative N-dof system ``M u'' + K u + G(u,u) + H(u,u,u) = 0``.

    All matrices and operators act on free dofs only; ``constrained_dofs``
    records the eliminated global dof indices for bookkeeping (empty for
    discrete systems).  Instances are immutable after construction and the
    operator evaluations are pure functions.
    """

    def __init__(self, mass, stiffness, nonlinear, constrained_dofs=(),
                 label=""):
        if not isinstance(mass, SymmetricMatrix):
            mass = SymmetricMatrix(mass)
        if not isinstance(stiffness, SymmetricMatrix):
            stiffness = SymmetricMatrix(stiffness)
        if mass.n != stiffness.n:
            raise ConfigError(
                f"mass ({mass.n}) and stiffness ({stiffness.n}) dimensions "
                f"disagree")
        self.mass = mass
        self.stiffness = stiffness
        self.nonlinear = nonlinear
        self.constrained_dofs = np.asarray(sorted(constrained_dofs), dtype=int)
        self.label = label

    @property
    def dof_count(self):
        return self.mass.n

    def _check_vec(self, u, name="u"):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dof_count,):
            raise ConfigError(
                f"{name} has length {u.shape}, expected ({self.dof_count},)")
        return u


def eval_quadratic(system, a, b):
    """Evaluate the quadratic internal-force operator ``G(a, b)``."""
    a = system._check_vec(a, "a")
    b = system._check_vec(b, "b")
    return system.nonlinear.quadratic(a, b)


def eval_cubic(system, a, b, c):
    """Evaluate the cubic internal-force operator ``H(a, b, c)``."""
    a = system._check_vec(a, "a")
    b = system._check_vec(b, "b")
    c = system._check_vec(c, "c")
    return system.nonlinear.cubic(a, b, c)


def full_internal_force(system, u):
    """Evaluate the complete internal force at displacement ``u``.

    Uses the dedicated full-force evaluator when the system provides one
    (finite element systems do); otherwise assembles
    ``K u + G(u,u) + H(u,u,u)``, which is exact for polynomial systems.
    """
    u = system._check_vec(u)
    if system.nonlinear.full_force is not None:
        return system.nonlinear.full_force(u)
    return (system.stiffness @ u
            + system.nonlinear.quadratic(u, u)
            + system.nonlinear.cubic(u, u, u))


def _validate_quad_table(g, n):
    table = {}
    for (s, k, l), value in g.items():
        if not (0 <= s < n and 0 <= k < n and 0 <= l < n):
            raise ConfigError(f"quadratic index ({s},{k},{l}) out of range "
                              f"for {n} coordinates")
        table[(s, k, l)] = float(value)
    for (s, k, l), value in table.items():
        sym = table.get((s, l, k))
        if sym is None or sym != value:
            raise ConfigError(
                f"quadratic table not symmetric: g[{s}][{k}][{l}]={value} "
                f"but g[{s}][{l}][{k}]={sym}; symmetrise it explicitly")
    return table


def _validate_cubic_table(h, n):
    from itertools import permutations

    table = {}
    for (s, k, l, m), value in h.items():
        if not all(0 <= i < n for i in (s, k, l, m)):
            raise ConfigError(f"cubic index ({s},{k},{l},{m}) out of range "
                              f"for {n} coordinates")
        table[(s, k, l, m)] = float(value)
    for (s, k, l, m), value in table.items():
        for perm in permutations((k, l, m)):
            sym = table.get((s,) + perm)
            if sym is None or sym != value:
                raise ConfigError(
                    f"cubic table not symmetric: h[{s}]{(k, l, m)}={value} "
                    f"but h[{s}]{perm}={sym}; symmetrise it explicitly")
    return table


def build_discrete_system(frequencies, quad_coeffs=None, cubic_coeffs=None):
    """Build a discrete system directly specified in modal-like coordinates.

    The system has identity mass, ``K = diag(frequencies**2)`` and
    polynomial forces given by sparse coefficient tables:

    ``[G(a, b)]_s = sum_{k,l} g[s,k,l] a_k b_l``
    ``[H(a, b, c)]_s = sum_{k,l,m} h[s,k,l,m] a_k b_l c_m``

    Parameters
    ----------
    frequencies : array_like
        Positive natural frequencies (rad/time), one per coordinate.
    quad_coeffs : dict or None
        ``{(s, k, l): value}`` with 0-based indices; must be symmetric in
        ``(k, l)``.  Asymmetric tables are rejected, not symmetrised.
    cubic_coeffs : dict or None
        ``{(s, k, l, m): value}``, symmetric in ``(k, l, m)``.

    Returns
    -------
    MechanicalSystem
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if freqs.ndim != 1 or freqs.size == 0:
        raise ConfigError("frequencies must be a nonempty 1-d sequence")
    if np.any(freqs <= 0.0):
        raise ConfigError("frequencies must be positive")
    n = freqs.size

    g = _validate_quad_table(quad_coeffs or {}, n)
    h = _validate_cubic_table(cubic_coeffs or {}, n)

    g_items = sorted(g.items())
    h_items = sorted(h.items())

    def quadratic(a, b):
        out = np.zeros(n)
        for (s, k, l), value in g_items:
            out[s] += value * a[k] * b[l]
        return out

    def cubic(a, b, c):
        out = np.zeros(n)
        for (s, k, l, m), value in h_items:
            out[s] += value * a[k] * b[l] * c[m]
        return out

    mass = SymmetricMatrix(sp.identity(n, format="csr"))
    stiffness = SymmetricMatrix(sp.diags(freqs**2).tocsr())
    return MechanicalSystem(mass, stiffness,
                            NonlinearOperators(quadratic, cubic),
                            label="discrete")


def load_discrete_json(path):
    """Load a discrete system from its JSON document.

    Format (1-based indices)::

        {"frequencies": [...],
         "g": [[s, k, l, value], ...],
         "h": [[s, k, l, m, value], ...]}
    """
    with open(path) as fh:
        doc = json.load(fh)
    try:
        freqs = doc["frequencies"]
    except KeyError:
        raise ConfigError(f"{path}: missing 'frequencies'")
    g = {}
    for row in doc.get("g", []):
        if len(row) != 4:
            raise ConfigError(f"{path}: 'g' rows must be [s, k, l, value]")
        s, k, l, value = row
        g[(int(s) - 1, int(k) - 1, int(l) - 1)] = value
    h = {}
    for row in doc.get("h", []):
        if len(row) != 5:
            raise ConfigError(f"{path}: 'h' rows must be [s, k, l, m, value]")
        s, k, l, m, value = row
        h[(int(s) - 1, int(k) - 1, int(l) - 1, int(m) - 1)] = value
    return build_discrete_system(freqs, g, h)

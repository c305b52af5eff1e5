"""
Master-mode eigensolution and state-space spectrum bookkeeping.

``solve_modes`` extracts a handful of mass-normalised modes from the
generalised symmetric eigenproblem ``K phi = omega^2 M phi``.
``build_spectrum`` arranges the corresponding state-space eigenvalues
``+i omega_1 .. +i omega_n, -i omega_1 .. -i omega_n``.  Complex numbers
are never stored: eigenvalues are kept as signed frequencies (their
imaginary parts), and conversions between the real normal coordinates
``(r, s)`` and the complex ones ``z`` are provided as explicit helpers.
"""

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, NumericalError
from .systems import SymmetricMatrix

__all__ = ["ModeSet", "ComplexSpectrum", "solve_modes", "build_spectrum",
           "z_from_rs", "rs_from_z", "export_modes_csv"]

_DENSE_LIMIT = 500


class ModeSet:
    """Mass-normalised master eigenpairs.

    Attributes
    ----------
    labels : (n,) int ndarray
        1-based global mode numbers (position in the ascending spectrum).
    omegas : (n,) float ndarray
        Natural frequencies in rad/time, ascending with label order.
    vectors : (N, n) float ndarray
        Mode shapes, columns mass-normalised (``phi^T M phi = I``).
    """

    def __init__(self, labels, omegas, vectors):
        self.labels = np.asarray(labels, dtype=int)
        self.omegas = np.asarray(omegas, dtype=float)
        self.vectors = np.asarray(vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.omegas.size:
            raise ConfigError("vectors must be (N, n) with one column per mode")
        if self.labels.size != self.omegas.size:
            raise ConfigError("labels/omegas size mismatch")

    @property
    def count(self):
        return self.omegas.size

    @property
    def dof_count(self):
        return self.vectors.shape[0]

    def phi(self, p):
        """Mode-shape column for master position ``p`` (0-based)."""
        return self.vectors[:, p]

    def subset(self, positions):
        positions = list(positions)
        return ModeSet(self.labels[positions], self.omegas[positions],
                       self.vectors[:, positions])


class ComplexSpectrum:
    """State-space eigenvalue table ``lambda_s = +/- i omega``.

    Entry ``s`` for ``s < n`` carries ``+i omega_s`` and entry ``s + n``
    carries ``-i omega_s``; only the signed frequencies (imaginary parts)
    are stored.
    """

    def __init__(self, omegas):
        omegas = np.asarray(omegas, dtype=float)
        if omegas.size == 0:
            raise ConfigError("empty mode set")
        if np.any(omegas <= 0.0):
            raise NumericalError(
                "zero or negative frequency in spectrum (rigid-body or "
                "buckled mode present); constrain the model or drop the mode")
        gaps = np.abs(np.subtract.outer(omegas, omegas))
        np.fill_diagonal(gaps, np.inf)
        if gaps.size and gaps.min() < 1e-12 * omegas.max():
            raise NumericalError("repeated frequency (to round-off) in the "
                                 "master set; the state-space pairing is "
                                 "ambiguous")
        self.omegas = omegas

    @property
    def n(self):
        return self.omegas.size

    @property
    def state_count(self):
        return 2 * self.n

    def signed_frequency(self, s):
        """Imaginary part of ``lambda_s`` for state index ``s`` (0-based)."""
        n = self.n
        if not 0 <= s < 2 * n:
            raise ConfigError(f"state index {s} out of range for 2n={2 * n}")
        return self.omegas[s] if s < n else -self.omegas[s - n]

    @property
    def signed_frequencies(self):
        return np.concatenate([self.omegas, -self.omegas])

    def eigenvalues(self):
        """Full complex eigenvalue array (test/diagnostic use)."""
        return 1j * self.signed_frequencies

    def conjugate_index(self, s):
        n = self.n
        return s + n if s < n else s - n

    def mode_of(self, s):
        """Master position (0-based) owning state index ``s``."""
        n = self.n
        return s if s < n else s - n


def build_spectrum(mode_set):
    """Construct the state-space spectrum of a mode set."""
    return ComplexSpectrum(mode_set.omegas)


def z_from_rs(r, s, omegas):
    """Map real normal coordinates to complex ones.

    ``z_p = (r_p - i s_p / omega_p) / 2`` and
    ``z_{p+n} = (r_p + i s_p / omega_p) / 2``.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    zp = 0.5 * (r - 1j * s / omegas)
    return np.concatenate([zp, np.conj(zp)])


def rs_from_z(z, omegas):
    """Inverse of :func:`z_from_rs`; exact for conjugate-paired ``z``."""
    z = np.asarray(z, dtype=complex)
    omegas = np.asarray(omegas, dtype=float)
    n = omegas.size
    r = (z[:n] + z[n:]).real
    s = (1j * omegas * (z[:n] - z[n:])).real
    return r, s


def _as_operators(mat):
    if isinstance(mat, SymmetricMatrix):
        return mat.full()
    return sp.csr_matrix(mat)


def solve_modes(mass, stiffness, count=None, indices=None, window=None):
    """Solve ``K phi = omega^2 M phi`` for a subset of low modes.

    Exactly one selector must be given: the number of lowest modes, a list
    of 1-based mode numbers, or a frequency window ``(w_lo, w_hi)`` in
    rad/time.

    Modes are returned in ascending frequency order, mass-normalised, with
    a deterministic sign convention (the entry of largest magnitude is
    positive).  Dense LAPACK is used up to 500 dofs and shift-invert
    Lanczos above.

    Returns
    -------
    ModeSet
    """
    M = _as_operators(mass)
    K = _as_operators(stiffness)
    n_dof = M.shape[0]
    if K.shape[0] != n_dof:
        raise ConfigError("mass/stiffness dimension mismatch")

    selectors = sum(sel is not None for sel in (count, indices, window))
    if selectors != 1:
        raise ConfigError("give exactly one of count, indices, window")

    if indices is not None:
        indices = sorted(int(i) for i in indices)
        if indices[0] < 1:
            raise ConfigError("mode numbers are 1-based")
        need = indices[-1]
    elif count is not None:
        need = int(count)
        if need < 1:
            raise ConfigError("count must be >= 1")
        indices = list(range(1, need + 1))
    else:
        w_lo, w_hi = float(window[0]), float(window[1])
        if not 0 <= w_lo < w_hi:
            raise ConfigError("window must satisfy 0 <= w_lo < w_hi")
        need = None

    if n_dof <= _DENSE_LIMIT:
        vals, vecs = la.eigh(K.toarray(), M.toarray())
        vals = np.maximum(vals, 0.0)
        omegas_all = np.sqrt(vals)
    else:
        if need is None:
            k = min(n_dof - 1, 30)
        else:
            k = min(n_dof - 1, max(need, 6))
        v0 = np.full(n_dof, 1.0 / np.sqrt(n_dof))
        try:
            vals, vecs = spla.eigsh(K, k=k, M=M, sigma=0.0, which="LM",
                                    v0=v0)
        except Exception as exc:  # arpack failures carry poor messages
            raise NumericalError(f"sparse eigensolver failed: {exc}") from exc
        order = np.argsort(vals)
        vals = np.maximum(vals[order], 0.0)
        vecs = vecs[:, order]
        omegas_all = np.sqrt(vals)

    if need is not None and need > omegas_all.size:
        raise ConfigError(
            f"requested mode {need} beyond available spectrum "
            f"({omegas_all.size} modes)")

    if window is not None:
        picked = [i for i, w in enumerate(omegas_all) if w_lo <= w <= w_hi]
        if not picked:
            raise ConfigError(f"no modes inside window ({w_lo}, {w_hi})")
        labels = [i + 1 for i in picked]
    else:
        labels = indices
        picked = [i - 1 for i in indices]

    omegas = omegas_all[picked]
    phi = vecs[:, picked].copy()

    for j in range(phi.shape[1]):
        v = phi[:, j]
        norm2 = float(v @ (M @ v))
        if norm2 <= 0.0:
            raise NumericalError("non-positive modal mass; mass matrix is "
                                 "not positive definite on free dofs")
        v = v / np.sqrt(norm2)
        i_max = int(np.argmax(np.abs(v)))
        if v[i_max] < 0.0:
            v = -v
        phi[:, j] = v

    return ModeSet(labels, omegas, phi)


def export_modes_csv(mode_set, path, coordinates=None, components=3):
    """Write mode shapes to CSV, one row per node.

    With ``coordinates`` given (FE case, 3 dofs/node) columns are
    ``node, x, y, z`` then ``mode<label>_<comp>`` triples; otherwise one
    dof per row with a bare index column.
    """
    n_modes = mode_set.count
    header = []
    rows = []
    if coordinates is not None:
        coords = np.asarray(coordinates, dtype=float)
        n_nodes = coords.shape[0]
        vecs = mode_set.vectors.reshape(n_nodes, components, n_modes)
        header = ["node", "x", "y", "z"] + [
            f"mode{label}_{c}" for label in mode_set.labels for c in "xyz"]
        for a in range(n_nodes):
            row = [a, *coords[a]] + list(vecs[a].T.reshape(-1))
            rows.append(row)
    else:
        header = ["dof"] + [f"mode{label}" for label in mode_set.labels]
        for i in range(mode_set.dof_count):
            rows.append([i, *mode_set.vectors[i]])

    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")

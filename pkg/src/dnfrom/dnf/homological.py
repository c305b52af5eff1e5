"""
Second-order homological solves and real-valued quadratic maps.

For every master state pair ``(k, l)`` with eigenvalue sum ``sigma``
(purely imaginary, ``sigma = i w``), the displacement map solves

``[K - w^2 M] Psi = -G(phi_k, phi_l)``

which is the real form of ``[(lambda_k+lambda_l)^2 M + K] Psi = -G``.
When ``|w|`` matches a master frequency the matrix is singular on the
span of the matching modes ``Phi_R`` and the solve is replaced by the
bordered system

``[[K - w^2 M,  M Phi_R], [(M Phi_R)^T, 0]] [Psi; mu] = [-G; 0]``

whose multiplier block carries the retained quadratic coefficients:
``mu_r = (lambda_r - lambda_{r+n}) f2_{r,kl} = 2 i omega_r f2_{r,kl}``,
purely real because ``f2`` is purely imaginary.  The constraint rows
impose mass-orthogonality of the map to every resonant mode.

Both sign patterns of a mode pair are covered by two solves: the
``P``-type map (``w = omega_k + omega_l``) and the ``N``-type map
(``w = omega_k - omega_l``, a plain static solve when ``k = l``).  The
real mapping vectors follow as

``a_hat = (Psi_P + Psi_N)/2``,
``b_hat = (Psi_N - Psi_P)/(2 omega_k omega_l)``,
``gamma_hat_kl = ((omega_l+omega_k)/omega_l) Psi_P
               + ((omega_l-omega_k)/omega_l) Psi_N``,

with the remaining second-order maps (c, alpha, beta) identically zero.
"""

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NumericalError, SingularPairError
from ..systems import eval_quadratic
from .resonance import state_name

__all__ = ["solve_second_order_pair", "solve_all_pairs",
           "realize_quadratic_maps", "velocity_map", "QuadraticMapSet"]

_DENSE_LIMIT = 600
_COND_LIMIT = 1e13


def _solve_checked(A, rhs, context):
    """Solve a symmetric (possibly indefinite) system with singularity
    detection; raises NumericalError when the matrix is numerically
    singular."""
    n = A.shape[0]
    if n <= _DENSE_LIMIT:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
        try:
            x = la.solve(Ad, rhs, assume_a="sym")
        except la.LinAlgError:
            raise NumericalError(f"singular matrix in {context}")
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"singular matrix in {context}")
        cond = np.linalg.cond(Ad)
    else:
        try:
            lu = spla.splu(sp.csc_matrix(A))
        except RuntimeError as exc:
            raise NumericalError(f"singular matrix in {context}: {exc}")
        x = lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"singular matrix in {context}")
        op = spla.LinearOperator(A.shape, matvec=lu.solve)
        try:
            inv_norm = spla.onenormest(op)
        except Exception:
            inv_norm = np.inf
        cond = inv_norm * spla.norm(sp.csc_matrix(A), 1)
    if cond > _COND_LIMIT:
        raise NumericalError(f"numerically singular matrix in {context} "
                             f"(cond ~ {cond:.2e})")
    return x


def solve_second_order_pair(system, mode_set, table, pair):
    """Solve the quadratic-map problem for one master state pair.

    Parameters
    ----------
    system : MechanicalSystem
    mode_set : ModeSet
        Master modes.
    table : ResonanceTable
    pair : (int, int)
        State indices, each in ``0 .. 2n-1``.

    Returns
    -------
    psi : ndarray
        Real displacement-map vector for the pair.
    f2 : dict
        ``{master position r: Im f2_{r, pair}}`` for the retained resonant
        monomials (empty when the pair is non-resonant).  The table is
        updated with the same values.
    """
    n = mode_set.count
    pair = table.canonical(pair)
    k, l = pair
    km, lm = (k % n), (l % n)
    w = table.sigma_im(pair)
    rhs = -eval_quadratic(system, mode_set.phi(km), mode_set.phi(lm))
    M = system.mass.full()
    K = system.stiffness.full()
    A = (K - (w * w) * M).tocsr()
    targets = table.targets(pair)
    label = f"({state_name(k, n)},{state_name(l, n)})"

    if not targets:
        try:
            psi = _solve_checked(A, rhs, f"map solve for pair {label}")
        except NumericalError:
            gaps = np.abs(np.abs(w) - mode_set.omegas)
            nearest = mode_set.omegas[int(np.argmin(gaps))]
            raise SingularPairError(w, nearest, label)
        return psi, {}

    phi_r = mode_set.vectors[:, list(targets)]
    B = sp.csr_matrix(M @ phi_r)
    D = sp.bmat([[A, B], [B.T, None]], format="csc")
    full_rhs = np.concatenate([rhs, np.zeros(len(targets))])
    sol = _solve_checked(D, full_rhs, f"bordered solve for pair {label}")
    psi = sol[:A.shape[0]]
    mu = sol[A.shape[0]:]
    f2 = {}
    for r, mu_r in zip(targets, mu):
        # mu_r = 2 i omega_r f2 with f2 = i v  =>  v = -mu_r / (2 omega_r)
        v = -mu_r / (2.0 * mode_set.omegas[r])
        f2[r] = v
        table.set_f2(r, pair, v)
    return psi, f2


def realize_quadratic_maps(psi_p, psi_n, w_k, w_l):
    """Real mapping vectors (a_hat, b_hat, gamma_hat_kl) of a mode pair."""
    if w_k <= 0.0 or w_l <= 0.0:
        raise NumericalError("zero frequency in quadratic map realisation")
    a_hat = 0.5 * (psi_p + psi_n)
    b_hat = (psi_n - psi_p) / (2.0 * w_k * w_l)
    gamma = ((w_l + w_k) / w_l) * psi_p + ((w_l - w_k) / w_l) * psi_n
    return a_hat, b_hat, gamma


def velocity_map(psi2, f2_entries, lam_k_im, lam_l_im, mode_set):
    """Velocity map ``Upsilon2 = (lambda_k + lambda_l) Psi2 + sum_s
    f2_s Phi_s`` for one state pair (complex-valued result).

    ``f2_entries`` maps state indices (0 .. 2n-1) to complex ``f2_{s,kl}``
    values; with the antisymmetric convention the mode-shape sum cancels
    and the map reduces to ``sigma Psi2``.
    """
    sigma = 1j * (lam_k_im + lam_l_im)
    out = sigma * np.asarray(psi2, dtype=complex)
    n = mode_set.count
    for s, f2 in (f2_entries or {}).items():
        out = out + complex(f2) * mode_set.phi(s % n)
    return out


class QuadraticMapSet:
    """All second-order maps of a master set.

    Stores, per canonical mode pair ``(k <= l)``, the two real map vectors
    (``P`` and ``N`` type), their mass-weighted modal components on every
    master, and the realised ``a_hat``/``b_hat``/``gamma_hat`` vectors.
    """

    def __init__(self, mode_set, table):
        self.mode_set = mode_set
        self.table = table
        self.n = mode_set.count
        self.psi = {}        # ("P"|"N", (k<=l)) -> ndarray
        self.modal = {}      # ("P"|"N", (k<=l)) -> (n,) ndarray
        self.a_hat = {}
        self.b_hat = {}
        self.gamma_hat = {}  # ordered (k, l)

    def kind_of_state_pair(self, pair):
        k, l = pair
        n = self.n
        kind = "P" if (k < n) == (l < n) else "N"
        mode_pair = tuple(sorted((k % n, l % n)))
        return kind, mode_pair

    def psi_state(self, pair):
        kind, mp = self.kind_of_state_pair(pair)
        return self.psi[(kind, mp)]

    def modal_state(self, pair):
        kind, mp = self.kind_of_state_pair(pair)
        return self.modal[(kind, mp)]

    def mode_pairs(self):
        n = self.n
        return [(k, l) for k in range(n) for l in range(k, n)]


def solve_all_pairs(system, mode_set, table):
    """Solve every distinct quadratic-map problem of the master set.

    Conjugate state pairs share one real solve, so per unordered mode
    pair only the ``P`` map (``sigma = i(omega_k + omega_l)``) and the
    ``N`` map (``sigma = i(omega_k - omega_l)``) are computed.  Resonant
    coefficients are recorded in the table for all flagged state pairs.

    Returns
    -------
    QuadraticMapSet
    """
    maps = QuadraticMapSet(mode_set, table)
    M = system.mass.full()
    n = mode_set.count
    for (k, l) in maps.mode_pairs():
        # P-type representative (+k, +l); N-type representative (+k, -l)
        for kind, pair in (("P", (k, l)), ("N", (k, l + n))):
            psi, _ = solve_second_order_pair(system, mode_set, table, pair)
            maps.psi[(kind, (k, l))] = psi
            maps.modal[(kind, (k, l))] = mode_set.vectors.T @ (M @ psi)
        # conjugate state pairs share the solve but still carry their own
        # retained-coefficient entries
        for pair in ((k + n, l + n), (l, k + n)):
            pair = table.canonical(pair)
            if table.is_resonant(pair):
                solve_second_order_pair(system, mode_set, table, pair)

        w_k, w_l = mode_set.omegas[k], mode_set.omegas[l]
        psi_p = maps.psi[("P", (k, l))]
        psi_n = maps.psi[("N", (k, l))]
        a_hat, b_hat, gamma_kl = realize_quadratic_maps(psi_p, psi_n,
                                                        w_k, w_l)
        maps.a_hat[(k, l)] = a_hat
        maps.b_hat[(k, l)] = b_hat
        maps.gamma_hat[(k, l)] = gamma_kl
        if k != l:
            _, _, gamma_lk = realize_quadratic_maps(psi_p, psi_n, w_l, w_k)
            maps.gamma_hat[(l, k)] = gamma_lk
    return maps

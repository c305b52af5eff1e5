"""
Third-order reduced-dynamics coefficients.

The complex cubic coefficients come from projecting

``Xi3_klm = G(Psi2_kl, Phi_m) + G(Phi_k, Psi2_lm) + H(Phi_k, Phi_l, Phi_m)``

onto the master modes.  Without second-order resonances

``f3_{s,klm} = -phi_s^T Xi3_klm / (2 i omega_s)``,

purely imaginary and antisymmetric between conjugate rows.  Retained
quadratic monomials add correction terms built from products of ``f2``
with the mass-weighted modal components of the displacement and velocity
maps; these break the antisymmetry in a prescribed way (the conjugate-row
sum equals the map-component products, which the test suite checks).

The real-valued tables feeding the oscillator-form reduced dynamics are

``h_pklm = phi_p^T H(phi_k, phi_l, phi_m)``
``A_pklm = 2 phi_p^T G(phi_k, a_hat_lm)``
``B_pklm = 2 phi_p^T G(phi_k, b_hat_lm)``

plus, for every 1:2 resonant master pair, the correction tables P
(displacement cubics) and Q (velocity cubics) generated by the retained
quadratic monomials.
"""

import itertools

import numpy as np

from ..systems import eval_quadratic, eval_cubic

__all__ = ["CubicCoefficients", "compute_cubic_coefficients"]


class CubicCoefficients:
    """Cubic coefficient tables of a reduced model.

    Attributes
    ----------
    f3_im : (2n, 2n, 2n, 2n) ndarray or None
        Imaginary parts of the complex cubic coefficients over master
        state indices.
    h, A, B : (n, n, n, n) ndarray
        Real tables over master mode positions.
    P : dict
        ``{(p, (k, l, m)): value}`` displacement-cubic corrections, keyed
        by equation and canonical (sorted) monomial.
    Q : dict
        ``{(p, k, (l, m)): value}`` velocity-cubic corrections for the
        monomial ``r_k rdot_l rdot_m`` with ``l <= m``.
    """

    def __init__(self, n, omegas, f3_im, h, A, B, P, Q):
        self.n = n
        self.omegas = omegas
        self.f3_im = f3_im
        self.h = h
        self.A = A
        self.B = B
        self.P = P
        self.Q = Q

    def displacement_table(self):
        """Canonical cubic displacement coefficients.

        Returns ``{(p, (k <= l <= m)): coeff}`` where the coefficient
        multiplies the monomial ``r_k r_l r_m`` once, i.e. the sum of
        ``h + A`` over the distinct orderings plus the P correction.
        """
        n = self.n
        out = {}
        for p in range(n):
            for k, l, m in itertools.combinations_with_replacement(
                    range(n), 3):
                total = 0.0
                for perm in set(itertools.permutations((k, l, m))):
                    total += self.h[p][perm] + self.A[p][perm]
                total += self.P.get((p, (k, l, m)), 0.0)
                if total != 0.0:
                    out[(p, (k, l, m))] = total
        return out

    def velocity_table(self):
        """Canonical velocity coefficients ``{(p, k, (l <= m)): coeff}``
        multiplying ``r_k rdot_l rdot_m`` once."""
        n = self.n
        out = {}
        for p in range(n):
            for k in range(n):
                for l, m in itertools.combinations_with_replacement(
                        range(n), 2):
                    total = self.B[p, k, l, m]
                    if l != m:
                        total += self.B[p, k, m, l]
                    total += self.Q.get((p, k, (l, m)), 0.0)
                    if total != 0.0:
                        out[(p, k, (l, m))] = total
        return out


def _modal_g_table(system, mode_set):
    """g[p, k, l] = phi_p^T G(phi_k, phi_l) over master positions."""
    n = mode_set.count
    Phi = mode_set.vectors
    g = np.zeros((n, n, n))
    for k in range(n):
        for l in range(k, n):
            vec = eval_quadratic(system, Phi[:, k], Phi[:, l])
            proj = Phi.T @ vec
            g[:, k, l] = proj
            g[:, l, k] = proj
    return g


def _modal_h_table(system, mode_set):
    n = mode_set.count
    Phi = mode_set.vectors
    h = np.zeros((n, n, n, n))
    for k, l, m in itertools.combinations_with_replacement(range(n), 3):
        vec = eval_cubic(system, Phi[:, k], Phi[:, l], Phi[:, m])
        proj = Phi.T @ vec
        for perm in set(itertools.permutations((k, l, m))):
            h[:, perm[0], perm[1], perm[2]] = proj
    return h


def compute_cubic_coefficients(system, mode_set, maps, table,
                               with_f3=True):
    """Compute every cubic coefficient table of the reduced dynamics.

    Parameters
    ----------
    system : MechanicalSystem
    mode_set : ModeSet
        Master modes.
    maps : QuadraticMapSet
        Output of ``solve_all_pairs`` (all pair maps solved).
    table : ResonanceTable
        With retained-coefficient entries filled by the pair solves.
    with_f3 : bool
        Also build the complex ``f3`` table over state indices (cheap for
        a handful of masters; the real tables alone suffice to run the
        reduced model).

    Returns
    -------
    CubicCoefficients
    """
    n = mode_set.count
    Phi = mode_set.vectors
    omegas = mode_set.omegas

    gmod = _modal_g_table(system, mode_set)
    hmod = _modal_h_table(system, mode_set)

    # phi_p^T G(psi_map, phi_m) for every stored map and master mode
    gpsi = {}
    for key, psi in maps.psi.items():
        for m in range(n):
            vec = eval_quadratic(system, psi, Phi[:, m])
            gpsi[key + (m,)] = Phi.T @ vec

    # real A and B tables from the realised maps
    A = np.zeros((n, n, n, n))
    B = np.zeros((n, n, n, n))
    for (l, m) in maps.mode_pairs():
        a_vec = maps.a_hat[(l, m)]
        b_vec = maps.b_hat[(l, m)]
        for k in range(n):
            pa = Phi.T @ eval_quadratic(system, Phi[:, k], a_vec)
            pb = Phi.T @ eval_quadratic(system, Phi[:, k], b_vec)
            A[:, k, l, m] = 2.0 * pa
            B[:, k, l, m] = 2.0 * pb
            if l != m:
                A[:, k, m, l] = 2.0 * pa
                B[:, k, m, l] = 2.0 * pb

    f3_im = None
    if with_f3:
        f3_im = _assemble_f3(mode_set, maps, table, gpsi, hmod)

    P, Q = _resonance_corrections(mode_set, maps, table, gmod)
    return CubicCoefficients(n, omegas, f3_im, hmod, A, B, P, Q)


def _assemble_f3(mode_set, maps, table, gpsi, hmod):
    n = mode_set.count
    omegas = mode_set.omegas
    two_n = 2 * n
    f3_im = np.zeros((two_n, two_n, two_n, two_n))
    resonant = not table.is_empty

    def mode(s):
        return s % n

    for k in range(two_n):
        for l in range(two_n):
            for m in range(two_n):
                kind_kl, mp_kl = maps.kind_of_state_pair((k, l))
                kind_lm, mp_lm = maps.kind_of_state_pair((l, m))
                base = (gpsi[(kind_kl, mp_kl, mode(m))]
                        + gpsi[(kind_lm, mp_lm, mode(k))]
                        + hmod[:, mode(k), mode(l), mode(m)])
                if resonant:
                    s_im = np.zeros(n)
                    rhs_a = np.zeros(n)
                    for q in range(two_n):
                        v_kl = table.get_f2_im(q, (k, l))
                        v_lm = table.get_f2_im(q, (l, m))
                        if v_kl != 0.0:
                            comp = maps.modal_state((q, m))
                            w_qm = table.sigma_im((q, m))
                            s_im -= comp * v_kl
                            rhs_a += w_qm * comp * v_kl
                        if v_lm != 0.0:
                            comp = maps.modal_state((k, q))
                            w_kq = table.sigma_im((k, q))
                            s_im -= comp * v_lm
                            rhs_a += w_kq * comp * v_lm
                    rhs_a -= base
                    f3_im[:n, k, l, m] = 0.5 * (s_im - rhs_a / omegas)
                    f3_im[n:, k, l, m] = 0.5 * (s_im + rhs_a / omegas)
                else:
                    f3_im[:n, k, l, m] = base / (2.0 * omegas)
                    f3_im[n:, k, l, m] = -base / (2.0 * omegas)
    return f3_im


def _ordered_quad_monomials(table, n):
    """Distinct retained real quadratic monomials: {(target p, (k <= l))}."""
    monos = set()
    for pair in table.pairs():
        k, l = pair
        mp = tuple(sorted((k % n, l % n)))
        for r in table.targets(pair):
            monos.add((r, mp))
    return sorted(monos)


def _resonance_corrections(mode_set, maps, table, gmod):
    """P and Q tables of every retained 1:2 resonant master pair."""
    n = mode_set.count
    omegas = mode_set.omegas
    monos = _ordered_quad_monomials(table, n)
    P = {}
    Q = {}

    def am(p, pair):
        pair = tuple(sorted(pair))
        return 0.5 * (maps.modal[("P", pair)][p]
                      + maps.modal[("N", pair)][p])

    def bm(p, pair):
        pair = tuple(sorted(pair))
        wk, wl = omegas[pair[0]], omegas[pair[1]]
        return (maps.modal[("N", pair)][p]
                - maps.modal[("P", pair)][p]) / (2.0 * wk * wl)

    def addP(p, mono, value):
        key = (p, tuple(sorted(mono)))
        P[key] = P.get(key, 0.0) + value

    def addQ(p, k, pair, value):
        key = (p, k, tuple(sorted(pair)))
        Q[key] = Q.get(key, 0.0) + value

    for (target, mp) in monos:
        k, l = mp
        if k == l and target != k:
            # r_a^2 monomial in equation b: omega_b ~ 2 omega_a pattern
            a, b = k, target
            g_baa = gmod[b, a, a]
            wa2, wb2 = omegas[a] ** 2, omegas[b] ** 2
            addP(b, (a, a, a), g_baa * (-2.0 * am(b, (a, b))
                                        + 4.0 * bm(b, (a, b)) * wa2))
            addP(b, (a, a, b), g_baa * (-2.0 * am(b, (b, b))
                                        + 4.0 * bm(b, (b, b)) * wb2))
            addP(b, (a, b, b), g_baa * (-4.0 * am(b, (a, b))
                                        + 8.0 * bm(b, (a, b)) * wb2))
            addQ(b, a, (a, a), -4.0 * g_baa * bm(b, (a, b)))
            addQ(b, a, (b, b), -4.0 * g_baa * bm(b, (a, b)))
            addQ(b, a, (a, b), -4.0 * g_baa * bm(b, (a, b)))
            addQ(b, b, (a, b), -4.0 * g_baa * bm(b, (b, b)))
        elif k != l and target in (k, l):
            # r_a r_b monomial in equation a: the difference combination
            a = target
            b = l if target == k else k
            g_aab = gmod[a, a, b]
            wa2, wb2 = omegas[a] ** 2, omegas[b] ** 2
            addP(a, (a, a, b), g_aab * (-4.0 * am(a, (a, a))
                                        - 2.0 * am(a, (b, b))
                                        + 8.0 * bm(a, (a, a)) * wa2
                                        + 4.0 * bm(a, (b, b)) * wb2))
            addQ(a, b, (a, a), -4.0 * g_aab * bm(a, (a, a)))
            addQ(a, a, (a, b), -4.0 * g_aab * (bm(a, (a, a))
                                               + bm(a, (a, b))))
    return P, Q

"""
Vectorised assembly of the mass matrix, stiffness matrix and the exact
quadratic/cubic internal-force operators of a Saint-Venant--Kirchhoff
continuum.

With the Green-Lagrange strain split ``e = eps(u) + ens(u, u)/2``,
``eps(a) = sym(grad a)`` and ``ens(a, b) = (grad a^T grad b +
grad b^T grad a)/2``, the internal force decomposes exactly into

``F(u) = K u + G(u, u) + H(u, u, u)``

with the symmetrised weak forms

``g(a, b; v)  = 1/2 int eps(v):A:ens(a,b) + ens(v,a):A:eps(b)
               + ens(v,b):A:eps(a)``
``h(a, b, c; v) = 1/6 int ens(v,a):A:ens(b,c) + ens(v,b):A:ens(c,a)
               + ens(v,c):A:ens(a,b)``

The cubic prefactor makes ``h(u,u,u;v) = 1/2 int ens(v,u):A:ens(u,u)``,
which is the value required for the decomposition above to hold to
round-off; the full force is integrated independently from
``S : (F^T grad v)`` without any splitting, providing the cross-check.

Constrained dofs are eliminated by index removal, so every assembled
matrix stays symmetric positive (semi-)definite in the reduced numbering.
All element loops are vectorised numpy operations with deterministic
ordered reductions (bincount), so results do not depend on threading.
"""

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, MeshError
from ..systems import MechanicalSystem, NonlinearOperators, SymmetricMatrix
from .elements import ELEMENTS

__all__ = ["FeModel", "assemble_linear"]

_CHUNK = 2048


class _QuadData:
    """Physical-space shape data at the quadrature points of one rule."""

    def __init__(self, coords, elements, N_ref, dN_ref, weights):
        X = coords[elements]                       # (nE, nn, 3)
        # jac[e,q,d,r] = d x_d / d xi_r
        jac = np.einsum("ead,qar->eqdr", X, dN_ref, optimize=True)
        det = np.linalg.det(jac)
        if np.any(det <= 0.0):
            bad = int(np.argwhere(det <= 0.0)[0][0])
            raise MeshError(f"negative Jacobian in element {bad}")
        jinv = np.linalg.inv(jac)
        # dN[e,q,a,j] = dN_ref[q,a,r] * jinv[e,q,r,j]
        self.dN = np.einsum("qar,eqrj->eqaj", dN_ref, jinv, optimize=True)
        self.N = N_ref                             # (nQ, nn)
        self.wdet = det * weights[None, :]         # (nE, nQ)


class FeModel:
    """Finite element continuum model on free dofs.

    Parameters
    ----------
    mesh : Mesh
    material : Material
    clamped : sequence of str
        Names of node sets whose dofs are removed (all three components).
    """

    def __init__(self, mesh, material, clamped=()):
        self.mesh = mesh
        self.material = material
        self.clamped = tuple(clamped)

        ref = ELEMENTS[mesh.kind]
        self._ref = ref
        self._force = _QuadData(mesh.nodes, mesh.elements, ref.N, ref.dN,
                                ref.weights)
        if ref.mass_points is self._ref.points:
            self._massq = self._force
        else:
            self._massq = _QuadData(mesh.nodes, mesh.elements, ref.mass_N,
                                    ref.mass_dN, ref.mass_weights)

        fixed = np.zeros(mesh.dof_count, dtype=bool)
        for name in clamped:
            if name not in mesh.node_sets:
                raise ConfigError(
                    f"clamp set '{name}' not found; mesh has "
                    f"{sorted(mesh.node_sets)}")
            nodes = mesh.node_sets[name]
            for c in range(3):
                fixed[3 * nodes + c] = True
        self.constrained_dofs = np.flatnonzero(fixed)
        self.free_dofs = np.flatnonzero(~fixed)
        self._full_to_free = -np.ones(mesh.dof_count, dtype=int)
        self._full_to_free[self.free_dofs] = np.arange(self.free_dofs.size)

        # element dof indices in the full numbering
        conn = mesh.elements
        self._elem_dofs = (3 * conn[:, :, None]
                           + np.arange(3)[None, None, :]).reshape(
                               conn.shape[0], -1)

        self._mass = None
        self._stiffness = None

    # -- dof bookkeeping ------------------------------------------------

    @property
    def n_free(self):
        return self.free_dofs.size

    def scatter(self, u_free):
        """Free-dof vector -> full-dof vector (constrained entries zero)."""
        u_free = np.asarray(u_free, dtype=float)
        if u_free.shape != (self.n_free,):
            raise ConfigError(f"expected free vector of length "
                              f"{self.n_free}, got {u_free.shape}")
        full = np.zeros(self.mesh.dof_count)
        full[self.free_dofs] = u_free
        return full

    def gather(self, u_full):
        return np.asarray(u_full, dtype=float)[self.free_dofs]

    # -- matrices --------------------------------------------------------

    @property
    def mass(self):
        if self._mass is None:
            self._mass = SymmetricMatrix(self._assemble_mass())
        return self._mass

    @property
    def stiffness(self):
        if self._stiffness is None:
            self._stiffness = SymmetricMatrix(self._assemble_tangent_full(
                np.zeros(self.mesh.dof_count)))
        return self._stiffness

    def _reduce_matrix(self, mat):
        return mat[self.free_dofs][:, self.free_dofs].tocsr()

    def _assemble_mass(self):
        q = self._massq
        rho = self.material.density
        n_dof = self.mesh.dof_count
        nn = self._ref.n_nodes
        conn = self.mesh.elements
        mat = sp.csr_matrix((n_dof, n_dof))
        for lo in range(0, conn.shape[0], _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            # nodal mass block m[e,a,b]
            m = rho * np.einsum("eq,qa,qb->eab", q.wdet[sl], q.N, q.N,
                                optimize=True)
            ne = m.shape[0]
            ke = np.zeros((ne, 3 * nn, 3 * nn))
            for c in range(3):
                ke[:, c::3, c::3] = m
            rows = np.broadcast_to(self._elem_dofs[sl][:, :, None],
                                   ke.shape).ravel()
            cols = np.broadcast_to(self._elem_dofs[sl][:, None, :],
                                   ke.shape).ravel()
            mat = mat + sp.coo_matrix((ke.ravel(), (rows, cols)),
                                      shape=(n_dof, n_dof)).tocsr()
        return self._reduce_matrix(mat)

    def _assemble_tangent_full(self, u_full):
        """Tangent stiffness dF/du at displacement ``u_full`` (full dofs),
        reduced to free dofs on return."""
        lam = self.material.lame_lambda
        mu = self.material.lame_mu
        q = self._force
        n_dof = self.mesh.dof_count
        conn = self.mesh.elements
        nn = self._ref.n_nodes
        u_nodal = u_full.reshape(-1, 3)
        mat = sp.csr_matrix((n_dof, n_dof))
        eye = np.eye(3)
        for lo in range(0, conn.shape[0], _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            dN = q.dN[sl]
            wd = q.wdet[sl]
            ue = u_nodal[conn[sl]]
            J = np.einsum("eai,eqaj->eqij", ue, dN, optimize=True)
            F = J + eye
            E = 0.5 * (np.einsum("eqri,eqrj->eqij", F, F) - eye)
            S = self.material.stress(E)
            # geometric part: delta_ij gradNa . S . gradNb
            geo = np.einsum("eq,eqap,eqpr,eqbr->eab", wd, dN, S, dN,
                            optimize=True)
            # material part via f^a = F gradNa
            f = np.einsum("eqip,eqap->eqai", F, dN, optimize=True)
            mat_l = lam * np.einsum("eq,eqai,eqbj->eaibj", wd, f, f,
                                    optimize=True)
            ffT = np.einsum("eqip,eqjp->eqij", F, F, optimize=True)
            gg = np.einsum("eqap,eqbp->eqab", dN, dN, optimize=True)
            mat_m1 = mu * np.einsum("eq,eqij,eqab->eaibj", wd, ffT, gg,
                                    optimize=True)
            mat_m2 = mu * np.einsum("eq,eqbi,eqaj->eaibj", wd, f, f,
                                    optimize=True)
            ke = mat_l + mat_m1 + mat_m2
            # geometric part sits on the component diagonal
            for c in range(3):
                ke[:, :, c, :, c] += geo
            ke = ke.reshape(ke.shape[0], 3 * nn, 3 * nn)
            rows = np.broadcast_to(self._elem_dofs[sl][:, :, None],
                                   ke.shape).ravel()
            cols = np.broadcast_to(self._elem_dofs[sl][:, None, :],
                                   ke.shape).ravel()
            mat = mat + sp.coo_matrix((ke.ravel(), (rows, cols)),
                                      shape=(n_dof, n_dof)).tocsr()
        return self._reduce_matrix(mat)

    def tangent_stiffness(self, u_free):
        """Tangent stiffness matrix at a free-dof displacement state."""
        return self._assemble_tangent_full(self.scatter(u_free))

    # -- force operators ---------------------------------------------------

    def _grad(self, u_full):
        """Displacement gradients at force quadrature points."""
        ue = u_full.reshape(-1, 3)[self.mesh.elements]
        return np.einsum("eai,eqaj->eqij", ue, self._force.dN,
                         optimize=True)

    def _scatter_force(self, P):
        """Integrate a first-Piola-like field ``P[e,q,i,p]`` against shape
        gradients and accumulate nodal forces (full dofs)."""
        q = self._force
        fe = np.einsum("eq,eqip,eqap->eai", q.wdet, P, q.dN, optimize=True)
        flat = np.bincount(self._elem_dofs.ravel(), weights=fe.ravel(),
                           minlength=self.mesh.dof_count)
        return flat

    @staticmethod
    def _eps(J):
        return 0.5 * (J + np.swapaxes(J, -1, -2))

    @staticmethod
    def _ens(Ja, Jb):
        JtJ = np.einsum("eqri,eqrj->eqij", Ja, Jb, optimize=True)
        return 0.5 * (JtJ + np.swapaxes(JtJ, -1, -2))

    def quadratic_force(self, a_free, b_free):
        """Exact quadratic force vector ``G(a, b)`` on free dofs."""
        A = self.material
        Ja = self._grad(self.scatter(a_free))
        Jb = self._grad(self.scatter(b_free))
        P = 0.5 * A.stress(self._ens(Ja, Jb))
        P = P + 0.5 * np.einsum("eqir,eqrp->eqip", Ja,
                                A.stress(self._eps(Jb)), optimize=True)
        P = P + 0.5 * np.einsum("eqir,eqrp->eqip", Jb,
                                A.stress(self._eps(Ja)), optimize=True)
        return self._scatter_force(P)[self.free_dofs]

    def cubic_force(self, a_free, b_free, c_free):
        """Exact cubic force vector ``H(a, b, c)`` on free dofs."""
        A = self.material
        Ja = self._grad(self.scatter(a_free))
        Jb = self._grad(self.scatter(b_free))
        Jc = self._grad(self.scatter(c_free))
        P = np.einsum("eqir,eqrp->eqip", Ja, A.stress(self._ens(Jb, Jc)),
                      optimize=True)
        P += np.einsum("eqir,eqrp->eqip", Jb, A.stress(self._ens(Jc, Ja)),
                       optimize=True)
        P += np.einsum("eqir,eqrp->eqip", Jc, A.stress(self._ens(Ja, Jb)),
                       optimize=True)
        return self._scatter_force(P / 6.0)[self.free_dofs]

    def full_internal_force(self, u_free):
        """Complete internal force from ``S : (F^T grad v)`` (no split)."""
        J = self._grad(self.scatter(u_free))
        F = J + np.eye(3)
        E = 0.5 * (np.einsum("eqri,eqrj->eqij", F, F, optimize=True)
                   - np.eye(3))
        S = self.material.stress(E)
        P = np.einsum("eqir,eqrp->eqip", F, S, optimize=True)
        return self._scatter_force(P)[self.free_dofs]

    # -- system view -------------------------------------------------------

    def to_system(self):
        """Wrap the model as an abstract MechanicalSystem on free dofs."""
        ops = NonlinearOperators(self.quadratic_force, self.cubic_force,
                                 self.full_internal_force)
        return MechanicalSystem(self.mass, self.stiffness, ops,
                                constrained_dofs=self.constrained_dofs,
                                label=f"fe-{self.mesh.kind}")


def assemble_linear(mesh, material, clamped=()):
    """Assemble the (M, K) pair on free dofs for the given clamp sets."""
    model = FeModel(mesh, material, clamped)
    return model.mass, model.stiffness

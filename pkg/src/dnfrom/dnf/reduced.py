"""
Reduced-model aggregation (the end-to-end build driver) and JSON
serialisation.

``build_reduced_model`` chains resonance detection, the quadratic-map
solves and the cubic-coefficient computation, then collapses everything
into the real oscillator-form tables consumed by the reduced dynamics:

``rddot_p + (omega_I/Q) rdot_p + omega_p^2 r_p
    + sum q[p,(k,l)] r_k r_l
    + sum c[p,(k,l,m)] r_k r_l r_m
    + sum d[p,k,(l,m)] r_k rdot_l rdot_m  =  kappa delta_pI cos(omega t)``

Only quantities attached to the master modes are ever touched; slave
eigenvectors enter solely through the linear solves.
"""

import base64
import json

import numpy as np

from ..errors import ConfigError
from ..systems import eval_quadratic
from .resonance import detect_resonances
from .homological import solve_all_pairs
from .cubic import compute_cubic_coefficients, _ordered_quad_monomials

__all__ = ["ReducedModel", "build_reduced_model"]


class ReducedModel:
    """Real-valued reduced dynamics data plus reconstruction maps.

    Coefficient tables are keyed canonically: quadratic monomials by
    ``(p, (k, l))`` with ``k <= l``, displacement cubics by
    ``(p, (k, l, m))`` sorted, velocity cubics by ``(p, k, (l, m))`` with
    ``l <= m``.  Each coefficient multiplies its monomial exactly once.
    """

    def __init__(self, labels, omegas, quad, cubic_disp, cubic_vel,
                 quality_factor, drive_index, kappa, phi=None, a_hat=None,
                 b_hat=None, gamma_hat=None, s_correction=None,
                 diagnostics=None):
        self.labels = list(int(v) for v in labels)
        self.omegas = np.asarray(omegas, dtype=float)
        self.quad = dict(quad)
        self.cubic_disp = dict(cubic_disp)
        self.cubic_vel = dict(cubic_vel)
        self.quality_factor = float(quality_factor)
        self.drive_index = int(drive_index)
        self.kappa = float(kappa)
        self.phi = None if phi is None else np.asarray(phi, dtype=float)
        self.a_hat = a_hat or {}
        self.b_hat = b_hat or {}
        self.gamma_hat = gamma_hat or {}
        self.s_correction = s_correction or {}
        self.diagnostics = diagnostics or {}

        n = self.omegas.size
        if not 0 <= self.drive_index < n:
            raise ConfigError(f"drive index {self.drive_index} out of range")
        if self.quality_factor <= 0.0:
            raise ConfigError("quality factor must be positive")
        if self.kappa < 0.0:
            raise ConfigError("load multiplier must be nonnegative")
        for table in (self.quad, self.cubic_disp, self.cubic_vel):
            for value in table.values():
                if not np.isfinite(value):
                    raise ConfigError("non-finite reduced coefficient")

    @property
    def n_masters(self):
        return self.omegas.size

    @property
    def damping_coefficient(self):
        """Mass-proportional coefficient ``omega_I / Q``."""
        return self.omegas[self.drive_index] / self.quality_factor

    def has_mapping(self):
        return self.phi is not None and bool(self.a_hat)

    # -- serialisation ---------------------------------------------------

    def to_json(self, path=None, embed_vectors=True, sidecar=None):
        """Serialise to JSON.

        Mapping vectors are embedded as base64 little-endian float64 by
        default; with ``sidecar`` given they go to a raw binary file
        (row-major concatenation, order recorded in the document).
        """
        doc = {
            "format": "dnf-rom/1",
            "masters": self.labels,
            "omegas": self.omegas.tolist(),
            "quality_factor": self.quality_factor,
            "drive_index": self.drive_index,
            "kappa": self.kappa,
            "quadratic": [[p, list(mono), v]
                          for (p, mono), v in sorted(self.quad.items())],
            "cubic_displacement": [[p, list(mono), v]
                                   for (p, mono), v in
                                   sorted(self.cubic_disp.items())],
            "cubic_velocity": [[p, k, list(mono), v]
                               for (p, k, mono), v in
                               sorted(self.cubic_vel.items())],
            "s_correction": [[p, list(term)]
                             for p, terms in sorted(self.s_correction.items())
                             for term in terms],
            "diagnostics": self.diagnostics,
        }
        vectors = []
        index = []
        if self.has_mapping():
            for name, table in (("phi", {(): self.phi.T}),
                                ("a_hat", self.a_hat),
                                ("b_hat", self.b_hat),
                                ("gamma_hat", self.gamma_hat)):
                for key in sorted(table):
                    arr = np.asarray(table[key], dtype=float)
                    index.append([name, list(np.atleast_1d(key)),
                                  list(arr.shape)])
                    vectors.append(arr.reshape(-1))
        if vectors:
            blob = np.concatenate(vectors).astype("<f8").tobytes()
            doc["vector_index"] = index
            if sidecar is not None:
                with open(sidecar, "wb") as fh:
                    fh.write(blob)
                doc["vector_sidecar"] = str(sidecar)
            elif embed_vectors:
                doc["vector_data"] = base64.b64encode(blob).decode("ascii")
        text = json.dumps(doc, indent=1, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("format") != "dnf-rom/1":
            raise ConfigError(f"{path}: not a reduced-model document")
        quad = {(p, tuple(mono)): v for p, mono, v in doc["quadratic"]}
        cubic_disp = {(p, tuple(mono)): v
                      for p, mono, v in doc["cubic_displacement"]}
        cubic_vel = {(p, k, tuple(mono)): v
                     for p, k, mono, v in doc["cubic_velocity"]}
        s_corr = {}
        for p, term in doc.get("s_correction", []):
            s_corr.setdefault(p, []).append(tuple(term))

        phi = None
        a_hat, b_hat, gamma_hat = {}, {}, {}
        if "vector_index" in doc:
            if "vector_data" in doc:
                blob = base64.b64decode(doc["vector_data"])
            else:
                with open(doc["vector_sidecar"], "rb") as fh:
                    blob = fh.read()
            flat = np.frombuffer(blob, dtype="<f8")
            off = 0
            for name, key, shape in doc["vector_index"]:
                size = int(np.prod(shape))
                arr = flat[off:off + size].reshape(shape).copy()
                off += size
                if name == "phi":
                    phi = arr.T
                elif name == "a_hat":
                    a_hat[tuple(key)] = arr
                elif name == "b_hat":
                    b_hat[tuple(key)] = arr
                elif name == "gamma_hat":
                    gamma_hat[tuple(key)] = arr
        return cls(doc["masters"], doc["omegas"], quad, cubic_disp,
                   cubic_vel, doc["quality_factor"], doc["drive_index"],
                   doc["kappa"], phi=phi, a_hat=a_hat, b_hat=b_hat,
                   gamma_hat=gamma_hat, s_correction=s_corr,
                   diagnostics=doc.get("diagnostics", {}))


def _pair_residuals(system, mode_set, table, maps):
    """Relative homological residual of every solved pair."""
    M = system.mass.full()
    K = system.stiffness.full()
    out = {}
    n = mode_set.count
    for (k, l) in maps.mode_pairs():
        for kind, rep in (("P", (k, l)), ("N", (k, l + n))):
            rep = table.canonical(rep)
            w = table.sigma_im(rep)
            psi = maps.psi[(kind, (k, l))]
            rhs = eval_quadratic(system, mode_set.phi(k), mode_set.phi(l))
            res = (K @ psi) - (w * w) * (M @ psi) + rhs
            for r in table.targets(rep):
                mu = -2.0 * mode_set.omegas[r] * table.get_f2_im(r, rep)
                res = res + mu * (M @ mode_set.phi(r))
            norm = np.linalg.norm(rhs)
            out[f"{kind}{(k + 1, l + 1)}"] = (
                float(np.linalg.norm(res) / norm) if norm > 0.0 else 0.0)
    return out


def _s_correction_terms(table, maps, gmod, omegas):
    """Velocity-coordinate correction terms under 1:2 resonance.

    Returns ``{p: [(coeff, k, l, q), ...]}`` meaning
    ``s_p = rdot_p + sum coeff * r_k * r_l * rdot_q``.
    """
    n = len(omegas)
    monos = _ordered_quad_monomials(table, n)

    def bm(p, pair):
        pair = tuple(sorted(pair))
        wk, wl = omegas[pair[0]], omegas[pair[1]]
        return (maps.modal[("N", pair)][p]
                - maps.modal[("P", pair)][p]) / (2.0 * wk * wl)

    terms = {}
    for (target, mp) in monos:
        k, l = mp
        if k == l and target != k:
            a, b = k, target
            g_baa = gmod[b, a, a]
            terms.setdefault(b, []).extend([
                (4.0 * g_baa * bm(b, (a, b)), a, b, b),
                (2.0 * g_baa * bm(b, (a, b)), a, a, a),
                (2.0 * g_baa * bm(b, (b, b)), a, a, b),
            ])
        elif k != l and target in (k, l):
            a = target
            b = l if target == k else k
            g_aab = gmod[a, a, b]
            terms.setdefault(a, []).extend([
                (4.0 * g_aab * bm(a, (a, a)), a, b, a),
                (2.0 * g_aab * bm(a, (b, b)), a, a, b),
            ])
    return terms


def build_reduced_model(system, mode_set, masters=None, eps_rel=0.05,
                        quality_factor=1000.0, forcing=None, with_f3=True,
                        keep_vectors=True):
    """Build the complete second-order reduced model of a master set.

    Parameters
    ----------
    system : MechanicalSystem
    mode_set : ModeSet
        Solved modes; ``masters`` picks a subset by 1-based label
        (default: all of them).
    eps_rel : float
        Relative resonance tolerance.
    quality_factor : float
        Damping quality factor ``Q``.
    forcing : (int, float) or None
        Driven master label and load multiplier ``kappa``; defaults to
        the first master with ``kappa = 0``.
    with_f3 : bool
        Also store the complex cubic table (diagnostics/tests).
    keep_vectors : bool
        Keep mode shapes and mapping vectors for physical reconstruction.

    Returns
    -------
    ReducedModel
    """
    if masters is not None:
        positions = []
        labels = list(mode_set.labels)
        for m in masters:
            if m not in labels:
                raise ConfigError(f"master {m} not among solved modes "
                                  f"{labels}")
            positions.append(labels.index(m))
        mode_set = mode_set.subset(positions)
    n = mode_set.count
    if n == 0:
        raise ConfigError("empty master set")

    if forcing is None:
        drive_pos, kappa = 0, 0.0
    else:
        drive_label, kappa = forcing
        if drive_label not in list(mode_set.labels):
            raise ConfigError(f"driven master {drive_label} is not in the "
                              f"master set {list(mode_set.labels)}")
        drive_pos = list(mode_set.labels).index(drive_label)

    table = detect_resonances(mode_set, eps_rel)
    maps = solve_all_pairs(system, mode_set, table)
    cubic = compute_cubic_coefficients(system, mode_set, maps, table,
                                       with_f3=with_f3)

    # quadratic monomials retained in the real dynamics
    from .cubic import _modal_g_table
    gmod = _modal_g_table(system, mode_set)
    quad = {}
    for (target, mp) in _ordered_quad_monomials(table, n):
        k, l = mp
        coeff = gmod[target, k, l] if k == l else 2.0 * gmod[target, k, l]
        quad[(target, mp)] = coeff

    residuals = _pair_residuals(system, mode_set, table, maps)
    s_corr = _s_correction_terms(table, maps, gmod, mode_set.omegas)

    diagnostics = {
        "resonances": table.describe(),
        "eps_rel": table.eps_rel,
        "pair_residuals": residuals,
        "max_pair_residual": max(residuals.values()) if residuals else 0.0,
    }

    model = ReducedModel(
        labels=mode_set.labels,
        omegas=mode_set.omegas,
        quad=quad,
        cubic_disp=cubic.displacement_table(),
        cubic_vel=cubic.velocity_table(),
        quality_factor=quality_factor,
        drive_index=drive_pos,
        kappa=kappa,
        phi=mode_set.vectors if keep_vectors else None,
        a_hat=maps.a_hat if keep_vectors else None,
        b_hat=maps.b_hat if keep_vectors else None,
        gamma_hat=maps.gamma_hat if keep_vectors else None,
        s_correction=s_corr,
        diagnostics=diagnostics,
    )
    # expose the raw engine output for tests and diagnostics
    model.resonance_table = table
    model.maps = maps
    model.cubic = cubic
    model.gmod = gmod
    return model

"""
Reference elements: trilinear 8-node hexahedron and quadratic 10-node
tetrahedron, with the quadrature rules used throughout assembly.

Node orderings follow the common sectioned-mesh-format conventions
(element types 5 and 11): hex corners counter-clockwise bottom then top;
tet vertices 0-3 then mid-edge nodes on (0,1), (1,2), (0,2), (0,3),
(2,3), (1,3).

Internal forces of every polynomial order are integrated with one rule
per element kind (2x2x2 Gauss for hexes, the 4-point rule for quadratic
tets).  The consistent mass matrix of the tet10 uses a denser 14-point
degree-5 rule, since the 4-point rule cannot represent the quadratic
shape-function Gram matrix.
"""

import numpy as np

__all__ = ["ELEMENTS", "ReferenceElement", "TET10_EDGES"]

TET10_EDGES = ((0, 1), (1, 2), (0, 2), (0, 3), (2, 3), (1, 3))


class ReferenceElement:
    """Tabulated shape functions at quadrature points.

    Attributes
    ----------
    name : str
    n_nodes : int
    points, weights : force-integration rule
    shape(x), shape_grad(x) : callables on reference coordinates
    mass_points, mass_weights : rule used for the consistent mass
    """

    def __init__(self, name, n_nodes, points, weights, shape, shape_grad,
                 mass_points=None, mass_weights=None):
        self.name = name
        self.n_nodes = n_nodes
        self.points = np.asarray(points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.shape = shape
        self.shape_grad = shape_grad
        self.mass_points = (self.points if mass_points is None
                            else np.asarray(mass_points, dtype=float))
        self.mass_weights = (self.weights if mass_weights is None
                             else np.asarray(mass_weights, dtype=float))
        # tabulate
        self.N = np.array([shape(x) for x in self.points])
        self.dN = np.array([shape_grad(x) for x in self.points])
        self.mass_N = np.array([shape(x) for x in self.mass_points])
        self.mass_dN = np.array([shape_grad(x) for x in self.mass_points])

    def rule(self, kind="force"):
        if kind == "force":
            return self.points, self.weights, self.N, self.dN
        return self.mass_points, self.mass_weights, self.mass_N, self.mass_dN


def _hex8_shape(x):
    g, h, r = x
    signs = np.array([(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
                      (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)],
                     dtype=float)
    return 0.125 * (1 + signs[:, 0] * g) * (1 + signs[:, 1] * h) \
        * (1 + signs[:, 2] * r)


def _hex8_grad(x):
    g, h, r = x
    signs = np.array([(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
                      (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)],
                     dtype=float)
    a, b, c = signs[:, 0], signs[:, 1], signs[:, 2]
    d = np.empty((8, 3))
    d[:, 0] = 0.125 * a * (1 + b * h) * (1 + c * r)
    d[:, 1] = 0.125 * (1 + a * g) * b * (1 + c * r)
    d[:, 2] = 0.125 * (1 + a * g) * (1 + b * h) * c
    return d


def _gauss_1d():
    p = 1.0 / np.sqrt(3.0)
    return np.array([-p, p]), np.array([1.0, 1.0])


def _hex_rule():
    x1, w1 = _gauss_1d()
    pts, wts = [], []
    for c, wc in zip(x1, w1):
        for b, wb in zip(x1, w1):
            for a, wa in zip(x1, w1):
                pts.append((a, b, c))
                wts.append(wa * wb * wc)
    return np.array(pts), np.array(wts)


def _tet10_shape(x):
    L1, L2, L3 = x
    L0 = 1.0 - L1 - L2 - L3
    L = (L0, L1, L2, L3)
    vals = np.empty(10)
    for v in range(4):
        vals[v] = L[v] * (2.0 * L[v] - 1.0)
    for e, (a, b) in enumerate(TET10_EDGES):
        vals[4 + e] = 4.0 * L[a] * L[b]
    return vals


def _tet10_grad(x):
    L1, L2, L3 = x
    L0 = 1.0 - L1 - L2 - L3
    L = (L0, L1, L2, L3)
    # gradients of barycentric coordinates wrt (L1, L2, L3)
    dL = np.array([(-1.0, -1.0, -1.0), (1.0, 0.0, 0.0),
                   (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)])
    d = np.empty((10, 3))
    for v in range(4):
        d[v] = (4.0 * L[v] - 1.0) * dL[v]
    for e, (a, b) in enumerate(TET10_EDGES):
        d[4 + e] = 4.0 * (L[a] * dL[b] + L[b] * dL[a])
    return d


def _tet_rule_4pt():
    a = (5.0 + 3.0 * np.sqrt(5.0)) / 20.0
    b = (5.0 - np.sqrt(5.0)) / 20.0
    pts = []
    for i in range(4):
        bary = [b, b, b, b]
        bary[i] = a
        pts.append(bary[1:])
    w = np.full(4, 1.0 / 24.0)
    return np.array(pts), w


def _tet_rule_15pt():
    # classic degree-5 rule: centroid + two vertex-type orbits + an
    # edge-type orbit; weights normalised to the reference volume 1/6
    s15 = np.sqrt(15.0)
    pts, wts = [], []
    pts.append([0.25, 0.25, 0.25])
    wts.append((16.0 / 135.0) / 6.0)
    for a, w in (((7.0 - s15) / 34.0, (2665.0 + 14.0 * s15) / 37800.0),
                 ((7.0 + s15) / 34.0, (2665.0 - 14.0 * s15) / 37800.0)):
        for i in range(4):
            bary = [a, a, a, a]
            bary[i] = 1.0 - 3.0 * a
            pts.append(bary[1:])
            wts.append(w / 6.0)
    a = (10.0 - 2.0 * s15) / 40.0
    b = 0.5 - a
    pairs = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    for i, j in pairs:
        bary = [b, b, b, b]
        bary[i] = a
        bary[j] = a
        pts.append(bary[1:])
        wts.append((10.0 / 189.0) / 6.0)
    return np.array(pts), np.array(wts)


def _build_elements():
    hx_pts, hx_wts = _hex_rule()
    t4_pts, t4_wts = _tet_rule_4pt()
    t15_pts, t15_wts = _tet_rule_15pt()
    hex8 = ReferenceElement("hex8", 8, hx_pts, hx_wts, _hex8_shape,
                            _hex8_grad)
    tet10 = ReferenceElement("tet10", 10, t4_pts, t4_wts, _tet10_shape,
                             _tet10_grad, mass_points=t15_pts,
                             mass_weights=t15_wts)
    return {"hex8": hex8, "tet10": tet10}


ELEMENTS = _build_elements()

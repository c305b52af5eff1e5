import itertools

import numpy as np
import pytest

from dnfrom.fe.elements import ELEMENTS


def tet_monomial_integral(p, q, r):
    """Exact integral of x^p y^q z^r over the reference tetrahedron."""
    from math import factorial
    return (factorial(p) * factorial(q) * factorial(r)
            / factorial(p + q + r + 3))


class TestShapeFunctions:
    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_partition_of_unity(self, kind, rng):
        el = ELEMENTS[kind]
        for _ in range(10):
            if kind == "hex8":
                x = rng.uniform(-1, 1, size=3)
            else:
                x = rng.dirichlet(np.ones(4))[:3]
            assert el.shape(x).sum() == pytest.approx(1.0, abs=1e-13)
            assert el.shape_grad(x).sum(axis=0) == pytest.approx(
                np.zeros(3), abs=1e-12)

    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_kronecker_at_nodes(self, kind):
        el = ELEMENTS[kind]
        if kind == "hex8":
            nodes = [(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
                     (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)]
        else:
            verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
                             dtype=float)
            from dnfrom.fe.elements import TET10_EDGES
            nodes = list(verts) + [0.5 * (verts[a] + verts[b])
                                   for a, b in TET10_EDGES]
        for a, x in enumerate(nodes):
            vals = el.shape(np.asarray(x, dtype=float))
            expect = np.zeros(el.n_nodes)
            expect[a] = 1.0
            assert vals == pytest.approx(expect, abs=1e-13)

    def test_gradients_match_finite_differences(self, rng):
        for kind in ("hex8", "tet10"):
            el = ELEMENTS[kind]
            x = (rng.uniform(-0.8, 0.8, 3) if kind == "hex8"
                 else rng.dirichlet(np.ones(4))[:3] * 0.8)
            grad = el.shape_grad(x)
            eps = 1e-6
            for d in range(3):
                xp, xm = x.copy(), x.copy()
                xp[d] += eps
                xm[d] -= eps
                fd = (el.shape(xp) - el.shape(xm)) / (2 * eps)
                assert grad[:, d] == pytest.approx(fd, abs=1e-8)


class TestQuadrature:
    def test_hex_rule_degree(self):
        el = ELEMENTS["hex8"]
        for powers in itertools.product(range(4), repeat=3):
            exact = 1.0
            for p in powers:
                exact *= 0.0 if p % 2 else 2.0 / (p + 1)
            val = sum(w * np.prod(x**np.array(powers))
                      for x, w in zip(el.points, el.weights))
            if max(powers) <= 3:
                assert val == pytest.approx(exact, abs=1e-13)

    def test_tet_force_rule_degree2(self):
        el = ELEMENTS["tet10"]
        for powers in itertools.product(range(3), repeat=3):
            if sum(powers) > 2:
                continue
            exact = tet_monomial_integral(*powers)
            val = sum(w * x[0]**powers[0] * x[1]**powers[1] * x[2]**powers[2]
                      for x, w in zip(el.points, el.weights))
            assert val == pytest.approx(exact, abs=1e-14)

    def test_tet_mass_rule_degree5(self):
        el = ELEMENTS["tet10"]
        for powers in itertools.product(range(6), repeat=3):
            if sum(powers) > 5:
                continue
            exact = tet_monomial_integral(*powers)
            val = sum(w * x[0]**powers[0] * x[1]**powers[1] * x[2]**powers[2]
                      for x, w in zip(el.mass_points, el.mass_weights))
            assert val == pytest.approx(exact, abs=1e-12)

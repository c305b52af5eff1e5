import numpy as np
import pytest

from dnfrom.fe import FeModel, Material, generate_mesh

MAT = Material(young_modulus=10.0, poisson_ratio=0.3, density=2.0)


def small_model(kind, clamped=(), nx=2, ny=2, nz=2, length=1.0):
    mesh = generate_mesh("block", element_kind=kind, length=length,
                        width=1.0, height=1.0, nx=nx, ny=ny, nz=nz)
    return FeModel(mesh, MAT, clamped)


class TestLinear:
    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_rigid_translations_in_stiffness_nullspace(self, kind):
        model = small_model(kind)
        K = model.stiffness.full()
        kn = np.abs(K.toarray()).max()
        for c in range(3):
            t = np.zeros(model.n_free)
            t[c::3] = 1.0
            assert np.linalg.norm(K @ t) < 1e-10 * kn

    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_rigid_rotation_in_stiffness_nullspace(self, kind):
        model = small_model(kind)
        coords = model.mesh.nodes
        # infinitesimal rotation about z: u = theta x r
        u = np.zeros((model.mesh.n_nodes, 3))
        u[:, 0] = -coords[:, 1]
        u[:, 1] = coords[:, 0]
        u = u.reshape(-1)
        K = model.stiffness.full()
        kn = np.abs(K.toarray()).max()
        assert np.linalg.norm(K @ u) < 1e-9 * kn * np.linalg.norm(u)

    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_mass_partition_of_unity(self, kind):
        model = small_model(kind)
        M = model.mass.full()
        volume = 1.0
        for c in range(3):
            e = np.zeros(model.n_free)
            e[c::3] = 1.0
            assert e @ (M @ e) == pytest.approx(MAT.density * volume,
                                                rel=1e-10)

    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_mass_positive_definite(self, kind, rng):
        model = small_model(kind)
        M = model.mass.toarray()
        vals = np.linalg.eigvalsh(M)
        assert vals.min() > 0.0

    def test_symmetry(self):
        model = small_model("tet10", clamped=("xmin",))
        K = model.stiffness.toarray()
        M = model.mass.toarray()
        assert np.abs(K - K.T).max() == 0.0
        assert np.abs(M - M.T).max() == 0.0

    def test_cantilever_frequency_euler_bernoulli(self):
        # slender cantilever, first bending mode vs (1.875^2/L^2) sqrt(EI/rhoA)
        L, w, h = 20.0, 1.0, 1.0
        mesh = generate_mesh("block", element_kind="tet10", length=L,
                             width=w, height=h, nx=24, ny=2, nz=2)
        model = FeModel(mesh, MAT, clamped=("xmin",))
        from dnfrom import solve_modes
        modes = solve_modes(model.mass, model.stiffness, count=1)
        EI = MAT.young_modulus * w * h**3 / 12.0
        rhoA = MAT.density * w * h
        analytic = (1.875104**2 / L**2) * np.sqrt(EI / rhoA)
        assert modes.omegas[0] == pytest.approx(analytic, rel=0.05)


class TestNonlinearOperators:
    @pytest.mark.parametrize("kind", ["hex8", "tet10"])
    def test_exact_cubic_decomposition(self, kind, rng):
        model = small_model(kind, clamped=("xmin",))
        scale = 0.1
        for _ in range(5):
            u = scale * rng.standard_normal(model.n_free)
            full = model.full_internal_force(u)
            split = (model.stiffness @ u + model.quadratic_force(u, u)
                     + model.cubic_force(u, u, u))
            assert np.linalg.norm(full - split) < 1e-10 * np.linalg.norm(full)

    def test_zero_and_symmetry(self, rng):
        model = small_model("hex8", clamped=("xmin",))
        z = np.zeros(model.n_free)
        a, b, c = (rng.standard_normal(model.n_free) for _ in range(3))
        assert np.linalg.norm(model.quadratic_force(z, b)) == 0.0
        assert model.quadratic_force(a, b) == pytest.approx(
            model.quadratic_force(b, a), abs=1e-12)
        habc = model.cubic_force(a, b, c)
        assert model.cubic_force(c, a, b) == pytest.approx(habc, abs=1e-12)
        assert model.cubic_force(b, a, c) == pytest.approx(habc, abs=1e-12)

    def test_bilinearity(self, rng):
        model = small_model("hex8", clamped=("xmin",))
        a, b, c = (rng.standard_normal(model.n_free) for _ in range(3))
        alpha = 0.7
        left = model.quadratic_force(alpha * a + b, c)
        right = (alpha * model.quadratic_force(a, c)
                 + model.quadratic_force(b, c))
        assert left == pytest.approx(right, abs=1e-11)

    def test_infinitesimal_linearisation(self, rng):
        model = small_model("tet10", clamped=("xmin",))
        u = rng.standard_normal(model.n_free)
        u /= np.linalg.norm(u)
        for eps in (1e-4, 1e-5):
            ratio = np.linalg.norm(
                model.full_internal_force(eps * u)
                - eps * (model.stiffness @ u)) / (
                    eps * np.linalg.norm(model.stiffness @ u))
            assert ratio < 50 * eps

    def test_rigid_rotation_produces_no_force(self):
        # Green-Lagrange strain of a finite rigid rotation is exactly zero,
        # so the full force must vanish to round-off.
        model = small_model("hex8")
        theta = 0.3
        R = np.array([[np.cos(theta), -np.sin(theta), 0.0],
                      [np.sin(theta), np.cos(theta), 0.0],
                      [0.0, 0.0, 1.0]])
        coords = model.mesh.nodes
        u = (coords @ R.T - coords).reshape(-1)
        f = model.full_internal_force(u)
        kn = np.abs(model.stiffness.toarray()).max()
        assert np.linalg.norm(f) < 1e-8 * kn * theta**2

    def test_tangent_matches_finite_differences(self, rng):
        model = small_model("hex8", clamped=("xmin",), nx=1, ny=1, nz=1)
        u = 0.05 * rng.standard_normal(model.n_free)
        KT = model.tangent_stiffness(u).toarray()
        eps = 1e-6
        for j in rng.choice(model.n_free, size=4, replace=False):
            du = np.zeros(model.n_free)
            du[j] = eps
            fd = (model.full_internal_force(u + du)
                  - model.full_internal_force(u - du)) / (2 * eps)
            assert KT[:, j] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_quadrature_invariance_stiffness(self):
        # affine tets: one-higher quadrature leaves K unchanged
        from dnfrom.fe.elements import ELEMENTS, ReferenceElement
        import dnfrom.fe.assembly as asm

        mesh = generate_mesh("block", element_kind="tet10",
                             nx=1, ny=1, nz=1)
        model = FeModel(mesh, MAT)
        K1 = model.stiffness.toarray()

        base = ELEMENTS["tet10"]
        boosted = ReferenceElement(
            "tet10", 10, base.mass_points, base.mass_weights,
            base.shape, base.shape_grad,
            mass_points=base.mass_points, mass_weights=base.mass_weights)
        original = dict(ELEMENTS)
        try:
            ELEMENTS["tet10"] = boosted
            K2 = FeModel(mesh, MAT).stiffness.toarray()
        finally:
            ELEMENTS.update(original)
        denom = np.abs(K1).max()
        assert np.abs(K1 - K2).max() < 1e-10 * denom

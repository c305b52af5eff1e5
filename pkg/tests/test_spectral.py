import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnfrom import solve_modes, build_spectrum, z_from_rs, rs_from_z
from dnfrom.errors import ConfigError, NumericalError


class TestSolveModes:
    def test_analytic_2x2(self):
        M = np.eye(2)
        K = np.array([[2.0, -1.0], [-1.0, 2.0]])
        modes = solve_modes(M, K, count=2)
        assert modes.omegas**2 == pytest.approx([1.0, 3.0])
        expect1 = np.array([1.0, 1.0]) / np.sqrt(2.0)
        expect2 = np.array([1.0, -1.0]) / np.sqrt(2.0)
        assert modes.phi(0) == pytest.approx(expect1)
        assert modes.phi(1) == pytest.approx(expect2)

    def test_mass_normalisation(self, rng):
        n = 12
        A = rng.standard_normal((n, n))
        M = A @ A.T + n * np.eye(n)
        B = rng.standard_normal((n, n))
        K = B @ B.T + n * np.eye(n)
        modes = solve_modes(M, K, count=5)
        gram = modes.vectors.T @ M @ modes.vectors
        assert gram == pytest.approx(np.eye(5), abs=1e-10)
        kgram = modes.vectors.T @ K @ modes.vectors
        assert np.diag(kgram) == pytest.approx(modes.omegas**2, rel=1e-8)

    def test_residual_invariant(self, rng):
        n = 30
        A = rng.standard_normal((n, n))
        M = A @ A.T + n * np.eye(n)
        B = rng.standard_normal((n, n))
        K = B @ B.T + n * np.eye(n)
        modes = solve_modes(M, K, count=4)
        for p in range(4):
            phi = modes.phi(p)
            w2 = modes.omegas[p] ** 2
            res = np.linalg.norm(K @ phi - w2 * (M @ phi))
            assert res / (w2 * np.linalg.norm(M @ phi)) < 1e-8

    def test_selectors(self):
        K = np.diag([1.0, 4.0, 9.0, 16.0])
        M = np.eye(4)
        by_index = solve_modes(M, K, indices=[2, 4])
        assert by_index.omegas == pytest.approx([2.0, 4.0])
        assert list(by_index.labels) == [2, 4]
        by_window = solve_modes(M, K, window=(1.5, 3.5))
        assert by_window.omegas == pytest.approx([2.0, 3.0])
        with pytest.raises(ConfigError):
            solve_modes(M, K, indices=[9])
        with pytest.raises(ConfigError):
            solve_modes(M, K)

    def test_rerun_determinism_sparse(self, rng):
        import scipy.sparse as sp
        n = 700
        main = 2.0 + rng.random(n)
        K = sp.diags([main, -np.ones(n - 1), -np.ones(n - 1)],
                     [0, 1, -1], format="csr")
        M = sp.identity(n, format="csr")
        a = solve_modes(M, K, count=3)
        b = solve_modes(M, K, count=3)
        assert a.omegas == pytest.approx(b.omegas, rel=1e-12)
        assert np.allclose(a.vectors, b.vectors, atol=1e-9)

    def test_sign_convention(self):
        K = np.diag([1.0, 4.0])
        M = np.eye(2)
        modes = solve_modes(M, K, count=2)
        for p in range(2):
            v = modes.phi(p)
            assert v[np.argmax(np.abs(v))] > 0


class TestSpectrum:
    def test_pairing(self):
        from dnfrom import ModeSet
        ms = ModeSet([1, 2], [1.0, 2.0], np.eye(2))
        spec = build_spectrum(ms)
        assert np.allclose(spec.eigenvalues(),
                           [1j, 2j, -1j, -2j])
        for s in range(4):
            assert spec.signed_frequency(s) + spec.signed_frequency(
                spec.conjugate_index(s)) == 0.0

    def test_rejects_zero_frequency(self):
        from dnfrom import ModeSet
        ms = ModeSet([1], [0.0], np.eye(1))
        with pytest.raises(NumericalError, match="rigid"):
            build_spectrum(ms)

    @given(st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_rs_z_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        n = rng.integers(1, 5)
        omegas = 0.5 + 3.0 * rng.random(n)
        r = rng.standard_normal(n)
        s = rng.standard_normal(n)
        z = z_from_rs(r, s, omegas)
        r2, s2 = rs_from_z(z, omegas)
        assert r2 == pytest.approx(r, abs=1e-14)
        assert s2 == pytest.approx(s, abs=1e-14)

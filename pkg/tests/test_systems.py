import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnfrom import (build_discrete_system, eval_quadratic, eval_cubic,
                    full_internal_force, load_discrete_json)
from dnfrom.errors import ConfigError

from conftest import duffing_system, toy_12_system


def brute_force_quadratic(table, n, a, b):
    """Independent oracle: materialise the order-3 tensor and contract."""
    T = np.zeros((n, n, n))
    for (s, k, l), v in table.items():
        T[s, k, l] = v
    return np.einsum("skl,k,l->s", T, a, b)


class TestBuilder:
    def test_linear_sdof(self):
        sys = build_discrete_system([1.0])
        u = np.array([0.7])
        assert eval_quadratic(sys, u, u) == pytest.approx(0.0)
        assert full_internal_force(sys, u) == pytest.approx([0.7])

    def test_duffing(self):
        sys = duffing_system(h=0.5)
        u = np.array([2.0])
        assert eval_cubic(sys, u, u, u) == pytest.approx([4.0])
        assert full_internal_force(sys, u) == pytest.approx([2.0 + 4.0])

    def test_12_toy_quadratic_evaluation(self):
        sys = toy_12_system()
        a = np.array([1.0, 0.0])
        out = eval_quadratic(sys, a, a)
        assert out == pytest.approx([0.0, 0.3])
        # brute-force tensor contraction oracle
        table = {(1, 0, 0): 0.3, (0, 0, 1): 0.3, (0, 1, 0): 0.3}
        rng = np.random.default_rng(3)
        for _ in range(5):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            assert eval_quadratic(sys, x, y) == pytest.approx(
                brute_force_quadratic(table, 2, x, y), abs=1e-14)

    def test_rejects_asymmetric_tables(self):
        with pytest.raises(ConfigError, match="not symmetric"):
            build_discrete_system([1.0, 2.0], quad_coeffs={(0, 0, 1): 1.0})
        with pytest.raises(ConfigError, match="not symmetric"):
            build_discrete_system(
                [1.0, 2.0],
                cubic_coeffs={(0, 0, 0, 1): 1.0, (0, 0, 1, 0): 1.0})

    def test_rejects_bad_dimensions(self):
        with pytest.raises(ConfigError):
            build_discrete_system([1.0], quad_coeffs={(0, 0, 1): 1.0})
        with pytest.raises(ConfigError):
            build_discrete_system([-1.0])
        sys = duffing_system()
        with pytest.raises(ConfigError):
            eval_quadratic(sys, np.zeros(2), np.zeros(1))


class TestOperatorContracts:
    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_bilinearity_and_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        sys = toy_12_system()
        a, b, c = (rng.standard_normal(2) for _ in range(3))
        alpha = rng.standard_normal()
        left = eval_quadratic(sys, alpha * a + b, c)
        right = alpha * eval_quadratic(sys, a, c) + eval_quadratic(sys, b, c)
        assert left == pytest.approx(right, abs=1e-12)
        assert eval_quadratic(sys, a, b) == pytest.approx(
            eval_quadratic(sys, b, a), abs=1e-12)

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_cubic_permutation_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        sys = duffing_system()
        a, b, c = (rng.standard_normal(1) for _ in range(3))
        base = eval_cubic(sys, a, b, c)
        for args in ((a, c, b), (b, a, c), (c, b, a)):
            assert eval_cubic(sys, *args) == pytest.approx(base, abs=1e-12)

    def test_zero_argument(self):
        sys = toy_12_system()
        out = eval_quadratic(sys, np.zeros(2), np.array([1.0, 2.0]))
        assert out == pytest.approx([0.0, 0.0])

    def test_decomposition_identity(self, rng):
        sys = toy_12_system()
        for _ in range(10):
            u = rng.standard_normal(2)
            direct = full_internal_force(sys, u)
            split = (sys.stiffness @ u + eval_quadratic(sys, u, u)
                     + eval_cubic(sys, u, u, u))
            assert direct == pytest.approx(split, rel=1e-12)


def test_json_loader(tmp_path):
    doc = {"frequencies": [1.0, 1.989],
           "g": [[2, 1, 1, 0.3], [1, 1, 2, 0.3], [1, 2, 1, 0.3]],
           "h": []}
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(doc))
    sys = load_discrete_json(path)
    out = eval_quadratic(sys, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert out == pytest.approx([0.0, 0.3])
    assert np.allclose(sys.stiffness.toarray(),
                       np.diag([1.0, 1.989**2]))

import numpy as np
import pytest

from dnfrom import build_discrete_system


def duffing_system(h=0.5, omega=1.0):
    return build_discrete_system([omega], cubic_coeffs={(0, 0, 0, 0): h})


def toy_12_system(omega2=1.989, g=0.3):
    """Two-oscillator system with a quadratic 1:2 coupling that derives
    from the potential  V = w1^2 u1^2/2 + w2^2 u2^2/2 + g u1^2 u2."""
    quad = {(1, 0, 0): g, (0, 0, 1): g, (0, 1, 0): g}
    return build_discrete_system([1.0, omega2], quad_coeffs=quad)


def random_discrete_system(rng, n=4, resonant=False, scale=0.3):
    """Random polynomial system with well-separated or 1:2-tuned spectrum."""
    base = np.sort(1.0 + 4.0 * rng.random(n))
    while np.min(np.diff(base)) < 0.35:
        base = np.sort(1.0 + 4.0 * rng.random(n))
    # keep second-order combinations away from accidental resonances
    def near_resonance(freqs, tol=0.12):
        signed = np.concatenate([freqs, -freqs])
        for i in range(2 * n):
            for j in range(i, 2 * n):
                s = abs(signed[i] + signed[j])
                if s == 0.0:
                    continue
                if np.any(np.abs(s - freqs) < tol * freqs):
                    return True
        return False
    tries = 0
    while near_resonance(base) and tries < 200:
        base = np.sort(1.0 + 4.0 * rng.random(n))
        tries += 1
    if resonant:
        base[1] = 2.0 * base[0] * (1.0 + 0.004 * rng.standard_normal())
        base = np.sort(base)
    quad = {}
    for s in range(n):
        for k in range(n):
            for l in range(k, n):
                if rng.random() < 0.5:
                    v = scale * rng.standard_normal()
                    quad[(s, k, l)] = v
                    quad[(s, l, k)] = v
    cubic = {}
    for s in range(n):
        for k in range(n):
            for l in range(k, n):
                for m in range(l, n):
                    if rng.random() < 0.35:
                        v = scale * rng.standard_normal()
                        for perm in {(k, l, m), (k, m, l), (l, k, m),
                                     (l, m, k), (m, k, l), (m, l, k)}:
                            cubic[(s,) + perm] = v
    return build_discrete_system(base, quad, cubic)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

"""
Second-order resonance detection over the master state-space spectrum.

A state pair ``(k, l)`` with eigenvalue sum ``sigma = lambda_k + lambda_l``
is resonant with master mode ``r`` when ``| |sigma| - omega_r | / omega_r``
falls below a relative tolerance.  This is the relative reformulation of
the absolute test ``|sigma^2 + omega_r^2| < eps``; the relative form is
unit-independent, which matters because mechanical spectra carry arbitrary
frequency scales.

Pairs with ``sigma = 0`` (a mode paired with its own conjugate) are never
entered in the table: the associated map solve reduces to a static solve
with the plain stiffness, which cannot be singular for positive
frequencies.
"""

import numpy as np

from ..errors import ConfigError

__all__ = ["ResonanceTable", "detect_resonances", "state_name"]


def state_name(s, n):
    """Human-readable name of a state index: '+3' / '-3' (1-based mode)."""
    return f"+{s + 1}" if s < n else f"-{s - n + 1}"


class ResonanceTable:
    """Resonant state pairs of a master set.

    Entries are keyed by canonical (sorted) state-index pairs; each entry
    lists the master positions whose frequency matches ``|sigma|`` within
    the relative tolerance.  After the homological solves the retained
    quadratic coefficients are recorded as imaginary parts
    ``Im f2[r, (k, l)]`` for the positive-frequency state ``r`` (the
    conjugate state carries the opposite value).
    """

    def __init__(self, n_masters, omegas, eps_rel):
        self.n = int(n_masters)
        self.omegas = np.asarray(omegas, dtype=float)
        self.eps_rel = float(eps_rel)
        self._targets = {}
        self.f2_im = {}

    @staticmethod
    def canonical(pair):
        k, l = pair
        return (k, l) if k <= l else (l, k)

    def add(self, pair, target):
        pair = self.canonical(pair)
        self._targets.setdefault(pair, [])
        if target not in self._targets[pair]:
            self._targets[pair].append(target)
            self._targets[pair].sort()

    def targets(self, pair):
        """Master positions resonant with the pair (empty if none)."""
        return tuple(self._targets.get(self.canonical(pair), ()))

    def is_resonant(self, pair):
        return bool(self.targets(pair))

    @property
    def is_empty(self):
        return not self._targets

    def pairs(self):
        return sorted(self._targets)

    def sigma_im(self, pair):
        """Imaginary part of lambda_k + lambda_l for a state pair."""
        k, l = pair
        return self._signed(k) + self._signed(l)

    def _signed(self, s):
        return self.omegas[s] if s < self.n else -self.omegas[s - self.n]

    def set_f2(self, target, pair, imag_value):
        self.f2_im[(target, self.canonical(pair))] = float(imag_value)

    def get_f2_im(self, state, pair):
        """Im f2 for any state index (conjugates carry opposite sign)."""
        pair = self.canonical(pair)
        if state < self.n:
            return self.f2_im.get((state, pair), 0.0)
        return -self.f2_im.get((state - self.n, pair), 0.0)

    def describe(self):
        rows = []
        for pair in self.pairs():
            k, l = pair
            rows.append({
                "pair": [state_name(k, self.n), state_name(l, self.n)],
                "sigma_im": self.sigma_im(pair),
                "resonant_modes": [t + 1 for t in self.targets(pair)],
            })
        return rows


def detect_resonances(mode_set, eps_rel):
    """Scan all master state pairs for second-order resonances.

    Parameters
    ----------
    mode_set : ModeSet
        Master modes (frequencies in rad/time).
    eps_rel : float
        Relative tolerance in ``(0, 0.2]``; pair ``(k, l)`` is marked
        resonant with mode ``r`` iff ``| |sigma| - omega_r | < eps_rel *
        omega_r``.

    Returns
    -------
    ResonanceTable
    """
    eps = float(eps_rel)
    if not 0.0 < eps <= 0.2:
        raise ConfigError(f"eps_rel must lie in (0, 0.2], got {eps}")
    omegas = mode_set.omegas
    n = mode_set.count
    table = ResonanceTable(n, omegas, eps)
    signed = np.concatenate([omegas, -omegas])
    for k in range(2 * n):
        for l in range(k, 2 * n):
            sigma = signed[k] + signed[l]
            if sigma == 0.0:
                continue
            for r in range(n):
                if abs(abs(sigma) - omegas[r]) < eps * omegas[r]:
                    table.add((k, l), r)
    return table

"""Independent reference constructions used only by the tests.

Nothing here imports the package's basis or Hamiltonian code: the brute-force
Hamiltonian uses a spin-major mode order (all up modes, then all down modes)
and raw creation/annihilation algebra on integers.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _sign_before(state: int, mode: int) -> int:
    return -1 if bin(state & ((1 << mode) - 1)).count("1") % 2 else 1


def _annihilate(state: int, mode: int):
    if not state >> mode & 1:
        return None
    return _sign_before(state, mode), state ^ (1 << mode)


def _create(state: int, mode: int):
    if state >> mode & 1:
        return None
    return _sign_before(state, mode), state | (1 << mode)


def _per_spin(a, L):
    a = np.asarray(a, float)
    if a.ndim == 0:
        return np.full((L, 2), float(a))
    if a.shape == (L,):
        return np.repeat(a[:, None], 2, axis=1)
    return a


def brute_force_hamiltonian(L, t, theta, U, v, n_up, n_down, big_u=None):
    """Dense sector Hamiltonian from raw operator algebra.

    ``t``, ``theta`` and ``v`` broadcast to shape (L, 2); ``U`` to (L,).
    Infinite U entries are projected out when ``big_u`` is None, otherwise
    replaced by ``big_u``.
    """
    t, theta, v = _per_spin(t, L), _per_spin(theta, L), _per_spin(v, L)
    U = np.broadcast_to(np.asarray(U, float), (L,))

    def mode(x, s):
        return x + s * L

    states = []
    for ups in itertools.combinations(range(L), n_up):
        for dns in itertools.combinations(range(L), n_down):
            if big_u is None and any(np.isinf(U[x]) for x in set(ups) & set(dns)):
                continue
            states.append(sum(1 << mode(x, 0) for x in ups) | sum(1 << mode(x, 1) for x in dns))
    index = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)), complex)
    for j, st in enumerate(states):
        for x in range(L):
            nu, nd = st >> mode(x, 0) & 1, st >> mode(x, 1) & 1
            u = U[x] if np.isfinite(U[x]) else (big_u or 0.0)
            H[j, j] += u * nu * nd + v[x, 0] * nu + v[x, 1] * nd
        for s in (0, 1):
            for x in range(L):
                y = (x + 1) % L
                amp = t[x, s] * np.exp(1j * theta[x, s])
                for a, b, c in ((x, y, amp), (y, x, np.conj(amp))):
                    r1 = _annihilate(st, mode(a, s))
                    if r1 is None:
                        continue
                    r2 = _create(r1[1], mode(b, s))
                    if r2 is None or r2[1] not in index:
                        continue
                    H[index[r2[1]], j] += c * r1[0] * r2[0]
    return H


def free_energy_by_enumeration(L, t, phi, n_up, n_down):
    """Minimum over every filling of the one-particle levels, no sorting shortcut."""
    levels = [2 * abs(t) * math.cos(2 * math.pi * k / L + phi / L) for k in range(L)]

    def best(n):
        return min(sum(levels[k] for k in c) for c in itertools.combinations(range(L), n))

    return best(n_up) + best(n_down)

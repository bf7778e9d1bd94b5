"""Ordered occupation basis of a sector, with ranking and fermionic hop signs.

A basis state is ``c^dag_{x1 s1} ... c^dag_{xN sN} |vac>`` with the operators
ordered by site, and up before down on a doubly occupied site. Internally a
state is a pair of ``L``-bit masks; the canonical operator order corresponds
to the interleaved mode index ``2*x + spin``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .model import DOWN, UP, Sector


class EmptySectorError(ValueError):
    """The requested sector contains no states."""


class FockState(NamedTuple):
    up: int
    down: int

    def mask(self, spin: int) -> int:
        return self.up if spin == UP else self.down

    def occupations(self, length: int) -> str:
        """Human-readable occupation string, e.g. ``'2ud0'``."""
        out = []
        for x in range(length):
            u, d = (self.up >> x) & 1, (self.down >> x) & 1
            out.append({(0, 0): "0", (1, 0): "u", (0, 1): "d", (1, 1): "2"}[(u, d)])
        return "".join(out)


def interleave(up: int, down: int, length: int) -> int:
    """Pack both spin masks into one mode mask, mode ``2*x + spin``."""
    out = 0
    for x in range(length):
        out |= ((up >> x) & 1) << (2 * x)
        out |= ((down >> x) & 1) << (2 * x + 1)
    return out


def _between_parity(modes: int, a: int, b: int) -> int:
    lo, hi = (a, b) if a < b else (b, a)
    window = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return (modes & window).bit_count() & 1


def apply_hop(state: FockState, spin: int, from_site: int, to_site: int,
              length: int, projected_mask: int = 0):
    """Apply ``c^dag_{to, spin} c_{from, spin}`` to a basis state.

    Returns ``(new_state, sign)`` or ``None`` when the hop is blocked (source
    empty, target occupied by the same spin, or a double occupancy on a
    projected site). The sign is the parity of canonically ordered operators
    strictly between the two modes.
    """
    own = state.mask(spin)
    other = state.mask(1 - spin)
    src, dst = 1 << from_site, 1 << to_site
    if not own & src or own & dst:
        return None
    if projected_mask & dst and other & dst:
        return None
    modes = interleave(state.up, state.down, length)
    parity = _between_parity(modes, 2 * from_site + spin, 2 * to_site + spin)
    moved = (own & ~src) | dst
    new = FockState(moved, other) if spin == UP else FockState(other, moved)
    return new, -1 if parity else 1


def combination_masks(n_sites: int, k: int) -> list[int]:
    """All ``k``-subsets of ``n_sites`` as bitmasks, in ascending integer order."""
    masks = [sum(1 << i for i in c) for c in combinations(range(n_sites), k)]
    masks.sort()
    return masks


def rank_mask(mask: int) -> int:
    """Position of ``mask`` among masks with equal popcount in ascending order.

    Ascending integer order coincides with colexicographic order of the set
    bits, whose rank is ``sum_i C(p_i, i + 1)``.
    """
    r, i, pos = 0, 0, 0
    while mask:
        if mask & 1:
            i += 1
            r += comb(pos, i)
        mask >>= 1
        pos += 1
    return r


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Enumerated basis of a sector; ``states[i]`` has rank ``i``."""

    sector: Sector
    up: np.ndarray
    down: np.ndarray
    _index: dict = field(default=None, repr=False)

    @property
    def length(self) -> int:
        return self.sector.length

    @property
    def dim(self) -> int:
        return len(self.up)

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        for u, d in zip(self.up.tolist(), self.down.tolist()):
            yield FockState(u, d)

    def state(self, i: int) -> FockState:
        return FockState(int(self.up[i]), int(self.down[i]))

    def rank(self, state: FockState) -> int:
        """Index of ``state``; raises ``KeyError`` if absent."""
        up, down = int(state[0]), int(state[1])
        s = self.sector
        if up.bit_count() != s.n_up or down.bit_count() != s.n_down or up >> s.length or down >> s.length:
            raise KeyError(state)
        if self._index is None:
            return rank_mask(up) * comb(s.length, s.n_down) + rank_mask(down)
        return self._index[(up, down)]

    def __contains__(self, state) -> bool:
        try:
            self.rank(state)
        except KeyError:
            return False
        return True

    def dump_csv(self, path) -> None:
        L = self.length
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "up_mask", "down_mask"])
            for i, st in enumerate(self):
                # bit string printed site 0 first
                w.writerow([i, format(st.up, f"0{L}b")[::-1], format(st.down, f"0{L}b")[::-1]])


def enumerate_basis(sector: Sector) -> FockBasis:
    """Enumerate a sector: up mask major, down mask minor, both ascending."""
    L = sector.length
    ups = combination_masks(L, sector.n_up)
    downs = combination_masks(L, sector.n_down)
    proj = sector.projection_mask
    if proj:
        pairs = [(u, d) for u in ups for d in downs if not (u & d & proj)]
    else:
        pairs = [(u, d) for u in ups for d in downs]
    if not pairs:
        raise EmptySectorError(f"sector {sector.label()} with projected sites "
                               f"{sorted(sector.projected_sites)} is empty")
    up = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
    down = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
    index = {p: i for i, p in enumerate(pairs)} if proj else None
    return FockBasis(sector, up, down, index)


def hop_targets(state: FockState, length: int, projected_mask: int = 0):
    """Yield ``(new_state, sign, spin, bond, forward)`` for every legal nearest-neighbour hop.

    ``forward`` is True for a move ``bond -> bond + 1`` (mod L).
    """
    for spin in (UP, DOWN):
        own = state.mask(spin)
        for x in range(length):
            y = (x + 1) % length
            if own >> x & 1:
                res = apply_hop(state, spin, x, y, length, projected_mask)
                if res is not None:
                    yield res[0], res[1], spin, x, True
            if own >> y & 1:
                res = apply_hop(state, spin, y, x, length, projected_mask)
                if res is not None:
                    yield res[0], res[1], spin, x, False

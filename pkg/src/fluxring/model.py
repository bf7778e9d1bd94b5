"""Ring couplings, flux assignments and particle-number sectors.

Sites and bonds are 0-based: bond ``x`` joins site ``x`` to site ``(x + 1) % L``.
Spin index 0 is up, 1 is down. An infinite on-site interaction is stored as
``numpy.inf`` and turns the site into a projected site (no double occupancy);
it never enters a matrix as a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi
MAX_LENGTH = 63

UP, DOWN = 0, 1


class ModelError(ValueError):
    """Invalid couplings, gauge or sector."""


def wrap_angle(angle: float) -> float:
    """Reduce an angle to the canonical representative in ``[0, 2*pi)``."""
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a + 0.0  # no negative zero


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    d = wrap_angle(a - b)
    return min(d, TWO_PI - d)


def _per_bond_spin(value, length: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full((length, 2), float(arr))
    if arr.shape == (length,):
        return np.repeat(arr[:, None], 2, axis=1)
    if arr.shape == (length, 2):
        return arr.copy()
    raise ModelError(f"{name}: expected scalar, length-{length} or ({length}, 2) array, got shape {arr.shape}")


def _per_site(value, length: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(length, float(arr))
    if arr.shape == (length,):
        return arr.copy()
    raise ModelError(f"{name}: expected scalar or length-{length} array, got shape {arr.shape}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RingModel:
    """Couplings of a Hubbard ring.

    ``hop_magnitude`` and ``hop_phase`` have shape ``(L, 2)`` (bond, spin),
    ``interaction`` shape ``(L,)`` and ``potential`` shape ``(L, 2)`` (site, spin).
    The phases are reference phases; a :class:`FluxAssignment` is added on top
    when a Hamiltonian is built.
    """

    length: int
    hop_magnitude: np.ndarray
    hop_phase: np.ndarray
    interaction: np.ndarray
    potential: np.ndarray

    def __post_init__(self):
        L = int(self.length)
        if L < 3:
            raise ModelError(f"ring length must be >= 3, got {L}")
        if L > MAX_LENGTH:
            raise ModelError(f"ring length must be <= {MAX_LENGTH}, got {L}")
        object.__setattr__(self, "length", L)
        mag = _per_bond_spin(self.hop_magnitude, L, "hop_magnitude")
        phase = _per_bond_spin(self.hop_phase, L, "hop_phase")
        inter = _per_site(self.interaction, L, "interaction")
        pot = _per_bond_spin(self.potential, L, "potential")
        if not np.all(np.isfinite(mag)) or np.any(mag <= 0.0):
            raise ModelError("hop magnitudes must be finite and strictly positive")
        if not np.all(np.isfinite(phase)):
            raise ModelError("hop phases must be finite")
        if np.any(np.isnan(inter)) or np.any(inter == -np.inf):
            raise ModelError("interaction must be real or +inf")
        if not np.all(np.isfinite(pot)):
            raise ModelError("potential must be finite")
        phase = np.vectorize(wrap_angle, otypes=[float])(phase)
        for name, arr in (("hop_magnitude", mag), ("hop_phase", phase),
                          ("interaction", inter), ("potential", pot)):
            object.__setattr__(self, name, _frozen(arr))

    @classmethod
    def uniform(cls, length: int, t: float = 1.0, U: float = 0.0, v: float = 0.0) -> "RingModel":
        return cls(length, t, 0.0, U, v)

    @classmethod
    def build(cls, length: int, t=1.0, U=0.0, v=0.0, theta=0.0) -> "RingModel":
        """Broadcast scalar, per-site/bond or per-spin inputs into a model."""
        return cls(length, t, theta, U, v)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator, t_range=(0.5, 2.0),
               U_range=(0.0, 8.0), v_range=(-1.0, 1.0)) -> "RingModel":
        """Spin-independent random couplings drawn uniformly from the given ranges."""
        t = rng.uniform(*t_range, size=length)
        U = rng.uniform(*U_range, size=length)
        v = rng.uniform(*v_range, size=length)
        return cls(length, t, 0.0, U, v)

    @property
    def projected_sites(self) -> frozenset[int]:
        return frozenset(int(x) for x in np.flatnonzero(np.isinf(self.interaction)))

    @property
    def is_projected(self) -> bool:
        return bool(np.any(np.isinf(self.interaction)))

    @property
    def fully_projected(self) -> bool:
        return bool(np.all(np.isinf(self.interaction)))

    @property
    def projection_mask(self) -> int:
        mask = 0
        for x in self.projected_sites:
            mask |= 1 << x
        return mask

    @property
    def spin_independent(self) -> bool:
        return bool(np.array_equal(self.hop_magnitude[:, 0], self.hop_magnitude[:, 1])
                    and np.array_equal(self.hop_phase[:, 0], self.hop_phase[:, 1])
                    and np.array_equal(self.potential[:, 0], self.potential[:, 1]))

    def reference_flux(self, spin: int = UP) -> float:
        return wrap_angle(float(np.sum(self.hop_phase[:, spin])))

    def with_flux(self, gauge: "FluxAssignment") -> "RingModel":
        """Fold a gauge into the reference phases."""
        if len(gauge.per_bond_phase) != self.length:
            raise ModelError("gauge length does not match the ring")
        phase = self.hop_phase + np.asarray(gauge.per_bond_phase)[:, None]
        return RingModel(self.length, self.hop_magnitude, phase, self.interaction, self.potential)

    def replace(self, **changes) -> "RingModel":
        kw = dict(length=self.length, hop_magnitude=self.hop_magnitude, hop_phase=self.hop_phase,
                  interaction=self.interaction, potential=self.potential)
        kw.update(changes)
        return RingModel(**kw)

    def to_dict(self) -> dict:
        def enc(a):
            return [("inf" if math.isinf(x) else float(x)) for x in np.ravel(a)]
        return {
            "L": self.length,
            "t": self.hop_magnitude.tolist(),
            "theta": self.hop_phase.tolist(),
            "U": enc(self.interaction),
            "v": self.potential.tolist(),
        }


@dataclass(frozen=True, eq=False)
class FluxAssignment:
    """Per-bond Peierls phases and their total, reduced to ``[0, 2*pi)``."""

    per_bond_phase: np.ndarray
    total_flux: float = field(init=False)

    def __post_init__(self):
        arr = np.array(self.per_bond_phase, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ModelError("per-bond phases must be a finite 1-d array")
        object.__setattr__(self, "per_bond_phase", _frozen(arr))
        object.__setattr__(self, "total_flux", wrap_angle(float(np.sum(arr))))

    @property
    def length(self) -> int:
        return len(self.per_bond_phase)


def make_uniform_gauge(model: RingModel, phi: float) -> FluxAssignment:
    """Spread ``phi`` evenly over all bonds."""
    if not math.isfinite(phi):
        raise ModelError("flux must be finite")
    L = model.length
    return FluxAssignment(np.full(L, phi / L))


def make_single_bond_gauge(model: RingModel, phi: float, bond: int) -> FluxAssignment:
    """Put the whole flux on one bond (0-based)."""
    L = model.length
    if not 0 <= bond < L:
        raise ModelError(f"bond {bond} out of range for L={L}")
    phases = np.zeros(L)
    phases[bond] = wrap_angle(phi)
    return FluxAssignment(phases)


def make_random_gauge(model: RingModel, phi: float, rng: np.random.Generator) -> FluxAssignment:
    """Random per-bond phases whose sum is ``phi``."""
    L = model.length
    phases = rng.uniform(0.0, TWO_PI, size=L)
    phases[-1] = phi - np.sum(phases[:-1])
    return FluxAssignment(phases)


@dataclass(frozen=True)
class Sector:
    """Fixed ``(N_up, N_down)`` subspace of an ``L``-site ring."""

    length: int
    n_up: int
    n_down: int
    projected_sites: frozenset = frozenset()

    def __post_init__(self):
        L = self.length
        if not 3 <= L <= MAX_LENGTH:
            raise ModelError(f"ring length must be in [3, {MAX_LENGTH}], got {L}")
        if not (0 <= self.n_up <= L and 0 <= self.n_down <= L):
            raise ModelError(f"particle numbers ({self.n_up}, {self.n_down}) out of range for L={L}")
        object.__setattr__(self, "projected_sites", frozenset(int(x) for x in self.projected_sites))
        if any(not 0 <= x < L for x in self.projected_sites):
            raise ModelError("projected site out of range")
        if len(self.projected_sites) == L and self.n_e > L:
            raise ModelError(f"N_e={self.n_e} > L={L} is empty under full projection")

    @classmethod
    def of(cls, model: RingModel, n_up: int, n_down: int) -> "Sector":
        return cls(model.length, n_up, n_down, model.projected_sites)

    @property
    def n_e(self) -> int:
        return self.n_up + self.n_down

    @property
    def sz(self) -> float:
        return (self.n_up - self.n_down) / 2

    @property
    def projection_mask(self) -> int:
        mask = 0
        for x in self.projected_sites:
            mask |= 1 << x
        return mask

    @property
    def spin_ratio(self) -> float:
        """``N_major / N_minor``; ``inf`` when the minority species is empty."""
        hi, lo = max(self.n_up, self.n_down), min(self.n_up, self.n_down)
        return math.inf if lo == 0 else hi / lo

    def label(self) -> str:
        return f"L={self.length} nup={self.n_up} ndown={self.n_down}"


class HoleParticleImage(NamedTuple):
    model: RingModel
    sector: Sector
    energy_shift: float


def hole_particle_map(model: RingModel, sector: Sector) -> HoleParticleImage:
    """Image of ``(model, sector)`` under ``c -> c^dagger`` on every mode.

    Spectra are related by ``E_original = E_image + energy_shift``. Each bond
    phase goes to ``pi - theta`` (total flux ``L*pi - phi``), each one-body
    potential to ``-v - U`` and the sector to ``(L - N_up, L - N_down)``.
    """
    if model.is_projected:
        raise ModelError("hole-particle map is undefined for projected (U=inf) models")
    if sector.length != model.length:
        raise ModelError("sector and model lengths differ")
    L = model.length
    U = np.asarray(model.interaction)
    phase = math.pi - np.asarray(model.hop_phase)
    pot = -np.asarray(model.potential) - U[:, None]
    shift = float(np.sum(U) + np.sum(model.potential))
    image = RingModel(L, model.hop_magnitude, phase, U, pot)
    return HoleParticleImage(image, Sector(L, L - sector.n_up, L - sector.n_down), shift)

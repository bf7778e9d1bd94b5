"""Sector Hamiltonian of the Hubbard ring as a sparse Hermitian matrix.

Convention: the term ``t_{x,x+1} c^dag_{x+1} c_x`` carries ``exp(+i theta_x)``
and its conjugate ``exp(-i theta_x)``. Reversing it maps ``phi -> -phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import FockBasis, FockState, apply_hop, hop_targets
from .model import DOWN, UP, FluxAssignment, RingModel


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SparseHermitian:
    """Real diagonal plus a row-compressed complex off-diagonal part."""

    diagonal: np.ndarray
    offdiag: sp.csr_matrix

    @property
    def dim(self) -> int:
        return len(self.diagonal)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if v.ndim == 1:
            return self.diagonal * v + self.offdiag @ v
        return self.diagonal[:, None] * v + self.offdiag @ v

    __matmul__ = matvec

    def to_csr(self) -> sp.csr_matrix:
        return (self.offdiag + sp.diags(self.diagonal.astype(complex))).tocsr()

    def to_dense(self) -> np.ndarray:
        out = self.offdiag.toarray()
        out[np.diag_indices(self.dim)] += self.diagonal
        return out

    def hermiticity_error(self) -> float:
        diff = self.offdiag - self.offdiag.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.offdiag.indptr) + 1

    def entries(self):
        """Yield ``(row, col, value)`` in row-major, column-ascending order."""
        csr = self.to_csr()
        csr.sort_indices()
        for i in range(self.dim):
            for k in range(csr.indptr[i], csr.indptr[i + 1]):
                yield i, int(csr.indices[k]), complex(csr.data[k])

    def dump_coo(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# row col re im\n")
            for i, j, v in self.entries():
                fh.write(f"{i} {j} {v.real!r} {v.imag!r}\n")


def _bond_amplitudes(model: RingModel, gauge: FluxAssignment | None) -> np.ndarray:
    """Complex ``t^sigma_x`` including the gauge, shape ``(L, 2)``."""
    phase = np.asarray(model.hop_phase, dtype=float)
    if gauge is not None:
        if gauge.length != model.length:
            raise DimensionMismatch(f"gauge has {gauge.length} bonds, ring has {model.length}")
        phase = phase + np.asarray(gauge.per_bond_phase)[:, None]
    return model.hop_magnitude * np.exp(1j * phase)


def diagonal_energy(model: RingModel, state: FockState) -> float:
    e = 0.0
    for x in range(model.length):
        u, d = (state.up >> x) & 1, (state.down >> x) & 1
        if u and d:
            # projected sites never host a double occupancy
            e += model.interaction[x]
        e += u * model.potential[x, UP] + d * model.potential[x, DOWN]
    return float(e)


def _check(model: RingModel, basis: FockBasis) -> None:
    if model.length != basis.length:
        raise DimensionMismatch(f"model has L={model.length}, basis has L={basis.length}")
    if model.projected_sites != basis.sector.projected_sites:
        raise DimensionMismatch("basis projection does not match the model's infinite-U sites")


@dataclass(frozen=True, eq=False)
class HoppingTemplate:
    """Gauge-independent structure of a sector Hamiltonian.

    One entry per directed hop: target row, source column, fermionic sign,
    spin, bond and direction. Assembling for a gauge is then vectorized.
    """

    basis: FockBasis
    diagonal: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    sign: np.ndarray
    spin: np.ndarray
    bond: np.ndarray
    forward: np.ndarray

    @classmethod
    def build(cls, model: RingModel, basis: FockBasis) -> "HoppingTemplate":
        _check(model, basis)
        L = model.length
        proj = basis.sector.projection_mask
        rows, cols, sign, spin, bond, fwd = [], [], [], [], [], []
        diag = np.empty(basis.dim)
        for i, st in enumerate(basis):
            diag[i] = diagonal_energy(model, st)
            for new, sg, s, b, f in hop_targets(st, L, proj):
                rows.append(basis.rank(new))
                cols.append(i)
                sign.append(sg)
                spin.append(s)
                bond.append(b)
                fwd.append(f)
        return cls(basis, diag, np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
                   np.asarray(sign, dtype=float), np.asarray(spin, dtype=np.int64),
                   np.asarray(bond, dtype=np.int64), np.asarray(fwd, dtype=bool))

    def assemble(self, model: RingModel, gauge: FluxAssignment | None) -> SparseHermitian:
        amp = _bond_amplitudes(model, gauge)[self.bond, self.spin]
        vals = self.sign * np.where(self.forward, amp, amp.conj())
        n = self.basis.dim
        off = sp.csr_matrix((vals, (self.rows, self.cols)), shape=(n, n))
        off.sum_duplicates()
        off.sort_indices()
        return SparseHermitian(self.diagonal.copy(), off)


def build_hamiltonian(model: RingModel, gauge: FluxAssignment | None, basis: FockBasis) -> SparseHermitian:
    """Sector Hamiltonian for the model's couplings plus the gauge's phases."""
    return HoppingTemplate.build(model, basis).assemble(model, gauge)


def build_all_negative(h: SparseHermitian) -> SparseHermitian:
    """Replace every off-diagonal element by minus its modulus."""
    off = h.offdiag.copy()
    off.data = -np.abs(off.data).astype(complex)
    return SparseHermitian(h.diagonal.copy(), off)


def matrix_element(model: RingModel, gauge: FluxAssignment | None, basis: FockBasis,
                   x: FockState, y: FockState) -> complex:
    """``<x|H|y>`` without assembling the matrix."""
    _check(model, basis)
    for s in (x, y):
        if s not in basis:
            raise KeyError(f"state {s} not in basis")
    x, y = FockState(*x), FockState(*y)
    if x == y:
        return complex(diagonal_energy(model, x))
    du, dd = x.up ^ y.up, x.down ^ y.down
    if (du and dd) or (du | dd).bit_count() != 2:
        return 0j
    spin = UP if du else DOWN
    L = model.length
    changed = du | dd
    src = (y.mask(spin) & changed).bit_length() - 1
    dst = (x.mask(spin) & changed).bit_length() - 1
    if (src - dst) % L == L - 1:
        bond, forward = src, True
    elif (dst - src) % L == L - 1:
        bond, forward = dst, False
    else:
        return 0j
    res = apply_hop(y, spin, src, dst, L, basis.sector.projection_mask)
    if res is None:
        return 0j
    t = _bond_amplitudes(model, gauge)[bond, spin]
    return complex(res[1] * (t if forward else t.conjugate()))


def single_particle_levels(length: int, t: float, phi: float) -> np.ndarray:
    """Levels ``2|t| cos(2 pi k / L + phi / L)`` of one particle, uniform gauge."""
    k = np.arange(length)
    return 2.0 * abs(t) * np.cos(2.0 * math.pi * k / length + phi / length)

"""Lowest eigenpairs, total-spin evaluation and spin-resolved energies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import EmptySectorError, FockBasis, enumerate_basis
from .hamiltonian import SparseHermitian, build_hamiltonian
from .model import FluxAssignment, RingModel, Sector

DENSE_THRESHOLD = 2000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy: int
    method: str
    residuals: np.ndarray = field(default=None)

    @property
    def energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.degeneracy]


def default_degeneracy_tol(e0: float) -> float:
    return 1e-8 * max(1.0, abs(e0))


def _residuals(h: SparseHermitian, vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    r = h.matvec(vecs) - vecs * vals[None, :]
    return np.linalg.norm(r, axis=0)


def _lanczos_lowest(h: SparseHermitian, locked: np.ndarray, rng: np.random.Generator,
                    krylov_dim: int, tol: float, max_restarts: int):
    """Lowest eigenpair of ``h`` restricted to the complement of ``locked``.

    Full reorthogonalization against the Krylov basis and the locked vectors;
    restarts from the current Ritz vector.
    """
    n = h.dim
    free = n - locked.shape[1]
    m = min(krylov_dim, free)

    def project_out(w):
        for _ in range(2):
            if locked.shape[1]:
                w = w - locked @ (locked.conj().T @ w)
        return w

    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    best_res = math.inf
    for _ in range(max_restarts + 1):
        v = project_out(v)
        v /= np.linalg.norm(v)
        Q = np.zeros((n, m), dtype=complex)
        alpha = np.zeros(m)
        beta = np.zeros(m)
        Q[:, 0] = v
        k = m
        for j in range(m):
            w = h.matvec(Q[:, j])
            alpha[j] = float(np.vdot(Q[:, j], w).real)
            for _ in range(2):
                w = w - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
                w = project_out(w)
            if j == m - 1:
                break
            b = np.linalg.norm(w)
            if b < 1e-13 * (1.0 + abs(alpha[j])):
                # invariant subspace reached
                k = j + 1
                break
            beta[j] = b
            Q[:, j + 1] = w / b
        theta, s = scipy.linalg.eigh_tridiagonal(alpha[:k], beta[: k - 1]) if k > 1 else (alpha[:1], np.ones((1, 1)))
        e = float(theta[0])
        x = Q[:, :k] @ s[:, 0]
        x = project_out(x)
        x /= np.linalg.norm(x)
        e = float(np.vdot(x, h.matvec(x)).real)
        res = float(np.linalg.norm(h.matvec(x) - e * x))
        best_res = min(best_res, res)
        if res <= tol * (1.0 + abs(e)):
            return e, x
        v = x
    raise ConvergenceError("Lanczos did not converge", best_res)


def lanczos(h: SparseHermitian, k: int = 4, seed: int = 0, tol: float = 1e-10,
            krylov_dim: int = 120, max_restarts: int = 50):
    """Lowest ``k`` eigenpairs by Lanczos with explicit deflation.

    Each pair is found in the orthogonal complement of the previous ones, so
    degenerate eigenvalues show up with their full multiplicity.
    """
    rng = np.random.default_rng(seed)
    n = h.dim
    locked = np.zeros((n, 0), dtype=complex)
    for _ in range(k):
        _, x = _lanczos_lowest(h, locked, rng, krylov_dim, tol, max_restarts)
        locked = np.column_stack([locked, x])
    # Rayleigh-Ritz on the locked subspace to sort and clean the pairs
    hq = locked.conj().T @ h.matvec(locked)
    vals, s = np.linalg.eigh(0.5 * (hq + hq.conj().T))
    return vals, locked @ s


def ground_state(h: SparseHermitian, k: int = 4, *, dense_threshold: int = DENSE_THRESHOLD,
                 degeneracy_tol: float | None = None, seed: int = 0, tol: float = 1e-10,
                 method: str | None = None) -> SpectrumResult:
    """Lowest ``k`` eigenpairs; dense for small matrices, Lanczos otherwise.

    The dense path returns the full spectrum. ``degeneracy`` counts the
    eigenvalues within ``degeneracy_tol`` of the lowest one; on the Lanczos
    path it is capped at ``k``.
    """
    n = h.dim
    if n < 1:
        raise ValueError("empty matrix")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    method = method or ("dense" if n <= dense_threshold else "lanczos")
    if method == "dense":
        vals, vecs = np.linalg.eigh(h.to_dense())
    elif method == "lanczos":
        vals, vecs = lanczos(h, k=k, seed=seed, tol=tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _residuals(h, vals[:k], vecs[:, :k])
    bound = 1e-9 * (1.0 + np.abs(vals[:k]))
    if np.any(res > bound):
        raise ConvergenceError(f"{method} eigenpairs exceed the residual bound", float(res.max()))
    dtol = default_degeneracy_tol(vals[0]) if degeneracy_tol is None else degeneracy_tol
    deg = int(np.count_nonzero(vals - vals[0] <= dtol))
    if method == "lanczos":
        deg = min(deg, k)
    return SpectrumResult(vals, vecs, deg, method, res)


def lowest_energy(h: SparseHermitian, dense_threshold: int = DENSE_THRESHOLD, seed: int = 0) -> float:
    """Ground energy only; cheapest available path."""
    if h.dim <= dense_threshold:
        if h.dim == 1:
            return float(h.diagonal[0])
        return float(scipy.linalg.eigvalsh(h.to_dense(), subset_by_index=[0, 0])[0])
    vals, _ = lanczos(h, k=1, seed=seed)
    return float(vals[0])


# -- total spin ---------------------------------------------------------------

def _raise_spin(vectors: np.ndarray, basis: FockBasis):
    """``S^+ v`` for each column, as a dict ``state -> coefficient row``.

    ``S^+ = sum_x c^dag_{x up} c_{x down}``; the two modes are adjacent in the
    canonical order, so no fermionic sign appears.
    """
    out: dict[tuple[int, int], np.ndarray] = {}
    L = basis.length
    for i in range(basis.dim):
        u, d = int(basis.up[i]), int(basis.down[i])
        coeff = vectors[i]
        if not np.any(coeff):
            continue
        for x in range(L):
            b = 1 << x
            if d & b and not u & b:
                key = (u | b, d & ~b)
                if key in out:
                    out[key] = out[key] + coeff
                else:
                    out[key] = coeff.copy()
    return out


def spin_squared_matrix(vectors: np.ndarray, basis: FockBasis) -> np.ndarray:
    """``<v_a|S^2|v_b>`` over the columns of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    sz = basis.sector.sz
    raised = _raise_spin(vectors, basis)
    if raised:
        R = np.array(list(raised.values()))
        g = R.conj().T @ R
    else:
        g = np.zeros((vectors.shape[1], vectors.shape[1]), dtype=complex)
    return g + sz * (sz + 1) * (vectors.conj().T @ vectors)


def spin_from_s2(s2: float) -> float:
    return 0.5 * (math.sqrt(1.0 + 4.0 * max(s2, 0.0)) - 1.0)


def total_spin_of(vectors, basis: FockBasis, tol: float = 1e-6) -> list:
    """Total spin ``S`` of each normalized column, or ``"mixed"``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    norms = np.linalg.norm(vectors, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError(f"vectors must be normalized, norms {norms}")
    s2 = np.real(np.diag(spin_squared_matrix(vectors, basis)))
    out = []
    for val in s2:
        S = round(2 * spin_from_s2(val)) / 2
        out.append(S if abs(val - S * (S + 1)) <= tol else "mixed")
    return out


def spin_multiplets(vectors: np.ndarray, basis: FockBasis, tol: float = 1e-6):
    """Diagonalize ``S^2`` inside the span of ``vectors``.

    Returns ``(spins, rotated_vectors)``; a spin is ``"mixed"`` when the
    eigenvalue is not of the form ``S(S+1)`` within ``tol``.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    q, _ = np.linalg.qr(vectors)
    g = spin_squared_matrix(q, basis)
    vals, s = np.linalg.eigh(0.5 * (g + g.conj().T))
    spins = []
    for val in vals:
        S = round(2 * spin_from_s2(val)) / 2
        spins.append(S if abs(val - S * (S + 1)) <= tol else "mixed")
    return spins, q @ s


# -- spin-resolved energies ---------------------------------------------------

@dataclass
class SpinResolved:
    by_sz: dict[float, float]
    by_s: dict[float, float]
    ground_spins: list


def _clusters(vals: np.ndarray, tol: float):
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[start] > tol:
            yield start, i
            start = i


def spin_resolved_energies(model: RingModel, gauge: FluxAssignment | None, n_e: int) -> SpinResolved:
    """Ground energy per ``S^z`` sector and ``E(S)`` per total spin.

    ``E(S)`` is the lowest eigenvalue of the ``S^z = S`` sector whose eigenspace
    contains a vector of total spin ``S``. Dense diagonalization throughout.
    """
    L = model.length
    if not 0 <= n_e <= 2 * L:
        raise ValueError(f"N_e={n_e} out of range for L={L}")
    by_sz: dict[float, float] = {}
    by_s: dict[float, float] = {}
    ground_spins: list = []
    for n_up in range(max(0, n_e - L), min(n_e, L) + 1):
        sector = Sector.of(model, n_up, n_e - n_up)
        try:
            basis = enumerate_basis(sector)
        except EmptySectorError:
            continue
        h = build_hamiltonian(model, gauge, basis)
        vals, vecs = np.linalg.eigh(h.to_dense())
        by_sz[sector.sz] = float(vals[0])
        if sector.sz < 0:
            continue
        S_target = sector.sz
        tol = default_degeneracy_tol(vals[0])
        for a, b in _clusters(vals, tol):
            spins, _ = spin_multiplets(vecs[:, a:b], basis)
            if a == 0 and sector.sz == min(abs(s) for s in _sz_values(n_e, L)):
                ground_spins = spins
            if S_target in spins:
                by_s[S_target] = float(vals[a])
                break
    return SpinResolved(by_sz, by_s, ground_spins)


def _sz_values(n_e: int, L: int):
    return [(n_up - (n_e - n_up)) / 2 for n_up in range(max(0, n_e - L), min(n_e, L) + 1)]

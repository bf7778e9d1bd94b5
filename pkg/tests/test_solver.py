import math

import numpy as np
import pytest
import scipy.sparse as sp

from fluxring.basis import FockState, enumerate_basis
from fluxring.hamiltonian import SparseHermitian, build_hamiltonian
from fluxring.model import RingModel, Sector, make_uniform_gauge
from fluxring.solver import (ConvergenceError, ground_state, lanczos, spin_multiplets, spin_resolved_energies,
                             total_spin_of)


def _hermitian(dense):
    off = dense.copy()
    diag = np.real(np.diag(dense)).copy()
    np.fill_diagonal(off, 0)
    return SparseHermitian(diag, sp.csr_matrix(off))


def _random_hermitian(n, seed, density=0.05):
    rng = np.random.default_rng(seed)
    a = sp.random(n, n, density=density, random_state=rng, format="csr") * (1 + 1j)
    a = a + sp.random(n, n, density=density, random_state=rng, format="csr") * 1j
    a = (a + a.conj().T).toarray()
    return _hermitian(a)


def test_scalar_matrix():
    r = ground_state(_hermitian(np.array([[2.5 + 0j]])), k=1)
    assert r.energy == 2.5 and r.degeneracy == 1


def test_three_site_ring_twofold_ground():
    m = RingModel.uniform(3)
    h = build_hamiltonian(m, None, enumerate_basis(Sector.of(m, 1, 0)))
    r = ground_state(h, k=2)
    assert r.energy == pytest.approx(-1.0) and r.degeneracy == 2
    r = ground_state(h, k=2, method="lanczos")
    assert r.energy == pytest.approx(-1.0) and r.degeneracy == 2


@pytest.mark.parametrize("seed", range(3))
def test_lanczos_matches_dense(seed):
    h = _random_hermitian(500, seed)
    dense = np.linalg.eigvalsh(h.to_dense())[:4]
    vals, vecs = lanczos(h, k=4, seed=seed)
    assert np.allclose(vals, dense, atol=1e-8)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-10)


def test_lanczos_resolves_degeneracy():
    m = RingModel.uniform(8, 1.0, 4.0)
    h = build_hamiltonian(m, make_uniform_gauge(m, 0.0), enumerate_basis(Sector.of(m, 3, 2)))
    d = ground_state(h, k=6, method="dense")
    lz = ground_state(h, k=6, method="lanczos", seed=1)
    assert np.allclose(d.eigenvalues[:6], lz.eigenvalues, atol=1e-8)
    assert lz.degeneracy == min(d.degeneracy, 6)


def test_reproducible():
    h = _random_hermitian(300, 4)
    a, _ = lanczos(h, k=3, seed=7)
    b, _ = lanczos(h, k=3, seed=7)
    assert np.array_equal(a, b)


def test_bad_arguments():
    h = _random_hermitian(20, 0, density=0.3)
    with pytest.raises(ValueError):
        ground_state(h, k=0)
    with pytest.raises(ValueError):
        ground_state(h, k=21)
    with pytest.raises(ValueError):
        ground_state(h, method="qr")
    with pytest.raises(ConvergenceError):
        lanczos(_random_hermitian(400, 1), k=1, krylov_dim=3, max_restarts=0)


def _vector(basis, coeffs):
    v = np.zeros(basis.dim, complex)
    for st, c in coeffs.items():
        v[basis.rank(FockState(*st))] = c
    return v


def test_total_spin_examples():
    b1 = enumerate_basis(Sector(3, 1, 0))
    assert total_spin_of(_vector(b1, {(1, 0): 1.0}), b1) == [0.5]
    b2 = enumerate_basis(Sector(3, 2, 0))
    assert total_spin_of(_vector(b2, {(3, 0): 1.0}), b2) == [1.0]
    # (c+_{0u} c+_{1d} - c+_{0d} c+_{1u})|0>/sqrt2; both products are already in
    # site-ascending order, so the coefficients carry over unchanged
    b = enumerate_basis(Sector(3, 1, 1))
    singlet = _vector(b, {(1, 2): 1 / math.sqrt(2), (2, 1): -1 / math.sqrt(2)})
    triplet = _vector(b, {(1, 2): 1 / math.sqrt(2), (2, 1): 1 / math.sqrt(2)})
    assert total_spin_of(singlet, b) == [0.0]
    assert total_spin_of(triplet, b) == [1.0]
    mixed = _vector(b, {(1, 2): 1.0})
    assert total_spin_of(mixed, b) == ["mixed"]
    with pytest.raises(ValueError):
        total_spin_of(2 * singlet, b)


def test_spin_multiplets_split_degenerate_space():
    m = RingModel.uniform(4, 1.0, 0.0)
    b = enumerate_basis(Sector.of(m, 1, 1))
    h = build_hamiltonian(m, make_uniform_gauge(m, math.pi), b)
    r = ground_state(h)
    spins, vecs = spin_multiplets(r.ground_vectors, b)
    assert sorted(total_spin_of(vecs, b)) == sorted(spins)
    assert all(s != "mixed" for s in spins)


def test_su2_sectors_share_levels():
    rng = np.random.default_rng(2)
    m = RingModel.random(5, rng)
    e = {}
    for nu in range(0, 5):
        h = build_hamiltonian(m, make_uniform_gauge(m, 0.9), enumerate_basis(Sector.of(m, nu, 4 - nu)))
        e[nu] = np.linalg.eigvalsh(h.to_dense())
    # the S^z = 2 spectrum lies inside every smaller |S^z| spectrum
    for nu in (1, 2, 3):
        assert all(np.min(np.abs(e[nu] - x)) < 1e-9 for x in e[4])
    assert np.allclose(e[1], e[3])


def test_spin_resolved_energies():
    m = RingModel.uniform(4, 1.0, np.inf)
    sr = spin_resolved_energies(m, make_uniform_gauge(m, math.pi), 3)
    assert set(sr.by_sz) == {-1.5, -0.5, 0.5, 1.5}
    assert sr.by_sz[0.5] <= sr.by_sz[1.5] + 1e-12
    assert sr.ground_spins

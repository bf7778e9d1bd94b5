import json
import math

import numpy as np
import pytest

from fluxring.analysis import energy_at
from fluxring.basis import enumerate_basis
from fluxring.graphg import (GraphTooLarge, build_graph, check_equivalence_to_all_negative, cycle_fluxes,
                             cycle_report, max_psi_deviation, psi_value)
from fluxring.model import RingModel, Sector, angle_distance, make_random_gauge, make_uniform_gauge


def _graph(model, nu, nd, phi, gauge=None):
    basis = enumerate_basis(Sector.of(model, nu, nd))
    return build_graph(model, gauge or make_uniform_gauge(model, phi), basis), basis


def test_single_particle_ring():
    m = RingModel.uniform(4)
    g, _ = _graph(m, 1, 0, 0.9)
    assert g.dim == 4 and len(g.edges) == 4 and g.connected
    assert len(g.cycle_basis) == 1 and g.cycle_basis[0].length == 4
    (cyc, flux), = cycle_fluxes(g)
    assert angle_distance(flux, cyc.winding * 0.9) < 1e-12 and abs(cyc.winding) == 1


def test_edges_and_phases():
    m = RingModel.random(4, np.random.default_rng(0))
    g, basis = _graph(m, 2, 1, 1.3)
    h = g.hamiltonian.to_dense()
    assert len(g.edges) == np.count_nonzero(np.triu(np.abs(h) > 0, 1))
    for e in g.edges:
        i, j = int(e["i"]), int(e["j"])
        assert e["magnitude"] == pytest.approx(abs(h[j, i]))
        assert 0 <= e["phase"] < 2 * math.pi
        assert angle_distance(e["phase"], np.angle(h[j, i])) < 1e-12


def test_even_fundamental_cycles():
    g, _ = _graph(RingModel.uniform(4, 1.0, 2.0), 2, 2, 0.7)
    assert all(c.length % 2 == 0 for c in g.cycle_basis)


def test_infinite_u_minimal_length():
    m = RingModel.uniform(4, 1.0, np.inf)
    g, _ = _graph(m, 1, 1, 0.5)
    assert g.minimal_length == 8
    # flux of a minimal circuit: 2 phi + 2 (N_e - 1) pi = 2 phi
    assert all(angle_distance(c.flux, 2 * 0.5) < 1e-10 for c in g.minimal_cycles)


@pytest.mark.parametrize("L,ne", [(4, 4), (6, 4), (6, 6), (5, 4), (5, 2)])
@pytest.mark.parametrize("phi", [0.0, 1.1, math.pi])
def test_cycle_fluxes_are_multiples_of_psi(L, ne, phi):
    m = RingModel.random(L, np.random.default_rng(L * 10 + ne))
    g, _ = _graph(m, ne // 2, ne // 2, phi)
    assert g.minimal_cycles
    assert max_psi_deviation(g, psi_value(phi, L, ne)) < 1e-10


def test_gauge_choice_does_not_change_cycle_fluxes():
    m = RingModel.uniform(5, 1.0, 1.0)
    g1, _ = _graph(m, 2, 2, 2.0)
    g2, _ = _graph(m, 2, 2, 2.0, gauge=make_random_gauge(m, 2.0, np.random.default_rng(1)))
    assert max_psi_deviation(g2, psi_value(2.0, 5, 4)) < 1e-10
    assert max_psi_deviation(g1, psi_value(2.0, 5, 4)) < 1e-10


def _root_path(g, v):
    path = [v]
    while g.parent[path[-1]] >= 0:
        path.append(int(g.parent[path[-1]]))
    return path[::-1]


def test_composite_cycle_flux():
    g, _ = _graph(RingModel.uniform(4, 1.0, 1.0), 2, 1, 0.4)
    for c in g.cycle_basis[:10]:
        flux, wind = g.walk_flux(c.vertices)
        assert angle_distance(flux, c.flux) < 1e-10 and wind == c.winding
    # root -> a -> around a -> root -> b -> around b -> root: tree legs cancel
    walk, expected, winding = [], 0.0, 0
    for c in g.cycle_basis[:6]:
        to_c = _root_path(g, c.vertices[0])
        walk += to_c + c.vertices[1:] + to_c[::-1][:-1]
        expected += c.flux
        winding += c.winding
    flux, wind = g.walk_flux(walk)
    assert angle_distance(flux, expected) < 1e-10 and wind == winding


def test_psi_values():
    assert psi_value(0.3, 4, 4) == pytest.approx(0.3 + math.pi)
    assert psi_value(0.3, 4, 6) == pytest.approx(0.3)
    assert psi_value(math.pi, 4, 4) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        psi_value(0.0, 4, 3)


def test_equivalence_at_optimal_flux():
    m = RingModel.uniform(4, 1.0, 2.0)
    basis = enumerate_basis(Sector.of(m, 2, 2))
    rep = check_equivalence_to_all_negative(m, make_uniform_gauge(m, math.pi), basis)
    assert rep.equivalent and rep.max_entry_error <= 1e-12
    assert rep.ground_energy == pytest.approx(rep.ground_energy_all_negative, abs=1e-10)


def test_not_equivalent_away_from_optimum():
    m = RingModel.uniform(4, 1.0, 2.0)
    basis = enumerate_basis(Sector.of(m, 2, 2))
    rep = check_equivalence_to_all_negative(m, make_uniform_gauge(m, math.pi / 2), basis)
    assert not rep.equivalent and rep.offending_cycle is not None and rep.spectra_differ


def test_single_particle_equivalence_at_zero():
    # H = +t(...) with t = 1: at phi = 0 the single-particle 4-cycle has flux 0, and
    # a length-4 cycle needs flux 4 pi = 0 to map onto the all-negative matrix
    m = RingModel.uniform(4)
    rep = check_equivalence_to_all_negative(m, make_uniform_gauge(m, 0.0), enumerate_basis(Sector(4, 1, 0)))
    assert rep.equivalent


@pytest.mark.parametrize("L,ne,U", [(4, 4, 1.0), (4, 2, 3.0), (5, 4, 2.0), (5, 2, 0.5), (6, 4, 1.0),
                                    (6, 2, 2.0)])
def test_equivalence_at_predicted_flux(L, ne, U):
    m = RingModel.uniform(L, 1.0, U)
    sector = Sector.of(m, ne // 2, ne // 2)
    phi = ((ne // 2 + 1) * math.pi) if L % 2 == 0 else ne * math.pi / 2
    rep = check_equivalence_to_all_negative(m, make_uniform_gauge(m, phi), enumerate_basis(sector))
    assert rep.equivalent
    assert energy_at(m, sector, phi) == pytest.approx(rep.ground_energy_all_negative, abs=1e-10)


def test_graph_cap_and_exports(tmp_path):
    m = RingModel.uniform(4, 1.0, 1.0)
    with pytest.raises(GraphTooLarge):
        build_graph(m, None, enumerate_basis(Sector.of(m, 2, 2)), max_dim=10)
    g, _ = _graph(m, 2, 2, math.pi)
    dot = g.to_dot()
    assert dot.startswith("graph G {") and dot.count(" -- ") == len(g.edges)
    assert g.edge_csv().splitlines()[0] == "i,j,magnitude,phase"
    rep = json.loads(json.dumps(cycle_report(g, math.pi)))
    assert rep["max_psi_deviation"] < 1e-10 and rep["fundamental_lengths_even"]

import math

import numpy as np
import pytest

from fluxring.model import (ModelError, RingModel, Sector, angle_distance, hole_particle_map,
                            make_random_gauge, make_single_bond_gauge, make_uniform_gauge, wrap_angle)


def test_wrap_angle_canonical():
    assert wrap_angle(2 * math.pi) == 0.0
    assert wrap_angle(-2 * math.pi) == 0.0
    assert math.copysign(1.0, wrap_angle(-2 * math.pi)) == 1.0
    assert wrap_angle(-math.pi / 2) == pytest.approx(3 * math.pi / 2)
    assert angle_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)


@pytest.mark.parametrize("L,phi,per_bond,total", [
    (4, math.pi, math.pi / 4, math.pi),
    (3, 0.0, 0.0, 0.0),
    (5, 2 * math.pi, 2 * math.pi / 5, 0.0),
])
def test_uniform_gauge(L, phi, per_bond, total):
    g = make_uniform_gauge(RingModel.uniform(L), phi)
    assert np.allclose(g.per_bond_phase, per_bond)
    assert g.total_flux == pytest.approx(total, abs=1e-12)


def test_single_bond_gauge_zero_based():
    g = make_single_bond_gauge(RingModel.uniform(4), math.pi, 1)
    assert np.allclose(g.per_bond_phase, [0, math.pi, 0, 0])
    g = make_single_bond_gauge(RingModel.uniform(3), math.pi / 2, 0)
    assert np.allclose(g.per_bond_phase, [math.pi / 2, 0, 0])
    g = make_single_bond_gauge(RingModel.uniform(6), 4 * math.pi, 2)
    assert np.allclose(g.per_bond_phase, 0.0)
    assert g.total_flux == 0.0
    with pytest.raises(ModelError):
        make_single_bond_gauge(RingModel.uniform(4), 1.0, 4)


def test_random_gauge_total():
    rng = np.random.default_rng(3)
    g = make_random_gauge(RingModel.uniform(7), 1.3, rng)
    assert angle_distance(g.total_flux, 1.3) < 1e-12


def test_model_validation():
    with pytest.raises(ModelError):
        RingModel.uniform(2)
    with pytest.raises(ModelError):
        RingModel.uniform(64)
    with pytest.raises(ModelError):
        RingModel.build(4, t=[1, 1, 0, 1])
    with pytest.raises(ModelError):
        RingModel.build(4, U=[1, 1, 1])
    with pytest.raises(ModelError):
        RingModel.build(4, U=-np.inf)


def test_model_arrays_are_read_only_and_broadcast():
    m = RingModel.build(4, t=[1, 2, 3, 4], U=[0, np.inf, 1, np.inf], v=0.5, theta=-0.1)
    assert m.hop_magnitude.shape == (4, 2) and m.potential.shape == (4, 2)
    assert m.projected_sites == frozenset({1, 3})
    assert m.is_projected and not m.fully_projected
    assert np.all(m.hop_phase >= 0) and np.all(m.hop_phase < 2 * math.pi)
    with pytest.raises(ValueError):
        m.hop_magnitude[0, 0] = 5.0
    assert m.to_dict()["U"] == [0.0, "inf", 1.0, "inf"]


def test_sector_properties():
    s = Sector(6, 3, 1)
    assert s.n_e == 4 and s.sz == 1.0 and s.spin_ratio == 3.0
    assert Sector(6, 2, 0).spin_ratio == math.inf
    with pytest.raises(ModelError):
        Sector(4, 5, 0)
    with pytest.raises(ModelError):
        Sector(4, 3, 2, frozenset(range(4)))


def test_hole_particle_map_arithmetic():
    m = RingModel.build(3, theta=math.pi / 9)  # total flux pi/3
    img = hole_particle_map(m, Sector.of(m, 1, 1))
    assert img.sector.n_up == 2 and img.sector.n_down == 2
    assert img.model.reference_flux() == pytest.approx(2 * math.pi / 3)
    m4 = RingModel.uniform(4)
    img = hole_particle_map(m4, Sector.of(m4, 1, 1))
    assert (img.sector.n_up, img.sector.n_down) == (3, 3)
    assert img.model.reference_flux() == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ModelError):
        hole_particle_map(RingModel.uniform(4, U=np.inf), Sector(4, 1, 1, frozenset(range(4))))

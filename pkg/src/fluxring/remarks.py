"""Numerical checks of the optimal-flux remarks, one function per remark.

Every check returns a list of :class:`CheckResult`; defaults reproduce the
instances used by the acceptance suite.
"""

from __future__ import annotations

import math

import numpy as np

from .analysis import (SET_TOL, CheckResult, energy_at, finite_u_optimum, free_fermion_energy,
                       golden_section, infinite_u_lattice, is_subset, predict_optimal_flux,
                       scan_flux, set_deviation, sets_match)
from .basis import enumerate_basis
from .hamiltonian import build_hamiltonian
from .model import TWO_PI, RingModel, Sector, make_uniform_gauge, wrap_angle
from .solver import spin_multiplets, spin_resolved_energies

REMARK_3_U0 = 4.0 * math.asin(1.0 / math.sqrt(5.0))


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([seed, *tags])


def remark_1a(L: int = 6, n_e: int = 4, seed: int = 0, tol: float = SET_TOL) -> list[CheckResult]:
    """Optimal flux alternates between 0 and pi across ``S^z`` sectors (finite U)."""
    model = RingModel.random(L, _rng(seed, 11, L, n_e))
    out = []
    for n_up in range(n_e // 2, min(n_e, L) + 1):
        sector = Sector.of(model, n_up, n_e - n_up)
        curve = scan_flux(model, sector, maximize=False)
        pred = [finite_u_optimum(L, sector.n_up, sector.n_down)]
        out.append(CheckResult(f"remark 1a [L={L}, N_e={n_e}, S^z={sector.sz:g}]", pred,
                               curve.minimizer_phis, tol, sets_match(curve.minimizer_phis, pred, tol)))
    return out


REMARK_1B_CASES = ((4, 2, 1), (5, 2, 1), (6, 3, 2), (9, 5, 3))


def remark_1b(cases=REMARK_1B_CASES, seed: int = 0, tol: float = SET_TOL) -> list[CheckResult]:
    """At ``U = inf`` the minimizers lie on the lattice fixed by ``m = N_up / N_down``."""
    out = []
    for L, n_up, n_down in cases:
        model = RingModel.build(L, _rng(seed, 12, L, n_up, n_down).uniform(0.5, 2.0, L), np.inf)
        sector = Sector.of(model, n_up, n_down)
        curve = scan_flux(model, sector, maximize=False)
        lattice = infinite_u_lattice(L, n_up, n_down)
        m = sector.spin_ratio
        out.append(CheckResult(f"remark 1b [L={L}, N=({n_up},{n_down}), m={m:g}]", lattice,
                               curve.minimizer_phis, tol, is_subset(curve.minimizer_phis, lattice, tol),
                               "measured minimizers must lie on the predicted lattice"))
    return out


def remark_2(seed: int = 0, tol: float = 1e-9) -> list[CheckResult]:
    """Periodicity of ``E(phi)`` at ``U = inf``: pi for ``S^z = 0``, ``2 pi / N_e`` for non-integer m."""
    out = []
    for L, n_up, n_down, period, label in ((6, 2, 2, math.pi, "S^z=0"),
                                           (7, 3, 2, TWO_PI / 5, "m=3/2")):
        model = RingModel.build(L, _rng(seed, 2, L).uniform(0.5, 2.0, L), np.inf)
        curve = scan_flux(model, Sector.of(model, n_up, n_down), maximize=False)
        res = curve.shift_residual(period)
        out.append(CheckResult(f"remark 2 [{label}, L={L}, N=({n_up},{n_down})] period", period,
                               res, tol, res <= tol, f"period estimate {curve.period_estimate:.12g}"))
    return out


def remark_3(tol: float = SET_TOL) -> list[CheckResult]:
    """L=4, N_e=3, uniform t: the two 'if and only if' minimizer sets."""
    out = []
    for U, pred, label in ((0.0, [REMARK_3_U0, TWO_PI - REMARK_3_U0], "U=0"),
                           (np.inf, [0.0, TWO_PI / 3, 2 * TWO_PI / 3], "U=inf")):
        model = RingModel.uniform(4, 1.0, U)
        curve = scan_flux(model, Sector.of(model, 2, 1), maximize=False)
        out.append(CheckResult(f"remark 3 [{label}]", pred, curve.minimizer_phis, tol,
                               sets_match(curve.minimizer_phis, pred, tol)))
    return out


def remark_4(seed: int = 0, tol: float = SET_TOL) -> list[CheckResult]:
    """Spin-dependent hopping magnitudes and potentials keep the ``S^z = 0`` prediction."""
    out = []
    for L, n_e in ((6, 4), (5, 2)):
        rng = _rng(seed, 4, L, n_e)
        model = RingModel.build(L, rng.uniform(0.5, 2.0, (L, 2)), rng.uniform(0.0, 8.0, L),
                                rng.uniform(-1.0, 1.0, (L, 2)))
        sector = Sector.of(model, n_e // 2, n_e // 2)
        curve = scan_flux(model, sector, maximize=False)
        pred = predict_optimal_flux(model, sector).values
        out.append(CheckResult(f"remark 4 [L={L}, N_e={n_e}, spin-dependent t and v]", pred,
                               curve.minimizer_phis, tol, sets_match(curve.minimizer_phis, pred, tol)))
    return out


def remark_5(seed: int = 0, margin: float = 1e-8, tol: float = 1e-9) -> list[CheckResult]:
    """``E(S) < E(S+2)`` at the optimal flux; equality at ``U = inf``."""
    out = []
    model = RingModel.random(4, _rng(seed, 5, 4))
    phi = finite_u_optimum(4, 2, 2)
    res = spin_resolved_energies(model, make_uniform_gauge(model, phi), 4)
    e = res.by_s
    gap = e[2.0] - e[0.0]
    out.append(CheckResult("remark 5 [L=4, N_e=4, finite U] E(0) < E(2)", f"gap > {margin:g}", gap,
                           margin, bool(gap > margin),
                           f"E(0)={e[0.0]:.10f} E(1)={e[1.0]:.10f} E(2)={e[2.0]:.10f}"))
    for L, phi in ((6, math.pi), (5, 0.0)):
        model = RingModel.uniform(L, 1.0, np.inf)
        e = spin_resolved_energies(model, make_uniform_gauge(model, phi), 4).by_s
        diff = abs(e[0.0] - e[2.0])
        out.append(CheckResult(f"remark 5 [L={L}, N_e=4, U=inf, phi={phi:.4g}] E(0) = E(2)", 0.0, diff,
                               tol, diff <= tol, f"E(0)={e[0.0]:.12f} E(2)={e[2.0]:.12f}"))
    return out


def ground_space_spins(model: RingModel, n_e: int, phi: float):
    """Total spins found in the ground eigenspace (over all ``S^z``), plus the ground energy.

    Works in the smallest ``|S^z|`` sector, which contains every multiplet.
    """
    n_up = (n_e + 1) // 2
    basis = enumerate_basis(Sector.of(model, n_up, n_e - n_up))
    h = build_hamiltonian(model, make_uniform_gauge(model, phi), basis)
    vals, vecs = np.linalg.eigh(h.to_dense())
    deg = int(np.count_nonzero(vals - vals[0] <= 1e-8 * max(1.0, abs(vals[0]))))
    spins, _ = spin_multiplets(vecs[:, :deg], basis)
    return spins, float(vals[0])


def remark_6(L: int = 8, n_e: int = 6) -> list[CheckResult]:
    """Ferromagnetism flip at ``U = inf``, ``N_e = 4n + 2``: no ferromagnet at 0, one at pi."""
    model = RingModel.uniform(L, 1.0, np.inf)
    s_max = n_e / 2
    spins0, e0 = ground_space_spins(model, n_e, 0.0)
    spins_pi, epi = ground_space_spins(model, n_e, math.pi)
    ok0 = 0.0 in spins0 and s_max not in spins0
    okpi = s_max in spins_pi
    return [
        CheckResult(f"remark 6 [L={L}, N_e={n_e}, phi=0] singlet, no S={s_max:g}",
                    "S=0 present, S_max absent", spins0, 1e-6, ok0, f"E0={e0:.12f}"),
        CheckResult(f"remark 6 [L={L}, N_e={n_e}, phi=pi] ferromagnetic ground state",
                    f"S={s_max:g} present", spins_pi, 1e-6, okpi, f"E0={epi:.12f}"),
    ]


def remark_7(L: int = 6, n_e: int = 4, seed: int = 0, tol: float = SET_TOL,
             degeneracy_tol: float = 1e-9) -> list[CheckResult]:
    """Some sites at ``U = inf``: threshold ``L - N_e/2`` between the two theorem parts."""
    out = []
    for n_inf in (L - n_e // 2, L - n_e // 2 + 1):
        U = _rng(seed, 7, L, n_inf).uniform(0.0, 8.0, L)
        U[:n_inf] = np.inf
        model = RingModel.build(L, 1.0, U)
        sector = Sector.of(model, n_e // 2, n_e // 2)
        curve = scan_flux(model, sector, maximize=False)
        pred = predict_optimal_flux(model, sector)
        ok = sets_match(curve.minimizer_phis, pred.values, tol)
        detail = pred.rule
        if pred.values == [0.0, math.pi]:
            gap = abs(energy_at(model, sector, 0.0) - energy_at(model, sector, math.pi))
            ok = ok and gap <= degeneracy_tol
            detail += f"; |E(0)-E(pi)|={gap:.3e}"
        out.append(CheckResult(f"remark 7 [L={L}, N_e={n_e}, {n_inf} infinite sites]", pred.values,
                               curve.minimizer_phis, tol, bool(ok), detail))
    return out


def free_maximizers_predicted(L: int, n_e: int) -> list[float]:
    if L % 2 == 0:
        return [wrap_angle(n_e * math.pi / 2)]
    return [wrap_angle((n_e / 2 + 1) * math.pi)]


def remark_8(cases=((4, 2), (4, 4), (5, 2), (5, 4)), tol: float = SET_TOL,
             oracle_tol: float = 1e-10) -> list[CheckResult]:
    """``U = 0``, uniform t: maximizers of ``E(phi)``, cross-checked against the free-fermion oracle."""
    out = []
    for L, n_e in cases:
        model = RingModel.uniform(L, 1.0, 0.0)
        sector = Sector.of(model, n_e // 2, n_e // 2)
        curve = scan_flux(model, sector)
        pred = free_maximizers_predicted(L, n_e)
        dev = max((abs(m.energy - free_fermion_energy(L, 1.0, m.phi, n_e // 2, n_e // 2))
                   for m in curve.maximizers), default=math.inf)
        ok = sets_match(curve.maximizer_phis, pred, tol) and dev <= oracle_tol
        out.append(CheckResult(f"remark 8 [L={L}, N_e={n_e}] maximizers", pred, curve.maximizer_phis, tol,
                               bool(ok), f"oracle deviation at maximizers {dev:.2e}"))
    return out


def oracle_minimum(L: int, n_up: int, n_down: int, t: float = 1.0, n_grid: int | None = None):
    """Global minimum of the free-fermion ``E(phi)``: grid search then golden refinement."""
    n = n_grid or 64 * L

    def f(p):
        return free_fermion_energy(L, t, p, n_up, n_down)

    grid = TWO_PI * np.arange(n) / n
    vals = np.array([f(p) for p in grid])
    i = int(np.argmin(vals))
    h = TWO_PI / n
    x, fx = golden_section(f, grid[i] - h, grid[i] + h, 1e-10, grid[i], vals[i])
    return wrap_angle(x), fx


def gap_scaling(lengths, n_e_of_L, t: float = 1.0):
    """``|E(0) - E(phi_opt)| * L`` from the oracle for each ring length."""
    out = {}
    for L in lengths:
        n_e = n_e_of_L(L)
        _, emin = oracle_minimum(L, n_e // 2, n_e // 2, t)
        out[L] = abs(free_fermion_energy(L, t, 0.0, n_e // 2, n_e // 2) - emin) * L
    return out


def remark_9(lengths=(6, 10, 14, 18), n_e: int = 4, factor: float = 2.0) -> list[CheckResult]:
    """``|E(0) - E(phi_opt)| = O(1/L)`` as a bounded-ratio check of ``gap * L``."""
    scaled = gap_scaling(lengths, lambda L: n_e)
    ratio = max(scaled.values()) / min(scaled.values())
    out = [CheckResult(f"remark 9 [U=0, N_e={n_e}, L={list(lengths)}] gap*L spread", f"< {factor:g}",
                       ratio, factor, bool(ratio < factor),
                       "gap*L = " + ", ".join(f"{L}: {v:.6f}" for L, v in scaled.items()))]
    half = (8, 12, 16, 20)
    scaled = gap_scaling(half, lambda L: L)
    ratio = max(scaled.values()) / min(scaled.values())
    out.append(CheckResult(f"remark 9 [U=0, half filling, L={list(half)}] gap*L spread", f"< {factor:g}",
                           ratio, factor, bool(ratio < factor),
                           "gap*L = " + ", ".join(f"{L}: {v:.6f}" for L, v in scaled.items())))
    return out


REMARKS = {
    "1a": remark_1a,
    "1b": remark_1b,
    "2": remark_2,
    "3": remark_3,
    "4": remark_4,
    "5": remark_5,
    "6": remark_6,
    "7": remark_7,
    "8": remark_8,
    "9": remark_9,
}


def verify_remarks(selector=None, seed: int = 0) -> list[CheckResult]:
    """Run the selected remark checks (all by default); failures are collected, not raised."""
    keys = list(REMARKS) if not selector else [str(s) for s in selector]
    results: list[CheckResult] = []
    for key in keys:
        if key not in REMARKS:
            raise KeyError(f"unknown remark {key!r}; choose from {sorted(REMARKS)}")
        fn = REMARKS[key]
        try:
            results.extend(fn(seed=seed) if "seed" in fn.__code__.co_varnames else fn())
        except Exception as exc:  # one broken check must not hide the others
            results.append(CheckResult(f"remark {key}", "check runs", f"error: {exc}", 0.0, False))
    return results


__all__ = ["verify_remarks", "REMARKS", "set_deviation"]

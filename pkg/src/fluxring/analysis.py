"""Flux sweeps, extremum refinement, periodicity and optimal-flux predictions."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .basis import FockBasis, enumerate_basis
from .hamiltonian import HoppingTemplate, single_particle_levels
from .model import (TWO_PI, FluxAssignment, RingModel, Sector, angle_distance, make_random_gauge,
                    make_single_bond_gauge, make_uniform_gauge, wrap_angle)
from .solver import DENSE_THRESHOLD, lowest_energy

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

REFINE_TOL = 1e-6
DEDUP_TOL = 1e-5
SET_TOL = 1e-4
PERIOD_TOL = 1e-9


class ScanError(RuntimeError):
    def __init__(self, phi: float, cause: Exception):
        super().__init__(f"energy evaluation failed at phi={phi!r}: {cause}")
        self.phi = phi


@dataclass
class CheckResult:
    """Outcome of one verification: predicted vs measured at a tolerance."""

    name: str
    predicted: object
    measured: object
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _jsonable(d)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: predicted={_short(self.predicted)} measured={_short(self.measured)} tol={self.tolerance:g}"


def _short(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_short(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{k}: {_short(v)}" for k, v in x.items()) + "}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


# -- energies -----------------------------------------------------------------

@lru_cache(maxsize=64)
def _cached_basis(sector: Sector) -> FockBasis:
    return enumerate_basis(sector)


@lru_cache(maxsize=32)
def _cached_template(model: RingModel, sector: Sector) -> HoppingTemplate:
    # models hash by identity, so the cache is per model object
    return HoppingTemplate.build(model, _cached_basis(sector))


def energy_at(model: RingModel, sector: Sector, gauge: FluxAssignment | float,
              dense_threshold: int = DENSE_THRESHOLD) -> float:
    """Ground energy of a sector for a gauge (or a flux threaded uniformly)."""
    if not isinstance(gauge, FluxAssignment):
        gauge = make_uniform_gauge(model, float(gauge))
    h = _cached_template(model, sector).assemble(model, gauge)
    return lowest_energy(h, dense_threshold)


def free_fermion_energy(L: int, t: float, phi: float, n_up: int, n_down: int) -> float:
    """Ground energy at ``U = 0`` with uniform ``|t|``: fill the lowest one-particle levels."""
    if not (0 <= n_up <= L and 0 <= n_down <= L):
        raise ValueError(f"cannot place ({n_up}, {n_down}) fermions of one spin on {L} sites")
    levels = np.sort(single_particle_levels(L, t, phi))
    return float(levels[:n_up].sum() + levels[:n_down].sum())


# -- one-dimensional search ---------------------------------------------------

def golden_section(f, a: float, b: float, tol: float = REFINE_TOL, x0: float | None = None,
                   f0: float | None = None):
    """Minimize ``f`` on ``[a, b]`` by golden-section search.

    ``(x0, f0)`` is an already evaluated interior point; the returned value
    is never worse than it.
    """
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    best = (x0, f0) if x0 is not None else (c, fc)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        for x, fx in ((c, fc), (d, fd)):
            if fx < best[1]:
                best = (x, fx)
    return best


@dataclass
class Extremum:
    phi: float
    energy: float
    bracket: tuple[float, float]
    bracket_energies: tuple[float, float]


@dataclass
class FluxCurve:
    sector: Sector
    grid: np.ndarray
    energies: np.ndarray
    minimizers: list[Extremum] = field(default_factory=list)
    maximizers: list[Extremum] = field(default_factory=list)
    local_minima: list[Extremum] = field(default_factory=list)
    period_estimate: float = TWO_PI
    constant: bool = False
    refine_tol: float = REFINE_TOL
    method: str = "dense"

    @property
    def minimizer_phis(self) -> list[float]:
        return [m.phi for m in self.minimizers]

    @property
    def maximizer_phis(self) -> list[float]:
        return [m.phi for m in self.maximizers]

    @property
    def min_energy(self) -> float:
        vals = [float(self.energies.min())] + [m.energy for m in self.minimizers]
        return min(vals)

    def shift_residual(self, period: float) -> float:
        """``max_phi |E(phi) - E(phi + period)|`` on the grid; period must align with it."""
        n = len(self.grid)
        steps = period / (TWO_PI / n)
        s = int(round(steps))
        if abs(steps - s) > 1e-9:
            raise ValueError(f"period {period} does not align with a grid of {n} points")
        return float(np.max(np.abs(self.energies - np.roll(self.energies, -s))))


def default_grid_size(sector: Sector) -> int:
    return max(8 * sector.length * max(sector.n_e, 1), 64)


def flux_grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def _eval_chunk(args):
    # one job per chunk so a worker builds the hopping template once
    model, sector, phis, dense_threshold = args
    return [energy_at(model, sector, float(p), dense_threshold) for p in phis]


def _refine(f, grid, energies, idx, tol, sign):
    n = len(grid)
    h = TWO_PI / n
    center = grid[idx]
    a, b = center - h, center + h
    x, fx = golden_section(lambda p: sign * f(p), a, b, tol, center, sign * energies[idx])
    ea, eb = energies[(idx - 1) % n], energies[(idx + 1) % n]
    return Extremum(wrap_angle(x), sign * fx, (wrap_angle(a), wrap_angle(b)), (float(ea), float(eb)))


def _dedup(extrema: list[Extremum], tol: float, sign: int) -> list[Extremum]:
    out: list[Extremum] = []
    for e in sorted(extrema, key=lambda e: sign * e.energy):
        if all(angle_distance(e.phi, o.phi) > tol for o in out):
            out.append(e)
    return sorted(out, key=lambda e: e.phi)


def _local_indices(values: np.ndarray) -> list[int]:
    prev, nxt = np.roll(values, 1), np.roll(values, -1)
    return [int(i) for i in np.flatnonzero((values <= prev) & (values <= nxt))]


def scan_flux(model: RingModel, sector: Sector, n_grid: int | None = None, *,
              refine_tol: float = REFINE_TOL, dedup_tol: float = DEDUP_TOL,
              energy_tol: float | None = None, period_tol: float = PERIOD_TOL,
              maximize: bool = True, workers: int = 1,
              dense_threshold: int = DENSE_THRESHOLD) -> FluxCurve:
    """Sample ``E(phi)`` on a uniform periodic grid and refine its extrema.

    Every grid local minimum is bracketed by its neighbours and refined by
    golden-section search; the global minimizers are the refined minima within
    ``energy_tol`` of the lowest one. Maximizers are found the same way on
    ``-E``. A curve flat to ``period_tol`` is flagged ``constant`` and has no
    extrema.
    """
    if sector.length != model.length:
        raise ValueError("sector and model lengths differ")
    n = n_grid or default_grid_size(sector)
    grid = flux_grid(n)
    energies = np.empty(n)
    if workers > 1:
        chunks = np.array_split(np.arange(n), min(n, 4 * workers))
        jobs = [(model, sector, grid[idx], dense_threshold) for idx in chunks]
        with ProcessPoolExecutor(workers) as pool:
            for idx, res in zip(chunks, pool.map(_eval_chunk, jobs)):
                energies[idx] = res
    else:
        for i, p in enumerate(grid):
            try:
                energies[i] = energy_at(model, sector, float(p), dense_threshold)
            except Exception as exc:  # solver failure aborts with the flux value
                raise ScanError(float(p), exc) from exc
    dim = _cached_basis(sector).dim
    curve = FluxCurve(sector, grid, energies, refine_tol=refine_tol,
                      method="dense" if dim <= dense_threshold else "lanczos")
    spread = float(energies.max() - energies.min())
    if spread <= period_tol * max(1.0, abs(float(energies.min()))):
        curve.constant = True
        curve.period_estimate = 0.0
        return curve

    def f(p):
        return energy_at(model, sector, p, dense_threshold)

    etol = energy_tol if energy_tol is not None else 1e-9 * max(1.0, abs(float(energies.min())))
    local = [_refine(f, grid, energies, i, refine_tol, +1) for i in _local_indices(energies)]
    local = _dedup(local, dedup_tol, +1)
    emin = min(e.energy for e in local)
    curve.local_minima = local
    curve.minimizers = [e for e in local if e.energy <= emin + etol]
    if maximize:
        local_max = [_refine(f, grid, energies, i, refine_tol, -1) for i in _local_indices(-energies)]
        local_max = _dedup(local_max, dedup_tol, -1)
        emax = max(e.energy for e in local_max)
        curve.maximizers = [e for e in local_max if e.energy >= emax - etol]
    curve.period_estimate = estimate_period(energies, period_tol)
    return curve


def estimate_period(energies: np.ndarray, tol: float = PERIOD_TOL) -> float:
    """Smallest ``2*pi/d`` (``d`` dividing the grid size) under which the samples repeat."""
    n = len(energies)
    scale = max(1.0, float(np.max(np.abs(energies))))
    for d in sorted((d for d in range(1, n + 1) if n % d == 0), reverse=True):
        s = n // d
        if d > 1 and np.max(np.abs(energies - np.roll(energies, -s))) <= tol * scale:
            return TWO_PI / d
    return TWO_PI


# -- predictions ----------------------------------------------------------------

@dataclass
class Prediction:
    """Predicted optimal flux values in ``[0, 2*pi)``.

    ``mode`` says how a measured minimizer set is judged against ``values``:
    ``"equal"`` (same set), ``"subset"`` (nonempty subset of the lattice) or
    ``"contains"`` (every predicted value is a minimizer; others may exist).
    """

    values: list[float]
    mode: str
    rule: str

    def judge(self, measured, tol: float = SET_TOL) -> bool:
        if self.mode == "equal":
            return sets_match(measured, self.values, tol)
        if self.mode == "subset":
            return is_subset(measured, self.values, tol)
        return bool(self.values) and all(
            any(angle_distance(m, p) <= tol for m in measured) for p in self.values)


def _reduce_set(values) -> list[float]:
    out: list[float] = []
    for v in sorted(wrap_angle(v) for v in values):
        if all(angle_distance(v, o) > 1e-9 for o in out):
            out.append(v)
    return out


def finite_u_optimum(L: int, n_up: int, n_down: int) -> float:
    """Optimal flux for finite U and ``N_up = N_down mod 2``.

    Reduces to ``(N_e/2 + 1) pi`` (L even) and ``N_e pi / 2`` (L odd) at
    ``S^z = 0`` and alternates between 0 and pi as ``S^z`` steps by one.
    """
    if (n_up - n_down) % 2:
        raise ValueError("N_up and N_down must have equal parity")
    return wrap_angle((n_up + L + 1) * math.pi)


def infinite_u_lattice(L: int, n_up: int, n_down: int) -> list[float]:
    """Optimal-flux lattice at ``U = inf`` for the given species counts."""
    n_e = n_up + n_down
    hi, lo = max(n_up, n_down), min(n_up, n_down)
    if lo == 0:
        # one species only: spinless fermions
        return [wrap_angle((n_e + L + 1) * math.pi)]
    ratio = Fraction(hi, lo)
    if ratio.denominator != 1:
        return _reduce_set(2 * k * math.pi / n_e for k in range(n_e))
    m = int(ratio)
    shift = -(n_e - 1) * math.pi
    if ((m + 1) * L) % 2 == 0:
        return _reduce_set(2 * k * math.pi / (m + 1) + shift for k in range(m + 1))
    return _reduce_set((2 * k - 1) * math.pi / (m + 1) + shift for k in range(m + 1))


def predict_optimal_flux(model: RingModel, sector: Sector) -> Prediction:
    """Predicted minimizers for a sector with reference phases zero.

    Finite U (or few infinite sites): a single flux. All sites infinite, or
    more than ``L - N_e/2`` of them: the infinite-U prediction.
    """
    L, n_e = sector.length, sector.n_e
    n_inf = len(model.projected_sites)
    if n_inf == 0 or (n_inf < L and n_e % 2 == 0 and n_inf <= L - n_e // 2):
        if n_e % 2:
            raise ValueError("no prediction for odd N_e at finite U")
        rule = "finite U" if n_inf == 0 else f"{n_inf} infinite sites <= L - N_e/2"
        return Prediction([finite_u_optimum(L, sector.n_up, sector.n_down)], "equal", rule)
    if sector.n_up == sector.n_down:
        rule = "U = inf" if n_inf == L else f"{n_inf} infinite sites > L - N_e/2"
        # E(0) = E(pi) are minima; at U = inf the period can be shorter than pi
        return Prediction([0.0, math.pi], "contains", rule)
    return Prediction(infinite_u_lattice(L, sector.n_up, sector.n_down), False, "U = inf, S^z != 0 lattice")


def sets_match(measured, predicted, tol: float = SET_TOL) -> bool:
    """Equal as sets of angles within ``tol`` (both inclusions)."""
    measured, predicted = list(measured), list(predicted)
    if not measured or not predicted:
        return not measured and not predicted
    return (all(min(angle_distance(m, p) for p in predicted) <= tol for m in measured)
            and all(min(angle_distance(m, p) for m in measured) <= tol for p in predicted))


def is_subset(measured, lattice, tol: float = SET_TOL) -> bool:
    measured = list(measured)
    return bool(measured) and all(min(angle_distance(m, p) for p in lattice) <= tol for m in measured)


def set_deviation(measured, predicted) -> float:
    measured, predicted = list(measured), list(predicted)
    if not measured or not predicted:
        return math.inf
    return max(max(min(angle_distance(m, p) for p in predicted) for m in measured),
               max(min(angle_distance(m, p) for m in measured) for p in predicted))


def verify_theorem(model: RingModel, sector: Sector, *, tol: float = SET_TOL,
                   degeneracy_tol: float = 1e-9, **scan_opts) -> CheckResult:
    """Scan ``E(phi)`` and compare its minimizer set with the predicted one.

    Even ``N_e`` is required unless every site is projected. At ``U = inf``
    with ``S^z = 0`` both 0 and pi must be global minimizers with
    ``|E(0) - E(pi)|`` below ``degeneracy_tol``; extra minimizers coming from a
    period shorter than pi are allowed and listed in ``measured``.
    """
    name = f"theorem[{sector.label()}, inf sites={len(model.projected_sites)}]"
    if np.any(model.hop_phase != 0.0):
        raise ValueError("verify_theorem expects zero reference phases")
    if sector.n_e % 2 and not model.fully_projected:
        raise ValueError(f"N_e={sector.n_e} is odd; only the U=inf path accepts odd N_e")
    if sector.n_e > sector.length:
        raise ValueError("the prediction is stated for N_e <= L; apply hole_particle_map first")
    curve = scan_flux(model, sector, **scan_opts)
    if curve.constant:
        return CheckResult(name, "degenerate", "degenerate: E constant in phi", tol, True,
                           "no hopping is possible; E(phi) is flat")
    pred = predict_optimal_flux(model, sector)
    measured = curve.minimizer_phis
    ok = pred.judge(measured, tol)
    detail = pred.rule
    if pred.values == [0.0, math.pi]:
        gap = abs(energy_at(model, sector, 0.0) - energy_at(model, sector, math.pi))
        detail += f"; |E(0)-E(pi)|={gap:.3e}"
        ok = ok and gap <= degeneracy_tol
    return CheckResult(name, pred.values, measured, tol, bool(ok), detail)


# -- gauge invariance -----------------------------------------------------------

def compare_gauges(model: RingModel, sector: Sector, gauges: list[FluxAssignment],
                   tol: float = 1e-9) -> CheckResult:
    """Ground energies for each gauge; passes iff they all agree within ``tol``."""
    energies = [energy_at(model, sector, g) for g in gauges]
    spread = max(energies) - min(energies)
    fluxes = [g.total_flux for g in gauges]
    return CheckResult(f"gauges[{sector.label()}]", fluxes, energies, tol, spread <= tol,
                       f"spread={spread:.3e}")


def check_gauge_invariance(model: RingModel, sector: Sector, phi: float, trials: int = 3,
                           seed: int = 0, tol: float = 1e-9) -> CheckResult:
    """Uniform, every single-bond, and ``trials`` random gauges with the same total flux."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    rng = np.random.default_rng(seed)
    gauges = [make_uniform_gauge(model, phi)]
    gauges += [make_single_bond_gauge(model, phi, b) for b in range(model.length)]
    gauges += [make_random_gauge(model, phi, rng) for _ in range(trials)]
    res = compare_gauges(model, sector, gauges, tol)
    res.name = f"gauge invariance[{sector.label()}, phi={phi:.6g}]"
    return res

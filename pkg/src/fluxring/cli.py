"""Command-line front end.

Exit status: 0 when every requested check passes, 2 when a check fails,
1 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import io
from ._version import __version__
from .analysis import (DEDUP_TOL, PERIOD_TOL, REFINE_TOL, SET_TOL, CheckResult, check_gauge_invariance,
                       energy_at, free_fermion_energy, scan_flux, verify_theorem)
from .basis import enumerate_basis
from .graphg import (MAX_GRAPH_DIM, build_graph, check_equivalence_to_all_negative, max_psi_deviation,
                     psi_value)
from .hamiltonian import build_hamiltonian
from .model import ModelError, RingModel, Sector, make_uniform_gauge
from .remarks import REMARKS, verify_remarks
from .solver import spin_resolved_energies
from .suite import run_full_suite

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

COMMANDS = ("scan", "verify-theorem", "verify-remarks", "graph", "gauge-check", "oracle", "spin", "suite")


class ConfigError(ValueError):
    pass


# -- configuration --------------------------------------------------------------------

def _parse_number(text: str, key: str) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s in ("inf", "+inf"):
        return math.inf
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number (use 'inf' for infinity)") from None


def _parse_value(value, key: str):
    """Scalar, list, or list of lists; strings may be comma separated."""
    if value is None:
        return None
    if isinstance(value, str) and "," in value:
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, (list, tuple)):
        out = [_parse_value(v, f"{key}[{i}]") for i, v in enumerate(value)]
        return out
    return _parse_number(value, key)


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)  # JSON is a subset
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(data) - {"system", "sector", "scan", "seed", "command", "out"}
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    return data


def merge_config(args: argparse.Namespace) -> dict:
    """Config file values, overridden by any flag given on the command line."""
    cfg = load_config(args.config) if args.config else {}
    system = dict(cfg.get("system") or {})
    sector = dict(cfg.get("sector") or {})
    scan = dict(cfg.get("scan") or {})
    for key, flag in (("L", "L"), ("t", "t"), ("U", "U"), ("v", "v"), ("theta", "theta")):
        if getattr(args, flag) is not None:
            system[key] = getattr(args, flag)
    if args.random_couplings:
        system["random"] = True
    for key in ("n_up", "n_down", "n_e"):
        if getattr(args, key) is not None:
            sector[key] = getattr(args, key)
    if args.grid is not None:
        scan["grid"] = args.grid
    if args.refine_tol is not None:
        scan["refine_tol"] = args.refine_tol
    unknown = set(system) - {"L", "t", "U", "v", "theta", "random"}
    if unknown:
        raise ConfigError(f"unknown key(s) in system block: {sorted(unknown)}")
    unknown = set(sector) - {"n_up", "n_down", "n_e"}
    if unknown:
        raise ConfigError(f"unknown key(s) in sector block: {sorted(unknown)}")
    unknown = set(scan) - {"grid", "refine_tol", "phi"}
    if unknown:
        raise ConfigError(f"unknown key(s) in scan block: {sorted(unknown)}")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return {"system": system, "sector": sector, "scan": scan, "seed": int(seed)}


def model_from_config(cfg: dict) -> RingModel:
    system = cfg["system"]
    if "L" not in system:
        raise ConfigError("system.L is required (or --L)")
    try:
        L = int(system["L"])
    except (TypeError, ValueError):
        raise ConfigError(f"system.L: expected an integer, got {system['L']!r}") from None
    values = {k: _parse_value(system.get(k), f"system.{k}") for k in ("t", "U", "v", "theta")}
    try:
        if system.get("random"):
            model = RingModel.random(L, np.random.default_rng(cfg["seed"]))
            changes = {}
            if values["t"] is not None:
                changes["hop_magnitude"] = values["t"]
            if values["U"] is not None:
                changes["interaction"] = values["U"]
            if values["v"] is not None:
                changes["potential"] = values["v"]
            if values["theta"] is not None:
                changes["hop_phase"] = values["theta"]
            return model.replace(**changes) if changes else model
        defaults = {"t": 1.0, "U": 0.0, "v": 0.0, "theta": 0.0}
        kw = {k: (defaults[k] if values[k] is None else values[k]) for k in defaults}
        return RingModel.build(L, kw["t"], kw["U"], kw["v"], kw["theta"])
    except ModelError as exc:
        raise ConfigError(f"system: {exc}") from None


def sector_from_config(cfg: dict, model: RingModel) -> Sector:
    sec = cfg["sector"]
    if "n_up" in sec or "n_down" in sec:
        if "n_e" in sec and int(sec.get("n_up", 0)) + int(sec.get("n_down", 0)) != int(sec["n_e"]):
            raise ConfigError("sector: n_up + n_down disagrees with n_e")
        if "n_up" not in sec or "n_down" not in sec:
            if "n_e" not in sec:
                raise ConfigError("sector: give both n_up and n_down, or n_e")
            n_e = int(sec["n_e"])
            n_up = int(sec["n_up"]) if "n_up" in sec else n_e - int(sec["n_down"])
            return Sector.of(model, n_up, n_e - n_up)
        return Sector.of(model, int(sec["n_up"]), int(sec["n_down"]))
    if "n_e" in sec:
        n_e = int(sec["n_e"])
        # smallest |S^z|, up-majority for odd N_e
        return Sector.of(model, n_e - n_e // 2, n_e // 2)
    raise ConfigError("sector: give n_up/n_down or n_e (--nup/--ndown or --ne)")


def _n_e(cfg: dict) -> int:
    sec = cfg["sector"]
    if "n_e" in sec:
        return int(sec["n_e"])
    if "n_up" in sec and "n_down" in sec:
        return int(sec["n_up"]) + int(sec["n_down"])
    raise ConfigError("sector: give n_e (--ne) or n_up and n_down")


# -- commands -----------------------------------------------------------------------

def _tolerances(args, **extra) -> dict:
    tol = {"refine_tol": args.refine_tol or REFINE_TOL, "dedup_tol": DEDUP_TOL,
           "set_tol": SET_TOL, "period_tol": PERIOD_TOL}
    tol.update(extra)
    return tol


def _meta(args, cfg, **tol) -> io.Metadata:
    return io.Metadata(args.command, cfg, cfg["seed"], _tolerances(args, **tol))


def _emit_report(args, checks: list[CheckResult], meta: io.Metadata, extra=None) -> int:
    for c in checks:
        print(c.line())
    rep = io.report_dict(checks, meta, extra)
    text = io.dumps(rep)
    if args.out:
        Path(args.out).write_text(text)
        print(f"report written to {args.out}")
    elif args.json:
        sys.stdout.write(text)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def _model_and_sector(cfg):
    model = model_from_config(cfg)
    return model, sector_from_config(cfg, model)


def _debug_dumps(args, model, sector, phi):
    if args.dump_basis or args.dump_matrix:
        basis = enumerate_basis(sector)
        if args.dump_basis:
            basis.dump_csv(args.dump_basis)
        if args.dump_matrix:
            build_hamiltonian(model, make_uniform_gauge(model, phi), basis).dump_coo(args.dump_matrix)


def cmd_scan(args, cfg) -> int:
    model, sector = _model_and_sector(cfg)
    _debug_dumps(args, model, sector, args.phi or 0.0)
    scan = cfg["scan"]
    curve = scan_flux(model, sector, scan.get("grid"), refine_tol=float(scan.get("refine_tol", REFINE_TOL)),
                      workers=args.workers)
    meta = _meta(args, cfg)
    text = io.curve_to_csv(curve, meta)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{sector.label()}: {len(curve.grid)} points, method {curve.method}")
        print("minimizers: " + ", ".join(f"{p:.8f}" for p in curve.minimizer_phis))
        print("maximizers: " + ", ".join(f"{p:.8f}" for p in curve.maximizer_phis))
        print(f"period estimate: {curve.period_estimate:.10f}")
        print(f"curve written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify_theorem(args, cfg) -> int:
    model, sector = _model_and_sector(cfg)
    scan = cfg["scan"]
    res = verify_theorem(model, sector, n_grid=scan.get("grid"),
                         refine_tol=float(scan.get("refine_tol", REFINE_TOL)), workers=args.workers)
    return _emit_report(args, [res], _meta(args, cfg, degeneracy_tol=1e-9),
                        {"model": model.to_dict()})


def cmd_verify_remarks(args, cfg) -> int:
    checks = verify_remarks(args.select, seed=cfg["seed"])
    return _emit_report(args, checks, _meta(args, cfg))


def cmd_graph(args, cfg) -> int:
    model, sector = _model_and_sector(cfg)
    phi = args.phi if args.phi is not None else float(cfg["scan"].get("phi", 0.0))
    basis = enumerate_basis(sector)
    if basis.dim > MAX_GRAPH_DIM:
        raise ConfigError(f"sector dimension {basis.dim} exceeds the graph cap {MAX_GRAPH_DIM}")
    gauge = make_uniform_gauge(model, phi)
    g = build_graph(model, gauge, basis)
    meta = _meta(args, cfg, psi_tol=1e-10, equivalence_tol=1e-12)
    stem = args.out or "graph"
    paths = io.write_graph_files(stem, g, meta, phi)
    print(f"G: {g.dim} vertices, {len(g.edges)} edges, {g.n_components} component(s), "
          f"{len(g.cycle_basis)} fundamental cycles, minimal winding length {g.minimal_length}")
    for p in paths.values():
        print(f"wrote {p}")
    checks = []
    if sector.n_e % 2 == 0 and sector.n_up == sector.n_down:
        psi = psi_value(phi, model.length, sector.n_e)
        dev = max_psi_deviation(g, psi)
        checks.append(CheckResult("cycle flux = winding * psi", psi, dev, 1e-10, dev <= 1e-10))
    else:
        fluxes = sorted({round(c.flux, 10) for c in g.minimal_cycles})
        print("observed minimal-cycle fluxes (no formula asserted): " + ", ".join(f"{f:.10f}" for f in fluxes))
    rep = check_equivalence_to_all_negative(model, gauge, basis, graph=g)
    print(f"all-negative comparison: {rep.message}")
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_gauge_check(args, cfg) -> int:
    model, sector = _model_and_sector(cfg)
    phi = args.phi if args.phi is not None else 1.0
    res = check_gauge_invariance(model, sector, phi, trials=3, seed=cfg["seed"])
    return _emit_report(args, [res], _meta(args, cfg, gauge_tol=1e-9))


def cmd_oracle(args, cfg) -> int:
    model, sector = _model_and_sector(cfg)
    if np.any(model.interaction != 0.0) or np.any(model.potential != 0.0) or np.any(model.hop_phase != 0.0):
        raise ConfigError("oracle: requires U = 0, v = 0 and theta = 0")
    t = model.hop_magnitude
    if not np.all(t == t[0, 0]):
        raise ConfigError("oracle: requires a uniform hopping magnitude")
    n = int(cfg["scan"].get("grid") or 64)
    grid = 2 * math.pi * np.arange(n) / n
    rows, worst = [], 0.0
    for phi in grid:
        ed = energy_at(model, sector, float(phi))
        ff = free_fermion_energy(model.length, float(t[0, 0]), float(phi), sector.n_up, sector.n_down)
        worst = max(worst, abs(ed - ff))
        rows.append((float(phi), ed, ff))
    res = CheckResult(f"oracle vs ED [{sector.label()}]", 0.0, worst, 1e-10, worst <= 1e-10)
    meta = _meta(args, cfg, oracle_tol=1e-10)
    if args.table:
        io.write_table(args.table, ["phi", "energy_ed", "energy_oracle"], rows, meta)
    return _emit_report(args, [res], meta)


def cmd_spin(args, cfg) -> int:
    model = model_from_config(cfg)
    n_e = _n_e(cfg)
    phi = args.phi if args.phi is not None else 0.0
    sr = spin_resolved_energies(model, make_uniform_gauge(model, phi), n_e)
    print(f"ground-space total spins at phi={phi:.10g}: {sr.ground_spins}")
    for s, e in sorted(sr.by_s.items()):
        print(f"E(S={s:g}) = {e:.12f}")
    out = {"metadata": _meta(args, cfg).to_dict(), "phi": phi, "n_e": n_e,
           "energy_by_sz": sr.by_sz, "energy_by_s": sr.by_s, "ground_spins": sr.ground_spins}
    if args.out:
        Path(args.out).write_text(io.dumps(out))
    return EXIT_OK


def cmd_suite(args, cfg) -> int:
    def echo(res, seconds):
        print(f"{res.line()}  ({seconds:.1f}s)", flush=True)
    sel = [int(s) for s in args.select] if args.select else None
    results = run_full_suite(cfg["seed"], sel, echo)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} acceptance criteria pass")
    meta = io.Metadata("suite", {"criteria": sel or "all"}, cfg["seed"], {"set_tol": SET_TOL})
    out = args.out or "suite_report.json"
    io.write_report(out, results, meta)
    print(f"report written to {out}")
    return EXIT_OK if n_pass == len(results) else EXIT_FAIL


HANDLERS = {
    "scan": cmd_scan, "verify-theorem": cmd_verify_theorem, "verify-remarks": cmd_verify_remarks,
    "graph": cmd_graph, "gauge-check": cmd_gauge_check, "oracle": cmd_oracle, "spin": cmd_spin,
    "suite": cmd_suite,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share exit status 1 with runtime errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML or JSON file with system/sector/scan blocks")
    common.add_argument("--L", type=int, help="ring length")
    common.add_argument("--t", help="hop magnitude: scalar or comma-separated per bond")
    common.add_argument("--U", help="on-site interaction: scalar, per-site list, 'inf' allowed")
    common.add_argument("--v", help="on-site potential: scalar or per-site list")
    common.add_argument("--theta", help="reference bond phases")
    common.add_argument("--nup", dest="n_up", type=int)
    common.add_argument("--ndown", dest="n_down", type=int)
    common.add_argument("--ne", dest="n_e", type=int, help="total electrons (smallest |S^z| sector)")
    common.add_argument("--phi", type=float, help="flux for graph, gauge-check, spin and matrix dumps")
    common.add_argument("--grid", type=int, help="number of flux grid points on [0, 2pi)")
    common.add_argument("--refine-tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--random-couplings", action="store_true",
                        help="draw |t| in [0.5, 2], U in [0, 8], v in [-1, 1] from the seed")
    common.add_argument("--out", help="output file (graph: file stem)")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--dump-basis", metavar="CSV")
    common.add_argument("--dump-matrix", metavar="COO")

    p = _Parser(prog="fluxring", description="Optimal flux of Hubbard rings by exact diagonalization")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="sample E(phi) and refine its extrema")
    sub.add_parser("verify-theorem", parents=[common], help="compare minimizers with the predicted flux")
    r = sub.add_parser("verify-remarks", parents=[common], help="run the remark checks")
    r.add_argument("--select", nargs="*", choices=sorted(REMARKS), help="subset of remarks")
    sub.add_parser("graph", parents=[common], help="hopping graph, cycle fluxes and exports")
    sub.add_parser("gauge-check", parents=[common], help="energy for several gauges of one flux")
    o = sub.add_parser("oracle", parents=[common], help="U=0 exact diagonalization vs filled levels")
    o.add_argument("--table", metavar="CSV", help="write both energies per grid point")
    sub.add_parser("spin", parents=[common], help="total spin of the ground space and E(S)")
    s = sub.add_parser("suite", parents=[common], help="run every acceptance criterion")
    s.add_argument("--select", nargs="*", help="criterion numbers")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        cfg = merge_config(args)
        return HANDLERS[args.command](args, cfg)
    except (ConfigError, ModelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

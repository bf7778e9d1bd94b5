"""File formats: metadata headers, flux-curve CSV, JSON reports and graph exports.

Every file starts with the same metadata (config hash, seed, tolerances,
library version, timestamp). Text formats carry it as ``#`` comment lines
holding JSON, so the payload stays readable by plain CSV tools.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .analysis import CheckResult, Extremum, FluxCurve, _jsonable
from .graphg import GraphG, cycle_report
from .model import Sector

CURVE_COLUMNS = ("phi", "energy", "sector", "method")


def config_hash(config: dict) -> str:
    """Stable short hash of a JSON-compatible configuration."""
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Metadata:
    command: str
    config: dict
    seed: int | None
    tolerances: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc)
                           .isoformat(timespec="seconds"))

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_dict(self) -> dict:
        return _jsonable({
            "command": self.command,
            "config_hash": self.config_hash,
            "config": self.config,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "version": self.version,
            "timestamp": self.timestamp,
        })

    @classmethod
    def from_dict(cls, d: dict) -> "Metadata":
        return cls(d["command"], d.get("config", {}), d.get("seed"), d.get("tolerances", {}),
                   d.get("version", ""), d.get("timestamp", ""))


def _comment_header(meta: Metadata, extra: dict | None = None, prefix: str = "# ") -> str:
    lines = [f"{prefix}metadata: {json.dumps(meta.to_dict(), sort_keys=True)}"]
    for key, value in (extra or {}).items():
        lines.append(f"{prefix}{key}: {json.dumps(_jsonable(value), sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _parse_comment_header(lines: list[str], prefix: str = "# ") -> dict:
    out = {}
    for line in lines:
        if not line.startswith(prefix):
            break
        key, _, value = line[len(prefix):].partition(": ")
        out[key] = json.loads(value)
    return out


# -- flux curves --------------------------------------------------------------------

def _extremum_dict(e: Extremum) -> dict:
    return {"phi": e.phi, "energy": e.energy, "bracket": list(e.bracket),
            "bracket_energies": list(e.bracket_energies)}


def _extremum(d: dict) -> Extremum:
    return Extremum(float(d["phi"]), float(d["energy"]), tuple(d["bracket"]), tuple(d["bracket_energies"]))


def curve_to_csv(curve: FluxCurve, meta: Metadata) -> str:
    s = curve.sector
    extra = {
        "sector": {"L": s.length, "n_up": s.n_up, "n_down": s.n_down,
                   "projected_sites": sorted(s.projected_sites)},
        "minimizers": [_extremum_dict(e) for e in curve.minimizers],
        "maximizers": [_extremum_dict(e) for e in curve.maximizers],
        "local_minima": [_extremum_dict(e) for e in curve.local_minima],
        "period_estimate": curve.period_estimate,
        "constant": curve.constant,
        "refine_tol": curve.refine_tol,
    }
    buf = _io.StringIO()
    buf.write(_comment_header(meta, extra))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    label = s.label()
    for phi, e in zip(curve.grid, curve.energies):
        w.writerow([repr(float(phi)), repr(float(e)), label, curve.method])
    return buf.getvalue()


def write_curve_csv(path, curve: FluxCurve, meta: Metadata) -> None:
    Path(path).write_text(curve_to_csv(curve, meta))


def read_curve_csv(path) -> tuple[FluxCurve, Metadata]:
    """Inverse of :func:`write_curve_csv`."""
    lines = Path(path).read_text().splitlines()
    header = _parse_comment_header(lines)
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    if not rows or tuple(rows[0].keys()) != CURVE_COLUMNS:
        raise ValueError(f"{path}: expected columns {CURVE_COLUMNS}")
    sd = header["sector"]
    sector = Sector(sd["L"], sd["n_up"], sd["n_down"], frozenset(sd["projected_sites"]))
    curve = FluxCurve(
        sector,
        np.array([float(r["phi"]) for r in rows]),
        np.array([float(r["energy"]) for r in rows]),
        minimizers=[_extremum(d) for d in header["minimizers"]],
        maximizers=[_extremum(d) for d in header["maximizers"]],
        local_minima=[_extremum(d) for d in header["local_minima"]],
        period_estimate=float(header["period_estimate"]),
        constant=bool(header["constant"]),
        refine_tol=float(header["refine_tol"]),
        method=rows[0]["method"],
    )
    return curve, Metadata.from_dict(header["metadata"])


# -- reports ------------------------------------------------------------------------

def report_dict(checks: list[CheckResult], meta: Metadata, extra: dict | None = None) -> dict:
    out = {
        "metadata": meta.to_dict(),
        "pass": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    if extra:
        out.update(_jsonable(extra))
    return out


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_report(path, checks: list[CheckResult], meta: Metadata, extra: dict | None = None) -> dict:
    rep = report_dict(checks, meta, extra)
    Path(path).write_text(dumps(rep))
    return rep


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())


# -- graph exports ------------------------------------------------------------------

def write_graph_files(stem, g: GraphG, meta: Metadata, phi: float | None = None) -> dict[str, Path]:
    """``<stem>.dot``, ``<stem>.edges.csv`` and ``<stem>.cycles.json``."""
    stem = Path(stem)
    paths = {
        "dot": stem.with_name(stem.name + ".dot"),
        "edges": stem.with_name(stem.name + ".edges.csv"),
        "cycles": stem.with_name(stem.name + ".cycles.json"),
    }
    paths["dot"].write_text(_comment_header(meta, prefix="// ") + g.to_dot())
    paths["edges"].write_text(_comment_header(meta) + g.edge_csv())
    report = {"metadata": meta.to_dict(), **cycle_report(g, phi)}
    paths["cycles"].write_text(dumps(report))
    return paths


def write_table(path, header: list[str], rows, meta: Metadata) -> None:
    """Generic CSV with the metadata header."""
    buf = _io.StringIO()
    buf.write(_comment_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) and math.isfinite(x) else x
                    for x in r])
    Path(path).write_text(buf.getvalue())

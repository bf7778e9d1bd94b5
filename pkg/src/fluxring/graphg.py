"""The many-body hopping graph: basis states as vertices, nonzero matrix elements as bonds.

A directed edge ``i -> j`` carries the amplitude ``H[j, i]``; its phase is
``arg H[j, i]`` and its displacement is ``+1`` when the moving particle steps
forward around the ring, ``-1`` otherwise. Traversing an edge backwards
negates both. The flux of a closed walk is the sum of its directed phases
(mod 2 pi) and its winding number is the total displacement divided by ``L``.
A cycle with zero winding is contractible on the ring and carries no flux;
the minimal circuits of interest are the shortest ones with nonzero winding.
"""

from __future__ import annotations

import cmath
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .basis import FockBasis, hop_targets
from .hamiltonian import SparseHermitian, build_all_negative, build_hamiltonian
from .model import TWO_PI, FluxAssignment, RingModel, angle_distance, wrap_angle

MAX_GRAPH_DIM = 20000


class GraphTooLarge(ValueError):
    pass


@dataclass
class Cycle:
    vertices: list[int]
    flux: float
    winding: int

    @property
    def length(self) -> int:
        return len(self.vertices)

    def reversed(self) -> "Cycle":
        v = self.vertices
        return Cycle([v[0]] + v[:0:-1], wrap_angle(-self.flux), -self.winding)

    def to_dict(self) -> dict:
        return {"vertices": self.vertices, "length": self.length, "flux": self.flux, "winding": self.winding}


@dataclass
class GraphG:
    basis: FockBasis
    hamiltonian: SparseHermitian
    edges: np.ndarray  # structured: i, j, magnitude, phase, displacement (for i -> j)
    adjacency: list[list[tuple[int, float, int]]]
    parent: np.ndarray
    depth: np.ndarray
    potential: np.ndarray
    shift: np.ndarray
    n_components: int
    cycle_basis: list[Cycle] = field(default_factory=list)
    minimal_cycles: list[Cycle] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def length(self) -> int:
        return self.basis.length

    @property
    def connected(self) -> bool:
        return self.n_components == 1

    @property
    def minimal_length(self) -> int | None:
        return self.minimal_cycles[0].length if self.minimal_cycles else None

    def walk_flux(self, vertices: list[int]) -> tuple[float, int]:
        """Flux and winding of a closed walk given by its vertex sequence."""
        total, disp = 0.0, 0
        for a, b in zip(vertices, vertices[1:] + vertices[:1]):
            for nb, ph, d in self.adjacency[a]:
                if nb == b:
                    total += ph
                    disp += d
                    break
            else:
                raise ValueError(f"{a} and {b} are not adjacent")
        if disp % self.length:
            raise ValueError("walk displacement is not a multiple of L")
        return wrap_angle(total), disp // self.length

    def to_dot(self) -> str:
        L = self.length
        lines = ["graph G {"]
        for i, st in enumerate(self.basis):
            lines.append(f'  {i} [label="{st.occupations(L)}"];')
        for e in self.edges:
            lines.append(f'  {int(e["i"])} -- {int(e["j"])} [label="{e["magnitude"]:.4g}@{e["phase"]:.4f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def edge_csv(self) -> str:
        rows = ["i,j,magnitude,phase"]
        rows += [f'{int(e["i"])},{int(e["j"])},{e["magnitude"]!r},{e["phase"]!r}' for e in self.edges]
        return "\n".join(rows) + "\n"


_EDGE_DTYPE = np.dtype([("i", np.int64), ("j", np.int64), ("magnitude", float),
                        ("phase", float), ("displacement", np.int64)])


def build_graph(model: RingModel, gauge: FluxAssignment | None, basis: FockBasis,
                *, minimal: bool = True, max_dim: int = MAX_GRAPH_DIM) -> GraphG:
    """Build G with a BFS spanning forest, its fundamental cycles and minimal circuits."""
    if basis.dim > max_dim:
        raise GraphTooLarge(f"dim {basis.dim} exceeds the graph cap {max_dim}")
    h = build_hamiltonian(model, gauge, basis)
    L = basis.length
    proj = basis.sector.projection_mask
    adjacency: list[list[tuple[int, float, int]]] = [[] for _ in range(basis.dim)]
    rows = []
    for i, st in enumerate(basis):
        for new, _sign, _spin, _bond, forward in hop_targets(st, L, proj):
            j = basis.rank(new)
            amp = h.offdiag[j, i]
            ph, d = wrap_angle(cmath.phase(amp)), 1 if forward else -1
            adjacency[i].append((j, ph, d))
            if i < j:
                rows.append((i, j, abs(amp), ph, d))
    edges = np.array(rows, dtype=_EDGE_DTYPE)
    parent, depth, pot, shift, ncomp = _spanning_forest(adjacency)
    g = GraphG(basis, h, edges, adjacency, parent, depth, pot, shift, ncomp)
    g.cycle_basis = _fundamental_cycles(g)
    if minimal:
        g.minimal_cycles = _minimal_winding_cycles(g)
    return g


def _spanning_forest(adjacency):
    n = len(adjacency)
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    pot = np.zeros(n)
    shift = np.zeros(n, dtype=np.int64)
    ncomp = 0
    for root in range(n):
        if depth[root] >= 0:
            continue
        ncomp += 1
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, ph, d in adjacency[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    pot[v] = pot[u] + ph
                    shift[v] = shift[u] + d
                    queue.append(v)
    return parent, depth, pot, shift, ncomp


def _tree_path(g: GraphG, u: int, v: int) -> tuple[list[int], list[int]]:
    """Tree paths ``u -> lca`` and ``v -> lca`` (both including the lca)."""
    pu, pv = [u], [v]
    a, b = u, v
    while g.depth[a] > g.depth[b]:
        a = int(g.parent[a]); pu.append(a)
    while g.depth[b] > g.depth[a]:
        b = int(g.parent[b]); pv.append(b)
    while a != b:
        a = int(g.parent[a]); pu.append(a)
        b = int(g.parent[b]); pv.append(b)
    return pu, pv


def _fundamental_cycles(g: GraphG) -> list[Cycle]:
    L = g.length
    cycles = []
    for u in range(g.dim):
        for v, ph, d in g.adjacency[u]:
            if u >= v or g.parent[v] == u or g.parent[u] == v:
                continue
            flux = g.potential[u] + ph - g.potential[v]
            disp = int(g.shift[u] + d - g.shift[v])
            pu, pv = _tree_path(g, u, v)
            # lca -> ... -> u -> v -> ... -> (child of lca)
            verts = pu[::-1] + pv[:-1]
            cycles.append(Cycle(verts, wrap_angle(flux), disp // L))
    return cycles


def _minimal_winding_cycles(g: GraphG) -> list[Cycle]:
    """Shortest closed walks with nonzero winding, found by BFS on the displacement lift."""
    best = math.inf
    found: dict[tuple, Cycle] = {}
    for s in range(g.dim):
        prev = {(s, 0): None}
        frontier = [(s, 0)]
        depth = 0
        hit = None
        while frontier and depth < best and hit is None:
            depth += 1
            nxt = []
            for u, du in frontier:
                for v, _ph, d in g.adjacency[u]:
                    key = (v, du + d)
                    if key in prev:
                        continue
                    prev[key] = (u, du)
                    if v == s and key[1] != 0:
                        hit = key
                        break
                    nxt.append(key)
                if hit:
                    break
            frontier = nxt
        if hit is None:
            continue
        walk = []
        node = prev[hit]
        while node is not None:
            walk.append(node[0])
            node = prev[node]
        walk.reverse()
        if len(walk) < best:
            best = len(walk)
            found = {}
        if len(walk) == best:
            flux, wind = g.walk_flux(walk)
            cyc = Cycle(walk, flux, wind)
            if wind < 0:
                cyc = cyc.reversed()
            found.setdefault(_canonical(cyc.vertices), cyc)
    return list(found.values())


def _canonical(vertices: list[int]) -> tuple:
    k = vertices.index(min(vertices))
    rot = vertices[k:] + vertices[:k]
    rev = [rot[0]] + rot[:0:-1]
    return tuple(min(rot, rev))


def cycle_fluxes(g: GraphG) -> list[tuple[Cycle, float]]:
    return [(c, c.flux) for c in g.cycle_basis]


def psi_value(phi: float, L: int, n_e: int) -> float:
    """Elementary circuit flux ``phi + (N_e/2) pi + (N_e - 1) pi`` mod 2 pi (even ``N_e``)."""
    if n_e % 2:
        raise ValueError("psi is defined for even N_e only")
    return wrap_angle(phi + (n_e // 2) * math.pi + (n_e - 1) * math.pi)


@dataclass
class EquivalenceReport:
    equivalent: bool
    max_entry_error: float | None
    offending_cycle: Cycle | None
    spectra_differ: bool | None
    ground_energy: float
    ground_energy_all_negative: float
    message: str

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["offending_cycle"] = self.offending_cycle.to_dict() if self.offending_cycle else None
        return d


def _cycle_through_edge(g: GraphG, u: int, v: int) -> Cycle:
    pu, pv = _tree_path(g, u, v)
    verts = pu[::-1] + pv[:-1]
    flux, wind = g.walk_flux(verts)
    return Cycle(verts, flux, wind)


def gauge_transform_to_all_negative(g: GraphG) -> tuple[np.ndarray, tuple[int, int] | None]:
    """Diagonal phases ``d`` propagated along the spanning forest.

    Chosen so that ``conj(d_c) H[c, p] d_p = -|H[c, p]|`` on every tree edge.
    Returns ``d`` and the first non-tree edge ``(u, v)`` where the same relation
    fails by more than 1e-10, or None.
    """
    n = g.dim
    d = np.ones(n, dtype=complex)
    order = np.argsort(g.depth, kind="stable")
    for c in order:
        p = g.parent[c]
        if p >= 0:
            for v, ph, _ in g.adjacency[p]:
                if v == c:
                    d[c] = -cmath.exp(1j * ph) * d[p]
                    break
    bad = None
    for u in range(n):
        for v, ph, _ in g.adjacency[u]:
            # amplitude u -> v is H[v, u] = |.| e^{i ph}
            val = (d[v].conjugate() * cmath.exp(1j * ph) * d[u])
            if abs(val + 1.0) > 1e-10:
                bad = (u, v)
                break
        if bad:
            break
    return d, bad


def check_equivalence_to_all_negative(model: RingModel, gauge: FluxAssignment | None,
                                      basis: FockBasis, graph: GraphG | None = None,
                                      tol: float = 1e-12) -> EquivalenceReport:
    """Is ``H`` unitarily equivalent to its all-negative counterpart by a diagonal gauge?"""
    g = graph or build_graph(model, gauge, basis, minimal=False)
    h = g.hamiltonian
    hneg = build_all_negative(h)
    d, bad = gauge_transform_to_all_negative(g)
    e = np.linalg.eigvalsh(h.to_dense())
    en = np.linalg.eigvalsh(hneg.to_dense())
    if bad is None:
        D = np.diag(d)
        transformed = D.conj().T @ h.to_dense() @ D
        err = float(np.max(np.abs(transformed - hneg.to_dense())))
        ok = err <= tol
        return EquivalenceReport(ok, err, None, bool(np.max(np.abs(e - en)) > 1e-9), float(e[0]),
                                 float(en[0]), "equivalent" if ok else f"transform residual {err:.3e}")
    cyc = _cycle_through_edge(g, *bad)
    differ = bool(np.max(np.abs(e - en)) > 1e-9)
    return EquivalenceReport(False, None, cyc, differ, float(e[0]), float(en[0]),
                             f"not equivalent at this flux: cycle of length {cyc.length} has flux "
                             f"{cyc.flux:.10f}, all-negative requires {wrap_angle(cyc.length * math.pi):.10f} "
                             f"(off by {angle_distance(cyc.flux, cyc.length * math.pi):.3e})")


def cycle_report(g: GraphG, phi: float | None = None) -> dict:
    """JSON-ready summary of the cycle structure."""
    n_e = g.basis.sector.n_e
    out = {
        "dim": g.dim,
        "n_edges": int(len(g.edges)),
        "n_components": g.n_components,
        "n_fundamental_cycles": len(g.cycle_basis),
        "fundamental_lengths_even": all(c.length % 2 == 0 for c in g.cycle_basis),
        "minimal_winding_length": g.minimal_length,
        "minimal_cycles": [c.to_dict() for c in g.minimal_cycles],
        "fundamental_cycles": [c.to_dict() for c in g.cycle_basis],
    }
    if phi is not None and n_e % 2 == 0:
        psi = psi_value(phi, g.length, n_e)
        out["psi"] = psi
        out["max_psi_deviation"] = max_psi_deviation(g, psi)
    return out


def max_psi_deviation(g: GraphG, psi: float, cycles: list[Cycle] | None = None) -> float:
    """Largest ``|flux - winding * psi|`` (mod 2 pi) over the given cycles."""
    cycles = g.cycle_basis + g.minimal_cycles if cycles is None else cycles
    return max((angle_distance(c.flux, c.winding * psi) for c in cycles), default=0.0)


def dump_cycle_json(g: GraphG, path, phi: float | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(cycle_report(g, phi), fh, indent=2)


__all__ = ["GraphG", "Cycle", "build_graph", "cycle_fluxes", "psi_value", "check_equivalence_to_all_negative",
           "EquivalenceReport", "gauge_transform_to_all_negative", "cycle_report", "max_psi_deviation",
           "TWO_PI"]

"""Ground-state energy of Hubbard rings as a function of threaded flux."""

from ._version import __version__
from .analysis import (CheckResult, FluxCurve, Prediction, check_gauge_invariance, energy_at,
                       free_fermion_energy, predict_optimal_flux, scan_flux, verify_theorem)
from .basis import FockBasis, FockState, apply_hop, enumerate_basis
from .graphg import GraphG, build_graph, check_equivalence_to_all_negative, cycle_fluxes, psi_value
from .hamiltonian import SparseHermitian, build_all_negative, build_hamiltonian, matrix_element
from .model import (FluxAssignment, RingModel, Sector, hole_particle_map, make_random_gauge,
                    make_single_bond_gauge, make_uniform_gauge)
from .remarks import verify_remarks
from .solver import ground_state, lanczos, spin_resolved_energies, total_spin_of
from .suite import run_full_suite

__all__ = [
    "__version__",
    "RingModel", "FluxAssignment", "Sector", "make_uniform_gauge", "make_single_bond_gauge",
    "make_random_gauge", "hole_particle_map",
    "FockState", "FockBasis", "apply_hop", "enumerate_basis",
    "SparseHermitian", "build_hamiltonian", "build_all_negative", "matrix_element",
    "ground_state", "lanczos", "total_spin_of", "spin_resolved_energies",
    "CheckResult", "FluxCurve", "Prediction", "energy_at", "free_fermion_energy", "scan_flux",
    "predict_optimal_flux", "verify_theorem", "check_gauge_invariance", "verify_remarks",
    "GraphG", "build_graph", "cycle_fluxes", "psi_value", "check_equivalence_to_all_negative",
    "run_full_suite",
]

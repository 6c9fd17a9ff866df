"""Steady states and stationary entanglement of qubit networks with XY
coupling and shared pair dissipation."""

from .darkstate import (
    aleph_state,
    max_concurrence_formula,
    optimal_initial_state,
    predict_p,
    predict_pair,
    verify_dark_conditions,
)
from .dynamics import (
    apply_liouvillian,
    build_hamiltonian,
    build_liouvillian,
    evolve,
    kernel_spectrum,
    liouvillian_matrix,
    steady_state,
)
from .entanglement import concurrence_map, wootters_concurrence
from .hilbert import DensityMatrix, PairState, PureState, build_basis, partial_trace_pair
from .optimizer import conjecture_sweep, maximize_stationary_concurrence
from .polariton import CavityChainParams, effective_parameters, to_network
from .topology import (
    NetworkGraph,
    classify_topology,
    make_named_topology,
    parity_signs,
    resonance_check,
    validate_graph,
)

__version__ = "0.1.0"

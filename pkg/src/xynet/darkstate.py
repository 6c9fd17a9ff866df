"""Closed-form steady-state predictions for bipartite, resonant networks.

The entangled dark state is the alternating-sign W-like superposition
``|aleph> = n**-1/2 sum_k s_k |k>`` with ``s_k`` the bipartition parity.
Starting from any state with at most one excitation, ``p = <aleph|rho|aleph>``
is conserved and every pair of sites ends in
``(1 - 2p/n)|00><00| + (2p/n)|Psi_kj><Psi_kj|``, with concurrence ``2p/n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dynamics import build_hamiltonian
from .hilbert import (
    DensityMatrix,
    ExcitationBasis,
    PairState,
    PureState,
    build_basis,
    jump_operator,
    overlap,
)
from .topology import (
    NetworkGraph,
    Resonance,
    classify_topology,
    parity_signs,
    resonance_check,
)

__all__ = [
    "PreconditionError",
    "DarkConditionsReport",
    "PairPrediction",
    "aleph_state",
    "verify_dark_conditions",
    "predict_p",
    "predict_pair",
    "optimal_initial_state",
    "max_concurrence_formula",
    "prediction_report",
]

DARK_TOL = 1e-10
SUPPORT_TOL = 1e-12


class PreconditionError(ValueError):
    """An analytic prediction was requested outside its domain of validity."""


def _single_excitation(basis: ExcitationBasis, coeffs: dict) -> np.ndarray:
    v = np.zeros(basis.dim, dtype=complex)
    for k, c in coeffs.items():
        bits = [0] * basis.n
        bits[k - 1] = 1
        v[basis.index[tuple(bits)]] = c
    return v


def aleph_state(g: NetworkGraph, basis: ExcitationBasis | None = None) -> PureState:
    """Alternating-sign single-excitation dark state.

    Raises
    ------
    OddCycleError
        On non-bipartite graphs, where no such state exists.
    """
    basis = build_basis(g.n, 1) if basis is None else basis
    if basis.n_max < 1:
        raise ValueError("basis must contain the single-excitation sector")
    signs = parity_signs(g)
    amp = 1.0 / np.sqrt(g.n)
    return PureState(basis, _single_excitation(basis, {k: amp * signs[k] for k in range(1, g.n + 1)}))


@dataclass(frozen=True)
class DarkConditionsReport:
    cond1_residuals: dict
    cond2_residual: float
    eigenvalue: complex
    cond3_gap: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (max(self.cond1_residuals.values(), default=0.0) <= self.tolerance
                and self.cond2_residual <= self.tolerance
                and self.cond3_gap <= self.tolerance)


def verify_dark_conditions(psi: PureState, g: NetworkGraph,
                           tolerance: float = DARK_TOL) -> DarkConditionsReport:
    """Residuals of the three pure-steady-state conditions.

    1. ``L_e |psi> = lambda_e |psi>`` on every edge; nilpotency forces
       ``lambda_e = 0``, so the residual is ``||L_e psi||``.
    2. ``(iH + sum_e gamma_e L_e^+ L_e)|psi> = lambda |psi>`` with ``lambda``
       fitted as the expectation value.
    3. ``Re(lambda) = sum_e gamma_e |lambda_e|^2``.
    """
    basis = psi.basis
    v = psi.amplitudes
    K = 1j * build_hamiltonian(g, basis)
    res1, lam_sq = {}, 0.0
    for e, gam in zip(g.edges, g.gamma):
        L = jump_operator(basis, *e)
        Lv = L @ v
        res1[e] = float(np.linalg.norm(Lv))
        lam_sq += gam * abs(np.vdot(v, Lv)) ** 2
        K = K + gam * L.T @ L
    Kv = K @ v
    lam = complex(np.vdot(v, Kv))
    return DarkConditionsReport(res1, float(np.linalg.norm(Kv - lam * v)), lam,
                                abs(lam.real - lam_sq), tolerance)


def _require_resonant_bipartite(g: NetworkGraph):
    topo = classify_topology(g)
    if not topo.bipartite:
        raise PreconditionError(f"graph is not bipartite (odd cycle {list(topo.witness)})")
    res = resonance_check(g)
    if res.kind is Resonance.OFF_RESONANT:
        raise PreconditionError("onsite energies violate the resonance condition "
                                f"(d_k = {[round(x, 12) for x in res.per_vertex]})")


def predict_p(rho0, g: NetworkGraph) -> float:
    """Conserved dark-state population ``<aleph|rho0|aleph>``.

    Raises
    ------
    PreconditionError
        If ``rho0`` has weight beyond one excitation, the graph is not
        bipartite, or the onsite energies are off resonance.
    """
    rho = _as_density(rho0)
    outside = rho.basis.weights > 1
    if np.abs(rho.matrix[outside]).max(initial=0.0) > SUPPORT_TOL:
        raise PreconditionError("initial state has support beyond one excitation")
    _require_resonant_bipartite(g)
    return overlap(rho, aleph_state(g, rho.basis))


@dataclass(frozen=True)
class PairPrediction:
    p: float
    n: int
    k: int
    j: int
    sign: int
    concurrence: float
    pair_state: PairState


def predict_pair(p: float, g: NetworkGraph, k: int, j: int) -> PairPrediction:
    """Reduced stationary state of sites ``(k, j)`` for dark population ``p``."""
    if not 0.0 <= p <= 1.0 + 1e-12:
        raise ValueError(f"p={p} outside [0, 1]")
    if k == j:
        raise ValueError("pair needs two distinct sites")
    signs = parity_signs(g)
    s = signs[k] * signs[j]
    c = 2.0 * p / g.n
    psi = np.array([0, s, 1, 0]) / np.sqrt(2.0)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0 - c
    m += c * np.outer(psi, psi)
    return PairPrediction(float(p), g.n, k, j, s, c, PairState(m))


def optimal_initial_state(g: NetworkGraph, support, basis: ExcitationBasis | None = None) -> PureState:
    """Equal-weight single excitation over ``support`` with the dark-state
    signs; maximizes ``p`` (= m/n) among states on that support."""
    support = sorted(set(support))
    if not support:
        raise ValueError("support must be non-empty")
    if support[0] < 1 or support[-1] > g.n:
        raise ValueError(f"support {support} outside 1..{g.n}")
    basis = build_basis(g.n, 1) if basis is None else basis
    signs = parity_signs(g)
    amp = 1.0 / np.sqrt(len(support))
    return PureState(basis, _single_excitation(basis, {k: amp * signs[k] for k in support}))


def max_concurrence_formula(n: int, m: int) -> float:
    """Best stationary pair concurrence from one excitation spread over m sites."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    return 2.0 * m / n ** 2


def prediction_report(rho0, g: NetworkGraph) -> dict:
    p = predict_p(rho0, g)
    pairs = []
    for k, j in combinations(range(1, g.n + 1), 2):
        pred = predict_pair(p, g, k, j)
        pairs.append({"k": k, "j": j, "sign": pred.sign, "concurrence": pred.concurrence})
    return {"p": p, "n": g.n, "pairs": pairs}


def _as_density(rho0) -> DensityMatrix:
    return rho0.density_matrix() if isinstance(rho0, PureState) else rho0

"""Numerical search for the best stationary pair concurrence reachable from
pure initial states with at most ``N`` excitations confined to ``m`` sites.

Checks the bound ``C(N, m) <= C(1, m) = 2m/n**2`` by derivative-free local
search (Nelder-Mead) with random restarts. The steady state is obtained by
kernel projection, which is linear in the initial state, so the map
``rho0 -> (reduced pair states of the steady state)`` is precomputed once
per graph and excitation cap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .darkstate import PreconditionError, max_concurrence_formula
from .dynamics import build_liouvillian, kernel_projector
from .entanglement import concurrence_batch
from .hilbert import PureState, build_basis, pair_trace_matrix, state_to_json
from .topology import NetworkGraph, Resonance, classify_topology, resonance_check

__all__ = [
    "ConjectureReport",
    "SteadyPairMap",
    "maximize_stationary_concurrence",
    "conjecture_sweep",
    "summarize",
]

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 20
SIMPLEX_TOL = 1e-8
# edge of the initial simplex around a unit-norm start; the objective is
# scale-invariant, so a 5% relative simplex (scipy's default) crawls
SIMPLEX_STEP = 0.3
HOLD_TOL = 1e-6
SEARCH_SPACE = ("pure states spanned by occupation patterns of Hamming weight <= N "
                "with every excitation inside the support")


@dataclass
class ConjectureReport:
    n: int
    N: int
    m: int
    support: tuple[int, ...]
    best_value: float
    best_state: PureState
    formula_value: float
    conjecture_holds: bool
    restarts: int
    evaluations: int
    converged: bool
    tolerance: float = HOLD_TOL
    search_space: str = field(default=SEARCH_SPACE, repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "m": self.m,
            "support": list(self.support),
            "best_value": self.best_value,
            "formula_value": self.formula_value,
            "conjecture_holds": self.conjecture_holds,
            "restarts": self.restarts,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "search_space": self.search_space,
            "best_state": state_to_json(self.best_state),
        }


class SteadyPairMap:
    """Linear map from an initial density matrix to the stacked reduced pair
    states of its kernel-projected steady state."""

    def __init__(self, g: NetworkGraph, N: int):
        self.graph = g
        self.basis = build_basis(g.n, N)
        spec = build_liouvillian(g, self.basis)
        R, W = kernel_projector(spec)
        d = self.basis.dim
        self.pairs = list(combinations(range(1, g.n + 1), 2))
        T = np.vstack([pair_trace_matrix(self.basis, k, j) for k, j in self.pairs])
        # T acts on row-major ravel; the kernel projector on column stacking
        perm = np.arange(d * d).reshape(d, d).T.ravel()
        self._A = T[:, perm] @ (R @ W)

    def restrict(self, support) -> tuple[np.ndarray, np.ndarray]:
        """Basis indices allowed by ``support`` and the matching columns."""
        inside = set(support)
        idx = np.array([i for i, s in enumerate(self.basis.states)
                        if all(q in inside for q, b in enumerate(s, start=1) if b)])
        d = self.basis.dim
        cols = (idx[:, None] + d * idx[None, :]).T.ravel()
        return idx, self._A[:, cols]


def _objective(A: np.ndarray, D: int, npairs: int):
    def f(x: np.ndarray) -> float:
        psi = x[:D] + 1j * x[D:]
        nrm = np.vdot(psi, psi).real
        if nrm < 1e-24:
            return 0.0
        rho = np.outer(psi, psi.conj()).ravel(order="F") / nrm
        red = (A @ rho).reshape(npairs, 4, 4)
        return float(concurrence_batch(red).max())
    return f


def _check_graph(g: NetworkGraph):
    topo = classify_topology(g)
    if not topo.bipartite:
        raise PreconditionError(f"graph is not bipartite (odd cycle {list(topo.witness)})")
    if resonance_check(g).kind is not Resonance.DEGENERATE:
        raise PreconditionError("conjecture search requires DEGENERATE onsite energies")


def maximize_stationary_concurrence(g: NetworkGraph, N: int, support, budget: int = 5000, *,
                                    restarts: int = DEFAULT_RESTARTS, seed=0,
                                    tol: float = HOLD_TOL,
                                    pair_map: SteadyPairMap | None = None) -> ConjectureReport:
    """Best stationary concurrence (max over pairs) found within ``budget``
    objective evaluations.

    Restarts begin at Haar-random unit vectors and run one after another, each
    until the simplex converges or the remaining budget is spent, so
    ``restarts`` is an upper bound. The incumbent is tracked over every
    evaluation; since the evaluation sequence for a larger budget extends the
    one for a smaller budget, the same seed never reports a smaller value.
    """
    _check_graph(g)
    support = tuple(sorted(set(support)))
    m = len(support)
    if not 1 <= N <= m <= g.n or support[0] < 1 or support[-1] > g.n:
        raise ValueError(f"need 1 <= N <= m <= n and support within 1..{g.n}")
    if budget < 1:
        raise ValueError("evaluation budget must be positive")
    if pair_map is None or pair_map.graph != g or pair_map.basis.n_max != N:
        pair_map = SteadyPairMap(g, N)
    idx, A = pair_map.restrict(support)
    D = idx.size
    f = _objective(A, D, len(pair_map.pairs))

    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((max(1, restarts), 2 * D))
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    step = SIMPLEX_STEP * np.eye(2 * D)

    best = {"value": -1.0, "x": starts[0], "evals": 0}

    def tracked(x):
        best["evals"] += 1
        v = f(x)
        if v > best["value"]:
            best["value"], best["x"] = v, x.copy()
        return -v

    converged = False
    used = 0
    for x0 in starts:
        if best["evals"] >= budget:
            break
        used += 1
        res = minimize(tracked, x0, method="Nelder-Mead",
                       options={"maxfev": budget - best["evals"], "xatol": SIMPLEX_TOL,
                                "fatol": SIMPLEX_TOL, "adaptive": True,
                                "initial_simplex": np.vstack([x0, x0 + step])})
        converged |= bool(res.status == 0)

    x = best["x"]
    psi = np.zeros(pair_map.basis.dim, dtype=complex)
    psi[idx] = x[:D] + 1j * x[D:]
    psi /= np.linalg.norm(psi)
    lead = np.argmax(np.abs(psi))
    psi *= np.exp(-1j * np.angle(psi[lead]))
    formula = max_concurrence_formula(g.n, m)
    value = float(best["value"])
    report = ConjectureReport(g.n, N, m, support, value, PureState(pair_map.basis, psi),
                              formula, value <= formula + tol, used, best["evals"],
                              converged, tol)
    if not report.conjecture_holds:
        logger.warning("bound C(N,m) <= 2m/n^2 violated: n=%d N=%d support=%s best=%.10g "
                       "formula=%.10g witness=%s", g.n, N, support, value, formula,
                       state_to_json(report.best_state))
    return report


def conjecture_sweep(g: NetworkGraph, N_max: int | None = None, budget: int = 5000, *,
                     restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                     all_supports: bool | None = None, tol: float = HOLD_TOL) -> list[ConjectureReport]:
    """Run the search for every ``1 <= N <= m <= n`` (``N <= N_max``).

    Supports are the first ``m`` vertices, plus every ``m``-subset when
    ``n <= 5`` (or when ``all_supports`` is set). Each run is seeded from
    ``(seed, N, support)`` so results do not depend on sweep order.
    """
    _check_graph(g)
    n = g.n
    N_max = n if N_max is None else min(N_max, n)
    if all_supports is None:
        all_supports = n <= 5
    reports = []
    for N in range(1, N_max + 1):
        pm = SteadyPairMap(g, N)
        for m in range(N, n + 1):
            supports = (list(combinations(range(1, n + 1), m)) if all_supports
                        else [tuple(range(1, m + 1))])
            for sup in supports:
                reports.append(maximize_stationary_concurrence(
                    g, N, sup, budget, restarts=restarts, seed=[seed, N, *sup],
                    tol=tol, pair_map=pm))
    return reports


def summarize(reports: list[ConjectureReport]) -> list[dict]:
    """One row per ``(N, m)``: the largest value over the searched supports."""
    groups: dict[tuple[int, int], list[ConjectureReport]] = {}
    for r in reports:
        groups.setdefault((r.N, r.m), []).append(r)
    rows = []
    for (N, m), rs in sorted(groups.items()):
        top = max(rs, key=lambda r: r.best_value)
        rows.append({"n": top.n, "N": N, "m": m, "best_value": top.best_value,
                     "formula_value": top.formula_value,
                     "holds": all(r.conjecture_holds for r in rs)})
    return rows

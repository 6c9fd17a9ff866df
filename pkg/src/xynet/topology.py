"""Network graphs: validation, bipartite classification, parity signs and
the resonance test on the onsite energies.

Vertices are 1-indexed everywhere in the public interface.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

__all__ = [
    "NetworkGraph",
    "ValidationResult",
    "Topology",
    "TopologyClass",
    "ParityLabeling",
    "Resonance",
    "ResonanceReport",
    "OddCycleError",
    "validate_graph",
    "classify_topology",
    "parity_signs",
    "resonance_check",
    "make_named_topology",
    "graph_from_json",
    "graph_to_json",
]

DEFAULT_RESONANCE_TOL = 1e-10


class OddCycleError(ValueError):
    """Raised when a parity labeling is requested on a non-bipartite graph."""

    def __init__(self, witness):
        self.witness = tuple(witness)
        super().__init__(f"graph contains an odd cycle {list(self.witness)}")


def _per_edge(value, m: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * m
    out = tuple(float(v) for v in value)
    if len(out) != m:
        raise ValueError(f"{name}: expected {m} per-edge values, got {len(out)}")
    return out


@dataclass(frozen=True)
class NetworkGraph:
    """Qubit network: undirected edges carrying an XY coupling ``J`` and a
    shared-bath decay rate ``gamma``; vertices carry onsite energies ``omega``.

    ``J`` and ``gamma`` are aligned with ``edges``. Edges are stored as sorted
    pairs ``(k, l)`` with ``k < l``. Construction normalizes but does not
    validate physics; use :func:`validate_graph` for that.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    J: tuple[float, ...]
    gamma: tuple[float, ...]
    omega: tuple[float, ...]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple((min(int(k), int(l)), max(int(k), int(l))) for k, l in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "J", _per_edge(self.J, len(edges), "J"))
        object.__setattr__(self, "gamma", _per_edge(self.gamma, len(edges), "gamma"))
        omega = tuple(float(w) for w in self.omega)
        if len(omega) != self.n:
            raise ValueError(f"omega: expected {self.n} values, got {len(omega)}")
        object.__setattr__(self, "omega", omega)
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for k, l in edges:
            if 1 <= k <= self.n and 1 <= l <= self.n and k != l:
                adj[k].append(l)
                adj[l].append(k)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, n, edges, J=1.0, gamma=1.0, omega="degenerate"):
        """Build a graph; ``omega="degenerate"`` sets each onsite energy to the
        summed coupling of the vertex, a float sets a uniform value."""
        edges = [tuple(e) for e in edges]
        if isinstance(omega, str):
            if omega != "degenerate":
                raise ValueError(f"unknown omega mode {omega!r}")
            Js = _per_edge(J, len(edges), "J")
            w = [0.0] * n
            for (k, l), j in zip(edges, Js):
                w[k - 1] += j
                w[l - 1] += j
            omega = w
        elif np.isscalar(omega):
            omega = [float(omega)] * n
        return cls(n, tuple(edges), J, gamma, tuple(omega))

    def neighbors(self, k: int) -> tuple[int, ...]:
        return self._adj[k]

    def degree(self, k: int) -> int:
        return len(self._adj[k])

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=int)
        for k, l in self.edges:
            A[k - 1, l - 1] = A[l - 1, k - 1] = 1
        return A

    def coupling_matrix(self) -> np.ndarray:
        Jm = np.zeros((self.n, self.n))
        for (k, l), j in zip(self.edges, self.J):
            Jm[k - 1, l - 1] = Jm[l - 1, k - 1] = j
        return Jm

    def relabel(self, perm: Sequence[int]) -> "NetworkGraph":
        """Return the graph with vertex ``k`` renamed to ``perm[k-1]``."""
        edges = tuple((perm[k - 1], perm[l - 1]) for k, l in self.edges)
        omega = [0.0] * self.n
        for k, w in enumerate(self.omega, start=1):
            omega[perm[k - 1] - 1] = w
        return NetworkGraph(self.n, edges, self.J, self.gamma, tuple(omega))


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_graph(g: NetworkGraph) -> ValidationResult:
    """Check the standing assumptions: n >= 2, simple, connected, gamma > 0.

    Violations are returned as data, never raised.
    """
    out = []
    if g.n < 2:
        out.append("fewer than two vertices")
    seen = set()
    for (k, l), gam in zip(g.edges, g.gamma):
        if k == l:
            out.append(f"self-loop at vertex {k}")
        if k < 1 or l > g.n:
            out.append(f"edge ({k},{l}) references a vertex outside 1..{g.n}")
        if (k, l) in seen:
            out.append(f"duplicate edge ({k},{l})")
        seen.add((k, l))
        if not gam > 0:
            out.append(f"nonpositive decay rate {gam} on edge ({k},{l})")
    if g.n >= 1:
        reached = _bfs_order(g, 1)
        if len(reached) != g.n:
            out.append("disconnected")
    return ValidationResult(tuple(out))


def _bfs_order(g: NetworkGraph, root: int) -> list[int]:
    seen = {root}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                order.append(v)
                queue.append(v)
    return order


class Topology(str, Enum):
    BIPARTITE = "BIPARTITE"
    ODD_CYCLE = "ODD_CYCLE"


@dataclass(frozen=True)
class TopologyClass:
    kind: Topology
    witness: tuple[int, ...] | None = None

    @property
    def bipartite(self) -> bool:
        return self.kind is Topology.BIPARTITE


@dataclass(frozen=True)
class ParityLabeling:
    """``signs[k-1]`` is the parity sign of vertex ``k``; vertex 1 is +1."""

    signs: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.signs[k - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)


def _two_color(g: NetworkGraph):
    """BFS two-coloring from vertex 1 (and any further components).

    Returns ``(depth, parent, conflict)`` where ``conflict`` is an edge whose
    endpoints received the same color, or None.
    """
    depth = [-1] * (g.n + 1)
    parent = [0] * (g.n + 1)
    for root in range(1, g.n + 1):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif (depth[v] - depth[u]) % 2 == 0:
                    return depth, parent, (u, v)
    return depth, parent, None


def _odd_cycle(depth, parent, u, v) -> tuple[int, ...]:
    # walk both endpoints up the BFS tree to their lowest common ancestor
    left, right = [u], [v]
    a, b = u, v
    while depth[a] > depth[b]:
        a = parent[a]
        left.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        right.append(b)
    while a != b:
        a, b = parent[a], parent[b]
        left.append(a)
        right.append(b)
    return tuple(left + right[-2::-1])


def classify_topology(g: NetworkGraph) -> TopologyClass:
    """BIPARTITE, or ODD_CYCLE together with an explicit odd cycle."""
    depth, parent, conflict = _two_color(g)
    if conflict is None:
        return TopologyClass(Topology.BIPARTITE)
    return TopologyClass(Topology.ODD_CYCLE, _odd_cycle(depth, parent, *conflict))


def parity_signs(g: NetworkGraph) -> ParityLabeling:
    """Signs ``(-1)**d(1, k)`` from breadth-first distances to vertex 1.

    Raises
    ------
    OddCycleError
        If the graph is not bipartite; no consistent labeling exists.
    """
    depth, parent, conflict = _two_color(g)
    if conflict is not None:
        raise OddCycleError(_odd_cycle(depth, parent, *conflict))
    signs = tuple(1 if d % 2 == 0 else -1 for d in depth[1:])
    for k, l in g.edges:
        if signs[k - 1] != -signs[l - 1]:
            raise AssertionError(f"inconsistent parity on edge ({k},{l})")
    return ParityLabeling(signs)


class Resonance(str, Enum):
    DEGENERATE = "DEGENERATE"
    RESONANT_NONZERO = "RESONANT_NONZERO"
    OFF_RESONANT = "OFF_RESONANT"


@dataclass(frozen=True)
class ResonanceReport:
    per_vertex: tuple[float, ...]
    kind: Resonance
    tolerance: float

    @property
    def detuning(self) -> float:
        """Common value of ``d_k`` (meaningful unless OFF_RESONANT)."""
        return self.per_vertex[0]


def resonance_check(g: NetworkGraph, tolerance: float = DEFAULT_RESONANCE_TOL) -> ResonanceReport:
    """Evaluate ``d_k = omega_k - sum_l J_kl`` and classify the network."""
    d = np.asarray(g.omega) - g.coupling_matrix().sum(axis=1)
    if np.max(np.abs(d)) <= tolerance:
        kind = Resonance.DEGENERATE
    elif np.max(np.abs(d - d[0])) <= tolerance:
        kind = Resonance.RESONANT_NONZERO
    else:
        kind = Resonance.OFF_RESONANT
    return ResonanceReport(tuple(float(x) for x in d), kind, tolerance)


def _named_edges(kind: str, n: int) -> list[tuple[int, int]]:
    if n < 2:
        raise ValueError(f"{kind} needs n >= 2, got {n}")
    if kind == "chain":
        return [(k, k + 1) for k in range(1, n)]
    if kind == "ring":
        if n < 3:
            raise ValueError(f"ring needs n >= 3, got {n}")
        return [(k, k + 1) for k in range(1, n)] + [(1, n)]
    if kind == "star":
        return [(1, k) for k in range(2, n + 1)]
    if kind == "complete":
        return [(k, l) for k in range(1, n + 1) for l in range(k + 1, n + 1)]
    raise ValueError(f"unknown topology kind {kind!r}")


def make_named_topology(kind: str, n: int, J: float = 1.0, gamma: float = 1.0,
                        omega="degenerate") -> NetworkGraph:
    """Chain, ring, star or complete graph with uniform couplings.

    ``omega="degenerate"`` gives ``omega_k = deg(k) * J`` (all ``d_k = 0``);
    a number gives a uniform onsite energy.
    """
    return NetworkGraph.from_edges(n, _named_edges(kind, n), J=J, gamma=gamma, omega=omega)


def graph_from_json(obj: dict) -> NetworkGraph:
    """Parse either an explicit graph ``{"n", "edges", "J", "gamma", "omega"}``
    or a named one ``{"kind", "n", "J", "gamma", "omega"}``."""
    if "kind" in obj:
        omega = obj.get("omega", "degenerate")
        if isinstance(omega, dict):
            omega = _omega_mode(omega)
        return make_named_topology(obj["kind"], int(obj["n"]), float(obj.get("J", 1.0)),
                                   float(obj.get("gamma", 1.0)), omega)
    n = int(obj["n"])
    edges = [tuple(int(v) for v in e) for e in obj["edges"]]
    if any(len(e) != 2 for e in edges):
        raise ValueError("edges must be vertex pairs")
    omega = obj.get("omega", {"mode": "degenerate"})
    if isinstance(omega, dict):
        omega = _omega_mode(omega)
    return NetworkGraph.from_edges(n, edges, J=obj.get("J", 1.0), gamma=obj.get("gamma", 1.0),
                                   omega=omega)


def _omega_mode(obj: dict):
    mode = obj.get("mode")
    if mode == "degenerate":
        return "degenerate"
    if mode == "uniform":
        return float(obj["value"])
    raise ValueError(f"unknown omega mode {mode!r}")


def graph_to_json(g: NetworkGraph) -> dict:
    return {
        "n": g.n,
        "edges": [list(e) for e in g.edges],
        "J": list(g.J),
        "gamma": list(g.gamma),
        "omega": list(g.omega),
    }


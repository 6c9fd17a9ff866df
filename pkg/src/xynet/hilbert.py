"""Excitation-truncated qubit bases, state containers and pair partial traces.

A basis with cap ``n_max`` holds every occupation pattern of ``n`` qubits with
at most ``n_max`` excitations, ordered by weight and then by the sorted tuple
of occupied sites (so ``100 < 010 < 001`` and ``110 < 101 < 011``; site 1 is
the leftmost bit). Because the XY Hamiltonian conserves the excitation number
and every jump operator lowers it, dynamics restricted to such a basis is
exact, not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "ExcitationBasis",
    "PureState",
    "DensityMatrix",
    "PairState",
    "build_basis",
    "lowering_operator",
    "raising_operator",
    "number_operator",
    "jump_operator",
    "partial_trace_pair",
    "pair_trace_matrix",
    "overlap",
    "basis_state",
    "kron_indices",
    "state_from_json",
    "state_to_json",
]

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class ExcitationBasis:
    n: int
    n_max: int
    states: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.n_max <= self.n:
            raise ValueError(f"excitation cap {self.n_max} outside 0..{self.n}")
        states = []
        for w in range(self.n_max + 1):
            for occ in combinations(range(self.n), w):
                bits = [0] * self.n
                for s in occ:
                    bits[s] = 1
                states.append(tuple(bits))
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "index", {s: i for i, s in enumerate(states)})

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def weights(self) -> np.ndarray:
        return np.array([sum(s) for s in self.states])

    def label(self, i: int) -> str:
        return "".join(map(str, self.states[i]))

    def expected_dim(self) -> int:
        return sum(comb(self.n, j) for j in range(self.n_max + 1))


@lru_cache(maxsize=None)
def build_basis(n: int, n_max: int | None = None) -> ExcitationBasis:
    """Basis of ``n`` qubits with at most ``n_max`` excitations (default: all)."""
    return ExcitationBasis(n, n if n_max is None else n_max)


def basis_state(basis: ExcitationBasis, occupied=()) -> np.ndarray:
    """Amplitude vector of the pattern with the given (1-indexed) sites excited."""
    bits = [0] * basis.n
    for k in occupied:
        bits[k - 1] = 1
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index[tuple(bits)]] = 1.0
    return v


def kron_indices(basis: ExcitationBasis) -> np.ndarray:
    """Position of each basis pattern in the 2**n Kronecker ordering
    (site 1 most significant)."""
    return np.array([int("".join(map(str, s)), 2) for s in basis.states])


@lru_cache(maxsize=None)
def _lowering(basis: ExcitationBasis, k: int) -> np.ndarray:
    if not 1 <= k <= basis.n:
        raise ValueError(f"site {k} outside 1..{basis.n}")
    op = np.zeros((basis.dim, basis.dim))
    for i, s in enumerate(basis.states):
        if s[k - 1]:
            t = s[:k - 1] + (0,) + s[k:]
            op[basis.index[t], i] = 1.0
    op.setflags(write=False)
    return op


def lowering_operator(basis: ExcitationBasis, k: int) -> np.ndarray:
    """Matrix of the lowering operator of site ``k`` on ``basis``."""
    return _lowering(basis, k).copy()


def raising_operator(basis: ExcitationBasis, k: int) -> np.ndarray:
    # transpose is exact: a raised state outside the cap has no row to land in
    return _lowering(basis, k).T.copy()


def number_operator(basis: ExcitationBasis) -> np.ndarray:
    """Total excitation number, diagonal in the basis."""
    return np.diag(basis.weights.astype(float))


def jump_operator(basis: ExcitationBasis, k: int, l: int) -> np.ndarray:
    """Collective pair decay ``sigma_k + sigma_l``."""
    if k == l:
        raise ValueError("jump operator needs two distinct sites")
    return _lowering(basis, k) + _lowering(basis, l)


@dataclass
class PureState:
    basis: ExcitationBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got {self.amplitudes.shape}")
        if abs(np.vdot(self.amplitudes, self.amplitudes).real - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")

    @classmethod
    def normalized(cls, basis: ExcitationBasis, vector) -> "PureState":
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, v / norm)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))

    def embed(self, basis: ExcitationBasis) -> "PureState":
        """Same state expressed in a larger (or smaller) cap basis."""
        return PureState(basis, _reindex_vector(self.basis, basis, self.amplitudes))


@dataclass
class DensityMatrix:
    """Density operator on an excitation basis.

    Not validated on construction, since integrator snapshots drift at
    round-off level; call :meth:`validate` to enforce the state invariants.
    """

    basis: ExcitationBasis
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"expected a {self.basis.dim}x{self.basis.dim} matrix")

    def validate(self) -> "DensityMatrix":
        _check_state(self.matrix)
        return self

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def excitation_number(self) -> float:
        return float(np.real(np.diagonal(self.matrix)) @ self.basis.weights)

    def max_weight(self, tol: float = NORM_TOL) -> int:
        """Largest excitation number carrying any weight (rows or columns)."""
        mag = np.abs(self.matrix).max(axis=1)
        w = self.basis.weights[mag > tol]
        return int(w.max()) if w.size else 0

    def embed(self, basis: ExcitationBasis) -> "DensityMatrix":
        idx = _reindex(self.basis, basis)
        out = np.zeros((basis.dim, basis.dim), dtype=complex)
        src = np.array([i for i, j in idx])
        dst = np.array([j for i, j in idx])
        out[np.ix_(dst, dst)] = self.matrix[np.ix_(src, src)]
        return DensityMatrix(basis, out)

    def hermitized(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, 0.5 * (self.matrix + self.matrix.conj().T))


@dataclass
class PairState:
    """Two-qubit state in the ordered basis |00>, |01>, |10>, |11>
    (first label is the first site of the pair)."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError("pair state must be 4x4")

    def validate(self) -> "PairState":
        _check_state(self.matrix)
        return self


def _check_state(m: np.ndarray):
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {np.trace(m).real} != 1")
    if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -POSITIVITY_TOL:
        raise ValueError("matrix has a negative eigenvalue")


def _reindex(src: ExcitationBasis, dst: ExcitationBasis) -> list[tuple[int, int]]:
    if src.n != dst.n:
        raise ValueError("bases describe different qubit counts")
    return [(i, dst.index[s]) for i, s in enumerate(src.states) if s in dst.index]


def _reindex_vector(src, dst, v) -> np.ndarray:
    out = np.zeros(dst.dim, dtype=complex)
    kept = 0.0
    for i, j in _reindex(src, dst):
        out[j] = v[i]
        kept += abs(v[i]) ** 2
    if abs(kept - np.vdot(v, v).real) > NORM_TOL:
        raise ValueError("state has weight outside the target basis")
    return out


@lru_cache(maxsize=None)
def _pair_indices(basis: ExcitationBasis, k: int, j: int):
    """Index triples (s, t, a*4+b) for every matrix element ``rho[s, t]`` that
    contributes to the reduced element ``[a, b]`` of the pair (k, j)."""
    if k == j:
        raise ValueError("pair needs two distinct sites")
    for site in (k, j):
        if not 1 <= site <= basis.n:
            raise ValueError(f"site {site} outside 1..{basis.n}")
    groups: dict[tuple, list[tuple[int, int]]] = {}
    for i, s in enumerate(basis.states):
        rest = tuple(b for q, b in enumerate(s, start=1) if q not in (k, j))
        groups.setdefault(rest, []).append((i, 2 * s[k - 1] + s[j - 1]))
    rows, cols, out = [], [], []
    for members in groups.values():
        for s, a in members:
            for t, b in members:
                rows.append(s)
                cols.append(t)
                out.append(4 * a + b)
    return np.array(rows), np.array(cols), np.array(out)


def partial_trace_pair(rho, k: int, j: int) -> PairState:
    """Reduced state of sites ``k`` and ``j``, computed directly on the
    truncated basis."""
    rows, cols, out = _pair_indices(rho.basis, k, j)
    red = np.zeros(16, dtype=complex)
    np.add.at(red, out, rho.matrix[rows, cols])
    return PairState(red.reshape(4, 4))


def pair_trace_matrix(basis: ExcitationBasis, k: int, j: int) -> np.ndarray:
    """Linear map (16 x d**2) from ``rho.ravel()`` to the row-major reduced pair
    matrix. Used to batch reductions inside the optimizer."""
    rows, cols, out = _pair_indices(basis, k, j)
    T = np.zeros((16, basis.dim * basis.dim))
    np.add.at(T, (out, rows * basis.dim + cols), 1.0)
    return T


def overlap(a, b: PureState):
    """``<b|a>`` for a pure ``a``; the real expectation ``<b|a|b>`` for a
    density matrix ``a``."""
    if a.basis != b.basis:
        raise ValueError("states live on different bases")
    if isinstance(a, DensityMatrix):
        return float(np.vdot(b.amplitudes, a.matrix @ b.amplitudes).real)
    return complex(np.vdot(b.amplitudes, a.amplitudes))


def state_to_json(psi: PureState) -> dict:
    return {
        "basis": {"n": psi.basis.n, "N_max": psi.basis.n_max},
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }


def state_from_json(obj: dict) -> PureState:
    basis = build_basis(int(obj["basis"]["n"]), int(obj["basis"]["N_max"]))
    amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
    return PureState.normalized(basis, amps)

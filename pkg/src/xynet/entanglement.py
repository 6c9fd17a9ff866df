"""Two-qubit concurrence and network concurrence maps."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .hilbert import POSITIVITY_TOL, DensityMatrix, PairState, partial_trace_pair

__all__ = ["ConcurrenceMap", "wootters_concurrence", "concurrence_batch", "concurrence_map"]

_YY = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0]))
# eigenvalues of rho below this fraction of the largest are treated as zero
_RANK_TOL = 1e-13


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    """Concurrence of a stack of 4x4 matrices, shape ``(..., 4, 4)``.

    With ``rho = X X^+`` the usual ``lambda_i`` are the singular values of the
    symmetric matrix ``X^T (Y x Y) X``, the same spectrum as
    ``sqrt(rho) rho~ sqrt(rho)`` without square-rooting its near-zero
    eigenvalues. Eigenvalues of ``rho`` at round-off level are dropped before
    factoring. No validation is done.
    """
    rhos = 0.5 * (rhos + np.conj(np.swapaxes(rhos, -1, -2)))
    w, v = np.linalg.eigh(rhos)
    floor = _RANK_TOL * np.abs(w).max(axis=-1, keepdims=True)
    X = v * np.sqrt(np.where(w > floor, w, 0.0))[..., None, :]
    tau = np.swapaxes(X, -1, -2) @ _YY @ X
    lam = np.linalg.svd(tau, compute_uv=False)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.where(c > 1e-12, c, 0.0)


def wootters_concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)`` of a two-qubit state.

    Raises
    ------
    ValueError
        If ``rho`` has an eigenvalue below ``-1e-10``.
    """
    m = rho.matrix if isinstance(rho, PairState) else np.asarray(rho, dtype=complex)
    if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -POSITIVITY_TOL:
        raise ValueError("not a valid two-qubit state: negative eigenvalue")
    return float(concurrence_batch(m))


@dataclass(frozen=True)
class ConcurrenceMap:
    entries: dict

    def __getitem__(self, pair) -> float:
        k, j = pair
        return self.entries[(min(k, j), max(k, j))]

    def values(self) -> np.ndarray:
        return np.array(list(self.entries.values()))

    @property
    def spread(self) -> float:
        v = self.values()
        return float(v.max() - v.min())

    def rows(self):
        return [(k, j, c) for (k, j), c in sorted(self.entries.items())]


def concurrence_map(rho: DensityMatrix) -> ConcurrenceMap:
    """Concurrence of every pair of sites ``k < j``."""
    pairs = list(combinations(range(1, rho.basis.n + 1), 2))
    stack = np.array([partial_trace_pair(rho, k, j).matrix for k, j in pairs])
    vals = concurrence_batch(stack)
    return ConcurrenceMap({p: float(c) for p, c in zip(pairs, vals)})

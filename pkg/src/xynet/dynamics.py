"""Master-equation generator of the network, its column-stacked matrix form,
RK4 time evolution and steady-state solvers.

Rate convention: the dissipator sums over *ordered* adjacent pairs with
prefactor ``gamma/2``; since ``L_kl = L_lk`` each unordered edge contributes
twice, so here every edge carries one term
``gamma_e * (2 L rho L^+ - L^+L rho - rho L^+L)``. Likewise the hopping
term is ``J_e (s_k^+ s_l + s_l^+ s_k)`` once per edge.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .hilbert import (
    DensityMatrix,
    ExcitationBasis,
    build_basis,
    jump_operator,
    lowering_operator,
)
from .topology import NetworkGraph

__all__ = [
    "LiouvillianSpec",
    "JumpTerm",
    "SuperoperatorSpectrum",
    "NumericalInstabilityError",
    "ConvergenceError",
    "DimensionCapError",
    "build_hamiltonian",
    "build_liouvillian",
    "apply_liouvillian",
    "liouvillian_matrix",
    "vec",
    "unvec",
    "evolve",
    "steady_state",
    "kernel_spectrum",
    "default_dt",
    "minimal_basis",
]

logger = logging.getLogger(__name__)

# cap on the superoperator dimension d**2
MAX_SUPEROP_DIM = 4096
# below this d**2 the RK4 step is applied as one precomputed matrix
_PROPAGATOR_DIM = 1024
KERNEL_RTOL = 1e-9
STEADY_RESIDUAL = 1e-10
TRACE_DRIFT = 1e-6


class NumericalInstabilityError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


class DimensionCapError(ValueError):
    pass


@dataclass(frozen=True)
class JumpTerm:
    edge: tuple[int, int]
    rate: float
    op: np.ndarray


@dataclass(frozen=True, eq=False)
class LiouvillianSpec:
    graph: NetworkGraph
    basis: ExcitationBasis
    hamiltonian: np.ndarray
    jump_terms: tuple[JumpTerm, ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def decay(self) -> np.ndarray:
        """``sum_e gamma_e L_e^+ L_e``."""
        if "decay" not in self._cache:
            d = np.zeros_like(self.hamiltonian)
            for term in self.jump_terms:
                d = d + term.rate * term.op.conj().T @ term.op
            self._cache["decay"] = d
        return self._cache["decay"]

    @property
    def dim(self) -> int:
        return self.basis.dim


def build_hamiltonian(g: NetworkGraph, basis: ExcitationBasis) -> np.ndarray:
    """Onsite energies plus XY hopping on every edge."""
    if basis.n != g.n:
        raise ValueError(f"basis has {basis.n} sites, graph has {g.n}")
    sm = [None] + [lowering_operator(basis, k) for k in range(1, g.n + 1)]
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for k in range(1, g.n + 1):
        H += g.omega[k - 1] * sm[k].T @ sm[k]
    for (k, l), J in zip(g.edges, g.J):
        hop = sm[k].T @ sm[l]
        H += J * (hop + hop.T)
    return H


def build_liouvillian(g: NetworkGraph, basis: ExcitationBasis | None = None) -> LiouvillianSpec:
    """Assemble the generator with one jump term per unordered edge."""
    basis = build_basis(g.n) if basis is None else basis
    H = build_hamiltonian(g, basis)
    terms = tuple(JumpTerm(e, gam, jump_operator(basis, *e).astype(complex))
                  for e, gam in zip(g.edges, g.gamma))
    return LiouvillianSpec(g, basis, H, terms)


def minimal_basis(g: NetworkGraph, rho0: DensityMatrix) -> ExcitationBasis:
    """Smallest excitation cap that contains ``rho0``."""
    return build_basis(g.n, max(rho0.max_weight(), 1))


def _matrix(rho, spec: LiouvillianSpec) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        if rho.basis != spec.basis:
            raise ValueError("state and generator use different bases")
        return rho.matrix
    m = np.asarray(rho)
    if m.shape != (spec.dim, spec.dim):
        raise ValueError(f"expected a {spec.dim}x{spec.dim} operator")
    return m


def apply_liouvillian(spec: LiouvillianSpec, rho) -> np.ndarray:
    """Matrix-free ``-i[H, rho] + D(rho)``."""
    m = _matrix(rho, spec)
    H, K = spec.hamiltonian, spec.decay
    out = -1j * (H @ m - m @ H) - K @ m - m @ K
    for term in spec.jump_terms:
        L = term.op
        out += 2.0 * term.rate * (L @ m @ L.conj().T)
    return out


def vec(m: np.ndarray) -> np.ndarray:
    """Column stacking."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(d, d, order="F")


def liouvillian_matrix(spec: LiouvillianSpec, cap: int = MAX_SUPEROP_DIM) -> np.ndarray:
    """Superoperator ``M`` with ``vec(L(rho)) = M vec(rho)``; uses
    ``vec(A X B) = (B^T kron A) vec(X)``."""
    d = spec.dim
    if d * d > cap:
        raise DimensionCapError(f"superoperator dimension {d * d} exceeds cap {cap}")
    if "M" not in spec._cache:
        I = np.eye(d)
        H, K = spec.hamiltonian, spec.decay
        M = -1j * (np.kron(I, H) - np.kron(H.T, I)) - np.kron(I, K) - np.kron(K.T, I)
        for term in spec.jump_terms:
            L = term.op
            M += 2.0 * term.rate * np.kron(L.conj(), L)
        spec._cache["M"] = M
    return spec._cache["M"]


@dataclass
class SuperoperatorSpectrum:
    eigenvalues: np.ndarray
    kernel_dim: int
    kernel_basis: list
    tol: float

    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[np.abs(self.eigenvalues) > self.tol]


def _kernel_tol(M: np.ndarray, tol: float | None) -> float:
    return KERNEL_RTOL * np.linalg.norm(M) if tol is None else tol


def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = scipy.linalg.svd(M)
    return vh[s <= tol].conj().T


def kernel_spectrum(spec: LiouvillianSpec, tol: float | None = None) -> SuperoperatorSpectrum:
    """Full eigendecomposition of the superoperator; the kernel is counted
    by absolute-value thresholding ``|lambda| <= tol``."""
    M = liouvillian_matrix(spec)
    tol = _kernel_tol(M, tol)
    try:
        ev = scipy.linalg.eigvals(M)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalInstabilityError(f"eigensolver failed: {exc}") from exc
    kdim = int(np.sum(np.abs(ev) <= tol))
    K = _null_space(M, tol)
    if K.shape[1] != kdim:
        warnings.warn(f"kernel eigenvalue count {kdim} differs from nullity {K.shape[1]};"
                      " the generator may not be diagonalizable on its kernel",
                      RuntimeWarning, stacklevel=2)
    order = np.lexsort((ev.imag, -ev.real))
    return SuperoperatorSpectrum(ev[order], kdim, [unvec(K[:, i]) for i in range(K.shape[1])], tol)


def kernel_projector(spec: LiouvillianSpec, tol: float | None = None):
    """Right kernel basis ``R`` and dual left functionals ``W`` with
    ``W R = 1``; ``R W`` projects onto the steady set along the decaying
    modes."""
    key = ("projector", tol)
    if key not in spec._cache:
        M = liouvillian_matrix(spec)
        t = _kernel_tol(M, tol)
        R = _null_space(M, t)
        Lk = _null_space(M.conj().T, t)
        if R.shape[1] != Lk.shape[1] or R.shape[1] == 0:
            raise NumericalInstabilityError(
                f"left/right kernel dimensions differ ({Lk.shape[1]} vs {R.shape[1]})")
        G = Lk.conj().T @ R
        if np.linalg.cond(G) > 1e8:
            warnings.warn("ill-conditioned kernel overlap; the generator may not be "
                          "diagonalizable on its kernel", RuntimeWarning, stacklevel=2)
        W = np.linalg.solve(G, Lk.conj().T)
        spec._cache[key] = (R, W)
    return spec._cache[key]


def spectral_radius_estimate(spec: LiouvillianSpec) -> float:
    d = spec.dim
    if d * d <= _PROPAGATOR_DIM:
        return float(np.abs(scipy.linalg.eigvals(liouvillian_matrix(spec))).max())
    # upper bound ||[H,.]|| + ||D|| with ||L_e|| <= 2
    h = np.abs(np.linalg.eigvalsh(spec.hamiltonian)).max()
    return float(2 * h + 4 * sum(4 * t.rate for t in spec.jump_terms))


def default_dt(spec: LiouvillianSpec) -> float:
    g = spec.graph
    scale = max(max(g.gamma), max(abs(j) for j in g.J), max(abs(w) for w in g.omega))
    return min(0.01 / scale, 0.1 / spectral_radius_estimate(spec))


class _RK4:
    """Fixed-step classical RK4 for the linear ODE ``d rho/dt = L(rho)``."""

    def __init__(self, spec: LiouvillianSpec, dt: float):
        self.spec = spec
        self.dt = dt
        self.S = None
        if spec.dim ** 2 <= _PROPAGATOR_DIM:
            hM = dt * liouvillian_matrix(spec)
            # exact RK4 update for a linear autonomous system
            S = np.eye(hM.shape[0], dtype=complex)
            term = S.copy()
            for k in range(1, 5):
                term = term @ hM / k
                S = S + term
            self.S = S

    def step(self, m: np.ndarray, nsteps: int = 1) -> np.ndarray:
        if self.S is not None:
            v = vec(m)
            for _ in range(nsteps):
                v = self.S @ v
            return unvec(v)
        f = lambda x: apply_liouvillian(self.spec, x)  # noqa: E731
        h = self.dt
        for _ in range(nsteps):
            k1 = f(m)
            k2 = f(m + 0.5 * h * k1)
            k3 = f(m + 0.5 * h * k2)
            k4 = f(m + h * k3)
            m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return m

    def power(self, nsteps: int) -> np.ndarray | None:
        if self.S is None:
            return None
        return np.linalg.matrix_power(self.S, nsteps)


def _check_dt(spec: LiouvillianSpec, dt: float | None) -> float:
    if dt is None:
        return default_dt(spec)
    if not dt > 0:
        raise ValueError("dt must be positive")
    limit = 0.1 / spectral_radius_estimate(spec)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability limit {limit:.3g}")
    return dt


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def evolve(spec: LiouvillianSpec, rho0: DensityMatrix, t_final: float,
           dt: float | None = None, stride: int = 1) -> list[tuple[float, DensityMatrix]]:
    """Integrate the master equation with fixed-step RK4.

    Every ``stride``-th step is recorded (the final time always is). Each
    snapshot is re-Hermitized and its trace compared with the initial one.

    Raises
    ------
    NumericalInstabilityError
        If the trace drifts by more than 1e-6.
    """
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    dt = _check_dt(spec, dt)
    nsteps = int(np.ceil(t_final / dt - 1e-9))
    dt = t_final / nsteps
    rk = _RK4(spec, dt)
    m = _matrix(rho0, spec).copy()
    tr0 = np.trace(m).real
    traj = [(0.0, DensityMatrix(spec.basis, m))]
    done = 0
    while done < nsteps:
        chunk = min(stride, nsteps - done)
        m = _hermitize(rk.step(m, chunk))
        done += chunk
        drift = abs(np.trace(m).real - tr0)
        if not drift <= TRACE_DRIFT:
            raise NumericalInstabilityError(
                f"trace drift {drift:.3g} at t={done * dt:.6g} (dt={dt:.3g})")
        traj.append((done * dt, DensityMatrix(spec.basis, m)))
    return traj


def steady_state(spec: LiouvillianSpec, rho0: DensityMatrix | None = None,
                 method: str = "kernel_projection", *, tol: float | None = None,
                 dt: float | None = None, t_cap: float | None = None,
                 residual: float = STEADY_RESIDUAL):
    """Stationary state reached from ``rho0``.

    ``kernel_projection`` projects ``vec(rho0)`` onto the kernel along the
    decaying eigenmodes; ``long_time`` integrates with RK4 until
    ``||L(rho)||_F <= residual``; ``null_space`` ignores ``rho0`` and returns
    an orthonormal basis (list of matrices) of the kernel.
    """
    if method == "null_space":
        return kernel_spectrum(spec, tol).kernel_basis
    if rho0 is None:
        raise ValueError(f"method {method!r} needs an initial state")
    m0 = _matrix(rho0, spec)
    if method == "kernel_projection":
        R, W = kernel_projector(spec, tol)
        m = _hermitize(unvec(R @ (W @ vec(m0))))
    elif method == "long_time":
        m = _long_time(spec, m0, dt, t_cap, residual)
    else:
        raise ValueError(f"unknown steady-state method {method!r}")
    tr = np.trace(m).real
    if abs(tr) > 0:
        m = m * (np.trace(m0).real / tr)
    return DensityMatrix(spec.basis, m)


def _long_time(spec, m0, dt, t_cap, residual) -> np.ndarray:
    dt = _check_dt(spec, dt)
    if t_cap is None:
        t_cap = 1e5 / min(spec.graph.gamma)
    rk = _RK4(spec, dt)
    m = m0.copy()
    tr0 = np.trace(m).real
    t = 0.0
    chunk = 16
    while True:
        if np.linalg.norm(apply_liouvillian(spec, m)) <= residual:
            return m
        if t > t_cap:
            raise ConvergenceError(f"no stationary state within t={t_cap:g}")
        P = rk.power(chunk)
        m = _hermitize(unvec(P @ vec(m)) if P is not None else rk.step(m, chunk))
        t += chunk * dt
        if abs(np.trace(m).real - tr0) > TRACE_DRIFT:
            raise NumericalInstabilityError(f"trace drift at t={t:.6g}")
        if P is not None:
            chunk = min(chunk * 2, 1 << 20)

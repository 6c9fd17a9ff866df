import numpy as np
import pytest

from xynet.hilbert import DensityMatrix, PureState, build_basis, kron_indices

SM = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0> in the (|0>, |1>) basis


def kron_lowering(n, k):
    """Oracle: 1 x ... x sigma^- (site k) x ... x 1 in the 2**n Kronecker order."""
    op = np.eye(1)
    for q in range(1, n + 1):
        op = np.kron(op, SM if q == k else np.eye(2))
    return op


def oracle_generator(g):
    """Column-stacked generator in the 2**n Kronecker space, written with the
    ordered-pair dissipator sum_{k != l} A_kl (gamma/2)(2 L rho L^+ - {L^+L, rho})."""
    n = g.n
    sm = {k: kron_lowering(n, k) for k in range(1, n + 1)}
    H = sum(w * sm[k].T @ sm[k] for k, w in zip(range(1, n + 1), g.omega))
    rate = {}
    for (k, l), J, gam in zip(g.edges, g.J, g.gamma):
        H = H + J * (sm[k].T @ sm[l] + sm[l].T @ sm[k])
        rate[(k, l)] = rate[(l, k)] = gam
    I = np.eye(2 ** n)
    M = -1j * (np.kron(I, H) - np.kron(H.T, I))
    for (k, l), gam in rate.items():
        L = sm[k] + sm[l]
        LdL = L.T @ L
        M = M + 0.5 * gam * (2 * np.kron(L.conj(), L) - np.kron(I, LdL) - np.kron(LdL.T, I))
    return M


def embed_full(rho: DensityMatrix) -> np.ndarray:
    """Sector density matrix as a 2**n x 2**n matrix in Kronecker order."""
    n = rho.basis.n
    idx = kron_indices(rho.basis)
    full = np.zeros((2 ** n, 2 ** n), dtype=complex)
    full[np.ix_(idx, idx)] = rho.matrix
    return full


def ptrace_full(full: np.ndarray, n: int, k: int, j: int) -> np.ndarray:
    """Oracle partial trace by tensor contraction, keeping sites k, j in that order."""
    t = full.reshape([2] * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    ins = list(letters[:n])
    outs = list(letters[n:2 * n])
    for q in range(n):
        if q not in (k - 1, j - 1):
            outs[q] = ins[q]
    spec = "".join(ins) + "".join(outs) + "->" + ins[k - 1] + ins[j - 1] + outs[k - 1] + outs[j - 1]
    return np.einsum(spec, t).reshape(4, 4)


def random_pure(basis, rng, weights=None) -> PureState:
    v = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    if weights is not None:
        v[~np.isin(basis.weights, weights)] = 0
    return PureState.normalized(basis, v)


def random_density(basis, rng, rank=3) -> DensityMatrix:
    X = rng.standard_normal((basis.dim, rank)) + 1j * rng.standard_normal((basis.dim, rank))
    m = X @ X.conj().T
    return DensityMatrix(basis, m / np.trace(m).real)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def basis_full():
    return lambda n: build_basis(n, n)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)

import warnings

import networkx as nx
import numpy as np
import pytest
import scipy.linalg

from conftest import embed_full, oracle_generator, ptrace_full, random_density, random_pure, trace_distance
from xynet.darkstate import aleph_state
from xynet.dynamics import (
    ConvergenceError,
    DimensionCapError,
    apply_liouvillian,
    build_hamiltonian,
    build_liouvillian,
    evolve,
    kernel_spectrum,
    liouvillian_matrix,
    minimal_basis,
    steady_state,
    unvec,
    vec,
)
from xynet.hilbert import (
    DensityMatrix,
    PureState,
    basis_state,
    build_basis,
    kron_indices,
    number_operator,
    partial_trace_pair,
)
from xynet.topology import NetworkGraph, make_named_topology


def random_graph(n, rng, connected=True):
    while True:
        G = nx.gnp_random_graph(n, 0.6, seed=int(rng.integers(1 << 30)))
        if nx.is_connected(G) or not connected:
            break
    edges = [(a + 1, b + 1) for a, b in G.edges()]
    return NetworkGraph.from_edges(n, edges, J=list(rng.uniform(0.5, 1.5, len(edges))),
                                   gamma=list(rng.uniform(0.5, 1.5, len(edges))),
                                   omega=list(rng.uniform(-1, 2, n)))


def test_hamiltonian_examples():
    g = NetworkGraph.from_edges(2, [(1, 2)], omega=[1.0, 1.0])
    H = build_hamiltonian(g, build_basis(2, 1))
    np.testing.assert_array_equal(H, [[0, 0, 0], [0, 1, 1], [0, 1, 1]])
    chain = make_named_topology("chain", 3)
    b = build_basis(3, 3)
    H = build_hamiltonian(chain, b)
    np.testing.assert_array_equal(H @ basis_state(b), 0)
    np.testing.assert_allclose(H @ aleph_state(chain, b).amplitudes, 0, atol=1e-15)


@pytest.mark.parametrize("seed", range(4))
def test_hamiltonian_conserves_weight(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(4, rng)
    b = build_basis(4, 4)
    H = build_hamiltonian(g, b)
    N = number_operator(b)
    assert np.abs(H @ N - N @ H).max() < 1e-12
    np.testing.assert_allclose(H, H.conj().T)


def test_one_jump_term_per_edge():
    g = make_named_topology("complete", 4)
    spec = build_liouvillian(g)
    assert sorted(t.edge for t in spec.jump_terms) == list(g.edges)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("seed", range(3))
def test_generator_matches_kronecker_oracle(n, seed):
    g = random_graph(n, np.random.default_rng(seed))
    spec = build_liouvillian(g, build_basis(n, n))
    idx = kron_indices(spec.basis)
    # permute the sector basis into Kronecker order
    P = np.zeros((2 ** n, 2 ** n))
    P[idx, np.arange(2 ** n)] = 1
    M = liouvillian_matrix(spec)
    np.testing.assert_allclose(np.kron(P, P) @ M @ np.kron(P, P).T, oracle_generator(g), atol=1e-12)


def test_liouvillian_examples():
    g = make_named_topology("chain", 2)
    spec = build_liouvillian(g)
    aleph = aleph_state(g, spec.basis).density_matrix()
    np.testing.assert_allclose(apply_liouvillian(spec, aleph), 0, atol=1e-15)
    vac = PureState(spec.basis, basis_state(spec.basis)).density_matrix()
    np.testing.assert_array_equal(apply_liouvillian(spec, vac), 0)
    both = PureState(spec.basis, basis_state(spec.basis, [1, 2])).density_matrix()
    assert abs(np.trace(apply_liouvillian(spec, both))) < 1e-15
    M = liouvillian_matrix(spec)
    assert M.shape == (16, 16)
    np.testing.assert_array_equal(M @ vec(vac.matrix), 0)


def test_liouvillian_basis_mismatch():
    spec = build_liouvillian(make_named_topology("chain", 3))
    with pytest.raises(ValueError):
        apply_liouvillian(spec, DensityMatrix(build_basis(3, 1), np.eye(4) / 4))


def test_liouvillian_trace_and_hermiticity(rng):
    g = random_graph(4, rng)
    spec = build_liouvillian(g)
    for _ in range(5):
        out = apply_liouvillian(spec, random_density(spec.basis, rng))
        assert abs(np.trace(out)) < 1e-12
        np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


def test_aleph_population_rate_zero_on_single_excitation(rng):
    for kind, n in [("chain", 4), ("ring", 4), ("star", 5)]:
        g = make_named_topology(kind, n)
        spec = build_liouvillian(g, build_basis(n, 1))
        a = aleph_state(g, spec.basis).amplitudes
        for _ in range(5):
            out = apply_liouvillian(spec, random_density(spec.basis, rng))
            assert abs(np.vdot(a, out @ a)) < 1e-13


def test_dimension_cap():
    spec = build_liouvillian(make_named_topology("chain", 7))
    with pytest.raises(DimensionCapError):
        liouvillian_matrix(spec)


@pytest.mark.parametrize("n,cap", [(3, 3), (4, 4), (4, 2), (5, 1)])
def test_matrix_free_equals_matrix(n, cap, rng):
    g = random_graph(n, rng)
    spec = build_liouvillian(g, build_basis(n, cap))
    M = liouvillian_matrix(spec)
    for _ in range(20):
        X = rng.standard_normal((spec.dim,) * 2) + 1j * rng.standard_normal((spec.dim,) * 2)
        np.testing.assert_allclose(vec(apply_liouvillian(spec, X)), M @ vec(X), atol=1e-12, rtol=0)
        np.testing.assert_array_equal(unvec(vec(X)), X)


def test_kernel_spectrum_examples():
    deg = kernel_spectrum(build_liouvillian(make_named_topology("chain", 2)))
    assert deg.kernel_dim == 4
    assert len(deg.kernel_basis) == 4
    g = NetworkGraph.from_edges(3, [(1, 2), (2, 3)], omega=[2.0, 3.0, 2.0])
    res = kernel_spectrum(build_liouvillian(g))
    assert res.kernel_dim == 2
    for target in (1j, -1j):
        assert np.abs(res.eigenvalues - target).min() < 1e-9
    tri = kernel_spectrum(build_liouvillian(make_named_topology("ring", 3)))
    assert tri.kernel_dim == 1
    for s in (deg, res, tri):
        assert s.eigenvalues.real.max() <= 1e-9
        assert np.all(np.abs(s.nonzero()) > s.tol)


def test_kernel_basis_spans_steady_set():
    g = make_named_topology("ring", 4)
    spec = build_liouvillian(g)
    K = steady_state(spec, method="null_space")
    M = liouvillian_matrix(spec)
    G = np.array([[np.vdot(vec(a), vec(b)) for b in K] for a in K])
    np.testing.assert_allclose(G, np.eye(len(K)), atol=1e-12)
    for k in K:
        assert np.linalg.norm(M @ vec(k)) < 1e-10


def test_evolve_aleph_constant():
    g = make_named_topology("chain", 4)
    spec = build_liouvillian(g)
    rho0 = aleph_state(g, spec.basis).density_matrix()
    for _, rho in evolve(spec, rho0, 20.0, stride=100):
        assert np.abs(rho.matrix - rho0.matrix).max() < 1e-8


def test_evolve_vacuum_constant():
    spec = build_liouvillian(make_named_topology("ring", 4))
    rho0 = PureState(spec.basis, basis_state(spec.basis)).density_matrix()
    for _, rho in evolve(spec, rho0, 5.0, stride=50):
        np.testing.assert_array_equal(rho.matrix, rho0.matrix)


def test_evolve_single_site_keeps_half_overlap():
    g = make_named_topology("chain", 2)
    spec = build_liouvillian(g)
    rho0 = PureState(spec.basis, basis_state(spec.basis, [1])).density_matrix()
    a = aleph_state(g, spec.basis).amplitudes
    for _, rho in evolve(spec, rho0, 20.0, stride=10):
        assert abs(np.vdot(a, rho.matrix @ a).real - 0.5) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_evolve_matches_exponential_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(3, rng)
    spec = build_liouvillian(g, build_basis(3, 3))
    rho0 = random_density(spec.basis, rng)
    # RK4 global error scales as dt**4; a fine step isolates the model check
    traj = evolve(spec, rho0, 2.0, dt=0.002, stride=100)
    M = oracle_generator(g)
    v0 = vec(embed_full(rho0))
    for t, rho in traj:
        exact = unvec(scipy.linalg.expm(M * t) @ v0)
        assert trace_distance(embed_full(rho), exact) < 1e-8


def test_evolve_invariants(rng):
    g = random_graph(4, rng)
    spec = build_liouvillian(g)
    rho0 = random_pure(spec.basis, rng).density_matrix()
    traj = evolve(spec, rho0, 3.0, stride=1)
    nums = [rho.excitation_number() for _, rho in traj]
    for _, rho in traj:
        assert abs(rho.trace - 1) < 1e-8
        assert np.linalg.norm(rho.matrix - rho.matrix.conj().T) <= 1e-10
    assert np.all(np.diff(nums) <= 1e-8)
    assert traj[-1][0] == pytest.approx(3.0)


def test_evolve_rejects_bad_steps():
    spec = build_liouvillian(make_named_topology("chain", 2))
    rho0 = DensityMatrix(spec.basis, np.eye(4) / 4)
    with pytest.raises(ValueError):
        evolve(spec, rho0, 1.0, dt=0.5)
    with pytest.raises(ValueError):
        evolve(spec, rho0, -1.0)
    with pytest.raises(ValueError):
        evolve(spec, rho0, 1.0, dt=0.0)


@pytest.mark.parametrize("kind,n", [("chain", 3), ("ring", 4), ("star", 4)])
def test_sector_consistency(kind, n, rng):
    g = make_named_topology(kind, n, gamma=0.8)
    full = build_liouvillian(g, build_basis(n, n))
    small_basis = build_basis(n, 2)
    psi = random_pure(small_basis, rng)
    rho0 = psi.density_matrix()
    assert minimal_basis(g, rho0) == small_basis
    small = build_liouvillian(g, small_basis)
    a = evolve(small, rho0, 2.0, stride=50)
    b = evolve(full, rho0.embed(full.basis), 2.0, stride=50)
    for (_, x), (_, y) in zip(a, b):
        for k, j in [(1, 2), (1, n), (2, n)]:
            np.testing.assert_allclose(partial_trace_pair(x, k, j).matrix,
                                       partial_trace_pair(y, k, j).matrix, atol=1e-10)


def test_steady_state_two_site_analytic():
    g = make_named_topology("chain", 2)
    spec = build_liouvillian(g)
    rho0 = PureState(spec.basis, basis_state(spec.basis, [1])).density_matrix()
    a = aleph_state(g, spec.basis).amplitudes
    vac = basis_state(spec.basis)
    expected = 0.5 * np.outer(vac, vac) + 0.5 * np.outer(a, a.conj())
    for method in ("kernel_projection", "long_time"):
        rho = steady_state(spec, rho0, method)
        assert trace_distance(rho.matrix, expected) < 1e-9


def test_steady_state_aleph_returns_itself():
    g = make_named_topology("ring", 4)
    spec = build_liouvillian(g)
    rho0 = aleph_state(g, spec.basis).density_matrix()
    assert trace_distance(steady_state(spec, rho0).matrix, rho0.matrix) < 1e-10


def test_steady_state_triangle_vacuum(rng):
    g = make_named_topology("ring", 3)
    spec = build_liouvillian(g, build_basis(3, 1))
    vac = np.zeros((4, 4))
    vac[0, 0] = 1
    for _ in range(3):
        rho0 = random_pure(spec.basis, rng).density_matrix()
        assert trace_distance(steady_state(spec, rho0).matrix, vac) < 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_steady_methods_agree_with_exponential_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(3, rng)
    spec = build_liouvillian(g, build_basis(3, 3))
    rho0 = random_density(spec.basis, rng)
    a = steady_state(spec, rho0, "kernel_projection")
    b = steady_state(spec, rho0, "long_time")
    assert trace_distance(a.matrix, b.matrix) < 1e-6
    exact = unvec(scipy.linalg.expm(oracle_generator(g) * 400.0) @ vec(embed_full(rho0)))
    assert trace_distance(embed_full(a), exact) < 1e-8


def test_long_time_gives_up_at_cap():
    g = make_named_topology("chain", 3, gamma=1e-3)
    spec = build_liouvillian(g, build_basis(3, 1))
    rho0 = PureState(spec.basis, basis_state(spec.basis, [2])).density_matrix()
    with pytest.raises(ConvergenceError):
        steady_state(spec, rho0, "long_time", t_cap=1.0)


def test_steady_state_unknown_method():
    spec = build_liouvillian(make_named_topology("chain", 2))
    with pytest.raises(ValueError):
        steady_state(spec, DensityMatrix(spec.basis, np.eye(4) / 4), "magic")


def test_spectrum_left_half_plane_random_graphs():
    rng = np.random.default_rng(7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for n in (2, 3, 4):
            for _ in range(3):
                s = kernel_spectrum(build_liouvillian(random_graph(n, rng)))
                assert s.eigenvalues.real.max() <= 1e-9
                assert s.kernel_dim >= 1


def test_pair_trace_via_oracle_after_evolution(rng):
    # the reduced states reported after a step agree with the tensor-contraction oracle
    g = make_named_topology("chain", 3)
    spec = build_liouvillian(g)
    rho = evolve(spec, random_density(spec.basis, rng), 0.5)[-1][1]
    np.testing.assert_allclose(partial_trace_pair(rho, 1, 3).matrix,
                               ptrace_full(embed_full(rho), 3, 1, 3), atol=1e-13)

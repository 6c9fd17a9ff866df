"""Stationary entanglement is fixed by one number.

Start a resonant bipartite network in any state with at most one excitation.
The long-time state keeps exactly the population ``p`` it had on the dark
state, and every pair of qubits ends up with the same concurrence ``2p/n``.
Here we check that on random initial states of a 5-site chain and a 4-ring,
then compare the best achievable value with ``2m/n^2`` for excitations spread
over ``m`` sites.
"""

import numpy as np

from xynet.darkstate import max_concurrence_formula, optimal_initial_state, predict_p
from xynet.dynamics import build_liouvillian, steady_state
from xynet.entanglement import concurrence_map
from xynet.hilbert import PureState, build_basis
from xynet.topology import make_named_topology

rng = np.random.default_rng(7)

# %% random single-excitation states
for g in (make_named_topology("chain", 5), make_named_topology("ring", 4)):
    basis = build_basis(g.n, 1)
    spec = build_liouvillian(g, basis)
    print(f"\n{g.n} sites, edges {list(g.edges)}")
    print("     p      2p/n    min C     max C")
    for _ in range(5):
        v = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
        rho0 = PureState.normalized(basis, v).density_matrix()
        p = predict_p(rho0, g)
        cm = concurrence_map(steady_state(spec, rho0))
        print(f"  {p:.4f}  {2 * p / g.n:.4f}  {cm.values().min():.4f}  {cm.values().max():.4f}")

# %% spreading one excitation over m sites
g = make_named_topology("chain", 5)
spec = build_liouvillian(g, build_basis(5, 1))
print("\n m   C from the optimal state   2m/n^2")
for m in range(1, 6):
    rho0 = optimal_initial_state(g, range(1, m + 1)).density_matrix()
    c = concurrence_map(steady_state(spec, rho0)).values().max()
    print(f" {m}   {c:.10f}               {max_concurrence_formula(5, m):.10f}")

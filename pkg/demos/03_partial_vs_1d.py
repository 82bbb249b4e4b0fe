"""Measuring only the hot side: the 2D model still isolates, the 1D model does not.

The 2D discretization keeps the spatial coupling as a second shift, which
leaves room between the two fault directions. The semi-discretized 1D model
with the same sensors collapses them.
"""

from fdi2d import invariants as inv
from fdi2d import subspace as ss
from fdi2d import synthesis as sy
from fdi2d.pde import heat_exchanger, ode1d_model

m = heat_exchanger("partial")
S = inv.min_unobservability(m, m.fault_subspace(1))
print(f"2D: dim S* = {S.dim}, L1 inside S*: {ss.contains(S, m.fault_subspace(0))}")
print("2D isolable:", sy.isolability(m).isolable)

for N in (3, 5, 8):
    m1 = ode1d_model(N)
    f1, f2 = m1.fault_index(f"f1_{N}"), m1.fault_index(f"f2_{N}")
    W = inv.min_conditioned_invariant(m1, m1.fault_subspace(f2))
    both = ss.contains(W, m1.faults_subspace([f1, f2]))
    count = sum(sy.isolability(m1).isolable.values())
    print(f"1D, {N} nodes: W2* at outlet holds both faults: {both}; "
          f"isolable faults {count} of {m1.p}")

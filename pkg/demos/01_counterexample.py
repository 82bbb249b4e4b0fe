"""Isolable faults on a 4-state FMII system whose PBH matrix is not zero prime.

Both faults pass the geometric test, yet the polynomial rank condition
drops rank at z1 = 2. The geometric test is the one that matches the
residuals observed in simulation.
"""

import numpy as np

from fdi2d import invariants as inv
from fdi2d import polymat as pm
from fdi2d import sim
from fdi2d import synthesis as sy
from fdi2d import systems

np.set_printoptions(precision=4, suppress=True)

m = systems.counterexample()
print(f"n = {m.n}, q = {m.q}, faults = {[f.name for f in m.faults]}")

# geometric side
for v in sy.isolability(m).verdicts:
    print(f"{v.name}: isolable = {v.isolable}, dims {v.dims}")
S = inv.min_unobservability(m, m.fault_subspace(1))
print("S* from L2:", S.basis.ravel())

# polynomial side
P = pm.pbh(m)
v = pm.zero_prime_check(P)
print("PBH zero prime:", v.full_rank, " witness:", np.round(v.witness, 4))
print("rank PBH(2, 0) =", pm.rank_at(P, 2, 0))
N = systems.counterexample_annihilator(corrected=True)
L1 = np.hstack([f.signatures[0] for f in m.faults])
L2 = np.hstack([f.signatures[1] for f in m.faults])
rc = pm.isolability_rank_condition(N, L1, L2)
print("rank condition holds:", rc.full_rank, " drop at", np.round(rc.witness, 4))

# the f1 filter ignores f2 while it reacts to f1
filt = sy.design_filter(m, "f1", method="none").filter
for name in ("f1", "f2"):
    sc = sim.Scenario(20, 20, faults=(sim.FaultSchedule(name, 3, 3, 1.0, None),))
    y = sim.simulate_plant(m, sc).y
    r = sim.simulate_filter(filt, y, sc.input_plane(m.m), sc)[1]
    print(f"fault {name} active: max |r_f1| = {np.abs(r).max():.3e}")

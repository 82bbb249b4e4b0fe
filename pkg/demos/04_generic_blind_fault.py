"""A fault that never reaches the output, next to one that can be isolated."""

import numpy as np

from fdi2d import invariants as inv
from fdi2d import sim
from fdi2d import subspace as ss
from fdi2d import synthesis as sy
from fdi2d import systems

m = systems.blind_fault()
sc = sim.Scenario(49, 49, faults=(sim.FaultSchedule("f1", 0, 0, 1.0, None),))
y = sim.simulate_plant(m, sc).y
print(f"f1 always on, 50 x 50 grid: max |y| = {np.abs(y).max():.1e}")

S1 = inv.min_unobservability(m, m.fault_subspace(0))
print("S1* ∩ L2 = 0:", ss.intersect(S1, m.fault_subspace(1)).is_zero())
rep = sy.isolability(m)
print("isolable:", rep.isolable)
for w in rep.warnings:
    print("warning:", w)

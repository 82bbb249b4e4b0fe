"""Finite-difference reduction of first-order hyperbolic PDEs to FMII models.

For ``dx/dt = A1~ dx/dz + A2~ x + B~ u + sum L~_k f_k`` the upwind/forward
scheme on a (z, t) grid becomes an FMII model on the stacked state
``x(i,j) = [x~((i-1)dz, j dt); x~(i dz, j dt)]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import Fault, FmiiModel, check


@dataclass(frozen=True, eq=False)
class HyperbolicPde:
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    faults: dict = field(default_factory=dict)
    dz: float = 0.1
    dt: float = 0.1
    length: float = 1.0

    def __post_init__(self):
        for name in ("A1", "A2", "B"):
            a = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, a)
        object.__setattr__(self, "faults", {
            k: np.asarray(v, dtype=float).reshape(-1, 1) for k, v in self.faults.items()})
        if self.dz <= 0 or self.dt <= 0:
            raise ValueError("grid steps dz and dt must be positive")
        n = self.A1.shape[0]
        if self.A1.shape != (n, n) or self.A2.shape != (n, n) or self.B.shape[0] != n:
            raise ValueError("PDE coefficient matrices do not conform")
        for name, L in self.faults.items():
            if L.shape[0] != n:
                raise ValueError(f"fault map {name!r} has {L.shape[0]} rows, expected {n}")


def discretize(pde):
    """FMII model with ``2n`` states approximating ``pde``.

    Inputs and faults enter through the second slot, i.e. multiplied by
    ``u(i+1,j)`` and ``f(i+1,j)``.
    """
    n = pde.A1.shape[0]
    ratio = pde.dt / pde.dz
    if ratio * np.linalg.norm(pde.A1, 2) > 1.0:
        warnings.warn(
            f"dt/dz * |A1| = {ratio * np.linalg.norm(pde.A1, 2):.3g} exceeds 1; "
            "the upwind scheme may be unstable", RuntimeWarning, stacklevel=2)
    Z = np.zeros((n, n))
    I = np.eye(n)
    A1 = np.block([[Z, I], [Z, Z]])
    A2 = np.block([[Z, Z], [-ratio * pde.A1, I + ratio * pde.A1 + pde.dt * pde.A2]])
    m = pde.B.shape[1]
    B2 = np.vstack([np.zeros((n, m)), pde.B])
    faults = []
    for name, L in pde.faults.items():
        stacked = np.vstack([np.zeros((n, 1)), L])
        faults.append(Fault(name, (np.zeros((2 * n, 1)), stacked)))
    return check(FmiiModel((A1, A2), (np.zeros((2 * n, m)), B2), np.eye(2 * n),
                           tuple(faults)))


HEAT_EXCHANGER_B2 = np.array([[0.0, 0.0], [0.0, 0.0], [1.1, -0.1], [-0.1, 1.1]])


def heat_exchanger_pde(alpha_f=1.0, alpha_g=1.0, beta=1.0, dz=0.1, dt=0.1):
    """Two-line parallel heat exchanger with leakage (f1) and fouling (f2)."""
    A1 = -np.diag([alpha_g, alpha_f])
    A2 = np.array([[-beta, beta], [beta, -beta]])
    return HyperbolicPde(A1, A2, np.eye(2), {"f1": [0.0, 1.0], "f2": [-1.0, 1.0]},
                         dz=dz, dt=dt)


def heat_exchanger(measurement="full"):
    """The discretized heat exchanger with alpha = beta = 1, dz = dt = 0.1.

    ``measurement="full"`` measures states 1 and 4; ``"partial"`` measures
    states 2 and 4 and moves the leakage signature to state 2.
    """
    base = discretize(heat_exchanger_pde())
    A1, A2 = base.shift_ops
    zero = np.zeros((4, 1))
    B = (np.zeros((4, 2)), HEAT_EXCHANGER_B2.copy())
    L2 = np.array([[0.0], [0.0], [-1.0], [1.0]])
    if measurement == "full":
        C = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        L1 = np.array([[0.0], [0.0], [0.0], [1.0]])
    elif measurement == "partial":
        C = np.array([[0.0, 1, 0, 0], [0, 0, 0, 1.0]])
        L1 = np.array([[0.0], [1.0], [0.0], [0.0]])
    else:
        raise ValueError(f"measurement must be 'full' or 'partial', not {measurement!r}")
    faults = (Fault("f1", (zero, L1)), Fault("f2", (zero, L2)))
    return check(FmiiModel((A1, A2), B, C, faults,
                           name=f"heat-exchanger-{measurement}"))


def ode1d_model(N, length=1.0):
    """Spatially discretized (method of lines) heat exchanger as a k = 1 model.

    State ordering ``[Tg(dz), Tf(dz), ..., Tg(N dz), Tf(N dz)]``; only the
    odd states are measured. Fault ``f1_k`` has signature ``-1, 1`` on node
    k and ``f2_k`` is the unit vector on the second state of node k.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    dz = length / N
    diag = np.array([[-(1 + dz) / dz, 1.0], [1.0, -(1 + dz) / dz]])
    sub = -np.eye(2) / dz
    n = 2 * N
    A = np.zeros((n, n))
    for k in range(N):
        A[2 * k:2 * k + 2, 2 * k:2 * k + 2] = diag
        if k > 0:
            A[2 * k:2 * k + 2, 2 * k - 2:2 * k] = sub
    B = np.zeros((n, 2))
    B[0, 0] = B[1, 1] = 1.0
    C = np.zeros((N, n))
    C[np.arange(N), 2 * np.arange(N)] = 1.0
    faults = []
    for k in range(N):
        L1 = np.zeros((n, 1))
        L1[2 * k, 0], L1[2 * k + 1, 0] = -1.0, 1.0
        L2 = np.zeros((n, 1))
        L2[2 * k + 1, 0] = 1.0
        faults.append(Fault(f"f1_{k + 1}", (L1,)))
        faults.append(Fault(f"f2_{k + 1}", (L2,)))
    return check(FmiiModel((A,), (B,), C, tuple(faults), name=f"ode1d-N{N}"))

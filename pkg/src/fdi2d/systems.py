"""Reference systems with known geometric structure.

``counterexample`` is a 4-state FMII model whose faults are isolable by
the unobservability-subspace test although the PBH matrix loses rank;
``blind_fault`` is a 2-state model where the isolability test passes but a
constant fault leaves the output identically zero.
"""

import numpy as np

from .model import Fault, FmiiModel, check
from .polymat import BivarPoly, BivarPolyMatrix


def counterexample():
    A1 = np.zeros((4, 4))
    A1[1, 1] = 0.5
    A1[0:2, 2:4] = 0.5 * np.eye(2)
    A2 = np.zeros((4, 4))
    A2[2:4, 0:2] = 0.5 * np.eye(2)
    A2[2:4, 2:4] = 0.5 * np.eye(2)
    C = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
    zero = np.zeros((4, 1))
    faults = (
        Fault("f1", (np.array([[0.0], [0], [0], [1]]), zero)),
        Fault("f2", (np.array([[0.0], [0], [-1], [1]]), zero)),
    )
    B = (np.zeros((4, 1)), np.zeros((4, 1)))
    return check(FmiiModel((A1, A2), B, C, faults, name="counterexample"))


# Output injections printed for the counterexample (decoupling f2).
COUNTEREXAMPLE_D1 = np.array([[0, 0, 0, 0], [0.5, -0.5, 0, 0]], dtype=float).T
COUNTEREXAMPLE_D2 = np.array([[0, 0, 0, 0], [0, 0, 0.5, -0.5]], dtype=float).T

# Quotient pair printed for the counterexample (basis not printed).
COUNTEREXAMPLE_A1P = np.array([[0, 0, np.sqrt(2) / 2], [0, 0.5, 0], [0, 0, 0]])
COUNTEREXAMPLE_A2P = np.array([[0, 0, 0], [0, 0, 0],
                               [np.sqrt(2) / 2, np.sqrt(2) / 2, 0.5]])


def counterexample_annihilator(corrected=False):
    """Candidate left annihilator ``N(z1, z2)`` of the counterexample PBH matrix.

    With ``corrected=False`` the entries are the published ones, whose
    ``f = 2 - z1 - z2`` leaves ``2 f`` in the last column of ``N PBH``.
    ``corrected=True`` uses ``f = z1 + z2 - 2``, which annihilates exactly.
    """
    z1, z2 = BivarPoly.z1(), BivarPoly.z2()
    one = BivarPoly.constant(1.0)
    a = 2 * one - z2
    c = z1
    e = 0.5 * z2 * z1 + z2 - 2 * one
    b = z2
    d = 2 * one - z1
    f = z1 + z2 - 2 * one if corrected else 2 * one - z1 - z2
    o = BivarPoly.constant(0.0)
    return BivarPolyMatrix.from_entries([
        [a, o, c, o, e, o],
        [o, b, o, d, o, f],
    ])


def blind_fault():
    A = 0.4 * np.eye(2)
    C = np.array([[1.0, -1.0]])
    zero = np.zeros((2, 1))
    faults = (
        Fault("f1", (np.array([[1.0], [1.0]]), zero)),
        Fault("f2", (zero, np.array([[0.0], [1.0]]))),
    )
    B = (np.zeros((2, 1)), np.zeros((2, 1)))
    return check(FmiiModel((A, A.copy()), B, C, faults, name="blind-fault"))


def observability_gap_example():
    """Two-fault model where f1 lies in the unobservable subspace."""
    A1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    A2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    C = np.array([[0.0, 1.0]])
    zero = np.zeros((2, 1))
    faults = (Fault("f1", (np.array([[1.0], [0.0]]), zero)),
              Fault("f2", (np.array([[0.0], [1.0]]), zero)))
    B = (np.zeros((2, 1)), np.zeros((2, 1)))
    return check(FmiiModel((A1, A2), B, C, faults, name="observability-gap"))

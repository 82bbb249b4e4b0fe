"""Isolability verdicts, quotient systems and detection-filter assembly.

For a target fault the other faults are grouped together and factored out
through the smallest unobservability subspace S* containing their
signatures. The target is isolable iff its signature is not inside S*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import invariants as inv
from . import lmi
from . import subspace as ss
from .model import DetectionFilter


class NotIsolable(ValueError):
    """Raised when a filter is requested for a fault that cannot be isolated."""


@dataclass(frozen=True, eq=False)
class FaultVerdict:
    name: str
    isolable: bool
    signature: ss.Subspace
    W_star: ss.Subspace
    S_star: ss.Subspace
    reason: str
    in_invariant_unobservable: bool

    @property
    def dims(self):
        return {"L": self.signature.dim, "W*": self.W_star.dim, "S*": self.S_star.dim}


@dataclass(frozen=True, eq=False)
class IsolabilityReport:
    model_name: str
    verdicts: tuple
    warnings: tuple = ()

    @property
    def isolable(self):
        return {v.name: v.isolable for v in self.verdicts}

    @property
    def all_isolable(self):
        return all(v.isolable for v in self.verdicts)

    def __getitem__(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def summary(self):
        lines = []
        for v in self.verdicts:
            d = v.dims
            word = "isolable" if v.isolable else "not isolable"
            lines.append(f"{v.name}: {word} (dim W* = {d['W*']}, dim S* = {d['S*']}; {v.reason})")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def _others(model, idx):
    return [i for i in range(model.p) if i != idx]


def _verdict(model, idx, Ns):
    others = model.faults_subspace(_others(model, idx))
    W = inv.min_conditioned_invariant(model, others)
    S = inv.min_unobservability(model, others)
    L = model.fault_subspace(idx)
    inside = ss.contains(S, L)
    if L.is_zero():
        reason = "signature is zero"
        ok = False
    elif inside:
        reason = "signature contained in S* of the other faults"
        ok = False
    else:
        reason = "signature not contained in S* of the other faults"
        ok = True
    hidden = not L.is_zero() and ss.contains(Ns, L)
    return FaultVerdict(model.faults[idx].name, ok, L, W, S, reason, hidden)


def isolability(model):
    """Per-fault isolability verdicts (target versus all other faults)."""
    if model.p < 1:
        raise ValueError("the model has no faults")
    Ns = inv.invariant_unobservable(model)
    verdicts = tuple(_verdict(model, j, Ns) for j in range(model.p))
    warnings = tuple(
        f"signature of {v.name} lies in the invariant unobservable subspace; "
        "from zero initial data it may leave the output identically zero"
        for v in verdicts if v.in_invariant_unobservable)
    return IsolabilityReport(model.name, verdicts, warnings)


@dataclass(frozen=True, eq=False)
class QuotientSystem:
    """Dynamics on ``R^n / S*`` seen through ``omega = P x``."""

    A: tuple
    P: np.ndarray
    PB: tuple
    M: np.ndarray
    H: np.ndarray
    PL: tuple
    D: tuple
    S: ss.Subspace
    target: str
    decoupled: tuple

    @property
    def order(self):
        return self.P.shape[0]


def quotient_system(model, target):
    """Factor out S* of the non-target faults.

    ``A_i^p = P (A_i + D_i C) P^T`` with friend maps ``D_i`` of S*, and
    ``(H, M, P)`` from :func:`invariants.measurement_maps`.
    """
    idx = model.fault_index(target)
    v = _verdict(model, idx, ss.zero(model.n, model.rank_tol))
    if not v.isolable:
        raise NotIsolable(f"fault {v.name!r} is not isolable: {v.reason}")
    S = v.S_star
    D = inv.friend_maps(model, S)
    H, M, P = inv.measurement_maps(model, S)
    Ap = tuple(P @ (A + Di @ model.C) @ P.T for A, Di in zip(model.shift_ops, D))
    PB = tuple(P @ B for B in model.input_maps)
    PL = tuple(P @ L for L in model.faults[idx].signatures)
    names = tuple(model.faults[i].name for i in _others(model, idx))
    return QuotientSystem(Ap, P, PB, M, H, PL, tuple(D), S, v.name, names)


def _gains(Q, D_o):
    r = Q.M.shape[0]
    if D_o is None:
        return tuple(np.zeros((Q.order, r)) for _ in Q.A)
    D_o = tuple(np.atleast_2d(np.asarray(d, dtype=float)).reshape(Q.order, r) for d in D_o)
    if len(D_o) != len(Q.A):
        raise ValueError(f"need {len(Q.A)} observer gains, got {len(D_o)}")
    return D_o


def error_dynamics(Q, D_o=None):
    """``(F, PL)`` of ``e = omega - omega_hat``: ``e+ = sum F_i e_i + P L^i f``."""
    D_o = _gains(Q, D_o)
    F = tuple(Ap + Do @ Q.M for Ap, Do in zip(Q.A, D_o))
    return F, Q.PL


def assemble_filter(Q, D_o=None):
    """Detection filter driven by the quotient system.

    ``F_i = A_i^p + D_oi M``, ``K_i = P B_i``, ``E_i = -(P D_i + D_oi H)``.
    The sign of ``E_i`` makes the estimation error obey
    :func:`error_dynamics` exactly (``H y = M P x``).
    """
    D_o = _gains(Q, D_o)
    F, _ = error_dynamics(Q, D_o)
    E = tuple(-(Q.P @ Di + Do @ Q.H) for Di, Do in zip(Q.D, D_o))
    return DetectionFilter(F, Q.PB, E, Q.M, Q.H, projection=Q.P, target=Q.target,
                           extras={"D": list(Q.D), "D_o": list(D_o)})


def fdi_lmi_condition(Q, **kwargs):
    """Projected Lyapunov LMI on the quotient pair with ``ker M`` in place of ``ker C``."""
    if len(Q.A) != 2:
        raise ValueError("the LMI condition is stated for two shift operators")
    return lmi.projected_feasibility(Q.A[0], Q.A[1], Q.M, **kwargs)


@dataclass(frozen=True, eq=False)
class Design:
    """Outcome of :func:`design_filter`."""

    filter: DetectionFilter
    quotient: QuotientSystem
    certificate: object = None
    details: dict = field(default_factory=dict)


def design_filter(model, target, method="lmi"):
    """Run the full design for one fault.

    ``method="lmi"`` certifies the quotient error dynamics and recovers
    observer gains; ``method="none"`` uses zero observer gains.
    """
    if method not in ("lmi", "none"):
        raise ValueError(f"method must be 'lmi' or 'none', not {method!r}")
    Q = quotient_system(model, target)
    cert = None
    D_o = None
    if method == "lmi":
        cert = fdi_lmi_condition(Q)
        if Q.M.shape[0] == 0:
            D_o = None
        else:
            D_o = lmi.recover_gains(Q.A[0], Q.A[1], Q.M, cert)
    F = assemble_filter(Q, D_o)
    if cert is not None:
        F.extras["R1"] = cert.R1
        F.extras["R2"] = cert.R2
    return Design(F, Q, cert)

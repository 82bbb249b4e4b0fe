"""FMII system, Roesser system and detection-filter containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import subspace as ss


def _mat(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2D matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class Fault:
    """A fault signal entering through one signature per shift operator."""

    name: str
    signatures: tuple

    def __post_init__(self):
        sigs = tuple(_mat(L, f"L[{self.name}]") for L in self.signatures)
        object.__setattr__(self, "signatures", sigs)

    def subspace(self, tol=None):
        """Span of all signatures of this fault (L^1 + L^2 + ...)."""
        return ss.image(np.hstack(self.signatures), tol=tol)


@dataclass(frozen=True, eq=False)
class FmiiModel:
    """Fornasini-Marchesini model II with ``k`` shift operators.

    For ``k = 2``::

        x(i+1,j+1) = A1 x(i,j+1) + A2 x(i+1,j) + B1 u(i,j+1) + B2 u(i+1,j)
                     + sum_f L_f^1 f(i,j+1) + L_f^2 f(i+1,j)
        y(i,j)     = C x(i,j)

    ``k = 1`` is an ordinary single-shift system and ``k = 3`` the 3D model;
    the subspace algorithms treat all three uniformly.
    """

    shift_ops: tuple
    input_maps: tuple
    output_map: np.ndarray
    faults: tuple = ()
    rank_tol: float = field(default_factory=ss.default_rank_tol)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "shift_ops",
                           tuple(_mat(A, "A") for A in self.shift_ops))
        object.__setattr__(self, "input_maps",
                           tuple(_mat(B, "B") for B in self.input_maps))
        object.__setattr__(self, "output_map", _mat(self.output_map, "C"))
        faults = tuple(f if isinstance(f, Fault) else Fault(*f) for f in self.faults)
        object.__setattr__(self, "faults", faults)

    @classmethod
    def from_matrices(cls, A, B=None, C=None, faults=None, **kwargs):
        """Build from lists; ``B`` defaults to zero inputs (m = 1)."""
        A = [np.asarray(a, dtype=float) for a in A]
        n = A[0].shape[0]
        if B is None:
            B = [np.zeros((n, 1)) for _ in A]
        faults = faults or {}
        if isinstance(faults, dict):
            faults = [Fault(name, tuple(sigs)) for name, sigs in faults.items()]
        return cls(tuple(A), tuple(B), C, tuple(faults), **kwargs)

    @property
    def k(self):
        return len(self.shift_ops)

    @property
    def n(self):
        return self.shift_ops[0].shape[0]

    @property
    def m(self):
        return self.input_maps[0].shape[1] if self.input_maps else 0

    @property
    def q(self):
        return self.output_map.shape[0]

    @property
    def p(self):
        return len(self.faults)

    @property
    def C(self):
        return self.output_map

    def fault_index(self, name_or_index):
        if isinstance(name_or_index, (int, np.integer)):
            if not 0 <= name_or_index < self.p:
                raise IndexError(f"fault index {name_or_index} out of range")
            return int(name_or_index)
        for idx, f in enumerate(self.faults):
            if f.name == name_or_index:
                return idx
        raise KeyError(f"no fault named {name_or_index!r}")

    def ker_C(self):
        return ss.kernel(self.output_map, tol=self.rank_tol)

    def fault_subspace(self, idx):
        return self.faults[idx].subspace(tol=self.rank_tol)

    def faults_subspace(self, indices):
        """Sum of the signature spans of the listed faults."""
        total = ss.zero(self.n, self.rank_tol)
        for idx in indices:
            total = ss.sum(total, self.fault_subspace(idx))
        return total

    def with_faults(self, faults):
        return FmiiModel(self.shift_ops, self.input_maps, self.output_map,
                         tuple(faults), self.rank_tol, self.name)


def validate(model):
    """Return a list of human-readable violations (empty when well formed)."""
    problems = []
    if model.k not in (1, 2, 3):
        problems.append(f"number of shift operators must be 1, 2 or 3, got {model.k}")
    if model.k == 0:
        return problems
    n = model.shift_ops[0].shape[0]
    for i, A in enumerate(model.shift_ops, start=1):
        if A.shape != (n, n):
            problems.append(f"A{i} has shape {A.shape}, expected ({n}, {n})")
    if len(model.input_maps) != model.k:
        problems.append(
            f"{len(model.input_maps)} input maps given for {model.k} shift operators")
    ms = {B.shape[1] for B in model.input_maps}
    if len(ms) > 1:
        problems.append(f"input maps disagree on the input dimension: {sorted(ms)}")
    for i, B in enumerate(model.input_maps, start=1):
        if B.shape[0] != n:
            problems.append(f"B{i} has {B.shape[0]} rows, expected {n}")
    if model.output_map.shape[1] != n:
        problems.append(
            f"C has {model.output_map.shape[1]} columns, expected {n}")
    names = set()
    for f in model.faults:
        if f.name in names:
            problems.append(f"duplicate fault name {f.name!r}")
        names.add(f.name)
        if len(f.signatures) != model.k:
            problems.append(
                f"fault {f.name!r} has {len(f.signatures)} signatures, expected {model.k}")
        for i, L in enumerate(f.signatures, start=1):
            if L.shape[0] != n:
                problems.append(
                    f"fault {f.name!r} signature L^{i} has {L.shape[0]} rows, expected {n}")
    return problems


def check(model):
    """Raise ``ValueError`` listing every violation of :func:`validate`."""
    problems = validate(model)
    if problems:
        raise ValueError("invalid FMII model:\n  " + "\n  ".join(problems))
    return model


@dataclass(frozen=True, eq=False)
class RoesserModel:
    """Roesser model with horizontal state r and vertical state s.

    ``faults`` maps names to single signatures ``L`` of height r + s.
    """

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B11: np.ndarray
    B21: np.ndarray
    C: np.ndarray
    faults: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("A11", "A12", "A21", "A22", "B11", "B21", "C"):
            object.__setattr__(self, name, _mat(getattr(self, name), name))
        object.__setattr__(self, "faults",
                           {k: _mat(v, k) for k, v in self.faults.items()})

    @property
    def r(self):
        return self.A11.shape[0]

    @property
    def s(self):
        return self.A22.shape[0]


def roesser_to_fmii(R):
    r, s = R.r, R.s
    shapes = {"A11": (r, r), "A12": (r, s), "A21": (s, r), "A22": (s, s)}
    for name, shape in shapes.items():
        if getattr(R, name).shape != shape:
            raise ValueError(f"{name} has shape {getattr(R, name).shape}, expected {shape}")
    if R.B11.shape[0] != r or R.B21.shape[0] != s or R.B11.shape[1] != R.B21.shape[1]:
        raise ValueError("B11/B21 do not conform with the state partition")
    if R.C.shape[1] != r + s:
        raise ValueError(f"C has {R.C.shape[1]} columns, expected {r + s}")
    m = R.B11.shape[1]
    A1 = np.block([[R.A11, R.A12], [np.zeros((s, r)), np.zeros((s, s))]])
    A2 = np.block([[np.zeros((r, r)), np.zeros((r, s))], [R.A21, R.A22]])
    B1 = np.vstack([R.B11, np.zeros((s, m))])
    B2 = np.vstack([np.zeros((r, m)), R.B21])
    faults = []
    for name, L in R.faults.items():
        if L.shape[0] != r + s:
            raise ValueError(f"fault {name!r} signature has {L.shape[0]} rows")
        top = np.vstack([L[:r], np.zeros((s, L.shape[1]))])
        bottom = np.vstack([np.zeros((r, L.shape[1])), L[r:]])
        faults.append(Fault(name, (top, bottom)))
    return check(FmiiModel((A1, A2), (B1, B2), R.C, tuple(faults)))


@dataclass(frozen=True, eq=False)
class DetectionFilter:
    """Gains of the 2D residual generator

    ``w(i+1,j+1) = F1 w(i,j+1) + F2 w(i+1,j) + K1 u(i,j+1) + K2 u(i+1,j)
    + E1 y(i,j+1) + E2 y(i+1,j)``, ``r(i,j) = M w(i,j) - H y(i,j)``.

    ``projection`` (P) and the design by-products are optional metadata.
    """

    F: tuple
    K: tuple
    E: tuple
    M: np.ndarray
    H: np.ndarray
    projection: Optional[np.ndarray] = None
    target: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(_mat(F, "F") for F in self.F))
        object.__setattr__(self, "K", tuple(_mat(K, "K") for K in self.K))
        object.__setattr__(self, "E", tuple(_mat(E, "E") for E in self.E))
        object.__setattr__(self, "M", _mat(self.M, "M"))
        object.__setattr__(self, "H", _mat(self.H, "H"))
        if self.projection is not None:
            object.__setattr__(self, "projection", _mat(self.projection, "P"))

    @property
    def order(self):
        return self.F[0].shape[0]

    def validate_against(self, model):
        """Dimensional consistency with the plant; returns diagnostics."""
        problems = []
        o = self.order
        if len(self.F) != model.k:
            problems.append(f"filter has {len(self.F)} dynamics maps, plant has k={model.k}")
        for i, F in enumerate(self.F, 1):
            if F.shape != (o, o):
                problems.append(f"F{i} has shape {F.shape}, expected ({o}, {o})")
        for i, K in enumerate(self.K, 1):
            if K.shape != (o, model.m):
                problems.append(f"K{i} has shape {K.shape}, expected ({o}, {model.m})")
        for i, E in enumerate(self.E, 1):
            if E.shape != (o, model.q):
                problems.append(f"E{i} has shape {E.shape}, expected ({o}, {model.q})")
        if self.M.shape[1] != o:
            problems.append(f"M has {self.M.shape[1]} columns, expected {o}")
        if self.H.shape != (self.M.shape[0], model.q):
            problems.append(
                f"H has shape {self.H.shape}, expected ({self.M.shape[0]}, {model.q})")
        if self.projection is not None and self.projection.shape != (o, model.n):
            problems.append(
                f"P has shape {self.projection.shape}, expected ({o}, {model.n})")
        return problems

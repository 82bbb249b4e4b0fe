"""Grid simulation of FMII plants and detection filters.

Nodes are filled along antidiagonals ``i + j = const``; every node on one
antidiagonal only needs the previous one, so each diagonal is a single
vectorized update. A leading batch axis lets Monte-Carlo runs share the
sweep.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .model import DetectionFilter

ORDERS = ("antidiagonal", "row")


@dataclass(frozen=True)
class FaultSchedule:
    """Fault ``name`` of value ``severity`` on rows ``i_from..i_to`` and columns ``j >= j_from``.

    ``None`` for ``i_to`` / ``j_to`` means unbounded. The default is a fault
    at a single spatial row that stays active from ``j_from`` on.
    """

    name: str
    i_from: int
    j_from: int
    severity: float = 1.0
    i_to: Optional[int] = -1
    j_to: Optional[int] = None

    def plane(self, I, J):
        i_to = self.i_from if self.i_to == -1 else self.i_to
        out = np.zeros((I + 1, J + 1))
        i_hi = I if i_to is None else min(i_to, I)
        j_hi = J if self.j_to is None else min(self.j_to, J)
        if self.i_from <= i_hi and self.j_from <= j_hi:
            out[self.i_from:i_hi + 1, self.j_from:j_hi + 1] = self.severity
        return out

    def onset(self):
        return self.i_from, self.j_from


@dataclass(frozen=True, eq=False)
class Scenario:
    """Boundary data, inputs, fault schedules and output noise on an ``(I+1) x (J+1)`` grid.

    ``h1[i] = x(i, 0)`` and ``h2[j] = x(0, j)``; ``inputs`` is a plane of
    shape ``(I+1, J+1, m)`` or a constant vector.
    """

    I: int
    J: int
    h1: Optional[np.ndarray] = None
    h2: Optional[np.ndarray] = None
    inputs: Optional[np.ndarray] = None
    faults: tuple = ()
    sigma: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.I < 1 or self.J < 1:
            raise ValueError("grid extents must be at least 1")
        if self.sigma < 0:
            raise ValueError("noise level must be nonnegative")
        for name in ("h1", "h2", "inputs"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float))
        object.__setattr__(self, "faults", tuple(self.faults))
        if self.h1 is not None and self.h2 is not None:
            if not np.allclose(self.h1[0], self.h2[0], rtol=0, atol=1e-12):
                raise ValueError("boundary data disagree at the corner: h1(0) != h2(0)")

    def boundary(self, n):
        h1 = np.zeros((self.I + 1, n)) if self.h1 is None else self.h1
        h2 = np.zeros((self.J + 1, n)) if self.h2 is None else self.h2
        if h1.shape != (self.I + 1, n) or h2.shape != (self.J + 1, n):
            raise ValueError(
                f"boundary shapes {h1.shape}, {h2.shape} do not match grid and n = {n}")
        return h1, h2

    def input_plane(self, m):
        shape = (self.I + 1, self.J + 1, m)
        if self.inputs is None:
            return np.zeros(shape)
        u = self.inputs
        if u.ndim == 1:
            if u.shape[0] != m:
                raise ValueError(f"input vector has length {u.shape[0]}, expected {m}")
            return np.broadcast_to(u, shape).copy()
        if u.shape != shape:
            raise ValueError(f"input plane has shape {u.shape}, expected {shape}")
        return u

    def fault_planes(self, model):
        planes = np.zeros((model.p, self.I + 1, self.J + 1))
        for sched in self.faults:
            planes[model.fault_index(sched.name)] += sched.plane(self.I, self.J)
        return planes

    def without_faults(self):
        return replace(self, faults=())


@dataclass(eq=False)
class Grid2D:
    """States ``x[i, j]`` and outputs ``y[i, j]`` (optionally with a batch axis in front)."""

    x: np.ndarray
    y: np.ndarray

    @property
    def extents(self):
        return self.x.shape[-3] - 1, self.x.shape[-2] - 1


@dataclass(frozen=True)
class ThresholdSpec:
    runs: int = 100
    horizon: Optional[int] = None
    thresholds: tuple = ()

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("at least one Monte-Carlo run is required")
        if any(t < 0 for t in self.thresholds):
            raise ValueError("thresholds must be nonnegative")


# ---------------------------------------------------------------------------
# core recursion


def _diag_indices(I, J, d):
    a = np.arange(max(1, d - J), min(I, d - 1) + 1)
    return a, d - a


def fill(ops, X, G, order="antidiagonal"):
    """In-place 2D recursion ``X[a,b] = A1 X[a-1,b] + A2 X[a,b-1] + G[a,b]`` for ``a, b >= 1``.

    ``X`` and ``G`` have shape ``(..., I+1, J+1, n)``; row 0 and column 0 of
    ``X`` are boundary data.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    A1, A2 = ops
    I, J = X.shape[-3] - 1, X.shape[-2] - 1
    if order == "antidiagonal":
        for d in range(2, I + J + 1):
            a, b = _diag_indices(I, J, d)
            X[..., a, b, :] = (X[..., a - 1, b, :] @ A1.T + X[..., a, b - 1, :] @ A2.T
                               + G[..., a, b, :])
    else:
        for a in range(1, I + 1):
            for b in range(1, J + 1):
                X[..., a, b, :] = (X[..., a - 1, b, :] @ A1.T + X[..., a, b - 1, :] @ A2.T
                                   + G[..., a, b, :])
    return X


def _shifted_drive(maps, plane):
    """``maps[0] v(a-1, b) + maps[1] v(a, b-1)`` placed at destination ``(a, b)``."""
    M1, M2 = maps
    G = np.zeros(plane.shape[:-1] + (M1.shape[0],))
    G[..., 1:, :, :] += plane[..., :-1, :, :] @ M1.T
    G[..., :, 1:, :] += plane[..., :, :-1, :] @ M2.T
    return G


def _require_2d(model):
    if model.k != 2:
        raise ValueError("grid simulation is implemented for k = 2 models only")


def plant_drive(model, scenario):
    u = scenario.input_plane(model.m)
    G = _shifted_drive(model.input_maps, u)
    planes = scenario.fault_planes(model)
    for idx, f in enumerate(model.faults):
        G += _shifted_drive(f.signatures, planes[idx][..., None])
    return G


def simulate_plant(model, scenario, rng=None, mode="boundary", x0=None,
                   order="antidiagonal", boundary=None):
    """Simulate the plant on the scenario grid.

    Parameters
    ----------
    mode : {"boundary", "seed"}
        ``"boundary"`` takes ``x(i, 0)`` and ``x(0, j)`` from the scenario.
        ``"seed"`` sets ``x(0, 0) = x0`` with zero data at negative indices,
        so that without inputs ``x(i, j) = A^(i,j) x0``.
    rng : numpy Generator, optional
        Source of output noise; defaults to ``default_rng(scenario.seed)``.
    boundary : tuple, optional
        ``(h1, h2)`` arrays overriding the scenario (a leading batch axis
        is allowed).
    """
    _require_2d(model)
    n = model.n
    I, J = scenario.I, scenario.J
    G = plant_drive(model, scenario)
    if mode == "seed":
        if x0 is None:
            raise ValueError("seed mode needs x0")
        x0 = np.asarray(x0, dtype=float).ravel()
        if x0.shape != (n,):
            raise ValueError(f"x0 has length {x0.shape[0]}, expected {n}")
        Xp = np.zeros((I + 2, J + 2, n))
        Gp = np.zeros_like(Xp)
        Gp[1:, 1:] = G
        Gp[1, 1] += x0
        fill(model.shift_ops, Xp, Gp, order)
        X = Xp[1:, 1:]
    elif mode == "boundary":
        h1, h2 = boundary if boundary is not None else scenario.boundary(n)
        batch = np.broadcast_shapes(h1.shape[:-2], h2.shape[:-2])
        X = np.zeros(batch + (I + 1, J + 1, n))
        X[..., :, 0, :] = h1
        X[..., 0, :, :] = h2
        fill(model.shift_ops, X, np.broadcast_to(G, X.shape), order)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    y = X @ model.C.T
    if scenario.sigma > 0:
        rng = rng if rng is not None else np.random.default_rng(scenario.seed)
        y = y + scenario.sigma * rng.standard_normal(y.shape)
    return Grid2D(X, y)


def simulate_filter(filt, y, u, scenario=None, boundary="projected", nominal=None):
    """Run the detection filter on output and input planes.

    ``boundary="projected"`` starts the filter from ``P`` times the nominal
    plant boundary (``nominal = (h1, h2)``, default taken from
    ``scenario``); ``"zero"`` starts from zero.

    Returns
    -------
    residual : ndarray
        Euclidean norm of ``M w - H y`` per node.
    vector : ndarray
        The residual vectors themselves.
    """
    if len(filt.F) != 2:
        raise ValueError("grid simulation is implemented for k = 2 filters only")
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    o = filt.order
    if y.shape[-1] != filt.H.shape[1] or u.shape[-1] != filt.K[0].shape[1]:
        raise ValueError("output/input planes do not match the filter dimensions")
    G = _shifted_drive(filt.K, u) + _shifted_drive(filt.E, y)
    W = np.zeros(y.shape[:-1] + (o,))
    if boundary == "projected":
        if filt.projection is None:
            raise ValueError("projected boundary needs the filter's projection P")
        if nominal is None:
            if scenario is None:
                raise ValueError("projected boundary needs a scenario or nominal boundary")
            nominal = scenario.boundary(filt.projection.shape[1])
        h1, h2 = nominal
        W[..., :, 0, :] = h1 @ filt.projection.T
        W[..., 0, :, :] = h2 @ filt.projection.T
    elif boundary != "zero":
        raise ValueError(f"unknown filter boundary {boundary!r}")
    fill(filt.F, W, np.broadcast_to(G, W.shape))
    vec = W @ filt.M.T - y @ filt.H.T
    return np.linalg.norm(vec, axis=-1), vec


def perturbed_boundary(scenario, n, rng, runs):
    """Nominal boundary plus Gaussian noise of the scenario's ``sigma``, corner kept consistent."""
    h1, h2 = scenario.boundary(n)
    s = scenario.sigma
    p1 = h1 + s * rng.standard_normal((runs,) + h1.shape)
    p2 = h2 + s * rng.standard_normal((runs,) + h2.shape)
    p2[:, 0] = p1[:, 0]
    return p1, p2


def threshold_mc(model, filters, scenario, spec=ThresholdSpec(), seed=0):
    """Monte-Carlo thresholds: maximum fault-free residual norm per filter.

    Each run perturbs the boundary and the outputs with noise of standard
    deviation ``scenario.sigma``; the maximum is taken over all runs and
    nodes with ``i, j <= spec.horizon``.
    """
    if scenario.faults:
        raise ValueError("threshold computation expects a fault-free scenario")
    filters = list(filters)
    rng = np.random.default_rng(seed)
    N1 = spec.horizon if spec.horizon is not None else max(scenario.I, scenario.J)
    u = scenario.input_plane(model.m)
    nominal = scenario.boundary(model.n)
    th = np.zeros(len(filters))
    batch = 25
    done = 0
    while done < spec.runs:
        R = min(batch, spec.runs - done)
        h1, h2 = perturbed_boundary(scenario, model.n, rng, R)
        g = simulate_plant(model, scenario, rng=rng, boundary=(h1, h2))
        for k, filt in enumerate(filters):
            r, _ = simulate_filter(filt, g.y, u, nominal=nominal)
            th[k] = max(th[k], r[:, :N1 + 1, :N1 + 1].max())
        done += R
    return ThresholdSpec(spec.runs, N1, tuple(float(t) for t in th))


def fdi_decide(residuals, thresholds):
    """Alarm planes ``r_k > th_k``."""
    residuals = list(residuals)
    thresholds = list(thresholds)
    if len(residuals) != len(thresholds):
        raise ValueError("one threshold per residual is required")
    return [np.asarray(r) > t for r, t in zip(residuals, thresholds)]


def write_csv(fh, residuals, alarms):
    """Write ``i,j,r1..rp,alarm1..alarmp`` rows (alarms as 0/1)."""
    residuals = [np.asarray(r) for r in residuals]
    alarms = [np.asarray(a) for a in alarms]
    p = len(residuals)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["i", "j"] + [f"r{k + 1}" for k in range(p)]
               + [f"alarm{k + 1}" for k in range(p)])
    I1, J1 = residuals[0].shape
    for i in range(I1):
        for j in range(J1):
            w.writerow([i, j] + [repr(float(r[i, j])) for r in residuals]
                       + [int(a[i, j]) for a in alarms])


def read_csv(fh):
    rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    p = (len(header) - 2) // 2
    I1 = int(body[:, 0].max()) + 1
    J1 = int(body[:, 1].max()) + 1
    res = [body[:, 2 + k].reshape(I1, J1) for k in range(p)]
    al = [body[:, 2 + p + k].reshape(I1, J1).astype(bool) for k in range(p)]
    return header, res, al


# ---------------------------------------------------------------------------
# Roesser model, directly


def simulate_roesser(R, h_left, v_bottom, u=None):
    """Direct Roesser recursion.

    ``h(i+1, j) = A11 h + A12 v + B11 u`` and ``v(i, j+1) = A21 h + A22 v + B21 u``
    at ``(i, j)``, with ``h(0, j) = h_left[j]`` and ``v(i, 0) = v_bottom[i]``.
    Returns ``(h, v)`` planes.
    """
    h_left = np.asarray(h_left, dtype=float)
    v_bottom = np.asarray(v_bottom, dtype=float)
    J1, I1 = h_left.shape[0], v_bottom.shape[0]
    m = R.B11.shape[1]
    u = np.zeros((I1, J1, m)) if u is None else np.asarray(u, dtype=float)
    h = np.zeros((I1, J1, R.r))
    v = np.zeros((I1, J1, R.s))
    h[0] = h_left
    v[:, 0] = v_bottom
    for i in range(I1):
        for j in range(J1):
            if i + 1 < I1:
                h[i + 1, j] = R.A11 @ h[i, j] + R.A12 @ v[i, j] + R.B11 @ u[i, j]
            if j + 1 < J1:
                v[i, j + 1] = R.A21 @ h[i, j] + R.A22 @ v[i, j] + R.B21 @ u[i, j]
    return h, v


# ---------------------------------------------------------------------------
# heat-exchanger scenarios


def heat_exchanger_scenario(kind="healthy", size=100, sigma=0.01, seed=0):
    """Unit-step inlet temperatures on a ``size x size`` grid.

    ``kind`` is ``"healthy"``, ``"I"`` (f1 at i = 5, j >= 60) or ``"II"``
    (f1 at i = 5, j >= 50 and f2 at i = 5, j >= 70).
    """
    I = J = size - 1
    h1 = np.zeros((I + 1, 4))
    h2 = np.ones((J + 1, 4))
    h2[0] = 0.0
    faults = {
        "healthy": (),
        "I": (FaultSchedule("f1", 5, 60),),
        "II": (FaultSchedule("f1", 5, 50), FaultSchedule("f2", 5, 70)),
    }
    if kind not in faults:
        raise ValueError(f"unknown scenario {kind!r}")
    return Scenario(I, J, h1, h2, np.ones(2), faults[kind], sigma, seed)


def influence_cone(I, J, onset):
    """Nodes that a fault entering at ``onset`` (slot 1 or 2) can reach."""
    i0, j0 = onset
    ii, jj = np.meshgrid(np.arange(I + 1), np.arange(J + 1), indexing="ij")
    return (ii >= i0) & (jj >= j0) & (ii + jj > i0 + j0)

"""2D Lyapunov certificates and LMI-based observer gains.

The semidefinite engine is a small log-barrier method for

    minimize t  subject to  F_b(x) - t I < 0  for every constraint block b,
                            G_c(x) < 0        for every bound block c,

where every ``F_b`` and ``G_c`` is affine in the unknowns ``x``. Problem
sizes in this package are tiny (matrices up to a few dozen rows), so dense
Newton steps are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import subspace as ss

TOL_PSD = 1e-9
MARGIN_MIN = 1e-6
MAX_ITER = 500


class InfeasibleLMI(RuntimeError):
    """No strictly feasible point was found within the iteration budget.

    The verdict is one-sided: it does not prove infeasibility.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def _sym(X):
    return 0.5 * (X + X.T)


def _check_spd(R, name):
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[0] != R.shape[1]:
        raise ValueError(f"{name} must be square, got {R.shape}")
    if not np.allclose(R, R.T, atol=1e-12 * max(1.0, np.abs(R).max())):
        raise ValueError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(_sym(R)).min() <= 0:
        raise ValueError(f"{name} is not positive definite")
    return _sym(R)


@dataclass(frozen=True, eq=False)
class LyapunovCertificate:
    """Pair ``R1, R2 > 0`` and the margin by which the tested matrix is negative."""

    R1: np.ndarray
    R2: np.ndarray
    margin: float

    def __post_init__(self):
        object.__setattr__(self, "R1", _check_spd(self.R1, "R1"))
        object.__setattr__(self, "R2", _check_spd(self.R2, "R2"))


def lyapunov_matrix(A1, A2, R1, R2):
    """``A_c = A^T (R1 + R2) A - diag(R1, R2)`` with ``A = [A1 A2]``."""
    A = np.hstack([np.asarray(A1, dtype=float), np.asarray(A2, dtype=float)])
    return _sym(A.T @ (R1 + R2) @ A - scipy.linalg.block_diag(R1, R2))


def lyapunov_check(A1, A2, R1, R2, tol=TOL_PSD):
    """Test the 2D Lyapunov inequality ``A_c < 0``.

    Returns
    -------
    ok : bool
        True when the largest eigenvalue of ``A_c`` is below ``-tol``.
    margin : float
        Negated largest eigenvalue of ``A_c``.
    """
    R1 = _check_spd(R1, "R1")
    R2 = _check_spd(R2, "R2")
    lam = np.linalg.eigvalsh(lyapunov_matrix(A1, A2, R1, R2)).max()
    return bool(lam < -tol), float(-lam)


def _ker_basis(C):
    C = np.atleast_2d(np.asarray(C, dtype=float))
    s = np.linalg.svd(C, compute_uv=False)
    if ss.numerical_rank(s, C.shape, ss.default_rank_tol()) < C.shape[0]:
        raise ValueError("output map must have full row rank")
    return ss.kernel(C).basis


def projected_matrix(A1, A2, C, R1, R2):
    """``W_cd^T A_c W_cd`` with ``W_cd = diag(W_c, W_c)`` and ``W_c`` spanning ker C."""
    Wc = _ker_basis(C)
    Wcd = scipy.linalg.block_diag(Wc, Wc)
    return _sym(Wcd.T @ lyapunov_matrix(A1, A2, R1, R2) @ Wcd)


def closed_loop_schur(A1, A2, C, R1, R2, D1, D2):
    """``[[-(R1+R2)^-1, G], [G^T, -diag(R1, R2)]]`` with ``G = [A1+D1 C, A2+D2 C]``.

    Negative definite exactly when the closed loop passes :func:`lyapunov_check`.
    """
    G = np.hstack([A1 + D1 @ C, A2 + D2 @ C])
    Q = np.linalg.inv(R1 + R2)
    return _sym(np.block([[-Q, G], [G.T, -scipy.linalg.block_diag(R1, R2)]]))


# ---------------------------------------------------------------------------
# semidefinite engine


@dataclass(frozen=True)
class Variable:
    """Unknown matrix: ``kind`` is ``"sym"`` (shape n x n) or ``"rect"``."""

    kind: str
    shape: tuple

    @property
    def size(self):
        if self.kind == "sym":
            n = self.shape[0]
            return n * (n + 1) // 2
        return int(np.prod(self.shape))

    def unpack(self, v):
        if self.kind == "sym":
            n = self.shape[0]
            X = np.zeros((n, n))
            X[np.triu_indices(n)] = v
            return X + np.triu(X, 1).T
        return np.asarray(v, dtype=float).reshape(self.shape)

    def pack(self, X):
        X = np.asarray(X, dtype=float)
        if self.kind == "sym":
            return _sym(X)[np.triu_indices(self.shape[0])]
        return X.reshape(-1)


def sym(n):
    return Variable("sym", (n, n))


def rect(rows, cols):
    return Variable("rect", (rows, cols))


@dataclass(eq=False)
class FeasibilityResult:
    feasible: bool
    values: dict
    t: float
    iterations: int
    message: str
    history: list = field(default_factory=list)


class _Layout:
    def __init__(self, unknowns):
        if not unknowns:
            raise ValueError("at least one unknown is required")
        self.unknowns = dict(unknowns)
        for name, var in self.unknowns.items():
            if not isinstance(var, Variable) or var.kind not in ("sym", "rect"):
                raise ValueError(f"unknown {name!r} must be a sym/rect Variable")
            if var.kind == "sym" and (len(var.shape) != 2 or var.shape[0] != var.shape[1]):
                raise ValueError(f"symmetric unknown {name!r} must be square")
        self.offsets = {}
        pos = 0
        for name, var in self.unknowns.items():
            self.offsets[name] = (pos, pos + var.size)
            pos += var.size
        self.size = pos

    def unpack(self, x):
        return {name: var.unpack(x[a:b])
                for (name, var), (a, b) in zip(self.unknowns.items(), self.offsets.values())}

    def pack(self, values):
        x = np.zeros(self.size)
        for name, var in self.unknowns.items():
            if name in values:
                a, b = self.offsets[name]
                x[a:b] = var.pack(values[name])
        return x


def _affine_terms(fn, layout, rng):
    """Extract ``F0`` and ``F_k`` from an affine matrix-valued callable."""
    x0 = np.zeros(layout.size)
    F0 = np.atleast_2d(np.asarray(fn(layout.unpack(x0)), dtype=float))
    m = F0.shape[0]
    if F0.shape != (m, m):
        raise ValueError(f"constraint must return a square matrix, got {F0.shape}")
    terms = np.empty((layout.size, m, m))
    for k in range(layout.size):
        e = np.zeros(layout.size)
        e[k] = 1.0
        Fk = np.asarray(fn(layout.unpack(e)), dtype=float)
        if Fk.shape != (m, m):
            raise ValueError("constraint changes shape with the unknowns")
        terms[k] = Fk - F0
    scale = max(1.0, np.abs(F0).max(), np.abs(terms).max() if terms.size else 0.0)
    for X in (F0, *terms):
        if np.abs(X - X.T).max() > 1e-9 * scale:
            raise ValueError("constraint is not symmetric")
    z = rng.normal(size=layout.size)
    lhs = np.asarray(fn(layout.unpack(z)), dtype=float)
    rhs = F0 + np.tensordot(z, terms, axes=1)
    if np.abs(lhs - rhs).max() > 1e-8 * scale * (1 + np.abs(z).sum()):
        raise ValueError("constraint is not affine in the unknowns")
    return _sym(F0), np.array([_sym(T) for T in terms])


def sdp_feasibility(constraints, unknowns, bounds=(), start=None,
                    margin_min=MARGIN_MIN, max_iter=MAX_ITER, stop_early=True):
    """Search for unknowns making every constraint negative definite.

    Parameters
    ----------
    constraints : list of callables
        Each maps a dict of unknown matrices to a symmetric matrix ``F(x)``;
        the aim is ``F(x) < 0``. Maps must be affine.
    unknowns : dict
        Name to :class:`Variable` (see :func:`sym` and :func:`rect`).
    bounds : list of callables, optional
        Affine maps ``G(x)`` kept strictly negative throughout; the start
        point must satisfy them.
    start : dict, optional
        Initial values (missing unknowns start at zero).
    margin_min : float
        Success threshold: the point is accepted once ``max eig F(x) < -margin_min``.
    stop_early : bool
        Return at the first point meeting the margin. Otherwise keep
        minimizing the largest eigenvalue until the barrier gap is small.

    Returns
    -------
    FeasibilityResult
    """
    if not constraints:
        raise ValueError("at least one constraint is required")
    layout = _Layout(unknowns)
    rng = np.random.default_rng(12345)
    blocks = [_affine_terms(fn, layout, rng) for fn in constraints]
    bnds = [_affine_terms(fn, layout, rng) for fn in bounds]
    N = layout.size

    x = layout.pack(start or {})
    for G0, Gk in bnds:
        if np.linalg.eigvalsh(G0 + np.tensordot(x, Gk, axes=1)).max() >= 0:
            raise ValueError("start point violates a bound constraint")

    def lam_max(x):
        return max(np.linalg.eigvalsh(F0 + np.tensordot(x, Fk, axes=1)).max()
                   for F0, Fk in blocks)

    t = lam_max(x) + 1.0
    z = np.append(x, t)
    n_barrier = sum(F0.shape[0] for F0, _ in blocks) + sum(G0.shape[0] for G0, _ in bnds)

    # derivative of each slack with respect to z = (x, t)
    slack_defs = []
    for F0, Fk in blocks:
        m = F0.shape[0]
        dS = np.concatenate([-Fk, np.eye(m)[None]], axis=0)
        slack_defs.append((lambda z, F0=F0, Fk=Fk: z[-1] * np.eye(F0.shape[0])
                           - F0 - np.tensordot(z[:-1], Fk, axes=1), dS))
    for G0, Gk in bnds:
        m = G0.shape[0]
        dS = np.concatenate([-Gk, np.zeros((1, m, m))], axis=0)
        slack_defs.append((lambda z, G0=G0, Gk=Gk: -G0 - np.tensordot(z[:-1], Gk, axes=1),
                           dS))

    def chol_all(z):
        out = []
        for S_of, _ in slack_defs:
            try:
                out.append(np.linalg.cholesky(_sym(S_of(z))))
            except np.linalg.LinAlgError:
                return None
        return out

    def value(z, s, chols):
        return s * z[-1] - sum(2 * np.log(np.diag(L)).sum() for L in chols)

    history = []
    s = 1.0
    iters = 0
    message = "iteration budget exhausted"
    chols = chol_all(z)
    while iters < max_iter:
        # centering by damped Newton
        for _ in range(50):
            if iters >= max_iter:
                break
            iters += 1
            g = np.zeros(N + 1)
            g[-1] = s
            H = np.zeros((N + 1, N + 1))
            for L, (_, dS) in zip(chols, slack_defs):
                Li = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
                Gh = np.einsum("ab,kbc,dc->kad", Li, dS, Li)
                g -= np.trace(Gh, axis1=1, axis2=2)
                flat = Gh.reshape(N + 1, -1)
                H += flat @ flat.T
            step = -np.linalg.lstsq(H, g, rcond=1e-13)[0]
            decrement = -g @ step
            alpha = 1.0
            f0 = value(z, s, chols)
            while alpha > 1e-12:
                cand = z + alpha * step
                cchol = chol_all(cand)
                if cchol is not None and value(cand, s, cchol) <= f0 - 0.25 * alpha * decrement:
                    break
                alpha *= 0.5
            else:
                cchol = None
            if cchol is None:
                break
            z, chols = cand, cchol
            history.append(float(z[-1]))
            if stop_early and z[-1] < -margin_min:
                break
            if decrement < 1e-10:
                break
        if stop_early and z[-1] < -margin_min:
            message = "strictly feasible point found"
            break
        if n_barrier / s < 1e-9:
            message = "barrier path converged"
            break
        s *= 8.0
    x = z[:-1]
    t_true = lam_max(x)
    feasible = bool(t_true < -margin_min)
    if not feasible and message != "iteration budget exhausted":
        message = f"no strictly feasible point: best max eigenvalue {t_true:.3g}"
    return FeasibilityResult(feasible, layout.unpack(x), float(t_true), iters, message, history)


# ---------------------------------------------------------------------------
# Lyapunov-type problems


def projected_feasibility(A1, A2, C, margin_min=MARGIN_MIN, max_iter=MAX_ITER):
    """Find ``R1, R2 > 0`` with ``W_cd^T A_c W_cd < 0``.

    The scale of ``R`` is fixed by ``R_i <= I``. Raises
    :class:`InfeasibleLMI` when no strictly feasible pair is found.
    """
    A1 = np.asarray(A1, dtype=float)
    A2 = np.asarray(A2, dtype=float)
    n = A1.shape[0]
    Wc = _ker_basis(C)
    I = np.eye(n)
    if Wc.shape[1] == 0:
        return LyapunovCertificate(0.5 * I, 0.5 * I, np.inf)
    Wcd = scipy.linalg.block_diag(Wc, Wc)

    def projected(v):
        return Wcd.T @ lyapunov_matrix(A1, A2, v["R1"], v["R2"]) @ Wcd

    constraints = [projected, lambda v: -v["R1"], lambda v: -v["R2"]]
    bounds = [lambda v: v["R1"] - I, lambda v: v["R2"] - I]
    res = sdp_feasibility(constraints, {"R1": sym(n), "R2": sym(n)}, bounds=bounds,
                          start={"R1": 0.5 * I, "R2": 0.5 * I}, margin_min=margin_min,
                          max_iter=max_iter, stop_early=False)
    if not res.feasible:
        raise InfeasibleLMI(f"projected Lyapunov LMI: {res.message}", res)
    R1, R2 = res.values["R1"], res.values["R2"]
    lam = np.linalg.eigvalsh(projected_matrix(A1, A2, C, R1, R2)).max()
    return LyapunovCertificate(R1, R2, float(-lam))


def recover_gains(A1, A2, C, cert, margin_min=MARGIN_MIN, max_iter=MAX_ITER):
    """Observer gains ``D1, D2`` making ``(A1 + D1 C, A2 + D2 C)`` pass the Lyapunov test.

    Solves the Schur-complement form of the closed-loop inequality, affine
    in ``[D1 D2]``, with ``R1, R2`` taken from ``cert``.
    """
    A1 = np.asarray(A1, dtype=float)
    A2 = np.asarray(A2, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n, q = A1.shape[0], C.shape[0]
    R1, R2 = cert.R1, cert.R2
    Q = np.linalg.inv(R1 + R2)
    R = scipy.linalg.block_diag(R1, R2)

    def schur(v):
        D1, D2 = v["D"][:, :q], v["D"][:, q:]
        G = np.hstack([A1 + D1 @ C, A2 + D2 @ C])
        return np.block([[-Q, G], [G.T, -R]])

    # scale-free gain bound keeps the barrier problem bounded
    scale = 1e3 * (1 + np.abs(A1).max() + np.abs(A2).max())
    bound = [lambda v: np.block([[-scale * np.eye(n), v["D"]],
                                 [v["D"].T, -scale * np.eye(2 * q)]])]
    res = sdp_feasibility([schur], {"D": rect(n, 2 * q)}, bounds=bound,
                          margin_min=margin_min, max_iter=max_iter, stop_early=False)
    D1, D2 = res.values["D"][:, :q], res.values["D"][:, q:]
    ok, margin = lyapunov_check(A1 + D1 @ C, A2 + D2 @ C, R1, R2)
    if not ok:
        raise InfeasibleLMI(
            f"gain recovery failed: closed-loop margin {margin:.3g} ({res.message})", res)
    return D1, D2

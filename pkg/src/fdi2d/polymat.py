"""Bivariate polynomial matrices and rank tests on C^2.

A :class:`BivarPolyMatrix` stores its coefficients as an array of shape
``(rows, cols, d1, d2)`` where ``coeffs[:, :, a, b]`` multiplies
``z1**a * z2**b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .subspace import default_rank_tol, numerical_rank

# z-sampling used by the drop-point search
RADII = (0.25, 0.5, 1.0, 2.0, 4.0)
POINTS_PER_CIRCLE = 64
RANDOM_DRAWS = 200
_ZERO_EPS = 1e-12
# eigenvalues beyond this modulus come from singular leading coefficients
_MAX_MODULUS = 1e6


def _trim(c):
    c = np.asarray(c)
    if c.ndim != 2:
        raise ValueError("coefficient table must be 2D")
    d1, d2 = c.shape[-2:]
    while d1 > 1 and not np.any(c[..., d1 - 1, :]):
        d1 -= 1
    while d2 > 1 and not np.any(c[..., :, d2 - 1]):
        d2 -= 1
    return c[..., :d1, :d2]


def _pad_to(c, d1, d2):
    out = np.zeros(c.shape[:-2] + (d1, d2), dtype=np.result_type(c, float))
    out[..., :c.shape[-2], :c.shape[-1]] = c
    return out


def _conv2(a, b):
    """Coefficient table of the product of two bivariate polynomials."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1),
                   dtype=np.result_type(a, b, float))
    for i in range(b.shape[0]):
        for j in range(b.shape[1]):
            if b[i, j] != 0:
                out[i:i + a.shape[0], j:j + a.shape[1]] += b[i, j] * a
    return out


class BivarPoly:
    """Polynomial in two variables with real or complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_2d(np.asarray(coeffs))
        if not np.issubdtype(c.dtype, np.inexact):
            c = c.astype(float)
        self.coeffs = _trim(c)

    @classmethod
    def constant(cls, value):
        return cls([[value]])

    @classmethod
    def z1(cls):
        return cls([[0.0], [1.0]])

    @classmethod
    def z2(cls):
        return cls([[0.0, 1.0]])

    def _coerce(self, other):
        if isinstance(other, BivarPoly):
            return other
        return BivarPoly.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        d1 = max(self.coeffs.shape[0], other.coeffs.shape[0])
        d2 = max(self.coeffs.shape[1], other.coeffs.shape[1])
        return BivarPoly(_pad_to(self.coeffs, d1, d2) + _pad_to(other.coeffs, d1, d2))

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return BivarPoly(_conv2(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __call__(self, z1, z2):
        return np.polynomial.polynomial.polyval2d(z1, z2, self.coeffs)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    def is_zero(self, tol=0.0):
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def __repr__(self):
        terms = []
        for (a, b), c in np.ndenumerate(self.coeffs):
            if c != 0:
                terms.append(f"{c:g}*z1^{a}*z2^{b}")
        return "BivarPoly(" + (" + ".join(terms) or "0") + ")"


class BivarPolyMatrix:
    """Matrix with bivariate polynomial entries."""

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        if c.ndim != 4:
            raise ValueError("coefficients must have shape (rows, cols, d1, d2)")
        if not np.issubdtype(c.dtype, np.inexact):
            c = c.astype(float)
        d1, d2 = c.shape[2], c.shape[3]
        while d1 > 1 and not np.any(c[:, :, d1 - 1, :]):
            d1 -= 1
        while d2 > 1 and not np.any(c[:, :, :, d2 - 1]):
            d2 -= 1
        self.coeffs = c[:, :, :d1, :d2]

    @classmethod
    def from_entries(cls, rows):
        rows = [[e if isinstance(e, BivarPoly) else BivarPoly.constant(e) for e in row]
                for row in rows]
        ncols = {len(r) for r in rows}
        if len(ncols) != 1:
            raise ValueError("rows have different lengths")
        d1 = max(e.coeffs.shape[0] for r in rows for e in r)
        d2 = max(e.coeffs.shape[1] for r in rows for e in r)
        dtype = np.result_type(*[e.coeffs for r in rows for e in r])
        c = np.zeros((len(rows), ncols.pop(), d1, d2), dtype=dtype)
        for i, r in enumerate(rows):
            for j, e in enumerate(r):
                c[i, j, :e.coeffs.shape[0], :e.coeffs.shape[1]] = e.coeffs
        return cls(c)

    @classmethod
    def from_terms(cls, terms, shape=None):
        """Build from ``{(a, b): matrix}`` meaning ``sum matrix * z1^a z2^b``."""
        terms = {k: np.atleast_2d(np.asarray(v)) for k, v in terms.items()}
        if shape is None:
            shape = next(iter(terms.values())).shape
        d1 = max(a for a, _ in terms) + 1
        d2 = max(b for _, b in terms) + 1
        dtype = np.result_type(float, *terms.values())
        c = np.zeros(shape + (d1, d2), dtype=dtype)
        for (a, b), v in terms.items():
            if v.shape != shape:
                raise ValueError(f"term {(a, b)} has shape {v.shape}, expected {shape}")
            c[:, :, a, b] = v
        return cls(c)

    @property
    def shape(self):
        return self.coeffs.shape[:2]

    @property
    def degree(self):
        return self.coeffs.shape[2] - 1, self.coeffs.shape[3] - 1

    def entry(self, i, j):
        return BivarPoly(self.coeffs[i, j])

    def __matmul__(self, other):
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        a, b = self.coeffs, other.coeffs
        d1 = a.shape[2] + b.shape[2] - 1
        d2 = a.shape[3] + b.shape[3] - 1
        out = np.zeros((a.shape[0], b.shape[1], d1, d2), dtype=np.result_type(a, b))
        for i in range(b.shape[2]):
            for j in range(b.shape[3]):
                blk = b[:, :, i, j]
                if not np.any(blk):
                    continue
                out[:, :, i:i + a.shape[2], j:j + a.shape[3]] += np.einsum(
                    "ikab,kj->ijab", a, blk)
        return BivarPolyMatrix(out)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        d1 = max(self.coeffs.shape[2], other.coeffs.shape[2])
        d2 = max(self.coeffs.shape[3], other.coeffs.shape[3])
        return BivarPolyMatrix(_pad_to(self.coeffs, d1, d2) + _pad_to(other.coeffs, d1, d2))

    def __sub__(self, other):
        return self + BivarPolyMatrix(-other.coeffs)

    def __call__(self, z1, z2):
        """Evaluate at the point ``(z1, z2)``."""
        d1, d2 = self.coeffs.shape[2:]
        p1 = np.power(complex(z1), np.arange(d1)) if d1 > 1 else np.ones(1)
        p2 = np.power(complex(z2), np.arange(d2)) if d2 > 1 else np.ones(1)
        val = np.einsum("ijab,a,b->ij", self.coeffs, p1, p2)
        if np.isrealobj(self.coeffs) and np.isreal(z1) and np.isreal(z2):
            return val.real
        return val

    evaluate = __call__

    def permute_rows(self, perm):
        return BivarPolyMatrix(self.coeffs[list(perm)])

    def vstack(self, other):
        if self.shape[1] != other.shape[1]:
            raise ValueError("column counts differ")
        d1 = max(self.coeffs.shape[2], other.coeffs.shape[2])
        d2 = max(self.coeffs.shape[3], other.coeffs.shape[3])
        return BivarPolyMatrix(np.concatenate(
            [_pad_to(self.coeffs, d1, d2), _pad_to(other.coeffs, d1, d2)], axis=0))

    def is_zero(self, tol=1e-10):
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def coefficients_in_z1(self, z2):
        """Matrices ``Q_a`` with ``P(z1, z2) = sum_a Q_a z1**a`` for fixed ``z2``."""
        p2 = np.power(complex(z2), np.arange(self.coeffs.shape[3]))
        return np.einsum("ijab,b->aij", self.coeffs, p2)

    def swap_variables(self):
        return BivarPolyMatrix(np.swapaxes(self.coeffs, 2, 3))

    def to_json(self):
        if np.iscomplexobj(self.coeffs):
            raise ValueError("only real polynomial matrices serialise to JSON")
        rows, cols = self.shape
        return {
            "rows": rows,
            "cols": cols,
            "entries": [[_trim(self.coeffs[i, j]).tolist() for j in range(cols)]
                        for i in range(rows)],
        }

    @classmethod
    def from_json(cls, doc):
        try:
            entries = doc["entries"]
            rows = [[BivarPoly(np.asarray(c, dtype=float)) for c in row] for row in entries]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial matrix document: {exc}") from exc
        P = cls.from_entries(rows)
        if "rows" in doc and "cols" in doc and P.shape != (doc["rows"], doc["cols"]):
            raise ValueError(f"declared shape {(doc['rows'], doc['cols'])} != {P.shape}")
        return P

    def __repr__(self):
        return f"BivarPolyMatrix(shape={self.shape}, degree={self.degree})"


def pbh(model):
    """``[I - z1 A1 - z2 A2; C]`` for a 2D model."""
    if model.k != 2:
        raise ValueError("the PBH matrix is defined here for k = 2 models")
    n, q = model.n, model.q
    A1, A2 = model.shift_ops
    zq = np.zeros((q, n))
    return BivarPolyMatrix.from_terms({
        (0, 0): np.vstack([np.eye(n), model.C]),
        (1, 0): np.vstack([-A1, zq]),
        (0, 1): np.vstack([-A2, zq]),
    })


def rank_at(P, z1, z2, tol=None):
    """Numerical rank of ``P(z1, z2)``."""
    val = np.asarray(P(z1, z2))
    if val.size == 0:
        return 0
    s = np.linalg.svd(val, compute_uv=False)
    return numerical_rank(s, val.shape, tol if tol is not None else default_rank_tol())


def verify_annihilator(N, P, tol=1e-10):
    """True iff ``N(z1, z2) P(z1, z2)`` is the zero polynomial matrix."""
    if N.shape[1] != P.shape[0]:
        raise ValueError(f"cannot multiply {N.shape} by {P.shape}")
    return (N @ P).is_zero(tol)


@dataclass(frozen=True)
class RankVerdict:
    """Outcome of a sampled rank search.

    ``full_rank`` is one-sided: ``False`` always comes with a ``witness``
    point that re-verifies through :func:`rank_at`; ``True`` means no drop
    was found on the sampled set.
    """

    full_rank: bool
    witness: Optional[tuple]
    witness_rank: Optional[int]
    target_rank: int
    samples: int

    @property
    def prime(self):
        return self.full_rank


def _polyeig_z1(Q):
    """Finite eigenvalues of the square polynomial matrix ``sum_a Q[a] z**a``."""
    deg = Q.shape[0] - 1
    c = Q.shape[1]
    while deg > 0 and not np.any(Q[deg]):
        deg -= 1
    if deg == 0:
        return np.array([], dtype=complex)
    if deg == 1:
        vals = scipy.linalg.eigvals(Q[0], -Q[1])
    else:
        # block companion linearisation
        size = deg * c
        A = np.zeros((size, size), dtype=complex)
        B = np.eye(size, dtype=complex)
        A[: size - c, c:] = np.eye(size - c)
        for a in range(deg):
            A[size - c:, a * c:(a + 1) * c] = -Q[a]
        B[size - c:, size - c:] = Q[deg]
        vals = scipy.linalg.eigvals(A, B)
    return vals[np.isfinite(vals)]


def _z_samples(rng, include_zero, draws):
    pts = []
    for r in RADII:
        theta = 2 * np.pi * np.arange(POINTS_PER_CIRCLE) / POINTS_PER_CIRCLE
        pts.extend(r * np.exp(1j * theta))
    pts.extend(rng.normal(size=draws) * 2 + 1j * rng.normal(size=draws) * 2)
    if include_zero:
        pts.append(0.0)
    return np.asarray(pts, dtype=complex)


def _search_drops(P, target, punctured, rng, draws):
    """Look for ``(z1, z2)`` where ``rank P < target``.

    For each sampled ``z2`` (and, swapping roles, each sampled ``z1``) the
    polynomial matrix in the other variable is compressed to a square one by
    a random left factor; its polynomial eigenvalues are the only candidate
    drop points, and each candidate is re-checked on the full matrix.
    """
    rows, cols = P.shape
    samples = 0
    for orientation in (0, 1):
        M = P if orientation == 0 else P.swap_variables()
        U = rng.normal(size=(cols, rows)) + 1j * rng.normal(size=(cols, rows))
        for fixed in _z_samples(rng, include_zero=not punctured, draws=draws):
            samples += 1
            Q = np.einsum("cr,ark->ack", U, M.coefficients_in_z1(fixed))
            probe = complex(rng.normal(), rng.normal())
            cands = list(_polyeig_z1(Q))
            cands.append(probe)
            if not punctured:
                cands.append(0.0)
            for free in cands:
                if abs(free) > _MAX_MODULUS:
                    continue
                if punctured and (abs(free) < _ZERO_EPS or abs(fixed) < _ZERO_EPS):
                    continue
                point = (complex(free), complex(fixed)) if orientation == 0 \
                    else (complex(fixed), complex(free))
                r = rank_at(P, *point)
                if r < target:
                    return point, r, samples
    return None, None, samples


def zero_prime_check(P, mode="zero_prime", seed=0, draws=RANDOM_DRAWS):
    """Search for a rank drop of ``P`` (``rows >= cols``).

    ``mode="zero_prime"`` searches all of C^2; ``mode="monomic"`` only
    points with both coordinates nonzero.
    """
    if mode not in ("zero_prime", "monomic"):
        raise ValueError(f"mode must be 'zero_prime' or 'monomic', not {mode!r}")
    rows, cols = P.shape
    if cols > rows:
        raise ValueError("zero_prime_check needs at least as many rows as columns")
    rng = np.random.default_rng(seed)
    witness, r, samples = _search_drops(P, cols, mode == "monomic", rng, draws)
    return RankVerdict(witness is None, witness, r, cols, samples)


def fault_direction_matrix(L1, L2, q):
    """``[z1 L1 + z2 L2; 0_{q x p}]`` as a polynomial matrix."""
    L1 = np.atleast_2d(np.asarray(L1, dtype=float))
    L2 = np.atleast_2d(np.asarray(L2, dtype=float))
    if L1.shape != L2.shape:
        raise ValueError("L1 and L2 must have the same shape")
    zq = np.zeros((q, L1.shape[1]))
    return BivarPolyMatrix.from_terms({
        (0, 0): np.vstack([np.zeros_like(L1), zq]),
        (1, 0): np.vstack([L1, zq]),
        (0, 1): np.vstack([L2, zq]),
    })


def isolability_rank_condition(N, L1, L2, samples=RANDOM_DRAWS, seed=0):
    """Check ``rank N(z1,z2) [z1 L1 + z2 L2; 0] = p`` on sampled points of (C-{0})^2.

    ``N`` is a user-supplied left annihilator of the PBH matrix.
    """
    L1 = np.atleast_2d(np.asarray(L1, dtype=float))
    p = L1.shape[1]
    q = N.shape[1] - L1.shape[0]
    if q < 0:
        raise ValueError("annihilator has fewer columns than the state dimension")
    G = N @ fault_direction_matrix(L1, L2, q)
    rng = np.random.default_rng(seed)
    if G.shape[0] < p:
        return RankVerdict(False, (1.0 + 0j, 1.0 + 0j), rank_at(G, 1.0, 1.0), p, 0)
    witness, r, count = _search_drops(G, p, True, rng, samples)
    return RankVerdict(witness is None, witness, r, p, count)

"""Subspace algebra over R^n.

Every subspace is carried as an orthonormal column basis. All rank
decisions go through :func:`numerical_rank`, so one tolerance policy governs
images, kernels, sums and intersections alike.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

DEFAULT_RANK_TOL = 1e-10
ANGLE_TOL = 1e-8


def default_rank_tol():
    """Relative rank tolerance, overridable through ``FDI2D_TOL``."""
    env = os.environ.get("FDI2D_TOL")
    if env:
        return float(env)
    return DEFAULT_RANK_TOL


def _as_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {A.shape}")
    return A


def numerical_rank(s, shape, tol=None, scale=0.0):
    """Count singular values above ``tol * max(s_max, scale) * max(shape)``.

    ``scale`` guards products such as ``U^T A`` whose entries are pure
    roundoff: their rank is judged against the size of ``A``.
    """
    if tol is None:
        tol = default_rank_tol()
    s = np.asarray(s)
    if s.size == 0:
        return 0
    ref = max(s[0], scale)
    if ref == 0.0:
        return 0
    return int(np.sum(s > tol * ref * max(shape)))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of R^n stored as an orthonormal basis (n x d)."""

    basis: np.ndarray
    tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        b = _as_matrix(self.basis)
        if b.shape[0] == 0:
            raise ValueError("ambient dimension must be positive")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def __len__(self):
        return self.dim

    def is_zero(self):
        return self.dim == 0

    def is_full(self):
        return self.dim == self.ambient_dim

    def projector(self):
        return self.basis @ self.basis.T

    def orthogonal_complement(self):
        return kernel(self.basis.T, tol=self.tol)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return equal(self, other)

    def __hash__(self):
        return hash((self.ambient_dim, self.dim))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def zero(n, tol=None):
    return Subspace(np.zeros((n, 0)), tol=default_rank_tol() if tol is None else tol)


def full(n, tol=None):
    return Subspace(np.eye(n), tol=default_rank_tol() if tol is None else tol)


def span(*vectors, tol=None):
    """Span of the given column vectors (or matrices)."""
    cols = [_as_matrix(v) for v in vectors]
    return image(np.hstack(cols), tol=tol)


def image(A, tol=None, scale=0.0):
    """Column space of ``A`` with an orthonormal basis."""
    A = _as_matrix(A)
    tol = default_rank_tol() if tol is None else tol
    n = A.shape[0]
    if A.shape[1] == 0:
        return Subspace(np.zeros((n, 0)), tol=tol)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    r = numerical_rank(s, A.shape, tol, scale)
    return Subspace(u[:, :r], tol=tol)


def kernel(A, tol=None, scale=0.0):
    """Null space of ``A`` with an orthonormal basis."""
    A = _as_matrix(A)
    tol = default_rank_tol() if tol is None else tol
    n = A.shape[1]
    if A.shape[0] == 0:
        return Subspace(np.eye(n), tol=tol)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    r = numerical_rank(s, A.shape, tol, scale)
    return Subspace(vh[r:].T, tol=tol)


def _check_same_ambient(V, W):
    if V.ambient_dim != W.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {V.ambient_dim} vs {W.ambient_dim}")


def sum(V, W):  # noqa: A001 - mirrors the lattice operation name
    """Smallest subspace containing both ``V`` and ``W``."""
    _check_same_ambient(V, W)
    return image(np.hstack([V.basis, W.basis]), tol=min(V.tol, W.tol), scale=1.0)


def intersect(V, W):
    """Largest subspace contained in both ``V`` and ``W``.

    Computed as the kernel of the stacked orthogonal-complement bases.
    """
    _check_same_ambient(V, W)
    tol = min(V.tol, W.tol)
    if V.is_zero() or W.is_zero():
        return zero(V.ambient_dim, tol)
    stacked = np.vstack([V.orthogonal_complement().basis.T,
                         W.orthogonal_complement().basis.T])
    return kernel(stacked, tol=tol, scale=1.0)


def preimage(A, V):
    """``{x : A x in V}``."""
    A = _as_matrix(A)
    if A.shape[0] != V.ambient_dim:
        raise ValueError(
            f"map has {A.shape[0]} rows but subspace lives in R^{V.ambient_dim}")
    comp = V.orthogonal_complement().basis
    if comp.shape[1] == 0:
        return full(A.shape[1], V.tol)
    return kernel(comp.T @ A, tol=V.tol, scale=np.linalg.norm(A, 2))


def apply(A, V):
    """Image of ``V`` under ``A``."""
    A = _as_matrix(A)
    if A.shape[1] != V.ambient_dim:
        raise ValueError("dimension mismatch between map and subspace")
    return image(A @ V.basis, tol=V.tol, scale=np.linalg.norm(A, 2))


def contains(V, W, tol=ANGLE_TOL):
    """True iff ``W`` is a subspace of ``V`` (within ``tol``)."""
    _check_same_ambient(V, W)
    if W.is_zero():
        return True
    if V.is_zero():
        return False
    resid = W.basis - V.basis @ (V.basis.T @ W.basis)
    return bool(np.max(np.linalg.norm(resid, axis=0)) < tol)


def contains_vector(V, x, tol=ANGLE_TOL):
    x = np.asarray(x, dtype=float).ravel()
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return True
    resid = x - V.basis @ (V.basis.T @ x)
    return bool(np.linalg.norm(resid) / nrm < tol)


def max_angle(V, W):
    """Largest principal angle between ``V`` and ``W`` (pi/2 if dims differ)."""
    _check_same_ambient(V, W)
    if V.dim != W.dim:
        return np.pi / 2
    if V.dim == 0:
        return 0.0
    return float(np.max(subspace_angles(V.basis, W.basis)))


def equal(V, W, tol=ANGLE_TOL):
    if V.ambient_dim != W.ambient_dim or V.dim != W.dim:
        return False
    return max_angle(V, W) < tol


def complement_in(V, W):
    """Orthogonal complement of ``W`` inside ``V``; requires ``W ⊆ V``."""
    _check_same_ambient(V, W)
    if not contains(V, W):
        raise ValueError("complement_in requires W to be contained in V")
    if W.is_zero():
        return V
    # Coordinates of V-vectors orthogonal to W.
    coords = kernel(W.basis.T @ V.basis, tol=V.tol, scale=1.0).basis
    return image(V.basis @ coords, tol=V.tol, scale=1.0)


def canonical_projection(S):
    """Orthonormal-row matrix ``P`` with ``ker P = S``.

    ``P`` has shape ``(n - dim S, n)`` and satisfies ``P P^T = I``.
    """
    return S.orthogonal_complement().basis.T.copy()

"""Invariant, conditioned-invariant and unobservability subspaces.

All algorithms take the list of shift operators from the model, so the same
code covers single-shift (k = 1), FMII (k = 2) and 3D (k = 3) systems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import subspace as ss


class NotConditionedInvariant(ValueError):
    """Raised when a subspace fails A_i(W ∩ ker C) ⊆ W for some i."""


@dataclass(frozen=True, eq=False)
class TransitionPowers:
    """Table of the transition matrices A^(i,j) (or A^(i,j,l) for k = 3)."""

    table: dict
    depth: int

    def __getitem__(self, index):
        index = tuple(index)
        if any(i < 0 for i in index):
            n = next(iter(self.table.values())).shape[0]
            return np.zeros((n, n))
        return self.table[index]

    def __iter__(self):
        return iter(self.table)

    def __len__(self):
        return len(self.table)


def transition_powers(model, depth):
    """All A^alpha with ``|alpha| < depth`` by the 2D (kD) recursion.

    ``A^0 = I`` and ``A^alpha = sum_i A_i A^(alpha - e_i)`` with terms of
    negative index dropped.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    k, n = model.k, model.n
    table = {}
    for total in range(depth):
        for alpha in _compositions(total, k):
            if total == 0:
                table[alpha] = np.eye(n)
                continue
            acc = np.zeros((n, n))
            for i, A in enumerate(model.shift_ops):
                if alpha[i] == 0:
                    continue
                prev = list(alpha)
                prev[i] -= 1
                acc += A @ table[tuple(prev)]
            table[alpha] = acc
    return TransitionPowers(table, depth)


def _compositions(total, k):
    """All k-tuples of nonnegative integers summing to ``total``."""
    if k == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def finite_unobservable(model):
    """Kernel of the finite observability matrix built from C A^(i,j), i+j < n."""
    powers = transition_powers(model, model.n)
    O = np.vstack([model.C @ powers[a] for a in powers])
    return ss.kernel(O, tol=model.rank_tol)


def operator_words(model, max_length):
    """Products A_{w1} ... A_{wl} over all words of length ``< max_length``."""
    n = model.n
    yield (), np.eye(n)
    for length in range(1, max_length):
        for word in itertools.product(range(model.k), repeat=length):
            P = np.eye(n)
            for w in word:
                P = P @ model.shift_ops[w]
            yield word, P


def invariant_unobservable(model, return_iterates=False):
    """Largest subspace of ker C invariant under every shift operator.

    Iterates ``V_0 = ker C``, ``V_k = ker C ∩ (∩_i A_i^{-1} V_{k-1})``.
    """
    V = model.ker_C()
    iterates = [V]
    for _ in range(model.n):
        nxt = V
        for A in model.shift_ops:
            nxt = ss.intersect(nxt, ss.preimage(A, V))
        iterates.append(nxt)
        if nxt.dim == V.dim:
            V = nxt
            break
        V = nxt
    return (V, iterates) if return_iterates else V


def is_invariant(V, ops):
    """True iff ``A V ⊆ V`` for every operator in ``ops``."""
    if V.is_zero() or V.is_full():
        return True
    return all(ss.contains(V, ss.apply(A, V)) for A in ops)


def is_conditioned_invariant(model, W):
    """Check ``A_i (W ∩ ker C) ⊆ W`` for every shift operator."""
    core = ss.intersect(W, model.ker_C())
    return all(ss.contains(W, ss.apply(A, core)) for A in model.shift_ops)


def min_conditioned_invariant(model, L, return_iterates=False):
    """Smallest conditioned invariant subspace containing ``L``.

    Non-decreasing iteration ``W^0 = L``,
    ``W^k = L + sum_i A_i (W^{k-1} ∩ ker C)``; stops once the dimension
    no longer grows (at most n steps).
    """
    kerC = model.ker_C()
    W = L
    iterates = [W]
    for _ in range(model.n + 1):
        core = ss.intersect(W, kerC)
        nxt = L
        for A in model.shift_ops:
            nxt = ss.sum(nxt, ss.apply(A, core))
        iterates.append(nxt)
        if nxt.dim == W.dim:
            W = nxt
            break
        W = nxt
    return (W, iterates) if return_iterates else W


def min_unobservability(model, L, return_iterates=False):
    """Smallest unobservability subspace containing ``L``.

    Non-increasing iteration ``Z^0 = R^n``,
    ``Z^k = W* + (ker C ∩ (∩_i A_i^{-1} Z^{k-1}))`` with ``W*`` the minimal
    conditioned invariant subspace containing ``L``.
    """
    Wstar = min_conditioned_invariant(model, L)
    kerC = model.ker_C()
    Z = ss.full(model.n, model.rank_tol)
    iterates = [Z]
    for _ in range(model.n + 1):
        core = kerC
        for A in model.shift_ops:
            core = ss.intersect(core, ss.preimage(A, Z))
        nxt = ss.sum(Wstar, core)
        iterates.append(nxt)
        if nxt.dim == Z.dim:
            Z = nxt
            break
        Z = nxt
    return (Z, iterates) if return_iterates else Z


def friend_maps(model, W):
    """Output injections ``D_i`` with ``(A_i + D_i C) W ⊆ W``.

    On the part of ``W`` outside ``ker C`` the injection cancels ``A_i``
    exactly; on the orthogonal complement of ``C W`` it is zero.
    """
    if W.ambient_dim != model.n:
        raise ValueError("subspace does not live in the state space")
    if not is_conditioned_invariant(model, W):
        raise NotConditionedInvariant(
            "subspace is not conditioned invariant: A_i(W ∩ ker C) ⊄ W")
    q, n = model.q, model.n
    if W.is_zero():
        return [np.zeros((n, q)) for _ in model.shift_ops]
    core = ss.intersect(W, model.ker_C())
    Wc = ss.complement_in(W, core).basis
    if Wc.shape[1] == 0:
        return [np.zeros((n, q)) for _ in model.shift_ops]
    CW = model.C @ Wc
    s = np.linalg.svd(CW, compute_uv=False)
    assert ss.numerical_rank(s, CW.shape, model.rank_tol) == Wc.shape[1], \
        "C must be injective on the complement of W ∩ ker C"
    pinv = np.linalg.pinv(CW)
    return [-(A @ Wc) @ pinv for A in model.shift_ops]


def measurement_maps(model, S):
    """Return ``(H, M, P)`` for an unobservability subspace ``S``.

    ``P`` is the canonical projection with kernel ``S``; the rows of ``H``
    span the orthogonal complement of ``C S`` inside the range of ``C``, so
    ``ker HC = S + ker C``;
    ``M`` is the unique solution of ``M P = H C``.
    """
    if not is_conditioned_invariant(model, S):
        raise NotConditionedInvariant("S is not conditioned invariant")
    P = ss.canonical_projection(S)
    CS = ss.image(model.C @ S.basis, tol=model.rank_tol, scale=np.linalg.norm(model.C, 2))
    rangeC = ss.image(model.C, tol=model.rank_tol)
    H = ss.complement_in(rangeC, CS).basis.T.copy()
    M = H @ model.C @ P.T
    return H, M, P

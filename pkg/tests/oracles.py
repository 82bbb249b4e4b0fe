"""Independent reference implementations used only by the tests.

They rely on scipy's orth/null_space rather than the library's subspace
helpers, and follow textbook characterizations instead of the library
iterations.
"""

import itertools

import numpy as np
from scipy.linalg import null_space, orth, subspace_angles

TOL = 1e-9


def same(U, V):
    """Column spaces of U and V coincide."""
    if U.shape[1] != V.shape[1]:
        return False
    if U.shape[1] == 0:
        return True
    return np.max(subspace_angles(U, V)) < 1e-7


def inside(U, V):
    """col(U) ⊆ col(V)."""
    if U.shape[1] == 0:
        return True
    if V.shape[1] == 0:
        return False
    Q = orth(V, rcond=TOL)
    return np.linalg.norm(U - Q @ (Q.T @ U)) < 1e-8 * max(1.0, np.linalg.norm(U))


def _orth(M, n):
    return orth(M, rcond=TOL) if M.size else np.zeros((n, 0))


def _null(M, n):
    return null_space(M, rcond=TOL) if M.size else np.eye(n)


def word_unobservable(ops, C, max_len):
    """∩ ker(C A_w) over all operator words with fewer than max_len letters."""
    n = C.shape[1]
    rows = [C]
    for length in range(1, max_len):
        for word in itertools.product(range(len(ops)), repeat=length):
            P = np.eye(n)
            for w in word:
                P = P @ ops[w]
            rows.append(C @ P)
    return _null(np.vstack(rows), n)


def max_controlled_invariant(A, B, K):
    """Largest (A, im B)-controlled invariant subspace inside col(K)."""
    n = A.shape[0]
    V = _orth(K, n)
    for _ in range(n + 1):
        # V_next = K ∩ A^{-1}(V + im B)
        T = _orth(np.hstack([V, B]), n)
        comp = _null(T.T, n)
        pre = _null(comp.T @ A, n)
        Kc = _null(_orth(K, n).T, n)
        nxt = _null(np.vstack([Kc.T, _null(pre.T, n).T]), n)
        if nxt.shape[1] == V.shape[1]:
            return nxt
        V = nxt
    return V


def min_conditioned_invariant_1d(A, C, L):
    """Duality: W* = (max (A^T, im C^T)-controlled invariant in L^perp)^perp."""
    n = A.shape[0]
    Lp = _null(_orth(L, n).T, n)
    V = max_controlled_invariant(A.T, C.T, Lp)
    return _null(V.T, n)


def min_unobservability_1d(A, C, L):
    """S* = unobservable subspace of (H C, A + D C) with D a friend of W*."""
    n = A.shape[0]
    W = min_conditioned_invariant_1d(A, C, L)
    kerC = _null(C, n)
    core = _null(np.vstack([_null(W.T, n).T, _null(kerC.T, n).T]), n)
    # complement of core inside W
    if core.shape[1]:
        Wc = _orth(W - core @ (core.T @ W), n)
    else:
        Wc = W
    D = -(A @ Wc) @ np.linalg.pinv(C @ Wc) if Wc.shape[1] else np.zeros((n, C.shape[0]))
    target = _orth(np.hstack([W, kerC]), n)
    HC = _null(target.T, n).T          # rows span (W + ker C)^perp
    Ad = A + D @ C
    O = np.vstack([HC @ np.linalg.matrix_power(Ad, k) for k in range(n)])
    return _null(O, n)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdi2d import invariants as inv
from fdi2d import subspace as ss
from fdi2d.model import FmiiModel
from fdi2d.systems import counterexample

from .conftest import random_model
from .oracles import (inside, min_conditioned_invariant_1d, min_unobservability_1d, same,
                      word_unobservable)

model_args = st.tuples(st.integers(0, 100_000), st.integers(2, 5), st.integers(1, 3))


def _model(args, k=2, sparse=True):
    seed, n, q = args
    return random_model(np.random.default_rng(seed), n, min(q, n), k=k, sparse=sparse)


def test_counterexample_subspaces():
    m = counterexample()
    L2 = m.fault_subspace(1)
    target = ss.span([0.0, 0, -1, 1])
    assert inv.min_conditioned_invariant(m, L2) == target
    assert inv.min_unobservability(m, L2) == target


def test_transition_powers_recursion():
    m = counterexample()
    T = inv.transition_powers(m, 4)
    A1, A2 = m.shift_ops
    np.testing.assert_allclose(T[1, 0], A1)
    np.testing.assert_allclose(T[0, 1], A2)
    np.testing.assert_allclose(T[1, 1], A1 @ A2 + A2 @ A1)
    np.testing.assert_allclose(T[2, 1], A1 @ T[1, 1] + A2 @ A1 @ A1)
    assert np.all(T[-1, 2] == 0)
    assert len(T) == 10


@settings(max_examples=50, deadline=None)
@given(model_args)
def test_iterations_are_monotone_and_terminate(args):
    m = _model(args)
    L = m.fault_subspace(0)
    W, Ws = inv.min_conditioned_invariant(m, L, return_iterates=True)
    for a, b in zip(Ws, Ws[1:]):
        assert ss.contains(b, a)
    assert len(Ws) - 1 <= m.n
    S, Ss = inv.min_unobservability(m, L, return_iterates=True)
    for a, b in zip(Ss, Ss[1:]):
        assert ss.contains(a, b)
    assert len(Ss) - 1 <= m.n + 1
    assert ss.contains(S, W) and ss.contains(W, L)
    assert inv.is_conditioned_invariant(m, W)
    assert inv.is_conditioned_invariant(m, S)


@settings(max_examples=50, deadline=None)
@given(model_args)
def test_invariant_unobservable_inside_finite_unobservable(args):
    m = _model(args)
    Ns = inv.invariant_unobservable(m)
    assert ss.contains(inv.finite_unobservable(m), Ns)
    assert ss.contains(m.ker_C(), Ns)
    assert inv.is_invariant(Ns, m.shift_ops)


@settings(max_examples=50, deadline=None)
@given(model_args, st.integers(1, 3))
def test_invariant_unobservable_equals_word_intersection(args, k):
    m = _model(args, k=k)
    ref = word_unobservable(m.shift_ops, m.C, m.n)
    assert same(inv.invariant_unobservable(m).basis, ref)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 3))
def test_single_shift_matches_classical_algorithms(seed, q):
    m = random_model(np.random.default_rng(seed), 5, q, k=1, sparse=True)
    A, C, L = m.shift_ops[0], m.C, m.faults[0].signatures[0]
    W = inv.min_conditioned_invariant(m, m.fault_subspace(0))
    S = inv.min_unobservability(m, m.fault_subspace(0))
    assert same(W.basis, min_conditioned_invariant_1d(A, C, L))
    assert same(S.basis, min_unobservability_1d(A, C, L))


@settings(max_examples=50, deadline=None)
@given(model_args)
def test_friend_maps_make_subspace_invariant(args):
    m = _model(args)
    for L in (m.fault_subspace(0), m.fault_subspace(1)):
        for V in (inv.min_conditioned_invariant(m, L), inv.min_unobservability(m, L)):
            D = inv.friend_maps(m, V)
            assert inv.is_invariant(V, [A + Di @ m.C for A, Di in zip(m.shift_ops, D)])


@settings(max_examples=50, deadline=None)
@given(model_args)
def test_measurement_maps(args):
    m = _model(args)
    S = inv.min_unobservability(m, m.fault_subspace(1))
    H, M, P = inv.measurement_maps(m, S)
    assert np.linalg.norm(M @ P - H @ m.C) < 1e-10
    assert np.linalg.norm(H @ m.C @ S.basis) < 1e-10
    assert ss.kernel(H @ m.C) == ss.sum(S, m.ker_C())


def test_friend_maps_reject_non_conditioned_invariant():
    swap = np.array([[0.0, 1], [1, 0]])
    m = FmiiModel.from_matrices([swap, swap], C=np.array([[1.0, 0]]))
    with pytest.raises(inv.NotConditionedInvariant):
        inv.friend_maps(m, ss.span([0.0, 1]))


def test_full_signature_gives_full_space():
    m = counterexample()
    F = ss.full(4)
    assert inv.min_conditioned_invariant(m, F).is_full()
    assert inv.min_unobservability(m, F).is_full()


def test_three_operator_word_enumeration():
    rng = np.random.default_rng(3)
    m = random_model(rng, 4, 1, k=3, sparse=True)
    words = list(inv.operator_words(m, 3))
    assert len(words) == 1 + 3 + 9


def test_one_dimensional_heat_exchanger_is_not_isolable():
    from fdi2d.pde import ode1d_model
    from fdi2d.synthesis import isolability

    m = ode1d_model(3)
    assert m.k == 1
    assert not any(isolability(m).isolable.values())
    last = m.faults_subspace([m.fault_index("f1_3"), m.fault_index("f2_3")])
    W = inv.min_conditioned_invariant(m, m.fault_subspace(m.fault_index("f2_3")))
    assert W == last

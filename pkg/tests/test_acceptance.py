"""Acceptance criteria 1-9, one recorded verdict per criterion part."""

import functools
import time

import numpy as np
import pytest

from fdi2d import invariants as inv
from fdi2d import lmi
from fdi2d import polymat as pm
from fdi2d import sim
from fdi2d import subspace as ss
from fdi2d import synthesis as sy
from fdi2d import systems
from fdi2d.bundles import (HE_A1P, HE_A2P, HE_DO1, HE_DO2, HE_FULL_D1, HE_FULL_D2, HE_M,
                           HE_R1, HE_R2)
from fdi2d.model import Fault, FmiiModel
from fdi2d.pde import heat_exchanger, ode1d_model

from .conftest import ACCEPTANCE, isolable_models, random_model
from .oracles import (inside, min_conditioned_invariant_1d, min_unobservability_1d, same,
                      word_unobservable)

TITLES = {
    1: "counterexample pipeline",
    2: "PBH evidence",
    3: "heat exchanger, full measurement",
    4: "heat exchanger, partial measurement and 1D contrast",
    5: "scenario simulations",
    6: "decoupling property suite",
    7: "oracle equivalence suite",
    8: "genericity fixture",
    9: "3D algebra",
}


def criterion(number, part):
    """Record the outcome of a test as one part of an acceptance criterion."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            parts = ACCEPTANCE.setdefault(number, (TITLES[number], []))[1]
            try:
                fn(*args, **kwargs)
            except BaseException:
                parts.append((part, False))
                print(f"criterion {number} [{part}]: FAIL")
                raise
            parts.append((part, True))
            print(f"criterion {number} [{part}]: PASS")
        return run
    return wrap


def _signatures(model):
    return (np.hstack([f.signatures[0] for f in model.faults]),
            np.hstack([f.signatures[1] for f in model.faults]))


# ---------------------------------------------------------------------------
# 1


@criterion(1, "subspaces, verdicts, friend maps, H; under 1 s")
def test_criterion_1_counterexample_pipeline():
    t0 = time.perf_counter()
    m = systems.counterexample()
    L2 = m.fault_subspace(1)
    target = ss.span([0.0, 0, -1, 1])
    W = inv.min_conditioned_invariant(m, L2)
    S = inv.min_unobservability(m, L2)
    assert W.dim == S.dim == 1
    assert ss.max_angle(W, target) < 1e-8 and ss.max_angle(S, target) < 1e-8
    assert sy.isolability(m).isolable == {"f1": True, "f2": True}
    ops = [A + D @ m.C for A, D in zip(m.shift_ops, (systems.COUNTEREXAMPLE_D1,
                                                      systems.COUNTEREXAMPLE_D2))]
    assert inv.is_invariant(S, ops)
    H, _, _ = inv.measurement_maps(m, S)
    assert H.shape == (1, 2) and ss.image(H.T) == ss.span([1.0, 0.0])
    assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------------------
# 2


@criterion(2, "not prime with verified witness, rank 3 at (2,0), drop at z1 = 2; under 10 s")
def test_criterion_2_pbh_witnesses():
    t0 = time.perf_counter()
    m = systems.counterexample()
    P = pm.pbh(m)
    v = pm.zero_prime_check(P)
    assert not v.prime
    assert pm.rank_at(P, *v.witness) < 4
    assert pm.rank_at(P, 2, 0) == 3
    L1, L2 = _signatures(m)
    rc = pm.isolability_rank_condition(systems.counterexample_annihilator(), L1, L2)
    assert not rc.full_rank and abs(rc.witness[0] - 2) < 1e-9
    assert pm.verify_annihilator(systems.counterexample_annihilator(corrected=True), P)
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.xfail(strict=True, reason="published annihilator has a sign error in entry f")
@criterion(2, "published annihilator N satisfies N PBH = 0")
def test_criterion_2_published_annihilator():
    P = pm.pbh(systems.counterexample())
    assert pm.verify_annihilator(systems.counterexample_annihilator(), P)


# ---------------------------------------------------------------------------
# 3


@criterion(3, "subspaces, verdicts, published R certify, recovered gains; under 5 s")
def test_criterion_3_heat_exchanger_full():
    t0 = time.perf_counter()
    m = heat_exchanger("full")
    target = ss.span([0.0, 0, -1, 1])
    L2 = m.fault_subspace(1)
    assert inv.min_conditioned_invariant(m, L2) == target
    assert inv.min_unobservability(m, L2) == target
    assert sy.isolability(m).all_isolable
    ops = [A + D @ m.C for A, D in zip(m.shift_ops, (HE_FULL_D1, HE_FULL_D2))]
    assert inv.is_invariant(target, ops)
    # the computed quotient matches the published one up to a change of basis
    Q = sy.quotient_system(m, "f1")
    for Ap, pub in zip(Q.A, (HE_A1P, HE_A2P)):
        np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(Ap)),
                                   np.sort_complex(np.linalg.eigvals(pub)), atol=1e-8)
    lam = np.linalg.eigvalsh(lmi.projected_matrix(HE_A1P, HE_A2P, HE_M, HE_R1, HE_R2)).max()
    assert lam < 0
    cert = lmi.LyapunovCertificate(HE_R1, HE_R2, -lam)
    D1, D2 = lmi.recover_gains(HE_A1P, HE_A2P, HE_M, cert)
    assert lmi.lyapunov_check(HE_A1P + D1 @ HE_M, HE_A2P + D2 @ HE_M, HE_R1, HE_R2)[0]
    for t in ("f1", "f2"):
        d = sy.design_filter(m, t)
        F, _ = sy.error_dynamics(d.quotient, d.filter.extras["D_o"])
        assert lmi.lyapunov_check(F[0], F[1], d.certificate.R1, d.certificate.R2)[0]
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.xfail(strict=True, reason="published D_o2 carries the opposite sign "
                   "(passes with A - D_o M, margin 0.4; fails with A + D_o M)")
@criterion(3, "published D_o pass with F = A + D_o M")
def test_criterion_3_published_observer_gain():
    assert lmi.lyapunov_check(HE_A1P + HE_DO1 @ HE_M, HE_A2P + HE_DO2 @ HE_M,
                              HE_R1, HE_R2)[0]


# ---------------------------------------------------------------------------
# 4


@criterion(4, "S* of dimension 3, L1 outside, 1D model not isolable")
def test_criterion_4_partial_measurement_and_1d_contrast():
    m = heat_exchanger("partial")
    e1 = np.eye(4)[0]
    expected = ss.span([0.0, 0, -1, 1], e1, [0.0, 0, 1, 1])
    S = inv.min_unobservability(m, m.fault_subspace(1))
    assert S.dim == 3 and ss.max_angle(S, expected) < 1e-8
    assert not ss.contains(S, ss.span([0.0, 1, 0, 0]))
    assert sy.isolability(m).all_isolable
    for N in (3, 4, 6):
        m1 = ode1d_model(N)
        assert m1.k == 1
        f1, f2 = m1.fault_index(f"f1_{N}"), m1.fault_index(f"f2_{N}")
        W = inv.min_conditioned_invariant(m1, m1.fault_subspace(f2))
        assert ss.contains(W, m1.faults_subspace([f1, f2]))
        assert not any(sy.isolability(m1).isolable.values())


@pytest.mark.xfail(strict=True, reason="upstream nodes: A couples node k into node k+1, "
                   "so W2* of L2^k holds Tg(k) plus Tf(k+1), not L1^k")
@criterion(4, "W2* contains span{L1^k, L2^k} at every node k")
def test_criterion_4_every_node():
    m1 = ode1d_model(4)
    for k in range(1, 5):
        f1, f2 = m1.fault_index(f"f1_{k}"), m1.fault_index(f"f2_{k}")
        W = inv.min_conditioned_invariant(m1, m1.fault_subspace(f2))
        assert ss.contains(W, m1.faults_subspace([f1, f2]))


# ---------------------------------------------------------------------------
# 5


@criterion(5, "alarm patterns on 100 x 100 grid, N0 = 100, sigma = 0.01; under 30 s")
def test_criterion_5_scenarios():
    t0 = time.perf_counter()
    m = heat_exchanger("full")
    filters = [sy.design_filter(m, t).filter for t in ("f1", "f2")]
    healthy = sim.heat_exchanger_scenario("healthy", 100, 0.01, seed=0)
    th = sim.threshold_mc(m, filters, healthy, sim.ThresholdSpec(runs=100), seed=1)
    u = healthy.input_plane(m.m)
    for kind, seed in (("I", 11), ("II", 12)):
        sc = sim.heat_exchanger_scenario(kind, 100, 0.01, seed=seed)
        g = sim.simulate_plant(m, sc)
        res = [sim.simulate_filter(f, g.y, u, sc)[0] for f in filters]
        alarms = sim.fdi_decide(res, th.thresholds)
        onsets = {f.name: f.onset() for f in sc.faults}
        for k, name in enumerate(("f1", "f2")):
            if name in onsets:
                cone = sim.influence_cone(sc.I, sc.J, onsets[name])
                assert alarms[k].any(), (kind, name)
                assert not (alarms[k] & ~cone).any(), (kind, name)
            else:
                assert not alarms[k].any(), (kind, name)
    # zero false alarms on a fresh fault-free realization
    clean = sim.heat_exchanger_scenario("healthy", 100, 0.01, seed=13)
    g = sim.simulate_plant(m, clean)
    res = [sim.simulate_filter(f, g.y, u, clean)[0] for f in filters]
    assert not any(a.any() for a in sim.fdi_decide(res, th.thresholds))
    assert time.perf_counter() - t0 < 30.0


# ---------------------------------------------------------------------------
# 6


@criterion(6, "50 random isolable models, residual unchanged by non-target faults")
def test_criterion_6_decoupling():
    models = isolable_models(50, seed=606)
    infeasible = 0
    for idx, m in enumerate(models):
        assert m.n <= 6
        rng = np.random.default_rng(idx)
        I = J = 12
        h1 = rng.standard_normal((I + 1, m.n))
        h2 = rng.standard_normal((J + 1, m.n))
        h2[0] = h1[0]
        u = rng.standard_normal((I + 1, J + 1, m.m))
        base = sim.Scenario(I, J, h1, h2, u)
        y0 = sim.simulate_plant(m, base).y
        for t, fault in enumerate(m.faults):
            try:
                filt = sy.design_filter(m, fault.name).filter
            except lmi.InfeasibleLMI:
                infeasible += 1
                filt = sy.design_filter(m, fault.name, method="none").filter
            other = m.faults[1 - t].name
            sched = (sim.FaultSchedule(other, 2, 3, 1.0, None),
                     sim.FaultSchedule(other, 5, 0, -2.0, 6))
            faulty = sim.Scenario(I, J, h1, h2, u, sched)
            y1 = sim.simulate_plant(m, faulty).y
            r0 = sim.simulate_filter(filt, y0, u, base)[1]
            r1 = sim.simulate_filter(filt, y1, u, base)[1]
            assert np.abs(r1 - r0).max() < 1e-9
    print(f"  {infeasible} of {2 * len(models)} designs fell back to zero observer gain")


# ---------------------------------------------------------------------------
# 7


@criterion(7, "word intersection, classical k = 1 algorithms, A^(i,j) expansion")
def test_criterion_7_oracles():
    rng = np.random.default_rng(707)
    for trial in range(100):
        n = int(rng.integers(2, 6))
        q = int(rng.integers(1, n + 1))
        m = random_model(rng, n, q, sparse=bool(trial % 2))
        assert same(inv.invariant_unobservable(m).basis, word_unobservable(m.shift_ops, m.C, n))
        m1 = random_model(rng, n, q, k=1, sparse=bool(trial % 2))
        A, C, L = m1.shift_ops[0], m1.C, m1.faults[0].signatures[0]
        assert same(inv.min_conditioned_invariant(m1, m1.fault_subspace(0)).basis,
                    min_conditioned_invariant_1d(A, C, L))
        assert same(inv.min_unobservability(m1, m1.fault_subspace(0)).basis,
                    min_unobservability_1d(A, C, L))
        x0 = rng.standard_normal(n)
        N = 5
        g = sim.simulate_plant(m, sim.Scenario(N, N), mode="seed", x0=x0)
        T = inv.transition_powers(m, 2 * N + 1)
        for i in range(N + 1):
            for j in range(N + 1):
                ref = T[i, j] @ x0
                assert np.abs(g.x[i, j] - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


# ---------------------------------------------------------------------------
# 8


@criterion(8, "y = 0 on 50 x 50 while the subspace condition holds")
def test_criterion_8_blind_fault():
    m = systems.blind_fault()
    sc = sim.Scenario(49, 49, faults=(sim.FaultSchedule("f1", 0, 0, 1.0, None),))
    g = sim.simulate_plant(m, sc)
    assert np.abs(g.y).max() < 1e-12
    S1 = inv.min_unobservability(m, m.fault_subspace(0))
    assert S1 == m.fault_subspace(0)
    assert ss.intersect(S1, m.fault_subspace(1)).is_zero()
    assert sy.isolability(m)["f2"].isolable


# ---------------------------------------------------------------------------
# 9


def _three_op_model(rng, n):
    # operators sharing an invariant subspace of dimension d
    d = int(rng.integers(1, n))
    T = rng.standard_normal((n, n)) + n * np.eye(n)
    ops = []
    for _ in range(3):
        blk = rng.standard_normal((n, n))
        blk[d:, :d] = 0.0
        ops.append(T @ blk @ np.linalg.inv(T))
    C = rng.standard_normal((1, n))
    zeros = tuple(np.zeros((n, 1)) for _ in range(3))
    m = FmiiModel(tuple(ops), zeros, C, (Fault("f", zeros),))
    return m, ss.image(T[:, :d])


def _direct_invariance(V, ops):
    r = np.linalg.matrix_rank(V.basis, tol=1e-8)
    return all(np.linalg.matrix_rank(np.hstack([V.basis, A @ V.basis]), tol=1e-8) == r
               for A in ops)


@criterion(9, "is_invariant and invariant_unobservable with k = 3")
def test_criterion_9_three_operators():
    rng = np.random.default_rng(909)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        m, V = _three_op_model(rng, n)
        assert m.k == 3
        R = ss.image(rng.standard_normal((n, int(rng.integers(1, n)))))
        for W in (V, R, inv.invariant_unobservable(m)):
            assert inv.is_invariant(W, m.shift_ops) == _direct_invariance(W, m.shift_ops)
        assert inv.is_invariant(V, m.shift_ops)
        assert same(inv.invariant_unobservable(m).basis, word_unobservable(m.shift_ops, m.C, n))
        # with C blind to V the invariant unobservable subspace contains V
        Cv = ss.kernel(V.basis.T).basis.T[:1]
        mv = FmiiModel(m.shift_ops, m.input_maps, Cv, m.faults)
        Ns = inv.invariant_unobservable(mv)
        assert inside(V.basis, Ns.basis)
        assert same(Ns.basis, word_unobservable(mv.shift_ops, mv.C, n))

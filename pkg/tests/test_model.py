import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdi2d import sim
from fdi2d.model import (DetectionFilter, Fault, FmiiModel, RoesserModel, check,
                         roesser_to_fmii, validate)
from fdi2d.systems import counterexample


def test_dimensions_of_counterexample():
    m = counterexample()
    assert (m.k, m.n, m.m, m.q, m.p) == (2, 4, 1, 2, 2)
    assert m.fault_index("f2") == 1 and m.fault_index(0) == 0
    with pytest.raises(KeyError):
        m.fault_index("nope")


def test_validate_lists_every_problem():
    A = np.eye(3)
    bad = FmiiModel((A, np.eye(2)), (np.zeros((3, 1)), np.zeros((2, 2))), np.ones((1, 4)),
                    (Fault("f", (np.ones((3, 1)),)), Fault("f", (np.ones((3, 1)),) * 2)))
    problems = validate(bad)
    text = "\n".join(problems)
    assert "A2 has shape" in text
    assert "disagree on the input dimension" in text
    assert "C has 4 columns" in text
    assert "duplicate fault name" in text
    assert "1 signatures" in text
    with pytest.raises(ValueError, match="invalid FMII model"):
        check(bad)


def test_from_matrices_defaults():
    m = FmiiModel.from_matrices([np.eye(2), np.zeros((2, 2))], C=np.eye(2),
                                faults={"f": [np.ones((2, 1)), np.zeros((2, 1))]})
    assert m.m == 1 and m.p == 1
    assert m.fault_subspace(0).dim == 1


def test_single_signature_fault_model():
    # A fault acting through one shift only is the L^1 = 0 special case.
    L = np.array([[1.0], [0.0]])
    m = FmiiModel.from_matrices([np.eye(2), np.eye(2)], C=np.eye(2),
                                faults={"f": [np.zeros((2, 1)), L]})
    assert m.fault_subspace(0) == m.faults_subspace([0])
    assert m.fault_subspace(0).dim == 1


def _random_roesser(rng, r, s, m):
    return RoesserModel(0.5 * rng.standard_normal((r, r)), 0.5 * rng.standard_normal((r, s)),
                        0.5 * rng.standard_normal((s, r)), 0.5 * rng.standard_normal((s, s)),
                        rng.standard_normal((r, m)), rng.standard_normal((s, m)),
                        rng.standard_normal((1, r + s)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))
def test_roesser_embedding_matches_direct_recursion(seed, r, s, m):
    rng = np.random.default_rng(seed)
    R = _random_roesser(rng, r, s, m)
    N = 5
    u = rng.standard_normal((N, N, m))
    h, v = sim.simulate_roesser(R, rng.standard_normal((N, r)), rng.standard_normal((N, s)), u)
    model = roesser_to_fmii(R)
    X = np.concatenate([h, v], axis=-1)
    sc = sim.Scenario(N - 1, N - 1, X[:, 0], X[0, :], u)
    g = sim.simulate_plant(model, sc)
    assert np.abs(g.x - X).max() < 1e-12


def test_roesser_shape_errors():
    rng = np.random.default_rng(0)
    R = _random_roesser(rng, 2, 1, 1)
    bad = RoesserModel(R.A11, R.A12, R.A21, R.A22, R.B11, R.B21, np.ones((1, 5)))
    with pytest.raises(ValueError, match="C has 5 columns"):
        roesser_to_fmii(bad)


def test_roesser_faults_split_by_partition():
    rng = np.random.default_rng(1)
    R = _random_roesser(rng, 2, 1, 1)
    R = RoesserModel(R.A11, R.A12, R.A21, R.A22, R.B11, R.B21, R.C,
                     {"f": np.array([[1.0], [2.0], [3.0]])})
    L1, L2 = roesser_to_fmii(R).faults[0].signatures
    np.testing.assert_array_equal(L1.ravel(), [1, 2, 0])
    np.testing.assert_array_equal(L2.ravel(), [0, 0, 3])


def test_filter_validation_reports_shape_mismatch():
    m = counterexample()
    f = DetectionFilter((np.eye(2), np.eye(2)), (np.zeros((2, 2)),) * 2,
                        (np.zeros((2, 3)),) * 2, np.zeros((1, 2)), np.zeros((1, 2)))
    problems = f.validate_against(m)
    assert any("E1" in p for p in problems)

import math

import numpy as np
import pytest

from conftest import TOY_A
from hhl_nopost import circuit, estimator
from hhl_nopost.circuit import CircuitSpec, FullState
from hhl_nopost.errors import EmptyBranch, NotPauliString, ZeroSuccessProbability
from hhl_nopost.estimator import EstimateWithError, SamplingPlan, ShotTally
from hhl_nopost.families import PauliString

XS = PauliString("X")
ZS = PauliString("Z")
P1_TOY = 0.625 * (math.pi / 8) ** 2


def toy_state():
    return circuit.run_hhl_circuit(CircuitSpec(), TOY_A, np.array([1.0, 0.0]))


def test_sampling_plan():
    plan = SamplingPlan(100, seed=5, n_trials=3)
    assert plan.for_trial(2) == SamplingPlan(100, seed=7, n_trials=1)
    a = plan.rng(0).random(4)
    np.testing.assert_array_equal(a, plan.rng(0).random(4))
    assert not np.array_equal(a, plan.rng(1).random(4))
    with pytest.raises(ValueError):
        SamplingPlan(0)


def test_pauli_eigenvalues():
    np.testing.assert_array_equal(estimator.pauli_eigenvalues(ZS), [1, -1])
    np.testing.assert_array_equal(estimator.pauli_eigenvalues(PauliString("ZI")), [1, 1, -1, -1])
    np.testing.assert_array_equal(estimator.pauli_eigenvalues(PauliString("XX", 2.0)), [2, -2, -2, 2])


def test_basis_state_tally():
    # ancilla 0, system |0>, measure Z: every shot lands on (0, 0)
    tally = estimator.sample(FullState.product([1, 0]), ZS, SamplingPlan(1000))
    assert tally.as_dict() == {(0, 0): 1000}
    m0, m1, p1 = estimator.estimate_expectations(tally, allow_empty=True)
    assert m0 == EstimateWithError(1.0, 0.0, 1000)
    assert m1 is None
    assert p1.mean == 0.0 and p1.std == 0.0


def test_x_basis_rotation():
    plus = np.array([1, 1]) / math.sqrt(2)
    tally = estimator.sample(FullState.product(plus), XS, SamplingPlan(500))
    assert tally.as_dict() == {(0, 0): 500}
    minus_i = np.array([1, -1j]) / math.sqrt(2)
    tally = estimator.sample(FullState.product(minus_i), PauliString("Y"), SamplingPlan(500))
    assert tally.as_dict() == {(0, 1): 500}


def test_binomial_statistics():
    # system (sqrt(.25), sqrt(.75)) in Z: <Z> = -0.5
    n = 10**6
    tally = estimator.sample(FullState.product([0.5, math.sqrt(0.75)]), ZS, SamplingPlan(n, seed=3))
    m0, _, _ = estimator.estimate_expectations(tally, allow_empty=True)
    sigma = math.sqrt(1 - 0.25) / math.sqrt(n)
    assert m0.std == pytest.approx(sigma, rel=1e-2)
    assert abs(m0.mean + 0.5) < 5 * sigma


def test_sampling_is_deterministic():
    state = toy_state()
    a = estimator.sample(state, XS, SamplingPlan(10**4, seed=9))
    b = estimator.sample(state, XS, SamplingPlan(10**4, seed=9))
    c = estimator.sample(state, XS, SamplingPlan(10**4, seed=10))
    np.testing.assert_array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


def test_empty_branch():
    tally = ShotTally(np.array([[10, 0], [0, 0]]), ZS)
    with pytest.raises(EmptyBranch):
        estimator.estimate_expectations(tally)


def test_sample_needs_pauli_string():
    with pytest.raises(NotPauliString):
        estimator.sample(toy_state(), np.array([[0, 1], [1, 0]]), SamplingPlan(10))
    with pytest.raises(NotPauliString):
        estimator.sample(toy_state(), PauliString("XX"), SamplingPlan(10))
    with pytest.raises(NotPauliString):
        estimator.sample(toy_state(), PauliString("X", 1j), SamplingPlan(10))


def test_toy_success_probability():
    n = 10**6
    tally = estimator.sample(toy_state(), XS, SamplingPlan(n, seed=1))
    _, m1, p1 = estimator.estimate_expectations(tally)
    sigma = math.sqrt(P1_TOY * (1 - P1_TOY) / n)
    assert p1.std == pytest.approx(sigma, rel=1e-2)
    assert abs(p1.mean - P1_TOY) < 5 * sigma
    assert abs(m1.mean + 0.6) < 5 * m1.std


def test_reconstruct_exact_inputs():
    p1 = P1_TOY
    M0 = 3 / 8 * (math.pi / 8) ** 2 / (1 - p1)
    est = estimator.reconstruct_from_samples(
        EstimateWithError(0.0, 0.0, 1), EstimateWithError(M0, 0.0, 1), EstimateWithError(p1, 0.0, 1)
    )
    assert est.mean == pytest.approx(-0.6, abs=1e-12)
    assert est.std == 0.0


def test_reconstruct_full_success():
    est = estimator.reconstruct_from_samples(
        EstimateWithError(0.3, 0.01, 10), EstimateWithError(0.9, 0.5, 10), EstimateWithError(1.0, 0.0, 10)
    )
    assert est.mean == 0.3
    assert est.std == pytest.approx(0.01)


def test_reconstruct_error_scales_linearly():
    args = [EstimateWithError(0.1, 0.01, 1), EstimateWithError(0.2, 0.02, 1), EstimateWithError(0.3, 0.005, 1)]
    one = estimator.reconstruct_from_samples(*args)
    two = estimator.reconstruct_from_samples(*[a._replace(std=2 * a.std) for a in args])
    assert two.std == pytest.approx(2 * one.std)
    assert two.mean == one.mean


def test_reconstruct_zero_probability():
    z = EstimateWithError(0.0, 0.0, 1)
    with pytest.raises(ZeroSuccessProbability):
        estimator.reconstruct_from_samples(z, z, z)


def test_trial_statistics_constant():
    out = estimator.trial_statistics(lambda p: 1.5, SamplingPlan(10, n_trials=7))
    assert out == EstimateWithError(1.5, 0.0, 7)
    assert estimator.trial_statistics(lambda p: None, SamplingPlan(10, n_trials=3)) is None


def test_trial_statistics_workers_match_serial():
    state = toy_state()

    def run(plan):
        return estimator.estimate_expectations(estimator.sample(state, XS, plan))[2].mean

    plan = SamplingPlan(1000, seed=4, n_trials=8)
    assert estimator.trial_statistics(run, plan) == estimator.trial_statistics(run, plan, workers=3)


def test_std_scales_as_inverse_sqrt_shots():
    state = toy_state()

    def run(plan):
        return estimator.estimate_expectations(estimator.sample(state, XS, plan))[1].mean

    small = estimator.trial_statistics(run, SamplingPlan(10**4, seed=0, n_trials=60))
    large = estimator.trial_statistics(run, SamplingPlan(10**6, seed=0, n_trials=60))
    ratio = small.std / large.std
    assert 10 / 1.5 <= ratio <= 10 * 1.5


def test_sampling_trial_toy():
    res = estimator.sampling_trial(toy_state(), np.array([1.0, 0.0]), XS, SamplingPlan(10**6, seed=2))
    assert abs(res.direct.mean + 0.6) < 5 * res.direct.std
    assert abs(res.reconstructed.mean + 0.6) < 5 * res.reconstructed.std
    assert res.reconstructed.std > res.direct.std


def test_estimate_input_expectation():
    est = estimator.estimate_input_expectation(np.array([1, 1]) / math.sqrt(2), XS, SamplingPlan(100))
    assert est == EstimateWithError(1.0, 0.0, 100)

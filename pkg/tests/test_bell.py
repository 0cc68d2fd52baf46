import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from fourphoton.bell import (
    N_STRATEGIES,
    BellExpression,
    DeterministicStrategy,
    OptimizerConfig,
    all_strategies,
    grid_search,
    lhv_bound,
    optimize_settings,
    quantum_value,
    saturating_expression,
    settings_l1,
    strategy_tensors,
)
from fourphoton.errors import ConfigurationError, DomainError
from fourphoton.fock import PostselectedState, four_photon_state, product_state
from fourphoton.lhv import PAPER_L1, PAPER_SETTINGS, SettingChoices, lhv_l1, quantum_tensor, reconstruct_lhv, expand_in_basis
from fourphoton.measurement import NoiseMixture

PSI = four_photon_state()
weights = arrays(np.float64, (2, 2, 2, 2), elements=st.floats(-2, 2))


@pytest.fixture(scope="module")
def paper_tensor():
    return quantum_tensor(PSI, PAPER_SETTINGS)


def test_strategy_enumeration():
    strategies = all_strategies()
    assert len(strategies) == N_STRATEGIES
    tensors = strategy_tensors()
    assert len({s.results.tobytes() for s in strategies}) == 256
    # sign flips on an even number of parties cancel: 16 basis tensors times +-1
    assert len({t.tobytes() for t in tensors}) == 32
    assert DeterministicStrategy(0).results.tolist() == [[1, 1]] * 4
    assert DeterministicStrategy(1).results[0].tolist() == [-1, 1]
    with pytest.raises(DomainError):
        DeterministicStrategy(256)


def test_lhv_bound_examples():
    w = np.zeros((2, 2, 2, 2))
    w[0, 0, 0, 0] = 1
    assert lhv_bound(BellExpression(w)) == 1.0
    assert lhv_bound(BellExpression(np.full((2, 2, 2, 2), 1 / 16))) == pytest.approx(1.0)
    assert lhv_bound(BellExpression.zero()) == 0.0


def test_quantum_value_examples():
    assert quantum_value(BellExpression.zero(), np.ones((2, 2, 2, 2))) == 0
    w = np.zeros((2, 2, 2, 2))
    w[0, 0, 0, 0] = 1
    assert quantum_value(BellExpression(w), np.ones((2, 2, 2, 2))) == 1


def test_saturating_expression_duality(paper_tensor):
    e = saturating_expression(paper_tensor)
    assert lhv_bound(e) == pytest.approx(1.0, abs=1e-12)
    assert oracles.lhv_bound_by_loops(e.weights) == pytest.approx(1.0, abs=1e-12)
    assert quantum_value(e, paper_tensor) == pytest.approx(8 / (3 * math.sqrt(2)), abs=1e-9)


@settings(max_examples=30)
@given(weights)
def test_lhv_bound_matches_loop_oracle(w):
    assert lhv_bound(BellExpression(w)) == pytest.approx(oracles.lhv_bound_by_loops(w), abs=1e-12)


@given(weights)
def test_lhv_bound_at_most_l1_of_weights(w):
    assert lhv_bound(BellExpression(w)) <= np.abs(w).sum() + 1e-12


@given(weights, st.integers(0, 3))
def test_lhv_bound_symmetries(w, party):
    base = lhv_bound(BellExpression(w))
    assert lhv_bound(BellExpression(-w)) == pytest.approx(base)
    assert lhv_bound(BellExpression(np.flip(w, axis=party))) == pytest.approx(base)
    # swap the two beams on one side
    assert lhv_bound(BellExpression(np.transpose(w, (1, 0, 2, 3)))) == pytest.approx(base)
    assert lhv_bound(BellExpression(np.transpose(w, (0, 1, 3, 2)))) == pytest.approx(base)


@given(weights, st.floats(0, 1))
def test_quantum_value_affine_in_visibility(w, v):
    e = BellExpression(w)
    pure = quantum_value(e, quantum_tensor(PSI, PAPER_SETTINGS))
    mixed = quantum_value(e, quantum_tensor(NoiseMixture(v, PSI), PAPER_SETTINGS))
    assert mixed == pytest.approx(v * pure, abs=1e-12)


def test_expression_validation():
    with pytest.raises(DomainError):
        BellExpression(np.zeros((2, 2, 2)))
    with pytest.raises(DomainError):
        BellExpression(np.full((2, 2, 2, 2), np.inf))


def test_settings_l1_matches_tensor_route(rng):
    for _ in range(5):
        sc = SettingChoices.from_flat(rng.uniform(0, 2 * np.pi, 8))
        assert settings_l1(PSI, sc) == pytest.approx(lhv_l1(quantum_tensor(PSI, sc)), abs=1e-12)


def test_grid_search_reaches_paper_value():
    sc, value = grid_search(PSI)
    assert value >= PAPER_L1 - 1e-9
    assert settings_l1(PSI, sc) == pytest.approx(value, abs=1e-12)


def test_optimizer_from_paper_settings():
    res = optimize_settings(PSI, PAPER_SETTINGS, OptimizerConfig(restarts=1))
    assert res.value >= PAPER_L1 - 1e-9
    assert res.value >= res.initial_value
    settings_, value = res
    assert settings_l1(PSI, settings_) == pytest.approx(value, abs=1e-9)


def test_optimizer_history_monotone_and_deterministic():
    start = SettingChoices.from_flat(np.random.default_rng(5).uniform(0, 2 * np.pi, 8))
    cfg = OptimizerConfig(seed=11, restarts=2)
    a = optimize_settings(PSI, start, cfg)
    b = optimize_settings(PSI, start, cfg)
    assert all(y >= x for x, y in zip(a.history, a.history[1:]))
    assert a.to_json() == b.to_json()


def test_optimizer_noise_only():
    res = optimize_settings(NoiseMixture(0.0, PSI), PAPER_SETTINGS, OptimizerConfig(restarts=0))
    assert res.value == 0.0


@pytest.mark.parametrize("state", [product_state("HHHH"),
                                   PostselectedState(np.full((2, 2, 2, 2), 0.25))])
def test_optimizer_product_state_never_violates(state):
    _, grid_value = grid_search(state)
    assert grid_value <= 1 + 1e-9
    res = optimize_settings(state, PAPER_SETTINGS, OptimizerConfig(restarts=1))
    assert res.value <= 1 + 1e-9
    reconstruct_lhv(expand_in_basis(quantum_tensor(state, res.settings)))


def test_optimizer_config_errors():
    with pytest.raises(ConfigurationError):
        optimize_settings(PSI, PAPER_SETTINGS, OptimizerConfig(grid_step=0))
    with pytest.raises(ConfigurationError):
        optimize_settings(PSI, PAPER_SETTINGS, OptimizerConfig(restarts=-1))

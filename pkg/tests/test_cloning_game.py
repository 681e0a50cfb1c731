from __future__ import annotations

import math

import numpy as np
import pytest

from backend.engine.cloning_game import (
    GameSpec,
    Strategy,
    closed_form_value,
    evaluate_strategy,
    game_operator,
    game_projector,
    game_value,
    named_state,
    optimal_state,
    random_strategy,
)
from backend.engine.errors import ContractError, LayoutError
from backend.engine.tensor import Operator, RegisterLayout, basis_state, expectation, permute, random_state, random_unitary
from backend.engine.utils import derive_rng


@pytest.mark.parametrize("k", range(1, 7))
def test_game_value_matches_closed_form(k):
    report = game_value(GameSpec(k))
    assert report.value == pytest.approx(0.5 + 0.5 / k, abs=1e-9)
    assert report.operator_norm == pytest.approx(k * report.value, abs=1e-9)
    assert closed_form_value(k) == pytest.approx(0.5 + 0.5 / k)


@pytest.mark.parametrize("k", range(1, 5))
def test_optimal_state_attains_value(k):
    spec = GameSpec(k)
    value = evaluate_strategy(spec, Strategy.trivial(spec, optimal_state(k)))
    assert value == pytest.approx(closed_form_value(k), abs=1e-9)


def test_optimal_state_amplitudes_for_two_parties():
    amplitudes = optimal_state(2).amplitudes
    # [R, P0, P1] 大端序：|000⟩ = 0，|101⟩ = 5，|110⟩ = 6
    assert amplitudes[0] == pytest.approx(math.sqrt(2 / 3))
    assert amplitudes[5] == pytest.approx(1 / math.sqrt(6))
    assert amplitudes[6] == pytest.approx(1 / math.sqrt(6))
    assert np.count_nonzero(np.abs(amplitudes) > 1e-12) == 3


@pytest.mark.parametrize(
    "name, expected",
    [("ghz", 0.5), ("w", 1 / 6), ("guess", 0.625), ("all_zero", 0.5)],
)
def test_named_state_values(name, expected):
    spec = GameSpec(2)
    assert evaluate_strategy(spec, Strategy.trivial(spec, named_state(name, 2))) == pytest.approx(expected, abs=1e-9)


def test_unknown_named_state():
    with pytest.raises(ContractError):
        named_state("bell", 2)


def test_witness_attains_reported_value():
    spec = GameSpec(3)
    report = game_value(spec)
    assert expectation(game_operator(spec), report.witness_state) / 3 == pytest.approx(report.value, abs=1e-9)


def test_product_target_is_trivially_won():
    target = basis_state(RegisterLayout.qubits("R", "P"), [0, 0])
    assert game_value(GameSpec(2, target)).value == pytest.approx(1.0, abs=1e-9)


def test_target_registers_are_relabelled():
    target = random_state(RegisterLayout.qubits("S", "T"), derive_rng(5))
    spec = GameSpec(2, target)
    assert spec.target.labels == ("R", "P")


def test_random_strategies_never_beat_the_value():
    spec = GameSpec(2)
    value = game_value(spec).value
    for j in range(200):
        strategy = random_strategy(spec, derive_rng(7, j), (2, 2))
        assert evaluate_strategy(spec, strategy) <= value + 1e-9


def test_random_target_dominates_random_strategies():
    target = random_state(RegisterLayout.qubits("R", "P"), derive_rng(8))
    spec = GameSpec(2, target)
    value = game_value(spec).value
    for j in range(10):
        assert evaluate_strategy(spec, random_strategy(spec, derive_rng(9, j), (1, 2))) <= value + 1e-9


def test_non_uniform_prior_rejected():
    with pytest.raises(ContractError):
        GameSpec(2, prior=(0.25, 0.75))
    GameSpec(2, prior=(0.5, 0.5))


def test_strategy_layout_validation():
    with pytest.raises(LayoutError):
        Strategy(optimal_state(2).projector())


def test_strategy_rejects_non_unitary_response():
    spec = GameSpec(2)
    shared = Strategy.trivial(spec, optimal_state(2)).shared_state
    bad = np.array([[1, 1], [0, 1]])
    with pytest.raises(ContractError):
        Strategy(shared, {0: [bad, np.eye(2)]})


def test_strategy_response_defaults_to_identity():
    spec = GameSpec(2)
    strategy = Strategy.trivial(spec, optimal_state(2))
    np.testing.assert_array_equal(strategy.response(1, 0), np.eye(2))
    assert strategy.ancilla_dims == (1, 1)


def test_mismatched_party_count_rejected():
    strategy = Strategy.trivial(GameSpec(2), optimal_state(2))
    with pytest.raises(LayoutError):
        evaluate_strategy(GameSpec(3), strategy)


def test_mixed_shared_state_is_allowed():
    spec = GameSpec(2)
    layout = spec.strategy_layout()
    mixed = Operator(layout, np.eye(layout.total_dim) / layout.total_dim)
    # 最大混合态：每个问题的获胜概率为 1/4
    assert evaluate_strategy(spec, Strategy(mixed)) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("x", range(3))
def test_game_projector_is_idempotent(x):
    target = random_state(RegisterLayout.qubits("R", "P"), derive_rng(50))
    p = game_projector(GameSpec(3, target), x).matrix
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    np.testing.assert_allclose(p, p.conj().T, atol=1e-12)


def test_game_operator_is_symmetric_under_party_swap():
    target = random_state(RegisterLayout.qubits("R", "P"), derive_rng(51))
    operator = game_operator(GameSpec(3, target))
    swapped = permute(operator, ["R", "P2", "P0", "P1"])
    np.testing.assert_allclose(swapped.matrix, operator.matrix, atol=1e-12)


def test_strategy_value_invariant_under_party_swap():
    spec = GameSpec(2)
    original = random_strategy(spec, derive_rng(52), (2, 1))
    moved = permute(original.shared_state, ["R", "P1", "E1", "P0", "E0"])
    layout = spec.strategy_layout((1, 2))
    responses = {x: [original.response(1 - x, 1), original.response(1 - x, 0)] for x in range(2)}
    swapped = Strategy(Operator(layout, moved.matrix), responses)
    assert evaluate_strategy(spec, swapped) == pytest.approx(evaluate_strategy(spec, original), abs=1e-12)


def test_question_independent_responses_fold_into_state():
    spec = GameSpec(2)
    rng = derive_rng(53)
    layout = spec.strategy_layout((2, 1))
    rho = random_state(layout, rng).projector()
    u0, u1 = random_unitary(4, rng), random_unitary(2, rng)
    with_responses = Strategy(rho, {x: [u0, u1] for x in range(2)})
    joint = np.kron(np.eye(2), np.kron(u0, u1))
    folded = Strategy(Operator(layout, joint @ rho.matrix @ joint.conj().T))
    assert evaluate_strategy(spec, with_responses) == pytest.approx(evaluate_strategy(spec, folded), abs=1e-12)

from __future__ import annotations

import math

import numpy as np
import pytest

from backend.engine.cloning_game import GameSpec, Strategy, evaluate_strategy, named_state
from backend.engine.errors import AttackStructureError, ContractError
from backend.engine.qpv import (
    BB84_LABELS,
    BELL_OUTCOMES,
    AttackKind,
    AttackModel,
    NoPEAttack,
    RoundConfig,
    bell_branch,
    bell_state,
    exact_acceptance,
    honest_round,
    nope_attack_strategy,
    pauli_correction,
    prepare_measure_acceptance,
    random_nope_attack,
    resource_state,
    simulate,
    teleported_state,
)
from backend.engine.utils import derive_rng


def _within(rate: float, expected: float, trials: int) -> bool:
    sigma = math.sqrt(expected * (1 - expected) / trials)
    return abs(rate - expected) <= 4 * sigma


def test_bell_basis_is_orthonormal():
    states = [bell_state(a, b) for a, b in BELL_OUTCOMES]
    gram = np.array([[s.overlap(t) for t in states] for s in states])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)
    np.testing.assert_array_equal(pauli_correction(0, 0), np.eye(2))


def test_resource_state_layout():
    state = resource_state()
    assert state.labels == ("A0", "A", "B")


@pytest.mark.parametrize("outcome", BELL_OUTCOMES)
def test_teleportation_branches(outcome):
    probability, state = bell_branch(*outcome)
    assert probability == pytest.approx(0.25, abs=1e-12)
    assert abs(state.overlap(teleported_state(*outcome))) == pytest.approx(1.0, abs=1e-10)


def test_optimal_attack_acceptance():
    attack = nope_attack_strategy()
    assert attack.kind is AttackKind.NOPE_OPTIMAL
    assert exact_acceptance(RoundConfig(n=1), attack) == pytest.approx(0.75, abs=1e-9)
    assert exact_acceptance(RoundConfig(n=2), attack) == pytest.approx(0.5625, abs=1e-9)


def test_prepare_measure_acceptance():
    attack = nope_attack_strategy()
    assert prepare_measure_acceptance(RoundConfig(n=1, purified=False), attack) == pytest.approx(5 / 6, abs=1e-9)
    assert prepare_measure_acceptance(RoundConfig(n=1), AttackModel.honest()) == pytest.approx(1.0)


def test_attack_is_a_cloning_strategy():
    attack = nope_attack_strategy().attack
    strategy = attack.to_strategy()
    assert evaluate_strategy(GameSpec(2), strategy) == pytest.approx(0.75, abs=1e-9)
    again = NoPEAttack.from_strategy(GameSpec(2), strategy)
    np.testing.assert_allclose(
        np.abs(again.shared_state().amplitudes), np.abs(attack.shared_state().amplitudes), atol=1e-9
    )


@pytest.mark.parametrize("dims", [(1, 1), (1, 2), (2, 2)])
def test_random_attacks_respect_game_value(dims):
    for j in range(100):
        attack = random_nope_attack(derive_rng(23, *dims, j), *dims)
        assert exact_acceptance(RoundConfig(n=1), attack) <= 0.75 + 1e-9


def test_honest_prover_has_no_strategy():
    with pytest.raises(AttackStructureError):
        exact_acceptance(RoundConfig(), AttackModel.honest())


def test_non_isometry_rejected():
    with pytest.raises(AttackStructureError):
        NoPEAttack(np.zeros((4, 2)))


def test_signalling_state_rejected():
    spec = GameSpec(2)
    strategy = Strategy.trivial(spec, named_state("all_zero", 2))
    with pytest.raises(AttackStructureError):
        NoPEAttack.from_strategy(spec, strategy)


def test_three_party_strategy_is_not_an_attack():
    spec = GameSpec(3)
    with pytest.raises(AttackStructureError):
        NoPEAttack.from_strategy(spec, Strategy.trivial(spec, named_state("guess", 3)))


def test_honest_simulation_always_accepts():
    result = simulate(RoundConfig(n=2, seed=1), AttackModel.honest(), 500)
    assert result.rate == 1.0
    assert result.exact == 1.0
    assert honest_round(RoundConfig(n=3)).accepted


def test_attack_simulation_matches_exact():
    rounds = 100_000
    result = simulate(RoundConfig(seed=2), nope_attack_strategy(), rounds)
    assert result.exact == pytest.approx(0.75, abs=1e-9)
    assert abs(result.rate - 0.75) <= 0.01
    assert _within(result.rate, 0.75, rounds)
    low, high = result.ci95
    assert low <= result.rate <= high


def test_prepare_measure_simulation():
    rounds = 20_000
    result = simulate(RoundConfig(purified=False, seed=3), nope_attack_strategy(), rounds)
    assert result.exact == pytest.approx(5 / 6, abs=1e-9)
    assert _within(result.rate, 5 / 6, rounds)


def test_simulation_independent_of_workers():
    cfg = RoundConfig(n=1, seed=4)
    single = simulate(cfg, nope_attack_strategy(), 9_000, workers=1, with_exact=False)
    threaded = simulate(cfg, nope_attack_strategy(), 9_000, workers=3, with_exact=False)
    assert single.accepted == threaded.accepted
    assert single.exact is None


def test_transcript_rows():
    result = simulate(RoundConfig(n=2, seed=5), nope_attack_strategy(), 7, keep_transcript=True)
    rows = result.transcript_rows()
    assert len(rows) == 14
    assert all(row["routed_to"] == row["x"] for row in rows)
    header = result.transcript_csv().splitlines()[0]
    assert header == "run,accepted,index,phi,x,routed_to,outcome,passed"


def test_invalid_round_configuration():
    with pytest.raises(ContractError):
        RoundConfig(n=0)
    with pytest.raises(ContractError):
        simulate(RoundConfig(), AttackModel.honest(), 0)
    with pytest.raises(ContractError):
        AttackModel(AttackKind.CUSTOM)


def test_three_rounds_fall_back_to_single_round_power():
    attack = nope_attack_strategy()
    assert exact_acceptance(RoundConfig(n=3), attack) == pytest.approx(0.421875, abs=1e-9)
    result = simulate(RoundConfig(n=3, seed=6), attack, 2_000)
    assert result.exact == pytest.approx(0.421875, abs=1e-9)
    assert _within(result.rate, 0.421875, 2_000)


def test_honest_prepare_measure_statistics():
    rounds = 4_000
    result = simulate(RoundConfig(purified=False, seed=7), AttackModel.honest(), rounds, keep_transcript=True)
    assert result.rate == 1.0
    rows = result.transcript_rows()
    assert all(row["outcome"] == "match" for row in rows)
    for label in BB84_LABELS:
        count = sum(row["phi"] == label for row in rows)
        assert _within(count / rounds, 0.25, rounds)


def test_custom_attack_circuit_matches_exact():
    rounds = 20_000
    attack = random_nope_attack(derive_rng(24), 2, 1)
    result = simulate(RoundConfig(seed=8), attack, rounds)
    assert result.exact == pytest.approx(exact_acceptance(RoundConfig(n=1), attack), abs=1e-12)
    assert _within(result.rate, result.exact, rounds)


def test_custom_attack_prepare_measure_circuit():
    rounds = 20_000
    attack = random_nope_attack(derive_rng(25), 1, 1)
    cfg = RoundConfig(purified=False, seed=9)
    result = simulate(cfg, attack, rounds)
    assert result.exact == pytest.approx(prepare_measure_acceptance(cfg, attack), abs=1e-12)
    assert _within(result.rate, result.exact, rounds)

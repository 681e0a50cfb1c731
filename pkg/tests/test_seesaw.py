from __future__ import annotations

import pytest

from backend.engine.cloning_game import GameSpec, seesaw_cloning
from backend.engine.errors import ContractError
from backend.engine.parallel import ParallelSpec, analytic_upper_bound, seesaw_best, seesaw_optimize
from backend.engine.seesaw import MONOTONE_SLACK, SeesawConfig


def test_recovers_two_party_cloning_value():
    result = seesaw_cloning(GameSpec(2), SeesawConfig(ancilla_dim_a=2, max_iters=30, seed=1))
    assert result.value == pytest.approx(0.75, abs=1e-6)


def test_single_round_parallel_between_bounds():
    cfg = SeesawConfig(ancilla_dim_a=2, ancilla_dim_b=2, max_iters=20, seed=3)
    summary = seesaw_best(ParallelSpec(1), cfg, seeds=2)
    assert summary.best.value >= 0.75 - 1e-6
    assert summary.best.value <= analytic_upper_bound(1).value + 1e-9
    data = summary.to_dict()
    assert data["seeds"] == 2
    assert data["heuristic"] is True


def test_history_is_monotone():
    cfg = SeesawConfig(ancilla_dim_a=1, ancilla_dim_b=2, max_iters=15, warm_start=False, seed=5)
    result = seesaw_optimize(ParallelSpec(1), cfg, seed_index=1)
    for before, after in zip(result.history, result.history[1:]):
        assert after >= before - 1e-9
    assert result.value == result.history[-1]
    assert MONOTONE_SLACK < 1e-9


def test_same_seed_same_result():
    cfg = SeesawConfig(max_iters=10, seed=7)
    first = seesaw_optimize(ParallelSpec(1), cfg, seed_index=2)
    second = seesaw_optimize(ParallelSpec(1), cfg, seed_index=2)
    assert first.value == second.value
    assert first.iterations == second.iterations


def test_threaded_seeds_match_sequential():
    cfg = SeesawConfig(max_iters=5, seed=9)
    sequential = seesaw_best(ParallelSpec(1), cfg, seeds=3, workers=1)
    threaded = seesaw_best(ParallelSpec(1), cfg, seeds=3, workers=3)
    assert [r.value for r in sequential.runs] == [r.value for r in threaded.runs]


def test_invalid_configuration():
    with pytest.raises(ContractError):
        SeesawConfig(max_iters=0)
    with pytest.raises(ContractError):
        SeesawConfig(ancilla_dim_a=0)
    with pytest.raises(ContractError):
        seesaw_best(ParallelSpec(1), SeesawConfig(), seeds=0)


def test_two_rounds_reach_tensored_value_for_every_seed():
    cfg = SeesawConfig(ancilla_dim_a=1, ancilla_dim_b=1, max_iters=20, seed=11)
    summary = seesaw_best(ParallelSpec(2), cfg, seeds=20)
    assert min(run.value for run in summary.runs) >= 0.5625 - 1e-6
    assert summary.best.value <= analytic_upper_bound(2).value + 1e-9

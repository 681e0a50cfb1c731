from __future__ import annotations

import math

import pytest

from backend.engine.cloning_game import GameSpec, evaluate_strategy, random_strategy
from backend.engine.errors import ContractError, LayoutError
from backend.engine.parallel import (
    ParallelSpec,
    PermutationFamily,
    analytic_upper_bound,
    eval_parallel_strategy,
    lemma2_bound,
    norm_product_check,
    overlap_bound,
    parallel_projector,
    projector_sum_norm,
    random_parallel_strategy,
    relaxed_overlap,
    tensor_lower_bound,
)
from backend.engine.tensor import Operator, RegisterLayout, random_state
from backend.engine.utils import bitstrings, derive_rng


def test_bounds_for_two_rounds():
    assert analytic_upper_bound(2).value == pytest.approx(0.728553390593, abs=1e-12)
    lower, strategy = tensor_lower_bound(2)
    assert lower == pytest.approx(0.5625)
    assert strategy is not None


@pytest.mark.parametrize("n", range(1, 21))
def test_binomial_identity(n):
    bound = analytic_upper_bound(n)
    assert bound.binomial_sum == pytest.approx(bound.closed_form, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tensored_strategy_attains_lower_bound(n):
    lower, strategy = tensor_lower_bound(n)
    assert strategy.value(ParallelSpec(n)) == pytest.approx(lower, abs=1e-9)


def test_large_n_has_no_explicit_strategy():
    lower, strategy = tensor_lower_bound(10)
    assert strategy is None
    assert lower == pytest.approx(0.75**10)


@pytest.mark.parametrize("n", [1, 2])
def test_random_strategies_respect_upper_bound(n):
    spec = ParallelSpec(n)
    upper = analytic_upper_bound(n).value
    for j in range(10):
        assert random_parallel_strategy(spec, derive_rng(11, n, j)).value(spec) <= upper + 1e-9


def test_single_round_overlap():
    report = overlap_bound("0", "1")
    assert report.bound == pytest.approx(2**-0.5)
    assert report.numeric == pytest.approx(0.5, abs=1e-10)
    assert report.numeric <= report.bound + 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_overlaps_within_bound(n):
    for x in bitstrings(n):
        for x_prime in bitstrings(n):
            report = overlap_bound(x, x_prime)
            assert report.numeric <= report.bound + 1e-9
            assert report.numeric <= report.sharp_bound + 1e-9
            assert 2 * max(report.t_a, report.t_b) >= report.t
            assert report.t_used >= report.t / 2


def test_overlap_swaps_roles_when_bob_dominates():
    report = overlap_bound("11", "00")
    assert report.swapped
    assert report.t_used == 2


def test_overlap_rejects_length_mismatch():
    with pytest.raises(ContractError):
        overlap_bound("0", "01")


@pytest.mark.parametrize("pair", [("00", "11"), ("01", "10"), ("011", "100"), ("000", "000")])
def test_relaxed_overlap_is_exact(pair):
    relaxed = relaxed_overlap(*pair)
    assert relaxed.numeric == pytest.approx(relaxed.expected, abs=1e-10)


def test_lemma_bound_for_single_round():
    spec = ParallelSpec(1)
    projectors = [parallel_projector(spec, x) for x in spec.questions]
    assert lemma2_bound(projectors, PermutationFamily.xor(1)) == pytest.approx(1.5, abs=1e-10)
    assert projector_sum_norm(projectors) == pytest.approx(1.5, abs=1e-10)


def test_lemma_bound_for_two_rounds():
    spec = ParallelSpec(2)
    projectors = [parallel_projector(spec, x) for x in spec.questions]
    bound = lemma2_bound(projectors, PermutationFamily.xor(2))
    norm = projector_sum_norm(projectors)
    assert norm <= bound + 1e-9
    assert norm / 4 <= analytic_upper_bound(2).value + 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_lemma_bound_on_random_projectors(seed):
    rng = derive_rng(13, seed)
    layout = RegisterLayout.qubits("a", "b")
    projectors = [random_state(layout, rng).projector() for _ in range(4)]
    family = PermutationFamily.cyclic(4) if seed % 2 else PermutationFamily.xor(2)
    assert projector_sum_norm(projectors) <= lemma2_bound(projectors, family) + 1e-9


def test_lemma_rejects_non_orthogonal_family():
    layout = RegisterLayout.qubits("a")
    projectors = [Operator.identity(layout), Operator.identity(layout)]
    with pytest.raises(ContractError):
        lemma2_bound(projectors, PermutationFamily(((0, 1), (0, 1))))


def test_permutation_families_are_orthogonal():
    assert PermutationFamily.xor(3).is_mutually_orthogonal()
    assert PermutationFamily.cyclic(5).is_mutually_orthogonal()
    with pytest.raises(ContractError):
        PermutationFamily(((0, 0),))


def test_norm_product_check():
    rng = derive_rng(17)
    layout = RegisterLayout.qubits("a", "b")
    identity = Operator.identity(layout)
    projector = random_state(layout, rng).projector()
    other = random_state(layout, rng).projector()
    check = norm_product_check(identity, projector, other)
    assert check.premise
    assert check.holds
    assert check.lhs >= check.rhs - 1e-9


def test_eval_rejects_wrong_layout():
    spec = ParallelSpec(1)
    state = random_state(spec.layout, derive_rng(19)).projector()
    with pytest.raises(LayoutError):
        eval_parallel_strategy(spec, state, {}, {})


def test_upper_bound_requires_positive_n():
    with pytest.raises(ContractError):
        analytic_upper_bound(0)
    assert analytic_upper_bound(1).value == pytest.approx(0.5 + 1 / (2 * math.sqrt(2)))


@pytest.mark.parametrize("n", [200, 1100, 4000])
def test_upper_bound_for_many_rounds(n):
    bound = analytic_upper_bound(n)
    assert math.isfinite(bound.binomial_sum)
    assert bound.binomial_sum > 0
    assert bound.binomial_sum == pytest.approx(bound.closed_form, rel=1e-9)


def test_single_round_matches_cloning_game():
    game = GameSpec(2)
    spec = ParallelSpec(1)
    for j in range(10):
        strategy = random_strategy(game, derive_rng(14, j), (2, 1))
        shared = Operator(spec.strategy_layout(2, 1), strategy.shared_state.matrix)
        responses_a = {x: strategy.response(int(x), 0) for x in spec.questions}
        responses_b = {x: strategy.response(int(x), 1) for x in spec.questions}
        value = eval_parallel_strategy(spec, shared, responses_a, responses_b)
        assert value == pytest.approx(evaluate_strategy(game, strategy), abs=1e-12)

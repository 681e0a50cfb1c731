from __future__ import annotations

import json

import numpy as np
import pytest

from backend.engine.cloning_game import GameSpec, Strategy, evaluate_strategy, optimal_state
from backend.engine.errors import ContractError, LayoutError
from backend.engine.interchange import (
    NOPE_MODEL,
    load_quantum,
    load_state_file,
    load_strategy_file,
    operator_from_dict,
    save_strategy_file,
    state_to_dict,
    strategy_to_dict,
)
from backend.engine.qpv import nope_attack_strategy
from backend.engine.tensor import Operator, StateVector


def test_entries_length_selects_state_or_operator():
    state = optimal_state(2)
    data = state_to_dict(state)
    assert data["layout"] == [["R", 2], ["P0", 2], ["P1", 2]]
    assert isinstance(load_quantum(data), StateVector)
    operator = operator_from_dict(data)
    assert isinstance(operator, Operator)
    np.testing.assert_allclose(operator.matrix, state.projector().matrix, atol=1e-12)


def test_bad_entry_count():
    with pytest.raises(LayoutError):
        load_quantum({"layout": [["R", 2]], "entries": [[1, 0], [0, 0], [0, 0]]})


def test_complex_numbers_must_be_pairs():
    with pytest.raises(ContractError):
        load_quantum({"layout": [["R", 2]], "entries": [1, 0]})


def test_strategy_file(tmp_path):
    spec = GameSpec(2)
    attack = nope_attack_strategy().attack
    path = tmp_path / "attack.json"
    save_strategy_file(path, spec, attack.to_strategy(), NOPE_MODEL)
    loaded_spec, loaded, model = load_strategy_file(path)
    assert model == NOPE_MODEL
    assert loaded_spec.k == 2
    assert evaluate_strategy(loaded_spec, loaded) == pytest.approx(0.75, abs=1e-9)


def test_strategy_with_epr_shorthand(tmp_path):
    spec = GameSpec(2)
    data = strategy_to_dict(spec, Strategy.trivial(spec, optimal_state(2)))
    data["target"] = "epr"
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    loaded_spec, loaded, model = load_strategy_file(path)
    assert model is None
    assert evaluate_strategy(loaded_spec, loaded) == pytest.approx(0.75, abs=1e-9)


def test_unknown_model_tag(tmp_path):
    spec = GameSpec(2)
    data = strategy_to_dict(spec, Strategy.trivial(spec, optimal_state(2)), model="lo-pe")
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ContractError):
        load_strategy_file(path)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ContractError):
        load_strategy_file(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ContractError):
        load_state_file(broken)


def test_state_file(tmp_path):
    path = tmp_path / "target.json"
    path.write_text(json.dumps(state_to_dict(optimal_state(1))), encoding="utf-8")
    assert load_state_file(path).labels == ("R", "P0")


def _valid_strategy_data() -> dict:
    spec = GameSpec(2)
    return strategy_to_dict(spec, nope_attack_strategy().attack.to_strategy(), NOPE_MODEL)


@pytest.mark.parametrize(
    "field, value",
    [
        ("k", "two"),
        ("k", 2.5),
        ("k", True),
        ("shared_state", [1, 2, 3]),
        ("target", "bell"),
        ("responses", {"0": "identity"}),
        ("responses", {"zero": []}),
    ],
)
def test_malformed_strategy_fields(tmp_path, field, value):
    data = _valid_strategy_data()
    data[field] = value
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ContractError):
        load_strategy_file(path)


def test_malformed_layout_dimension(tmp_path):
    data = _valid_strategy_data()
    data["shared_state"]["layout"][0][1] = "two"
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ContractError):
        load_strategy_file(path)


def test_non_numeric_entries_rejected():
    with pytest.raises(ContractError):
        load_quantum({"layout": [["R", 2]], "entries": [["one", 0], [0, 0]]})
    with pytest.raises(ContractError):
        load_quantum({"layout": [["R", 2]], "entries": [[None, 0], [0, 0]]})


def test_ragged_unitary_rows_rejected(tmp_path):
    data = _valid_strategy_data()
    data["responses"] = {"0": [[[[1, 0], [0, 0]], [[0, 0]]], [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ContractError):
        load_strategy_file(path)


def test_top_level_must_be_an_object(tmp_path):
    path = tmp_path / "strategy.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ContractError):
        load_strategy_file(path)

"""态、算符与策略文件的 JSON 交换格式。

算符与态统一写成 ``{"layout": [[label, dim], ...], "entries": [[re, im], ...]}``，
按行主序展平；``entries`` 长度等于总维度时视为纯态，等于总维度平方时视为算符。
策略文件为 ``{"k", "target", "shared_state", "responses"}``，No-PE 攻击额外带
``{"model": "no-pe"}`` 标记。
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Mapping, Tuple

import numpy as np

from .cloning_game import GameSpec, Strategy
from .errors import ContractError, LayoutError
from .tensor import Operator, RegisterLayout, StateVector, epr_state

NOPE_MODEL = "no-pe"


def _integer(value: object, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ContractError(f"{what} 必须是整数，实际为 {value!r}")
    try:
        return int(value)
    except ValueError as exc:
        raise ContractError(f"{what} 必须是整数，实际为 {value!r}") from exc


def _entries_to_array(entries: object) -> np.ndarray:
    if not isinstance(entries, list):
        raise ContractError("entries 必须是 [re, im] 对组成的列表")
    values: List[complex] = []
    for pair in entries:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ContractError(f"复数必须写成 [re, im] 对，实际为 {pair!r}")
        try:
            values.append(complex(float(pair[0]), float(pair[1])))
        except (TypeError, ValueError) as exc:
            raise ContractError(f"复数分量必须是实数，实际为 {pair!r}") from exc
    return np.array(values, dtype=complex)


def _array_to_entries(array: np.ndarray) -> List[List[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(array).reshape(-1)]


def _layout_from(data: object) -> RegisterLayout:
    if not isinstance(data, list):
        raise LayoutError("layout 必须是 [label, dim] 对组成的列表")
    registers: List[Tuple[str, int]] = []
    for item in data:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise LayoutError(f"寄存器必须写成 [label, dim]，实际为 {item!r}")
        registers.append((str(item[0]), _integer(item[1], f"寄存器 {item[0]} 的维度")))
    return RegisterLayout(tuple(registers))


def operator_to_dict(m: Operator) -> Dict[str, object]:
    return {"layout": m.layout.to_list(), "entries": _array_to_entries(m.matrix)}


def state_to_dict(state: StateVector) -> Dict[str, object]:
    return {"layout": state.layout.to_list(), "entries": _array_to_entries(state.amplitudes)}


def load_quantum(data: Mapping[str, object]) -> StateVector | Operator:
    """按 entries 长度解析为态或算符。"""

    if not isinstance(data, Mapping) or "layout" not in data or "entries" not in data:
        raise ContractError("态/算符对象需要 layout 与 entries 两个字段")
    layout = _layout_from(data["layout"])
    values = _entries_to_array(data["entries"])
    dim = layout.total_dim
    if values.size == dim:
        return StateVector(layout, values)
    if values.size == dim * dim:
        return Operator(layout, values.reshape(dim, dim))
    raise LayoutError(f"entries 长度 {values.size} 既不是 {dim} 也不是 {dim * dim}")


def operator_from_dict(data: Mapping[str, object]) -> Operator:
    """读取算符；纯态自动转为其投影算符。"""

    value = load_quantum(data)
    return value.projector() if isinstance(value, StateVector) else value


def state_from_dict(data: Mapping[str, object]) -> StateVector:
    value = load_quantum(data)
    if not isinstance(value, StateVector):
        raise ContractError("此处需要纯态向量而不是算符")
    return value


def _unitary_from(data: object) -> np.ndarray:
    if isinstance(data, Mapping):
        return operator_from_dict(data).matrix
    if isinstance(data, list):
        rows = [_entries_to_array(row) for row in data]
        if len({row.size for row in rows}) > 1:
            raise ContractError("酉矩阵各行长度不一致")
        return np.array(rows, dtype=complex)
    raise ContractError(f"无法解析酉矩阵: {type(data).__name__}")


def strategy_to_dict(spec: GameSpec, strategy: Strategy, model: str | None = None) -> Dict[str, object]:
    data: Dict[str, object] = {
        "k": spec.k,
        "target": state_to_dict(spec.target),
        "shared_state": operator_to_dict(strategy.shared_state),
        "responses": {
            str(x): [_array_to_entries_rows(u) for u in unitaries]
            for x, unitaries in sorted(strategy.responses.items())
        },
    }
    if model is not None:
        data["model"] = model
    return data


def _array_to_entries_rows(matrix: np.ndarray) -> List[List[List[float]]]:
    return [_array_to_entries(row) for row in np.asarray(matrix)]


def strategy_from_dict(data: Mapping[str, object]) -> Tuple[GameSpec, Strategy]:
    if not isinstance(data, Mapping):
        raise ContractError("策略文件顶层必须是 JSON 对象")
    try:
        k = _integer(data["k"], "k")
        shared = data["shared_state"]
    except KeyError as exc:
        raise ContractError(f"策略文件缺少字段: {exc.args[0]}") from None
    target_data = data.get("target", "epr")
    if target_data == "epr":
        target = epr_state("R", "P")
    else:
        target = state_from_dict(target_data)  # type: ignore[arg-type]
    spec = GameSpec(k, target)
    shared_state = operator_from_dict(shared)  # type: ignore[arg-type]
    raw_responses = data.get("responses", {})
    if not isinstance(raw_responses, Mapping):
        raise ContractError("responses 必须是以问题编号为键的对象")
    responses: Dict[int, List[np.ndarray]] = {}
    for x, unitaries in raw_responses.items():
        if not isinstance(unitaries, list):
            raise ContractError(f"问题 {x} 的响应必须是酉矩阵列表")
        responses[_integer(x, "问题编号")] = [_unitary_from(u) for u in unitaries]
    return spec, Strategy(shared_state, responses)


def _read_json(path: Path) -> object:
    try:
        with Path(path).open("r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ContractError(f"未找到文件: {path}") from None
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path} 不是合法 JSON: {exc}") from None


def load_state_file(path: Path) -> StateVector:
    data = _read_json(path)
    if not isinstance(data, Mapping):
        raise ContractError("态文件顶层必须是 JSON 对象")
    return state_from_dict(data)


def load_strategy_file(path: Path) -> Tuple[GameSpec, Strategy, str | None]:
    """读取策略文件，返回 ``(spec, strategy, model)``。"""

    data = _read_json(path)
    try:
        spec, strategy = strategy_from_dict(data)  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ContractError(f"{path} 不是合法的策略文件: {exc}") from exc
    model = data.get("model")
    if model is not None and model != NOPE_MODEL:
        raise ContractError(f"未知的攻击模型标记: {model!r}")
    return spec, strategy, model


def save_strategy_file(path: Path, spec: GameSpec, strategy: Strategy, model: str | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        json.dump(strategy_to_dict(spec, strategy, model), f, ensure_ascii=False, indent=2)


__all__ = [
    "NOPE_MODEL",
    "load_quantum",
    "load_state_file",
    "load_strategy_file",
    "operator_from_dict",
    "operator_to_dict",
    "save_strategy_file",
    "state_from_dict",
    "state_to_dict",
    "strategy_from_dict",
    "strategy_to_dict",
]

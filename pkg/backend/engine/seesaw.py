"""交替优化（see-saw）引擎。

目标函数为 ``(1/N) Σ_x ‖Π_x W_x ψ‖²``，其中 ``W_x`` 是各参与方针对问题 ``x``
的局部酉变换之积。每一轮先固定响应、取平均回代算符的最大本征向量作为共享态，
再固定共享态、用极分解逐个更新 ``(x, 参与方)`` 的酉变换；两步都不会降低目标值。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..config import DEFAULT_SEED
from .errors import ContractError, LayoutError
from .tensor import (
    Operator,
    RegisterLayout,
    StateVector,
    apply_local,
    conjugate_local,
    local_matrix,
    random_unitary,
    top_eigenpair,
)

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12


@dataclass(slots=True)
class SeesawConfig:
    ancilla_dim_a: int = 2
    ancilla_dim_b: int = 2
    max_iters: int = 100
    convergence_tol: float = 1e-10
    seed: int = DEFAULT_SEED
    warm_start: bool = True

    def __post_init__(self) -> None:
        if self.ancilla_dim_a < 1 or self.ancilla_dim_b < 1:
            raise ContractError("辅助寄存器维度必须至少为 1")
        if self.max_iters < 1:
            raise ContractError(f"最大迭代次数必须至少为 1: {self.max_iters}")
        if self.convergence_tol <= 0:
            raise ContractError(f"收敛阈值必须为正数: {self.convergence_tol}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ContractError(f"随机种子必须是 64 位非负整数: {self.seed}")


@dataclass(slots=True)
class SeesawProblem:
    """待优化的博弈：共享态布局、各问题的投影算符与参与方寄存器分组。"""

    layout: RegisterLayout
    projectors: Dict[str, np.ndarray]
    parties: Tuple[Tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen: List[str] = []
        for labels in self.parties:
            for label in labels:
                self.layout.index(label)
            seen.extend(labels)
        if len(set(seen)) != len(seen):
            raise LayoutError("参与方的寄存器分组有重叠")
        dim = self.layout.total_dim
        for question, projector in self.projectors.items():
            if projector.shape != (dim, dim):
                raise LayoutError(f"问题 {question} 的投影算符形状不符: {projector.shape}")

    def party_dim(self, index: int) -> int:
        return int(np.prod([self.layout.dim(label) for label in self.parties[index]]))


@dataclass(slots=True)
class SeesawResult:
    value: float
    iterations: int
    converged: bool
    seed_index: int
    history: List[float] = field(default_factory=list)
    state: StateVector | None = None
    responses: Dict[str, List[np.ndarray]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed_index": self.seed_index,
        }


def _pull_back(problem: SeesawProblem, projector: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """W† Π W，W 为各参与方局部酉变换之积。"""

    op = Operator(problem.layout, projector)
    for labels, unitary in zip(problem.parties, unitaries):
        op = conjugate_local(op, labels, np.asarray(unitary).conj().T)
    return op.matrix


def _apply_all(problem: SeesawProblem, state: StateVector, unitaries: Sequence[np.ndarray], skip: int = -1) -> StateVector:
    for index, (labels, unitary) in enumerate(zip(problem.parties, unitaries)):
        if index != skip:
            state = apply_local(state, labels, unitary)
    return state


def objective(problem: SeesawProblem, state: StateVector, responses: Mapping[str, Sequence[np.ndarray]]) -> float:
    total = 0.0
    for question, projector in problem.projectors.items():
        moved = _apply_all(problem, state, responses[question])
        total += float(np.linalg.norm(projector @ moved.amplitudes) ** 2)
    return total / len(problem.projectors)


def _state_step(
    problem: SeesawProblem,
    responses: Mapping[str, Sequence[np.ndarray]],
    seed_vector: np.ndarray,
) -> Tuple[float, StateVector]:
    averaged = np.zeros((problem.layout.total_dim,) * 2, dtype=complex)
    for question, projector in problem.projectors.items():
        averaged += _pull_back(problem, projector, responses[question])
    averaged = (averaged + averaged.conj().T) / (2 * len(problem.projectors))
    value, state = top_eigenpair(Operator(problem.layout, averaged), seed_vector=seed_vector)
    return value, state


def _response_step(
    problem: SeesawProblem,
    state: StateVector,
    responses: Dict[str, List[np.ndarray]],
) -> None:
    for question, projector in problem.projectors.items():
        unitaries = responses[question]
        for party, labels in enumerate(problem.parties):
            others = _apply_all(problem, state, unitaries, skip=party)
            current = apply_local(others, labels, unitaries[party])
            projected = projector @ current.amplitudes
            weight = float(np.linalg.norm(projected))
            if weight < 1e-12:
                continue
            target = StateVector(problem.layout, projected / weight)
            # max Re Tr[U K] 的解是 K 极分解酉因子的共轭转置
            kernel = local_matrix(others, labels) @ local_matrix(target, labels).conj().T
            polar_unitary, _ = linalg.polar(kernel)
            unitaries[party] = polar_unitary.conj().T


def run_seesaw(
    problem: SeesawProblem,
    cfg: SeesawConfig,
    rng: np.random.Generator,
    seed_index: int = 0,
) -> SeesawResult:
    dim = problem.layout.total_dim
    seed_vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    party_dims = [problem.party_dim(i) for i in range(len(problem.parties))]

    responses: Dict[str, List[np.ndarray]] = {
        question: [random_unitary(d, rng) for d in party_dims] for question in problem.projectors
    }
    value, state = _state_step(problem, responses, seed_vector)
    if cfg.warm_start:
        identity = {question: [np.eye(d, dtype=complex) for d in party_dims] for question in problem.projectors}
        warm_value, warm_state = _state_step(problem, identity, seed_vector)
        if warm_value > value:
            value, state, responses = warm_value, warm_state, identity

    history = [objective(problem, state, responses)]
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        _response_step(problem, state, responses)
        _, state = _state_step(problem, responses, seed_vector)
        current = objective(problem, state, responses)
        if current < history[-1] - MONOTONE_SLACK:
            logger.warning("see-saw 第 %d 轮目标值下降: %.15g -> %.15g", iterations, history[-1], current)
        history.append(current)
        logger.debug("see-saw seed=%d sweep=%d value=%.12g", seed_index, iterations, current)
        if current - history[-2] < cfg.convergence_tol:
            converged = True
            break

    return SeesawResult(
        value=history[-1],
        iterations=iterations,
        converged=converged,
        seed_index=seed_index,
        history=history,
        state=state,
        responses=responses,
    )


__all__ = [
    "MONOTONE_SLACK",
    "SeesawConfig",
    "SeesawProblem",
    "SeesawResult",
    "objective",
    "run_seesaw",
]

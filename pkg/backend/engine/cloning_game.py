"""k 方量子克隆博弈。

裁判 R 公布 x ∈ [k]，参与方 P_x 需要与裁判共享目标态 |Ψ⟩（默认 |Φ⁺⟩）。
博弈最优值等于 ``(1/k)‖Σ_x |Ψ⟩⟨Ψ|_{R P_x} ⊗ 𝕀‖``；策略按 Stinespring 酉形式求值。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import ContractError, LayoutError
from .seesaw import SeesawConfig, SeesawProblem, SeesawResult, run_seesaw
from .tensor import (
    UNITARY_TOL,
    Operator,
    RegisterLayout,
    StateVector,
    is_unitary_matrix,
    basis_state,
    embed,
    ensure_dimension,
    epr_state,
    kron_states,
    op_norm,
    partial_trace,
    permute_state,
    random_state,
    random_unitary,
    top_eigenpair,
)
from .utils import derive_rng

logger = logging.getLogger(__name__)

NAMED_STATES = ("ghz", "w", "guess", "all_zero")
PRIOR_TOL = 1e-12


def party_label(i: int) -> str:
    return f"P{i}"


def ancilla_label(i: int) -> str:
    return f"E{i}"


@dataclass(frozen=True, slots=True, eq=False)
class GameSpec:
    """Ψ-QCG_k 的定义：参与方个数、目标态与（必须均匀的）问题分布。"""

    k: int
    target: StateVector | None = None
    prior: Tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ContractError(f"参与方个数必须至少为 1: {self.k}")
        if self.prior is not None:
            prior = tuple(float(p) for p in self.prior)
            if len(prior) != self.k or any(abs(p - 1.0 / self.k) > PRIOR_TOL for p in prior):
                raise ContractError("问题分布只支持 [k] 上的均匀分布")
        target = self.target if self.target is not None else epr_state("R", "P")
        if len(target.layout) != 2:
            raise LayoutError(f"目标态必须恰好有两个寄存器 (R, P)，实际为 {list(target.labels)}")
        target = target.relabel(dict(zip(target.labels, ("R", "P"))))
        object.__setattr__(self, "target", target)

    @property
    def dim_r(self) -> int:
        return self.target.layout.dim("R")

    @property
    def dim_p(self) -> int:
        return self.target.layout.dim("P")

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout((("R", self.dim_r),) + tuple((party_label(i), self.dim_p) for i in range(self.k)))

    def strategy_layout(self, ancilla_dims: Sequence[int] | None = None) -> RegisterLayout:
        dims = tuple(ancilla_dims) if ancilla_dims is not None else (1,) * self.k
        if len(dims) != self.k:
            raise LayoutError(f"辅助寄存器维度个数 {len(dims)} 与参与方个数 {self.k} 不符")
        registers: List[Tuple[str, int]] = [("R", self.dim_r)]
        for i, dim in enumerate(dims):
            registers.append((party_label(i), self.dim_p))
            registers.append((ancilla_label(i), int(dim)))
        return RegisterLayout(tuple(registers))


@dataclass(frozen=True, slots=True, eq=False)
class Strategy:
    """共享态加上每个问题下各参与方的局部酉变换（缺省为恒等）。"""

    shared_state: Operator
    responses: Mapping[int, Sequence[np.ndarray]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        labels = self.shared_state.labels
        k = (len(labels) - 1) // 2
        expected = ("R",) + tuple(label for i in range(k) for label in (party_label(i), ancilla_label(i)))
        if len(labels) != 2 * k + 1 or labels != expected:
            raise LayoutError(f"策略布局应为 [R, P0, E0, ...]，实际为 {list(labels)}")
        if not self.shared_state.is_state():
            raise ContractError("共享态必须是迹为 1 的半正定 Hermitian 算符")
        checked: Dict[int, Tuple[np.ndarray, ...]] = {}
        for x, unitaries in self.responses.items():
            x = int(x)
            if not 0 <= x < k:
                raise ContractError(f"响应的问题编号超出范围: {x}")
            if len(unitaries) != k:
                raise ContractError(f"问题 {x} 的响应需要 {k} 个局部酉变换，实际为 {len(unitaries)}")
            frozen = []
            for i, unitary in enumerate(unitaries):
                matrix = np.array(unitary, dtype=complex)
                dim = self.party_dim(i)
                if matrix.shape != (dim, dim):
                    raise LayoutError(f"问题 {x} 参与方 {i} 的酉变换形状应为 {(dim, dim)}，实际为 {matrix.shape}")
                if not is_unitary_matrix(matrix, UNITARY_TOL):
                    raise ContractError(f"问题 {x} 参与方 {i} 的响应不是酉矩阵")
                matrix.setflags(write=False)
                frozen.append(matrix)
            checked[x] = tuple(frozen)
        object.__setattr__(self, "responses", checked)

    @classmethod
    def trivial(cls, spec: GameSpec, state: StateVector | Operator) -> "Strategy":
        """恒等响应、无辅助寄存器的策略。"""

        layout = spec.strategy_layout()
        matrix = state.projector().matrix if isinstance(state, StateVector) else state.matrix
        if state.layout.labels != spec.layout.labels:
            raise LayoutError(f"态的布局应为 {list(spec.layout.labels)}，实际为 {list(state.labels)}")
        # 维度为 1 的辅助寄存器不改变基矢顺序
        return cls(Operator(layout, matrix))

    @property
    def k(self) -> int:
        return (len(self.shared_state.layout) - 1) // 2

    @property
    def ancilla_dims(self) -> Tuple[int, ...]:
        return tuple(self.shared_state.layout.dim(ancilla_label(i)) for i in range(self.k))

    def party_dim(self, i: int) -> int:
        layout = self.shared_state.layout
        return layout.dim(party_label(i)) * layout.dim(ancilla_label(i))

    def response(self, x: int, i: int) -> np.ndarray:
        unitaries = self.responses.get(x)
        if unitaries is None:
            return np.eye(self.party_dim(i), dtype=complex)
        return unitaries[i]


@dataclass(slots=True)
class GameValueReport:
    value: float
    operator_norm: float
    witness_state: StateVector

    def to_dict(self, include_witness: bool = False) -> Dict[str, object]:
        data: Dict[str, object] = {"value": self.value, "operator_norm": self.operator_norm}
        if include_witness:
            from .interchange import state_to_dict

            data["witness"] = state_to_dict(self.witness_state)
        return data


def _check_question(spec: GameSpec, x: int) -> None:
    if not 0 <= x < spec.k:
        raise ContractError(f"问题 x={x} 超出范围 [0, {spec.k})")


def game_projector(spec: GameSpec, x: int, layout: RegisterLayout | None = None) -> Operator:
    """|Ψ⟩⟨Ψ|_{R P_x} ⊗ 𝕀，嵌入到 ``layout``（缺省为 [R, P0, ..., P_{k-1}]）。"""

    _check_question(spec, x)
    local = spec.target.relabel({"P": party_label(x)}).projector()
    return embed(local, layout or spec.layout)


def game_operator(spec: GameSpec, layout: RegisterLayout | None = None) -> Operator:
    target_layout = layout or spec.layout
    ensure_dimension(target_layout)
    total = np.zeros((target_layout.total_dim,) * 2, dtype=complex)
    for x in range(spec.k):
        total += game_projector(spec, x, target_layout).matrix
    return Operator(target_layout, total)


def game_value(spec: GameSpec) -> GameValueReport:
    operator = game_operator(spec)
    norm = op_norm(operator)
    _, witness = top_eigenpair(operator)
    logger.debug("game value k=%d dim=%d norm=%.12g", spec.k, operator.dim, norm)
    return GameValueReport(value=norm / spec.k, operator_norm=norm, witness_state=witness)


def closed_form_value(k: int) -> float:
    """EPR 目标的最优值 1/2 + 1/(2k)。"""

    if k < 1:
        raise ContractError(f"参与方个数必须至少为 1: {k}")
    return 0.5 + 0.5 / k


def _zero_rest(k: int, x: int) -> StateVector:
    """|Φ⁺⟩_{R P_x} ⊗ |0…0⟩，按 [R, P0, ..., P_{k-1}] 排列。"""

    rest = [party_label(i) for i in range(k) if i != x]
    term = epr_state("R", party_label(x))
    if rest:
        term = kron_states(term, basis_state(RegisterLayout.qubits(*rest), [0] * len(rest)))
    return permute_state(term, ["R"] + [party_label(i) for i in range(k)])


def optimal_state(k: int) -> StateVector:
    """√(2/(k(k+1))) Σ_x |Φ⁺⟩_{R P_x}|0…0⟩_rest。"""

    if k < 1:
        raise ContractError(f"参与方个数必须至少为 1: {k}")
    layout = GameSpec(k).layout
    ensure_dimension(layout)
    amplitudes = sum(_zero_rest(k, x).amplitudes for x in range(k))
    return StateVector(layout, math.sqrt(2.0 / (k * (k + 1))) * amplitudes)


def named_state(name: str, k: int) -> StateVector:
    """GHZ、W、猜测 x=0 以及全零积态，作用在 [R, P0, ..., P_{k-1}] 上。"""

    if name not in NAMED_STATES:
        raise ContractError(f"未知的命名态 {name!r}，可选 {list(NAMED_STATES)}")
    if k < 1:
        raise ContractError(f"参与方个数必须至少为 1: {k}")
    layout = GameSpec(k).layout
    ensure_dimension(layout)
    qubits = k + 1
    amplitudes = np.zeros(layout.total_dim, dtype=complex)
    if name == "ghz":
        amplitudes[0] = amplitudes[-1] = 1 / math.sqrt(2)
    elif name == "w":
        for q in range(qubits):
            amplitudes[1 << q] = 1 / math.sqrt(qubits)
    elif name == "guess":
        return _zero_rest(k, 0)
    else:
        amplitudes[0] = 1.0
    return StateVector(layout, amplitudes)


def _joint_response(strategy: Strategy, x: int) -> np.ndarray:
    joint = np.eye(strategy.shared_state.layout.dim("R"), dtype=complex)
    for i in range(strategy.k):
        joint = np.kron(joint, strategy.response(x, i))
    return joint


def evaluate_strategy(spec: GameSpec, s: Strategy) -> float:
    """按定义求策略的获胜概率：作用响应、对其余参与方求偏迹、与目标态取重叠。"""

    if s.k != spec.k:
        raise LayoutError(f"策略的参与方个数 {s.k} 与博弈 k={spec.k} 不符")
    layout = spec.strategy_layout(s.ancilla_dims)
    if s.shared_state.layout != layout:
        raise LayoutError(f"策略布局应为 {layout.to_list()}，实际为 {s.shared_state.layout.to_list()}")
    rho = s.shared_state.matrix
    target = spec.target.projector().matrix
    total = 0.0
    for x in range(spec.k):
        joint = _joint_response(s, x)
        evolved = Operator(layout, joint @ rho @ joint.conj().T)
        reduced = partial_trace(evolved, {"R", party_label(x)})
        total += float(np.trace(target @ reduced.matrix).real)
    return min(max(total / spec.k, 0.0), 1.0)


def random_strategy(
    spec: GameSpec,
    rng: np.random.Generator,
    ancilla_dims: Sequence[int] | None = None,
) -> Strategy:
    """随机纯共享态加随机局部酉响应。"""

    layout = spec.strategy_layout(ancilla_dims)
    state = random_state(layout, rng)
    dims = [spec.dim_p * layout.dim(ancilla_label(i)) for i in range(spec.k)]
    responses = {x: [random_unitary(d, rng) for d in dims] for x in range(spec.k)}
    return Strategy(state.projector(), responses)


def cloning_seesaw_problem(spec: GameSpec, ancilla_dims: Sequence[int] | None = None) -> SeesawProblem:
    layout = spec.strategy_layout(ancilla_dims)
    projectors = {str(x): game_projector(spec, x, layout).matrix for x in range(spec.k)}
    parties = tuple((party_label(i), ancilla_label(i)) for i in range(spec.k))
    return SeesawProblem(layout=layout, projectors=projectors, parties=parties)


def seesaw_cloning(spec: GameSpec, cfg: SeesawConfig, seed_index: int = 0) -> SeesawResult:
    """对 k 方博弈运行交替优化，所有参与方的辅助维度取 ``cfg.ancilla_dim_a``。"""

    problem = cloning_seesaw_problem(spec, (cfg.ancilla_dim_a,) * spec.k)
    return run_seesaw(problem, cfg, derive_rng(cfg.seed, seed_index), seed_index)


__all__ = [
    "GameSpec",
    "GameValueReport",
    "NAMED_STATES",
    "Strategy",
    "ancilla_label",
    "closed_form_value",
    "cloning_seesaw_problem",
    "evaluate_strategy",
    "game_operator",
    "game_projector",
    "game_value",
    "named_state",
    "optimal_state",
    "party_label",
    "random_strategy",
    "seesaw_cloning",
]

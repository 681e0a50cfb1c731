"""路由 QPV 协议：诚实证明者、No-PE 攻击、精确接受率与蒙特卡洛模拟。

一轮协议的时间被抽象为三个阶段：t=0 验证者发出量子比特与 x，t=1 攻击者完成一次
同时通信，t=2 被指定方把寄存器交给 V_x。纯化模型中 V_0 保留 Bell 对的一半并在
t=2 做 Bell 测量，只接受结果 (0,0)；非纯化模型中对发出的 BB84 态做投影测量。

No-PE 攻击写成 Alice 对截获比特的等距映射 ``Q -> [A, EA, B, EB]`` 加上依赖 x 的
局部酉变换；在纯化模型下它恰好是 QCG_2 的一个策略（A=P0，B=P1）。
n > 1 时单轮攻击在各轮独立地（张量积）执行。
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..config import DEFAULT_SEED
from .cloning_game import GameSpec, Strategy, evaluate_strategy, party_label
from .errors import AttackStructureError, ContractError, LayoutError, ResourceLimitError
from .parallel import ParallelSpec, eval_parallel_strategy
from .tensor import (
    PAULI,
    STATE_TOL,
    UNITARY_TOL,
    Operator,
    RegisterLayout,
    StateVector,
    apply_local,
    epr_state,
    ensure_dimension,
    is_unitary_matrix,
    kron,
    kron_all,
    kron_states,
    local_matrix,
    measure,
    partial_trace,
    permute,
    permute_state,
    random_unitary,
)
from .utils import chunk_ranges, derive_rng, map_ordered, standard_error, wilson_interval

logger = logging.getLogger(__name__)

BB84_LABELS = ("0", "1", "+", "-")
BB84_STATES: Dict[str, np.ndarray] = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}
for _v in BB84_STATES.values():
    _v.setflags(write=False)

BB84_PARTNER = {"0": "1", "1": "0", "+": "-", "-": "+"}

BELL_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))
DELIVERED = "D"
PHASES = {"send": 0, "exchange": 1, "answer": 2}
CHUNK_SIZE = 4096
PURITY_TOL = 1e-9

ATTACK_LAYOUT_LABELS = ("R", "P0", "E0", "P1", "E1")


def pauli_correction(a: int, b: int) -> np.ndarray:
    """σ_ab = X^b Z^a。"""

    return np.linalg.matrix_power(PAULI["X"], b) @ np.linalg.matrix_power(PAULI["Z"], a)


def bell_state(a: int, b: int, first: str = "R", second: str = "Q") -> StateVector:
    """|β_ab⟩ = (X^b Z^a ⊗ 𝕀)|Φ⁺⟩，Pauli 作用在第一个寄存器上。"""

    return apply_local(epr_state(first, second), [first], pauli_correction(a, b))


@dataclass(slots=True)
class RoundConfig:
    n: int = 1
    purified: bool = True
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ContractError(f"并行轮数必须至少为 1: {self.n}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ContractError(f"随机种子必须是 64 位非负整数: {self.seed}")


class AttackKind(str, Enum):
    NONE = "none"
    NOPE_OPTIMAL = "nope_optimal"
    CUSTOM = "custom"


@dataclass(frozen=True, slots=True, eq=False)
class NoPEAttack:
    """单轮 No-PE 攻击：等距映射 ``Q -> [A, EA, B, EB]`` 与按 x 索引的 (U_A, U_B)。"""

    isometry: np.ndarray
    ancilla_dims: Tuple[int, int] = (1, 1)
    responses: Mapping[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        dim_a, dim_b = (int(d) for d in self.ancilla_dims)
        if dim_a < 1 or dim_b < 1:
            raise ContractError("辅助寄存器维度必须至少为 1")
        out_dim = 2 * dim_a * 2 * dim_b
        isometry = np.array(self.isometry, dtype=complex)
        if isometry.shape != (out_dim, 2):
            raise AttackStructureError(f"等距映射形状应为 {(out_dim, 2)}，实际为 {isometry.shape}")
        gram = isometry.conj().T @ isometry
        if np.max(np.abs(gram - np.eye(2))) > UNITARY_TOL:
            raise AttackStructureError("Alice 的操作不是等距映射：截获比特的信息没有被完整保留")
        isometry.setflags(write=False)
        checked: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        for x, pair in self.responses.items():
            if int(x) not in (0, 1):
                raise ContractError(f"问题 x 只能取 0 或 1: {x}")
            if len(pair) != 2:
                raise ContractError(f"问题 {x} 需要 Alice 与 Bob 各一个酉变换")
            frozen = []
            for party, (unitary, dim) in enumerate(zip(pair, (2 * dim_a, 2 * dim_b))):
                matrix = np.array(unitary, dtype=complex)
                if matrix.shape != (dim, dim) or not is_unitary_matrix(matrix, UNITARY_TOL):
                    raise AttackStructureError(f"问题 {x} 参与方 {party} 的响应不是 {dim} 维酉矩阵")
                matrix.setflags(write=False)
                frozen.append(matrix)
            checked[int(x)] = (frozen[0], frozen[1])
        object.__setattr__(self, "isometry", isometry)
        object.__setattr__(self, "ancilla_dims", (dim_a, dim_b))
        object.__setattr__(self, "responses", checked)

    @property
    def output_layout(self) -> RegisterLayout:
        dim_a, dim_b = self.ancilla_dims
        return RegisterLayout((("P0", 2), ("E0", dim_a), ("P1", 2), ("E1", dim_b)))

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout((("R", 2),)).concat(self.output_layout)

    def response(self, x: int, party: int) -> np.ndarray:
        pair = self.responses.get(x)
        if pair is None:
            dim = 2 * self.ancilla_dims[party]
            return np.eye(dim, dtype=complex)
        return pair[party]

    def shared_state(self) -> StateVector:
        """(𝕀_R ⊗ V)|Φ⁺⟩_{RQ}。"""

        amplitudes = np.concatenate([self.isometry[:, 0], self.isometry[:, 1]]) / math.sqrt(2)
        return StateVector(self.layout, amplitudes)

    def to_strategy(self) -> Strategy:
        responses = {x: [pair[0], pair[1]] for x, pair in self.responses.items()}
        return Strategy(self.shared_state().projector(), responses)

    @classmethod
    def from_state(
        cls,
        state: StateVector,
        responses: Mapping[int, Sequence[np.ndarray]] | None = None,
    ) -> "NoPEAttack":
        """由纯共享态还原 Alice 的等距映射；要求 R 的约化态为 𝕀/2。"""

        if state.labels != ATTACK_LAYOUT_LABELS:
            raise LayoutError(f"攻击态布局应为 {list(ATTACK_LAYOUT_LABELS)}，实际为 {list(state.labels)}")
        if state.layout.dim("R") != 2 or state.layout.dim("P0") != 2 or state.layout.dim("P1") != 2:
            raise LayoutError("R、P0、P1 必须都是量子比特")
        rows = local_matrix(state, ["R"])
        marginal = rows @ rows.conj().T
        if np.max(np.abs(marginal - np.eye(2) / 2)) > STATE_TOL:
            raise AttackStructureError("R 的约化态不是最大混合态：共享态无法只由 Alice 对截获比特的操作产生")
        isometry = math.sqrt(2) * rows.T
        dims = (state.layout.dim("E0"), state.layout.dim("E1"))
        pairs = {int(x): (u[0], u[1]) for x, u in (responses or {}).items()}
        return cls(isometry=isometry, ancilla_dims=dims, responses=pairs)

    @classmethod
    def from_strategy(cls, spec: GameSpec, strategy: Strategy) -> "NoPEAttack":
        """静态结构检查：k=2、EPR 目标、纯共享态且 R 边缘为最大混合。"""

        if spec.k != 2:
            raise AttackStructureError(f"路由协议只对应 k=2 的克隆博弈，实际 k={spec.k}")
        epr = epr_state("R", "P")
        if spec.target.layout != epr.layout or abs(abs(spec.target.overlap(epr)) - 1.0) > STATE_TOL:
            raise AttackStructureError("路由协议的目标态必须是 |Φ⁺⟩")
        rho = strategy.shared_state.matrix
        purity = float(np.trace(rho @ rho).real)
        if abs(purity - 1.0) > PURITY_TOL:
            raise AttackStructureError(f"No-PE 攻击的共享态必须是纯态（纯度 {purity:.6g}）")
        _, vectors = np.linalg.eigh(rho)
        state = StateVector.normalized(strategy.shared_state.layout, vectors[:, -1])
        return cls.from_state(state, strategy.responses)


@dataclass(slots=True)
class AttackModel:
    kind: AttackKind
    attack: NoPEAttack | None = None

    def __post_init__(self) -> None:
        self.kind = AttackKind(self.kind)
        if self.kind is AttackKind.NONE and self.attack is not None:
            raise ContractError("诚实模型不应携带攻击")
        if self.kind is not AttackKind.NONE and self.attack is None:
            raise ContractError(f"攻击模型 {self.kind.value} 需要给出 No-PE 攻击")

    @classmethod
    def honest(cls) -> "AttackModel":
        return cls(AttackKind.NONE)

    @classmethod
    def custom(cls, attack: NoPEAttack) -> "AttackModel":
        return cls(AttackKind.CUSTOM, attack)

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {"kind": self.kind.value}
        if self.attack is not None:
            data["ancilla_dims"] = list(self.attack.ancilla_dims)
        return data


def resource_state() -> StateVector:
    """(|Φ⁺⟩_{A0 A}|0⟩_B + |Φ⁺⟩_{A0 B}|0⟩_A)/√3，布局 [A0, A, B]。"""

    layout = RegisterLayout.qubits("A0", "A", "B")
    zero = StateVector(RegisterLayout.qubits("B"), np.array([1, 0]))
    first = kron_all([epr_state("A0", "A"), zero])
    second = permute_state(kron_all([epr_state("A0", "B"), zero.relabel({"B": "A"})]), layout.labels)
    return StateVector(layout, (first.amplitudes + second.amplitudes) / math.sqrt(3))


def teleported_state(a: int, b: int) -> StateVector:
    """Bell 结果为 (a, b) 并完成校正后的 [R, A, B] 态：(|Φ⁺⟩_{RA}|b⟩_B + |Φ⁺⟩_{RB}|b⟩_A)/√3。"""

    layout = RegisterLayout.qubits("R", "A", "B")
    bit_b = StateVector(RegisterLayout.qubits("B"), np.eye(2)[b])
    first = kron_all([epr_state("R", "A"), bit_b])
    second = permute_state(kron_all([epr_state("R", "B"), bit_b.relabel({"B": "A"})]), layout.labels)
    return StateVector(layout, (first.amplitudes + second.amplitudes) / math.sqrt(3))


def bell_branch(a: int, b: int) -> Tuple[float, StateVector]:
    """在纯化模型中运行攻击电路：对 (Q, A0) 做 Bell 测量取结果 (a, b)，再对 A、B 同时施加 σ_ab。

    返回该结果的概率与校正后的 [R, A, B] 态。
    """

    joint = kron_all([epr_state("R", "Q"), resource_state()])
    bell = bell_state(a, b, "Q", "A0")
    rows = local_matrix(joint, ["Q", "A0"])
    branch = bell.amplitudes.conj() @ rows
    probability = float(np.vdot(branch, branch).real)
    state = StateVector.normalized(RegisterLayout.qubits("R", "A", "B"), branch)
    correction = pauli_correction(a, b)
    state = apply_local(apply_local(state, ["A"], correction), ["B"], correction)
    return probability, state


def nope_attack_strategy() -> AttackModel:
    """已知最优的 No-PE 攻击：Bell 测量结果 (a, b) 记录在 Alice 的辅助寄存器 EA 中。"""

    layout = RegisterLayout((("R", 2), ("P0", 2), ("E0", 4), ("P1", 2), ("E1", 1)))
    total = np.zeros(layout.total_dim, dtype=complex)
    for index, (a, b) in enumerate(BELL_OUTCOMES):
        probability, branch = bell_branch(a, b)
        flag = StateVector(RegisterLayout((("E0", 4),)), np.eye(4)[index])
        placed = kron_all([branch.relabel({"A": "P0", "B": "P1"}), flag, StateVector(RegisterLayout((("E1", 1),)), [1])])
        placed = permute_state(placed, layout.labels)
        total += math.sqrt(probability) * placed.amplitudes
    attack = NoPEAttack.from_state(StateVector(layout, total))
    return AttackModel(AttackKind.NOPE_OPTIMAL, attack)


def random_nope_attack(rng: np.random.Generator, ancilla_dim_a: int = 1, ancilla_dim_b: int = 1) -> AttackModel:
    out_dim = 2 * ancilla_dim_a * 2 * ancilla_dim_b
    isometry = random_unitary(out_dim, rng)[:, :2]
    responses = {
        x: (random_unitary(2 * ancilla_dim_a, rng), random_unitary(2 * ancilla_dim_b, rng)) for x in (0, 1)
    }
    return AttackModel.custom(NoPEAttack(isometry, (ancilla_dim_a, ancilla_dim_b), responses))


def _require_attack(attack: AttackModel) -> NoPEAttack:
    if attack.kind is AttackKind.NONE or attack.attack is None:
        raise AttackStructureError("诚实证明者无法归约为克隆博弈策略：归约需要 Alice/Bob 的对抗性拆分")
    return attack.attack


def _tensored_parallel_state(attack: NoPEAttack, n: int) -> Tuple[ParallelSpec, Operator, Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    spec = ParallelSpec(n)
    single = attack.shared_state()
    copies = [
        single.relabel({"R": f"R{i}", "P0": f"A{i}", "E0": f"EA{i}", "P1": f"B{i}", "E1": f"EB{i}"})
        for i in range(n)
    ]
    order = (
        [f"R{i}" for i in range(n)]
        + [f"A{i}" for i in range(n)]
        + [f"EA{i}" for i in range(n)]
        + [f"B{i}" for i in range(n)]
        + [f"EB{i}" for i in range(n)]
    )
    ensure_dimension(RegisterLayout(tuple(reg for copy in copies for reg in copy.layout)))
    product = permute_state(kron_all(copies), order)
    dim_a, dim_b = attack.ancilla_dims
    layout = spec.strategy_layout(dim_a**n, dim_b**n)
    state = StateVector(layout, product.amplitudes)

    def joint(x: str, party: int) -> np.ndarray:
        tag, anc = ("A", "EA") if party == 0 else ("B", "EB")
        dim = 2 * attack.ancilla_dims[party]
        factors = [
            Operator(RegisterLayout(((f"{tag}{i}", 2), (f"{anc}{i}", dim // 2))), attack.response(int(bit), party))
            for i, bit in enumerate(x)
        ]
        op = factors[0]
        for factor in factors[1:]:
            op = kron(op, factor)
        return permute(op, [f"{tag}{i}" for i in range(n)] + [f"{anc}{i}" for i in range(n)]).matrix

    responses_a = {x: joint(x, 0) for x in spec.questions} if attack.responses else {}
    responses_b = {x: joint(x, 1) for x in spec.questions} if attack.responses else {}
    return spec, state.projector(), responses_a, responses_b


@dataclass(slots=True)
class RoundRecord:
    index: int
    phi: str
    x: int
    routed_to: int
    outcome: str
    passed: bool
    phases: Dict[str, int] = field(default_factory=lambda: dict(PHASES))

    def to_dict(self) -> Dict[str, object]:
        return {
            "index": self.index,
            "phi": self.phi,
            "x": self.x,
            "routed_to": self.routed_to,
            "outcome": self.outcome,
            "passed": self.passed,
            "phases": dict(self.phases),
        }


@dataclass(slots=True)
class ProtocolRun:
    run: int
    rounds: List[RoundRecord]

    @property
    def accepted(self) -> bool:
        return all(record.passed for record in self.rounds)

    def to_dict(self) -> Dict[str, object]:
        return {"run": self.run, "accepted": self.accepted, "rounds": [r.to_dict() for r in self.rounds]}


def exact_acceptance(cfg: RoundConfig, attack: AttackModel) -> float:
    """纯化模型下的精确接受率：n=1 归约为 QCG_2，n>1 归约为 QCG_2 的并行重复。

    n 轮张量积态超出维度上限时，按各轮独立执行取单轮值的 n 次幂。
    """

    nope = _require_attack(attack)
    single = evaluate_strategy(GameSpec(2), nope.to_strategy())
    if cfg.n == 1:
        return single
    try:
        spec, rho, responses_a, responses_b = _tensored_parallel_state(nope, cfg.n)
    except ResourceLimitError as exc:
        logger.info("n=%d 的张量积态无法稠密构造（%s），改用单轮值的幂", cfg.n, exc)
        return single**cfg.n
    return eval_parallel_strategy(spec, rho, responses_a, responses_b)


def _prepare_measure_table(attack: NoPEAttack | None) -> np.ndarray:
    """非纯化模型下 ``table[phi, x]`` 为通过概率。"""

    table = np.ones((len(BB84_LABELS), 2))
    if attack is None:
        return table
    layout = attack.output_layout
    for i, label in enumerate(BB84_LABELS):
        phi = BB84_STATES[label]
        sent = StateVector(layout, attack.isometry @ phi)
        for x in (0, 1):
            moved = apply_local(apply_local(sent, ["P0", "E0"], attack.response(x, 0)), ["P1", "E1"], attack.response(x, 1))
            reduced = partial_trace(moved.projector(), {party_label(x)}).matrix
            table[i, x] = float(np.vdot(phi, reduced @ phi).real)
    return table


def prepare_measure_acceptance(cfg: RoundConfig, attack: AttackModel) -> float:
    """非纯化（BB84 投影测量）模型下的精确接受率，各轮独立。"""

    table = _prepare_measure_table(attack.attack)
    return float(table.mean()) ** cfg.n


def model_acceptance(cfg: RoundConfig, attack: AttackModel) -> float:
    if attack.kind is AttackKind.NONE:
        return 1.0
    return exact_acceptance(cfg, attack) if cfg.purified else prepare_measure_acceptance(cfg, attack)


@lru_cache(maxsize=1)
def bell_basis() -> np.ndarray:
    """按 ``BELL_OUTCOMES`` 顺序排列的 Bell 基，每行一个基矢。"""

    basis = np.array([bell_state(a, b, "L", "M").amplitudes for a, b in BELL_OUTCOMES])
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=None)
def _bb84_basis(label: str) -> np.ndarray:
    """第一行是发送的态，第二行是同一基下与之正交的态。"""

    basis = np.array([BB84_STATES[label], BB84_STATES[BB84_PARTNER[label]]])
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=1)
def _cached_resource() -> StateVector:
    return resource_state()


def _attack_round(sent: StateVector, attack: AttackModel, x: int, rng: np.random.Generator) -> StateVector:
    """对截获的 Q 运行一轮攻击电路，返回交给 V_x 的寄存器（重命名为 D）所在的整体态。"""

    if attack.kind is AttackKind.NONE:
        return sent.relabel({"Q": DELIVERED})
    if attack.kind is AttackKind.NOPE_OPTIMAL:
        # Alice 自备资源态，对 (Q, A0) 做 Bell 测量并把结果随 B 一起发给 Bob
        joint = kron_states(sent, _cached_resource())
        outcome, _, post = measure(joint, ["Q", "A0"], bell_basis(), rng)
        correction = pauli_correction(*BELL_OUTCOMES[outcome])
        post = apply_local(apply_local(post, ["A"], correction), ["B"], correction)
        return post.relabel({"A" if x == 0 else "B": DELIVERED})
    nope = _require_attack(attack)
    rows = local_matrix(sent, ["Q"])
    layout = nope.output_layout.concat(sent.layout.without(["Q"]))
    moved = StateVector(layout, (nope.isometry @ rows).reshape(-1))
    moved = apply_local(moved, ["P0", "E0"], nope.response(x, 0))
    moved = apply_local(moved, ["P1", "E1"], nope.response(x, 1))
    return moved.relabel({party_label(x): DELIVERED})


def _verify(cfg: RoundConfig, delivered: StateVector, phi: str, rng: np.random.Generator) -> Tuple[str, bool]:
    if cfg.purified:
        outcome, _, _ = measure(delivered, ["R", DELIVERED], bell_basis(), rng)
        a, b = BELL_OUTCOMES[outcome]
        return f"{a}{b}", outcome == 0
    outcome, _, _ = measure(delivered, [DELIVERED], _bb84_basis(phi), rng)
    return ("match" if outcome == 0 else "orthogonal"), outcome == 0


def _run_round(cfg: RoundConfig, attack: AttackModel, index: int, rng: np.random.Generator) -> RoundRecord:
    x = int(rng.integers(0, 2))
    if cfg.purified:
        phi, sent = "bell", epr_state("R", "Q")
    else:
        phi = BB84_LABELS[int(rng.integers(0, len(BB84_LABELS)))]
        sent = StateVector(RegisterLayout.qubits("Q"), BB84_STATES[phi])
    delivered = _attack_round(sent, attack, x, rng)
    outcome, passed = _verify(cfg, delivered, phi, rng)
    return RoundRecord(index, phi, x, x, outcome, passed)


def _sample_runs(
    cfg: RoundConfig,
    attack: AttackModel,
    rng: np.random.Generator,
    start: int,
    count: int,
    keep: bool,
) -> Tuple[int, List[ProtocolRun]]:
    accepted = 0
    runs: List[ProtocolRun] = []
    for offset in range(count):
        run = ProtocolRun(start + offset, [_run_round(cfg, attack, i, rng) for i in range(cfg.n)])
        accepted += run.accepted
        if keep:
            runs.append(run)
    return accepted, runs


def honest_round(cfg: RoundConfig) -> ProtocolRun:
    """诚实证明者把收到的态原样交给 V_x。"""

    _, runs = _sample_runs(cfg, AttackModel.honest(), derive_rng(cfg.seed, 0), 0, 1, True)
    return runs[0]


@dataclass(slots=True)
class SimulationResult:
    config: RoundConfig
    attack: AttackModel
    rounds: int
    accepted: int
    exact: float | None
    transcript: List[ProtocolRun] = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.accepted / self.rounds

    @property
    def ci95(self) -> Tuple[float, float]:
        return wilson_interval(self.accepted, self.rounds)

    @property
    def standard_error(self) -> float:
        return standard_error(self.rate, self.rounds)

    def to_dict(self) -> Dict[str, object]:
        low, high = self.ci95
        return {
            "config": {"n": self.config.n, "purified": self.config.purified, "seed": self.config.seed},
            "attack": self.attack.to_dict(),
            "rounds": self.rounds,
            "accept_rate": self.rate,
            "ci95": [low, high],
            "exact": self.exact,
        }

    def transcript_rows(self) -> List[Dict[str, object]]:
        rows: List[Dict[str, object]] = []
        for run in self.transcript:
            for record in run.rounds:
                row = {"run": run.run, "accepted": run.accepted, **record.to_dict()}
                row.pop("phases")
                rows.append(row)
        return rows

    def transcript_csv(self) -> str:
        buffer = io.StringIO()
        rows = self.transcript_rows()
        fieldnames = ["run", "accepted", "index", "phi", "x", "routed_to", "outcome", "passed"]
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()


def simulate(
    cfg: RoundConfig,
    attack: AttackModel,
    rounds: int,
    workers: int = 1,
    keep_transcript: bool = False,
    with_exact: bool = True,
) -> SimulationResult:
    """逐轮运行态矢量电路的蒙特卡洛；按块派生随机数，结果与线程数无关。"""

    if rounds < 1:
        raise ContractError(f"模拟轮数必须至少为 1: {rounds}")

    def one(chunk: Tuple[int, int, int]) -> Tuple[int, List[ProtocolRun]]:
        index, start, stop = chunk
        result = _sample_runs(cfg, attack, derive_rng(cfg.seed, index), start, stop - start, keep_transcript)
        logger.debug("qpv chunk=%d runs=%d accepted=%d", index, stop - start, result[0])
        return result

    results = map_ordered(one, list(chunk_ranges(rounds, CHUNK_SIZE)), workers)
    accepted = sum(count for count, _ in results)
    transcript = [run for _, runs in results for run in runs]
    exact = model_acceptance(cfg, attack) if with_exact else None
    return SimulationResult(cfg, attack, rounds, accepted, exact, transcript)


__all__ = [
    "AttackKind",
    "AttackModel",
    "BB84_LABELS",
    "BB84_STATES",
    "BELL_OUTCOMES",
    "NoPEAttack",
    "ProtocolRun",
    "RoundConfig",
    "RoundRecord",
    "SimulationResult",
    "bell_basis",
    "bell_branch",
    "bell_state",
    "exact_acceptance",
    "honest_round",
    "model_acceptance",
    "nope_attack_strategy",
    "pauli_correction",
    "prepare_measure_acceptance",
    "random_nope_attack",
    "resource_state",
    "simulate",
    "teleported_state",
]

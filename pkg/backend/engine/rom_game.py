"""(H,n)-路由协议的博弈归约实验。

game1 是真实协议：x = H(r_0 ⊕ r_1)。game3 在 t=1 时采样新的 x 并把 H 在 r_0 ⊕ r_1 处
重编程。game2（BB84 态换成 Bell 对的一半）直接体现在纯化接线中，不单独建模。
game4 对 game3 在 t=1 时的共享态按均匀的 x 精确求 QCG_2^{×n} 的通过概率。

攻击者只做经典查询。A 侧在 t=1 之前为每个截获比特给出一个 No-PE 攻击
（内置方式名会换成对应的等距映射），收到 x 后双方可在己方寄存器上做局部酉变换；
验证者对 (R_i, 被路由的寄存器) 做 Bell 测量，只有结果 (0,0) 算通过。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..config import DEFAULT_SEED
from .base import Adversary
from .cloning_game import party_label
from .context import (
    CLONE,
    FORWARD,
    KEEP,
    QUBIT_MODES,
    PostMove,
    PostPhaseContext,
    PreMove,
    PrePhaseContext,
    QubitHandle,
    QubitMove,
)
from .errors import ContractError, QueryBudgetExceeded
from .oracle import OracleHandle, reprogram_distinguisher_bound, sample_oracle, soundness_epsilon
from .parallel import analytic_upper_bound
from .qpv import NoPEAttack, bell_basis, nope_attack_strategy
from .tensor import StateVector, apply_local, is_unitary_matrix, local_matrix, measure
from .utils import bitstrings, chunk_ranges, derive_rng, int_to_bits, map_ordered, standard_error, wilson_interval

logger = logging.getLogger(__name__)

GAME1 = "game1"
GAME3 = "game3"
GAME_MODES = (GAME1, GAME3)
CHUNK_SIZE = 2048
GAME4_MAX_N = 3
CUSTOM_MODE = "custom"

# derive_rng 的子流编号
_TABLE, _RANDOMNESS, _ALICE, _BOB, _FRESH, _CHECKS = range(6)

_KET_ZERO = np.array([[1], [0]], dtype=complex)


@dataclass(slots=True)
class HRoutingConfig:
    ell: int = 8
    n: int = 1
    q_max: int = 4
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.ell < 1 or self.n < 1:
            raise ContractError(f"ℓ 与 n 必须至少为 1: ℓ={self.ell}, n={self.n}")
        if self.q_max < 0:
            raise ContractError(f"查询预算不能为负: {self.q_max}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ContractError(f"随机种子必须是 64 位非负整数: {self.seed}")

    def to_dict(self) -> Dict[str, object]:
        return {"ell": self.ell, "n": self.n, "q_max": self.q_max, "seed": self.seed}


@lru_cache(maxsize=None)
def mode_attack(mode: str) -> NoPEAttack:
    """内置处理方式对应的 No-PE 攻击：keep 留给 Alice，forward 转给 Bob，clone 为最优克隆。"""

    if mode == KEEP:
        return NoPEAttack(np.kron(np.eye(2), _KET_ZERO))
    if mode == FORWARD:
        return NoPEAttack(np.kron(_KET_ZERO, np.eye(2)))
    if mode == CLONE:
        return nope_attack_strategy().attack  # type: ignore[return-value]
    raise ContractError(f"未知的比特处理方式 {mode!r}，可选 {list(QUBIT_MODES)}")


def _routed_state(attack: NoPEAttack, bit: int, unitary_a: np.ndarray | None, unitary_b: np.ndarray | None) -> StateVector:
    state = attack.shared_state()
    state = apply_local(state, ["P0", "E0"], attack.response(bit, 0) if unitary_a is None else unitary_a)
    return apply_local(state, ["P1", "E1"], attack.response(bit, 1) if unitary_b is None else unitary_b)


def qubit_acceptance(
    attack: NoPEAttack,
    bit: int,
    unitary_a: np.ndarray | None = None,
    unitary_b: np.ndarray | None = None,
) -> float:
    """单个比特在问题 ``bit`` 下通过 Bell 检验的精确概率 ⟨Φ⁺|ρ_{R P_bit}|Φ⁺⟩。"""

    rows = local_matrix(_routed_state(attack, bit, unitary_a, unitary_b), ["R", party_label(bit)])
    branch = bell_basis()[0].conj() @ rows
    return float(np.vdot(branch, branch).real)


@lru_cache(maxsize=None)
def mode_acceptance(mode: str) -> Tuple[float, float]:
    """``(p_{x=0}, p_{x=1})``：验证者对该比特做 Bell 检验的通过概率。"""

    attack = mode_attack(mode)
    return qubit_acceptance(attack, 0), qubit_acceptance(attack, 1)


def _resolve_moves(modes: Sequence[QubitMove], n: int) -> Tuple[Tuple[NoPEAttack, ...], Tuple[str, ...]]:
    modes = tuple(modes)
    if len(modes) != n:
        raise ContractError(f"攻击者需要为 {n} 个截获比特给出处理方式，实际给出 {len(modes)} 个")
    attacks: List[NoPEAttack] = []
    labels: List[str] = []
    for mode in modes:
        if isinstance(mode, NoPEAttack):
            attacks.append(mode)
            labels.append(CUSTOM_MODE)
        elif mode in QUBIT_MODES:
            attacks.append(mode_attack(mode))
            labels.append(mode)
        else:
            raise ContractError(f"未知的比特处理方式 {mode!r}，可选 {list(QUBIT_MODES)} 或 NoPEAttack")
    return tuple(attacks), tuple(labels)


def _post_unitaries(move: PostMove | None, attacks: Sequence[NoPEAttack], party: int) -> List[np.ndarray | None]:
    """校验并展开一方的 t=1 之后的局部酉变换，未给出的比特为 None。"""

    unitaries: List[np.ndarray | None] = [None] * len(attacks)
    if move is None:
        return unitaries
    for index, unitary in move.unitaries.items():
        if not 0 <= int(index) < len(attacks):
            raise ContractError(f"局部酉变换的比特下标超出范围: {index}")
        dim = 2 * attacks[int(index)].ancilla_dims[party]
        matrix = np.asarray(unitary, dtype=complex)
        if matrix.shape != (dim, dim) or not is_unitary_matrix(matrix):
            raise ContractError(f"比特 {index} 上的局部操作不是 {dim} 维酉矩阵")
        unitaries[int(index)] = matrix
    return unitaries


@dataclass(slots=True)
class RunOutcome:
    run: int
    accepted: bool
    budget_exceeded: bool
    queries: int
    x: str | None = None
    modes: Tuple[str, ...] = ()


def _pre_phase(
    cfg: HRoutingConfig,
    adversary: Adversary,
    run_index: int,
) -> Tuple[OracleHandle, int, int, PreMove, PreMove, Tuple[NoPEAttack, ...], Tuple[str, ...]]:
    table = sample_oracle(cfg.ell, cfg.n, cfg.seed, run_index, _TABLE)
    setup = derive_rng(cfg.seed, run_index, _RANDOMNESS)
    r0 = int(setup.integers(0, 2**cfg.ell))
    r1 = int(setup.integers(0, 2**cfg.ell))
    handle = OracleHandle(table, budget=min(cfg.q_max, adversary.query_budget))
    qubits = tuple(QubitHandle(i) for i in range(cfg.n))
    move_a = adversary.pre_phase(
        PrePhaseContext("A", cfg.ell, cfg.n, r0, handle, derive_rng(cfg.seed, run_index, _ALICE), qubits)
    )
    move_b = adversary.pre_phase(
        PrePhaseContext("B", cfg.ell, cfg.n, r1, handle, derive_rng(cfg.seed, run_index, _BOB))
    )
    attacks, labels = _resolve_moves(move_a.modes, cfg.n)
    return handle, r0, r1, move_a, move_b, attacks, labels


def _post_phase(
    adversary: Adversary,
    x: str,
    handle: OracleHandle,
    move_a: PreMove,
    move_b: PreMove,
    attacks: Sequence[NoPEAttack],
) -> Tuple[List[np.ndarray | None], List[np.ndarray | None]]:
    post_a = adversary.post_phase(PostPhaseContext("A", x, handle, move_a.note, move_b.note))
    post_b = adversary.post_phase(PostPhaseContext("B", x, handle, move_b.note, move_a.note))
    return _post_unitaries(post_a, attacks, 0), _post_unitaries(post_b, attacks, 1)


def game_reduction_run(cfg: HRoutingConfig, adversary: Adversary, mode: str, run_index: int = 0) -> RunOutcome:
    """运行一次 game1 或 game3；超出查询预算的运行按拒绝处理并打上标记。"""

    if mode not in GAME_MODES:
        raise ContractError(f"未知的博弈 {mode!r}，可选 {list(GAME_MODES)}")
    handle: OracleHandle | None = None
    try:
        handle, r0, r1, move_a, move_b, attacks, labels = _pre_phase(cfg, adversary, run_index)
        point = r0 ^ r1
        if mode == GAME3:
            fresh = int(derive_rng(cfg.seed, run_index, _FRESH).integers(0, 2**cfg.n))
            handle.reprogram(point, fresh)
        x = int_to_bits(handle.table.lookup(point), cfg.n)
        unitaries_a, unitaries_b = _post_phase(adversary, x, handle, move_a, move_b, attacks)
    except QueryBudgetExceeded as exc:
        logger.debug("run=%d %s rejected: %s", run_index, adversary.name, exc)
        queries = handle.count if handle is not None else cfg.q_max + 1
        return RunOutcome(run_index, accepted=False, budget_exceeded=True, queries=queries)

    rng = derive_rng(cfg.seed, run_index, _CHECKS)
    passed = []
    for i, bit in enumerate(x):
        state = _routed_state(attacks[i], int(bit), unitaries_a[i], unitaries_b[i])
        outcome, _, _ = measure(state, ["R", party_label(int(bit))], bell_basis(), rng)
        passed.append(outcome == 0)
    return RunOutcome(run_index, all(passed), False, handle.count, x, labels)


@dataclass(slots=True)
class GameEstimate:
    mode: str
    runs: int
    accepted: int
    budget_flags: int

    @property
    def rate(self) -> float:
        return self.accepted / self.runs

    @property
    def standard_error(self) -> float:
        return standard_error(self.rate, self.runs)

    @property
    def ci95(self) -> Tuple[float, float]:
        return wilson_interval(self.accepted, self.runs)

    def to_dict(self) -> Dict[str, object]:
        low, high = self.ci95
        return {
            "mode": self.mode,
            "runs": self.runs,
            "accept_rate": self.rate,
            "ci95": [low, high],
            "stderr": self.standard_error,
            "budget_flags": self.budget_flags,
        }


def estimate_game(
    cfg: HRoutingConfig,
    adversary: Adversary,
    mode: str,
    runs: int,
    workers: int = 1,
) -> GameEstimate:
    """以运行编号派生随机数，game1 与 game3 使用公共随机数。"""

    if runs < 1:
        raise ContractError(f"运行次数必须至少为 1: {runs}")

    def one(chunk: Tuple[int, int, int]) -> Tuple[int, int]:
        _, start, stop = chunk
        outcomes = [game_reduction_run(cfg, adversary, mode, j) for j in range(start, stop)]
        return sum(o.accepted for o in outcomes), sum(o.budget_exceeded for o in outcomes)

    results = map_ordered(one, list(chunk_ranges(runs, CHUNK_SIZE)), workers)
    return GameEstimate(
        mode=mode,
        runs=runs,
        accepted=sum(a for a, _ in results),
        budget_flags=sum(b for _, b in results),
    )


@dataclass(slots=True)
class Game4Report:
    value: float
    upper: float
    runs: int
    budget_flags: int
    distinct_states: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "upper": self.upper,
            "runs": self.runs,
            "budget_flags": self.budget_flags,
            "distinct_states": self.distinct_states,
        }


def _matrix_key(matrix: np.ndarray | None) -> bytes | None:
    return None if matrix is None else np.ascontiguousarray(matrix).tobytes()


def game4_value(cfg: HRoutingConfig, adversary: Adversary, runs: int) -> Game4Report:
    """对每次运行的 t=1 共享态，在全部 2^n 个问题串上精确求通过概率并取平均。

    每个 x 都在重编程为 H(r_0 ⊕ r_1) = x 的预言机副本上调用一次 t=1 之后的动作；
    各比特的共享态与局部操作互相独立，所以通过概率是逐比特概率之积。
    """

    if cfg.n > GAME4_MAX_N:
        raise ContractError(f"game4 只支持 n ≤ {GAME4_MAX_N}，实际 n={cfg.n}")
    if runs < 1:
        raise ContractError(f"运行次数必须至少为 1: {runs}")
    cache: Dict[Tuple[NoPEAttack, int, bytes | None, bytes | None], float] = {}
    seen = set()
    flagged = 0
    total = 0.0
    questions = bitstrings(cfg.n)
    for j in range(runs):
        try:
            handle, r0, r1, move_a, move_b, attacks, labels = _pre_phase(cfg, adversary, j)
        except QueryBudgetExceeded:
            flagged += 1
            continue
        seen.add(labels)
        values = []
        for x in questions:
            branch = OracleHandle(handle.table, handle.budget)
            branch.count = handle.count
            branch.reprogram(r0 ^ r1, int(x, 2))
            try:
                unitaries_a, unitaries_b = _post_phase(adversary, x, branch, move_a, move_b, attacks)
            except QueryBudgetExceeded:
                values.append(0.0)
                continue
            product = 1.0
            for i, bit in enumerate(x):
                key = (attacks[i], int(bit), _matrix_key(unitaries_a[i]), _matrix_key(unitaries_b[i]))
                if key not in cache:
                    cache[key] = qubit_acceptance(attacks[i], int(bit), unitaries_a[i], unitaries_b[i])
                product *= cache[key]
            values.append(product)
        total += math.fsum(values) / len(questions)
    return Game4Report(
        value=total / runs,
        upper=analytic_upper_bound(cfg.n).value,
        runs=runs,
        budget_flags=flagged,
        distinct_states=len(seen),
    )


@dataclass(slots=True)
class ReductionReport:
    adversary: str
    config: HRoutingConfig
    game1: GameEstimate
    game3: GameEstimate
    queries: int
    game4: Game4Report | None = None

    @property
    def delta(self) -> float:
        return abs(self.game1.rate - self.game3.rate)

    @property
    def distinguisher_bound(self) -> float:
        return reprogram_distinguisher_bound(self.queries, self.config.ell)

    @property
    def delta_margin(self) -> float:
        return 4.0 * math.hypot(self.game1.standard_error, self.game3.standard_error)

    def to_dict(self) -> Dict[str, object]:
        bound = soundness_epsilon(self.queries, self.config.ell, self.config.n)
        data: Dict[str, object] = {
            "adversary": self.adversary,
            "config": self.config.to_dict(),
            "queries": self.queries,
            "game1": self.game1.to_dict(),
            "game3": self.game3.to_dict(),
            "delta": self.delta,
            "distinguisher_bound": self.distinguisher_bound,
            "delta_within_bound": self.delta <= self.distinguisher_bound + self.delta_margin,
            "epsilon": bound.epsilon,
            "vacuous": bound.vacuous,
            "sound": bound.vacuous or self.game1.rate <= bound.epsilon + 4.0 * self.game1.standard_error,
        }
        if self.game4 is not None:
            data["game4"] = self.game4.to_dict()
        return data


def compare_games(cfg: HRoutingConfig, adversary: Adversary, runs: int, workers: int = 1) -> ReductionReport:
    game1 = estimate_game(cfg, adversary, GAME1, runs, workers)
    game3 = estimate_game(cfg, adversary, GAME3, runs, workers)
    game4 = game4_value(cfg, adversary, runs) if cfg.n <= GAME4_MAX_N else None
    queries = min(cfg.q_max, adversary.query_budget)
    logger.debug("rom %s game1=%.6f game3=%.6f", adversary.name, game1.rate, game3.rate)
    return ReductionReport(adversary.name, cfg, game1, game3, queries, game4)


__all__ = [
    "CUSTOM_MODE",
    "GAME1",
    "GAME3",
    "GAME_MODES",
    "Game4Report",
    "GameEstimate",
    "HRoutingConfig",
    "ReductionReport",
    "RunOutcome",
    "compare_games",
    "estimate_game",
    "game4_value",
    "game_reduction_run",
    "mode_acceptance",
    "mode_attack",
    "qubit_acceptance",
]

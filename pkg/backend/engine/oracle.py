"""桌面规模的可重编程随机预言机。

``OracleTable`` 是不可变的函数表 H: {0,1}^ℓ -> {0,1}^n；查询计数由 ``OracleHandle``
负责，攻击者只能通过句柄访问预言机。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import ContractError, QueryBudgetExceeded, ResourceLimitError
from .parallel import analytic_upper_bound
from .tensor import Operator, RegisterLayout, StateVector
from .utils import derive_rng

logger = logging.getLogger(__name__)

MAX_TABLE_BITS = 24
MAX_UNITARY_BITS = 12


@dataclass(frozen=True, slots=True, eq=False)
class OracleTable:
    ell: int
    n: int
    table: Tuple[int, ...]
    reprogram_log: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.ell < 1 or self.n < 1:
            raise ContractError(f"ℓ 与 n 必须至少为 1: ℓ={self.ell}, n={self.n}")
        if len(self.table) != 2**self.ell:
            raise ContractError(f"函数表长度应为 2^ℓ = {2**self.ell}，实际为 {len(self.table)}")
        if any(not 0 <= v < 2**self.n for v in self.table):
            raise ContractError(f"函数表的取值必须小于 2^n = {2**self.n}")

    def lookup(self, r: int) -> int:
        self._check_input(r)
        return self.table[r]

    def _check_input(self, r: int) -> None:
        if not 0 <= r < 2**self.ell:
            raise ContractError(f"预言机输入 {r} 超出 [0, 2^{self.ell})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OracleTable):
            return NotImplemented
        return (self.ell, self.n, self.table) == (other.ell, other.n, other.table)

    def __hash__(self) -> int:
        return hash((self.ell, self.n, self.table))


def sample_oracle(ell: int, n: int, seed: int, *indices: int) -> OracleTable:
    """从 ``(seed, indices...)`` 派生的随机数生成器中均匀采样函数表。"""

    if ell < 1 or n < 1:
        raise ContractError(f"ℓ 与 n 必须至少为 1: ℓ={ell}, n={n}")
    if ell > MAX_TABLE_BITS:
        raise ResourceLimitError(f"函数表需要 2^{ell} 项，超过上限 2^{MAX_TABLE_BITS}")
    rng = derive_rng(seed, *indices)
    values = rng.integers(0, 2**n, size=2**ell)
    return OracleTable(ell, n, tuple(int(v) for v in values))


def reprogram(h: OracleTable, r: int, x: int) -> OracleTable:
    """返回 H[r ↦ x]；原表不变。"""

    h._check_input(r)
    if not 0 <= x < 2**h.n:
        raise ContractError(f"重编程的取值 {x} 超出 [0, 2^{h.n})")
    table = list(h.table)
    table[r] = x
    logger.debug("reprogram H[%d] %d -> %d", r, h.table[r], x)
    return OracleTable(h.ell, h.n, tuple(table), h.reprogram_log + ((r, x),))


def oracle_permutation(h: OracleTable) -> np.ndarray:
    """|r⟩|b⟩ -> |r⟩|b ⊕ H(r)⟩ 对应的基矢置换，下标为 ``r * 2^n + b``。"""

    if h.ell + h.n > MAX_TABLE_BITS:
        raise ResourceLimitError(f"置换需要 2^{h.ell + h.n} 项，超过上限 2^{MAX_TABLE_BITS}")
    r = np.repeat(np.arange(2**h.ell), 2**h.n)
    b = np.tile(np.arange(2**h.n), 2**h.ell)
    values = np.asarray(h.table)[r]
    return r * 2**h.n + (b ^ values)


def oracle_layout(h: OracleTable) -> RegisterLayout:
    labels = [f"r{i}" for i in range(h.ell)] + [f"b{i}" for i in range(h.n)]
    return RegisterLayout.qubits(*labels)


def oracle_unitary(h: OracleTable) -> Operator:
    if h.ell + h.n > MAX_UNITARY_BITS:
        raise ResourceLimitError(f"ℓ + n = {h.ell + h.n} 超过酉预言机上限 {MAX_UNITARY_BITS}")
    perm = oracle_permutation(h)
    dim = perm.size
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[perm, np.arange(dim)] = 1.0
    return Operator(oracle_layout(h), matrix)


class OracleHandle:
    """带查询计数与预算的预言机访问句柄。"""

    def __init__(self, table: OracleTable, budget: int | None = None):
        self._table = table
        self.budget = budget
        self.count = 0

    @property
    def ell(self) -> int:
        return self._table.ell

    @property
    def n(self) -> int:
        return self._table.n

    def _charge(self) -> None:
        self.count += 1
        if self.budget is not None and self.count > self.budget:
            raise QueryBudgetExceeded(f"查询次数 {self.count} 超过预算 {self.budget}")

    def query(self, r: int) -> int:
        self._charge()
        return self._table.lookup(r)

    def apply(self, state: StateVector) -> StateVector:
        """对 ``[r, b]`` 寄存器上的态作用一次 U_H（叠加查询）。"""

        self._charge()
        unitary = oracle_unitary(self._table)
        if state.layout != unitary.layout:
            raise ContractError("态的布局与预言机寄存器不一致")
        return StateVector(state.layout, unitary.matrix @ state.amplitudes)

    def reprogram(self, r: int, x: int) -> None:
        self._table = reprogram(self._table, r, x)

    @property
    def table(self) -> OracleTable:
        return self._table


def reprogram_distinguisher_bound(q: int, ell: int) -> float:
    """区分重编程前后预言机的优势上界 2q·2^{-ℓ/2}。"""

    if q < 0:
        raise ContractError(f"查询次数不能为负: {q}")
    if ell < 1:
        raise ContractError(f"ℓ 必须至少为 1: {ell}")
    return 2.0 * q * 2.0 ** (-ell / 2)


@dataclass(slots=True)
class SoundnessBound:
    q: int
    ell: int
    n: int
    reprogram_term: float
    game_term: float

    @property
    def epsilon(self) -> float:
        return self.reprogram_term + self.game_term

    @property
    def vacuous(self) -> bool:
        return self.epsilon > 1.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "ell": self.ell,
            "n": self.n,
            "epsilon": self.epsilon,
            "reprogram_term": self.reprogram_term,
            "game_term": self.game_term,
            "vacuous": self.vacuous,
        }


def soundness_epsilon(q: int, ell: int, n: int) -> SoundnessBound:
    """ε = 2q·2^{-ℓ/2} + (1/2 + 1/(2√2))^n，超过 1 时原样返回并标记为 vacuous。"""

    if n < 1:
        raise ContractError(f"n 必须至少为 1: {n}")
    return SoundnessBound(
        q=q,
        ell=ell,
        n=n,
        reprogram_term=reprogram_distinguisher_bound(q, ell),
        game_term=analytic_upper_bound(n).value,
    )


__all__ = [
    "MAX_TABLE_BITS",
    "MAX_UNITARY_BITS",
    "OracleHandle",
    "OracleTable",
    "SoundnessBound",
    "oracle_layout",
    "oracle_permutation",
    "oracle_unitary",
    "reprogram",
    "reprogram_distinguisher_bound",
    "sample_oracle",
    "soundness_epsilon",
]

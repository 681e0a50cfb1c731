"""内置攻击者，按名称注册供 CLI 使用。"""

from __future__ import annotations

from typing import Callable, Dict, List

import numpy as np

from .base import Adversary
from .context import CLONE, FORWARD, KEEP, PostMove, PostPhaseContext, PreMove, PrePhaseContext
from .errors import ContractError
from .qpv import NoPEAttack, pauli_correction
from .utils import int_to_bits

KET_ZERO = np.array([[1], [0]], dtype=complex)


class RouteToV0(Adversary):
    """不查询预言机，把所有比特留在 Alice 处。"""

    name = "route-v0"
    query_budget = 0

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        return PreMove(modes=(KEEP,) * len(context.qubits))


class CloneAll(Adversary):
    """对每个比特执行最优单轮克隆攻击。"""

    name = "clone"
    query_budget = 0

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        return PreMove(modes=(CLONE,) * len(context.qubits))


class LookupGuess(Adversary):
    """猜测 r_1，查询一次 H(r_0 ⊕ r_1') 并按预测的 x 路由。"""

    name = "lookup"
    query_budget = 1

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        if context.side != "A":
            return PreMove()
        guess = int(context.rng.integers(0, 2**context.ell))
        predicted = int_to_bits(context.oracle.query(context.r ^ guess), context.n)
        modes = tuple(KEEP if bit == "0" else FORWARD for bit in predicted)
        return PreMove(modes=modes, note=predicted)


class LateLookup(Adversary):
    """克隆所有比特，t=1 之后再查询预言机；查询已无法影响量子寄存器。"""

    name = "late-lookup"
    query_budget = 2

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        return PreMove(modes=(CLONE,) * len(context.qubits), note=context.r)

    def post_phase(self, context: PostPhaseContext) -> PostMove | None:
        if context.partner_note is not None and context.own_note is not None:
            context.oracle.query(int(context.own_note) ^ int(context.partner_note))
        return None


class MaskedKeep(Adversary):
    """把比特加上随机 Pauli 掩码后留在 Alice 处，收到 x 后再撤销掩码。"""

    name = "masked-keep"
    query_budget = 0

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        if context.side != "A":
            return PreMove()
        masks = tuple((int(context.rng.integers(0, 2)), int(context.rng.integers(0, 2))) for _ in context.qubits)
        attacks = tuple(NoPEAttack(np.kron(pauli_correction(a, b), KET_ZERO)) for a, b in masks)
        return PreMove(modes=attacks, note=masks)

    def post_phase(self, context: PostPhaseContext) -> PostMove | None:
        if context.side != "A":
            return None
        masks = context.own_note
        return PostMove({i: pauli_correction(a, b).conj().T for i, (a, b) in enumerate(masks)})


class Flood(Adversary):
    """声明零次查询却不停查询，用于检验预算约束。"""

    name = "flood"
    query_budget = 0

    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        for r in range(2**context.ell):
            context.oracle.query(r)
        return PreMove(modes=(CLONE,) * len(context.qubits))


BUILTIN_ADVERSARIES: Dict[str, Callable[[], Adversary]] = {
    cls.name: cls for cls in (RouteToV0, CloneAll, LookupGuess, LateLookup, MaskedKeep, Flood)
}


def available_adversaries() -> List[str]:
    return sorted(BUILTIN_ADVERSARIES)


def get_adversary(name: str) -> Adversary:
    try:
        return BUILTIN_ADVERSARIES[name]()
    except KeyError:
        raise ContractError(f"未知的攻击者 {name!r}，可选 {available_adversaries()}") from None


__all__ = [
    "BUILTIN_ADVERSARIES",
    "CloneAll",
    "Flood",
    "LateLookup",
    "LookupGuess",
    "MaskedKeep",
    "RouteToV0",
    "available_adversaries",
    "get_adversary",
]

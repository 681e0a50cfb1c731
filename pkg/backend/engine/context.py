"""攻击者回调的上下文。

A 侧在 t=1 之前为每个截获比特给出一个处理方式：内置方式名（keep/forward/clone），
或任意一个 :class:`NoPEAttack`。收到 x 之后双方可以通过 :class:`PostMove`
对各自持有的 (P_i, E_i) 寄存器施加酉变换，缺省时使用攻击自带的按问题响应。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

import numpy as np

from .oracle import OracleHandle
from .qpv import NoPEAttack

KEEP = "keep"
FORWARD = "forward"
CLONE = "clone"
QUBIT_MODES = (KEEP, FORWARD, CLONE)

QubitMove = Union[str, NoPEAttack]


@dataclass(frozen=True, slots=True)
class QubitHandle:
    """V_0 发出的第 ``index`` 个 Bell 对的一半。"""

    index: int


@dataclass(slots=True)
class PrePhaseContext:
    side: str
    ell: int
    n: int
    r: int
    oracle: OracleHandle
    rng: np.random.Generator
    qubits: Tuple[QubitHandle, ...] = ()


@dataclass(slots=True)
class PreMove:
    """``modes`` 只对 A 侧有意义：每个截获比特的处理方式。"""

    modes: Tuple[QubitMove, ...] = ()
    note: object = None


@dataclass(slots=True)
class PostPhaseContext:
    side: str
    x: str
    oracle: OracleHandle
    own_note: object = None
    partner_note: object = None


@dataclass(slots=True)
class PostMove:
    """按比特下标给出己方 (P_i, E_i) 上的酉变换。"""

    unitaries: Dict[int, np.ndarray] = field(default_factory=dict)


__all__ = [
    "CLONE",
    "FORWARD",
    "KEEP",
    "PostMove",
    "PostPhaseContext",
    "PreMove",
    "PrePhaseContext",
    "QUBIT_MODES",
    "QubitHandle",
    "QubitMove",
]

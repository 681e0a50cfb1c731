"""攻击者基类。"""

from __future__ import annotations

from abc import ABC, abstractmethod

from .context import PostMove, PostPhaseContext, PreMove, PrePhaseContext


class Adversary(ABC):
    name: str
    query_budget: int

    @abstractmethod
    def pre_phase(self, context: PrePhaseContext) -> PreMove:
        """t=0 到 t=1 之间的动作，A 侧必须为每个截获比特给出处理方式。"""

    def post_phase(self, context: PostPhaseContext) -> PostMove | None:
        """t=1 之后收到 x 的动作；只能在己方寄存器上做局部酉变换。"""

        return None


__all__ = ["Adversary"]

"""异常层次。

所有可预期的失败都从 ``CloneGameError`` 派生，CLI 依据 ``exit_code`` 返回退出码，
并通过 ``to_dict`` 输出机器可读的错误对象。
"""

from __future__ import annotations

from typing import Dict


class CloneGameError(Exception):
    code = "error"
    exit_code = 1

    def to_dict(self) -> Dict[str, object]:
        return {"error": {"code": self.code, "message": str(self)}}


class ContractError(CloneGameError):
    """前置条件或输入校验失败。"""

    code = "contract"
    exit_code = 2


class LayoutError(ContractError):
    """寄存器标签重复、缺失或维度不匹配。"""

    code = "layout"


class AttackStructureError(ContractError):
    """攻击不满足 No-PE 结构，或无法归约为克隆博弈。"""

    code = "attack-structure"


class ResourceLimitError(CloneGameError):
    """稠密表示的总维度超过上限。"""

    code = "resource"
    exit_code = 3


class QueryBudgetExceeded(CloneGameError):
    """攻击者对随机预言机的查询次数超过声明的预算。"""

    code = "query-budget"
    exit_code = 2


__all__ = [
    "AttackStructureError",
    "CloneGameError",
    "ContractError",
    "LayoutError",
    "QueryBudgetExceeded",
    "ResourceLimitError",
]

"""后端配置模块。

提供引擎运行时需要的可配置项，例如随机种子、比较容差、并行线程数与输出格式，
以及稠密矩阵维度上限（可通过环境变量 ``CLONEGAME_MAX_DIM`` 覆盖）。
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .engine.errors import ContractError

DEFAULT_SEED = 0xC10FE5EED
DEFAULT_MAX_DIM = 2**14
MAX_DIM_ENV = "CLONEGAME_MAX_DIM"
OUTPUT_FORMATS = ("json", "csv")


def max_dimension() -> int:
    """返回当前生效的总维度上限。"""

    raw = os.getenv(MAX_DIM_ENV)
    if not raw:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw, 0)
    except ValueError as exc:
        raise ContractError(f"环境变量 {MAX_DIM_ENV} 不是合法整数: {raw!r}") from exc
    if value < 1:
        raise ContractError(f"环境变量 {MAX_DIM_ENV} 必须为正整数: {value}")
    return value


@dataclass(slots=True)
class EngineConfig:
    """引擎运行配置。"""

    seed: int = DEFAULT_SEED
    tol: float = 1e-9
    workers: int = 1
    output: str = "json"

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed >= 2**64:
            raise ContractError(f"随机种子必须是 64 位非负整数: {self.seed}")
        if self.tol <= 0:
            raise ContractError(f"容差必须为正数: {self.tol}")
        if self.workers < 1:
            raise ContractError(f"线程数必须至少为 1: {self.workers}")
        if self.output not in OUTPUT_FORMATS:
            raise ContractError(f"不支持的输出格式: {self.output}")


DEFAULT_CONFIG = EngineConfig()

__all__ = [
    "DEFAULT_CONFIG",
    "DEFAULT_MAX_DIM",
    "DEFAULT_SEED",
    "EngineConfig",
    "MAX_DIM_ENV",
    "OUTPUT_FORMATS",
    "max_dimension",
]

"""后端包初始化。

该包负责量子克隆博弈的数值计算、并行重复界的检验以及路由位置验证协议的模拟，
模块化拆分为张量运算、博弈求值、协议模拟与结果汇总。
"""

from .cli import main

__all__ = ["main"]

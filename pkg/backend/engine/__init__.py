"""克隆博弈计算核心包。

``backend.config`` 依赖本包的 ``errors`` 模块，因此这里不在导入时加载运行器；
请直接使用 ``backend.engine.runner.ExperimentRunner``。
"""

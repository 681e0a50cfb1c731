"""通用工具函数：随机数派生、比特串处理、置信区间与输出取整。"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, List, Tuple, TypeVar

import numpy as np
from scipy import stats

from .errors import ContractError

SIGNIFICANT_DIGITS = 12

T = TypeVar("T")
R = TypeVar("R")


def derive_rng(seed: int, *indices: int) -> np.random.Generator:
    """按 ``(seed, index...)`` 派生独立且可复现的随机数生成器。

    以索引而非调用顺序派生，因此多线程分块执行时结果与线程数无关。
    """

    return np.random.default_rng([int(seed), *(int(i) for i in indices)])


def bitstrings(n: int) -> List[str]:
    """按字典序列出全部 ``n`` 位比特串。"""

    return [format(value, f"0{n}b") for value in range(2**n)] if n > 0 else [""]


def int_to_bits(value: int, n: int) -> str:
    return format(value, f"0{n}b")


def check_bitstring(x: str, n: int | None = None) -> str:
    if any(ch not in "01" for ch in x):
        raise ContractError(f"不是合法的比特串: {x!r}")
    if n is not None and len(x) != n:
        raise ContractError(f"比特串长度应为 {n}，实际为 {len(x)}: {x!r}")
    return x


def hamming(x: str, y: str) -> int:
    check_bitstring(y, len(x))
    return sum(a != b for a, b in zip(x, y))


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    """二项比例的 Wilson 95% 置信区间。"""

    if trials < 1:
        raise ContractError("试验次数必须至少为 1")
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=0.95, method="wilson"
    )
    return float(ci.low), float(ci.high)


def standard_error(rate: float, trials: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)


def chunk_ranges(total: int, chunk_size: int) -> Iterator[Tuple[int, int, int]]:
    """产生 ``(chunk_index, start, stop)``，用于按索引分块的蒙特卡洛。"""

    for index, start in enumerate(range(0, total, chunk_size)):
        yield index, start, min(start + chunk_size, total)


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """按输入顺序返回结果；``workers > 1`` 时使用线程池。"""

    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def round_sig(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if value == 0 or not math.isfinite(value):
        return float(value)
    return float(f"{value:.{digits}g}")


def normalize_output(obj: object) -> object:
    """递归地把浮点数取 12 位有效数字，并把 numpy 标量转为内建类型。"""

    if isinstance(obj, dict):
        return {str(k): normalize_output(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize_output(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(obj.real), round_sig(obj.imag)]
    return obj


__all__ = [
    "SIGNIFICANT_DIGITS",
    "bitstrings",
    "check_bitstring",
    "chunk_ranges",
    "derive_rng",
    "hamming",
    "int_to_bits",
    "map_ordered",
    "normalize_output",
    "round_sig",
    "standard_error",
    "wilson_interval",
]

"""QCG_2 的 n 次并行重复。

Alice 与 Bob 收到完整的问题串 x ∈ {0,1}^n，第 i 轮要求 x_i 指定的一方与裁判寄存器
R_i 共享 EPR 对。本模块给出解析上界、张量积下界、投影算符重叠的证明工具
（置换族、投影和范数引理、松弛算符与范数乘积引理）以及 see-saw 启发式下界。

寄存器布局统一为 ``[R0..R_{n-1}, A0..A_{n-1}, EA, B0..B_{n-1}, EB]``。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .cloning_game import optimal_state
from .errors import ContractError, LayoutError
from .seesaw import SeesawConfig, SeesawProblem, SeesawResult, run_seesaw
from .tensor import (
    UNITARY_TOL,
    Operator,
    RegisterLayout,
    StateVector,
    conjugate_local,
    embed,
    ensure_dimension,
    epr_state,
    is_unitary_matrix,
    kron,
    kron_all,
    op_norm,
    permute_state,
    prod_norm,
    random_state,
    random_unitary,
)
from .utils import bitstrings, check_bitstring, derive_rng, hamming, map_ordered

logger = logging.getLogger(__name__)

SINGLE_ROUND_UPPER = 0.5 + 1.0 / (2.0 * math.sqrt(2.0))
SINGLE_ROUND_LOWER = 0.75
NUMERIC_OVERLAP_MAX_N = 3
LOWER_STRATEGY_MAX_N = 3


def _r(i: int) -> str:
    return f"R{i}"


def _a(i: int) -> str:
    return f"A{i}"


def _b(i: int) -> str:
    return f"B{i}"


@dataclass(frozen=True, slots=True)
class ParallelSpec:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ContractError(f"并行重复次数必须至少为 1: {self.n}")

    @property
    def questions(self) -> List[str]:
        return bitstrings(self.n)

    def alice_labels(self) -> Tuple[str, ...]:
        return tuple(_a(i) for i in range(self.n)) + ("EA",)

    def bob_labels(self) -> Tuple[str, ...]:
        return tuple(_b(i) for i in range(self.n)) + ("EB",)

    @property
    def layout(self) -> RegisterLayout:
        labels = [_r(i) for i in range(self.n)] + [_a(i) for i in range(self.n)] + [_b(i) for i in range(self.n)]
        return RegisterLayout.qubits(*labels)

    def strategy_layout(self, ancilla_dim_a: int = 1, ancilla_dim_b: int = 1) -> RegisterLayout:
        registers: List[Tuple[str, int]] = [(_r(i), 2) for i in range(self.n)]
        registers += [(_a(i), 2) for i in range(self.n)] + [("EA", int(ancilla_dim_a))]
        registers += [(_b(i), 2) for i in range(self.n)] + [("EB", int(ancilla_dim_b))]
        return RegisterLayout(tuple(registers))


def _epr_projector(i: int, party: str) -> Operator:
    holder = _a(i) if party == "A" else _b(i)
    return epr_state(_r(i), holder).projector()


def _product_projector(factors: Sequence[Operator], layout: RegisterLayout) -> Operator:
    if not factors:
        return Operator.identity(layout)
    result = factors[0]
    for factor in factors[1:]:
        result = kron(result, factor)
    return embed(result, layout)


def parallel_projector(spec: ParallelSpec, x: str, layout: RegisterLayout | None = None) -> Operator:
    """⊗_i (|Φ⁺⟩⟨Φ⁺|_{R_i Q_{x_i}} ⊗ 𝕀)，Q_0 = A，Q_1 = B。"""

    check_bitstring(x, spec.n)
    factors = [_epr_projector(i, "A" if bit == "0" else "B") for i, bit in enumerate(x)]
    return _product_projector(factors, layout or spec.layout)


def relaxed_projector(spec: ParallelSpec, x: str, side: str, layout: RegisterLayout | None = None) -> Operator:
    """只保留 ``side`` 一方负责的轮次：A 侧取 x_i=0 的轮次，B 侧取 x_i=1 的轮次。"""

    check_bitstring(x, spec.n)
    if side not in ("A", "B"):
        raise ContractError(f"side 只能是 'A' 或 'B': {side!r}")
    wanted = "0" if side == "A" else "1"
    factors = [_epr_projector(i, side) for i, bit in enumerate(x) if bit == wanted]
    return _product_projector(factors, layout or spec.layout)


@dataclass(slots=True)
class UpperBound:
    n: int
    closed_form: float
    binomial_sum: float

    @property
    def value(self) -> float:
        return self.closed_form

    def to_dict(self) -> Dict[str, object]:
        return {"n": self.n, "closed_form": self.closed_form, "binomial_sum": self.binomial_sum}


def analytic_upper_bound(n: int) -> UpperBound:
    """(1/2 + 1/(2√2))^n 及其二项式展开 (1/2^n) Σ_t C(n,t) 2^{-t/2}。"""

    if n < 1:
        raise ContractError(f"并行重复次数必须至少为 1: {n}")
    # 对数空间累加，C(n,t) 超出浮点范围时也不溢出
    t = np.arange(n + 1, dtype=float)
    log_terms = gammaln(n + 1) - gammaln(t + 1) - gammaln(n - t + 1) - (t / 2 + n) * math.log(2.0)
    binomial = float(np.exp(logsumexp(log_terms)))
    return UpperBound(n=n, closed_form=SINGLE_ROUND_UPPER**n, binomial_sum=binomial)


@dataclass(frozen=True, slots=True, eq=False)
class ParallelStrategy:
    """共享态与按完整问题串索引的 Alice/Bob 局部酉变换（缺失的键视为恒等）。"""

    shared_state: Operator
    responses_a: Mapping[str, np.ndarray] = field(default_factory=dict)
    responses_b: Mapping[str, np.ndarray] = field(default_factory=dict)

    def value(self, spec: ParallelSpec) -> float:
        return eval_parallel_strategy(spec, self.shared_state, self.responses_a, self.responses_b)


def tensor_lower_bound(n: int) -> Tuple[float, ParallelStrategy | None]:
    """(3/4)^n；n 不太大时同时给出 n 份最优单轮态的张量积策略。"""

    spec = ParallelSpec(n)
    value = SINGLE_ROUND_LOWER**n
    if n > LOWER_STRATEGY_MAX_N:
        return value, None
    single = optimal_state(2)
    copies = [single.relabel({"R": _r(i), "P0": _a(i), "P1": _b(i)}) for i in range(n)]
    product = kron_all(copies)
    ordered = permute_state(product, spec.layout.labels)
    layout = spec.strategy_layout()
    state = StateVector(layout, ordered.amplitudes)
    return value, ParallelStrategy(state.projector())


def _ancilla_dims(spec: ParallelSpec, layout: RegisterLayout) -> Tuple[int, int]:
    for label in ("EA", "EB"):
        if label not in layout:
            raise LayoutError(f"共享态布局缺少辅助寄存器 {label}")
    dims = (layout.dim("EA"), layout.dim("EB"))
    expected = spec.strategy_layout(*dims)
    if layout != expected:
        raise LayoutError(f"共享态布局应为 {expected.to_list()}，实际为 {layout.to_list()}")
    return dims


def _check_responses(responses: Mapping[str, np.ndarray], n: int, dim: int, party: str) -> None:
    for x, unitary in responses.items():
        check_bitstring(x, n)
        matrix = np.asarray(unitary)
        if matrix.shape != (dim, dim):
            raise LayoutError(f"{party} 对问题 {x} 的响应形状应为 {(dim, dim)}，实际为 {matrix.shape}")
        if not is_unitary_matrix(matrix, UNITARY_TOL):
            raise ContractError(f"{party} 对问题 {x} 的响应不是酉矩阵")


def eval_parallel_strategy(
    spec: ParallelSpec,
    shared_state: Operator,
    responses_a: Mapping[str, np.ndarray],
    responses_b: Mapping[str, np.ndarray],
) -> float:
    """(1/2^n) Σ_x Tr[Π(x) · (U_A^x ⊗ U_B^x) ρ (U_A^x ⊗ U_B^x)†]。"""

    layout = shared_state.layout
    dim_a, dim_b = _ancilla_dims(spec, layout)
    if not shared_state.is_state():
        raise ContractError("共享态必须是迹为 1 的半正定 Hermitian 算符")
    _check_responses(responses_a, spec.n, 2**spec.n * dim_a, "Alice")
    _check_responses(responses_b, spec.n, 2**spec.n * dim_b, "Bob")
    total = 0.0
    for x in spec.questions:
        rho = shared_state
        if x in responses_a:
            rho = conjugate_local(rho, spec.alice_labels(), responses_a[x])
        if x in responses_b:
            rho = conjugate_local(rho, spec.bob_labels(), responses_b[x])
        projector = parallel_projector(spec, x, layout).matrix
        total += float(np.sum(projector.T * rho.matrix).real)
    return min(max(total / 2**spec.n, 0.0), 1.0)


def random_parallel_strategy(
    spec: ParallelSpec,
    rng: np.random.Generator,
    ancilla_dim_a: int = 1,
    ancilla_dim_b: int = 1,
) -> ParallelStrategy:
    layout = spec.strategy_layout(ancilla_dim_a, ancilla_dim_b)
    state = random_state(layout, rng)
    dim_a = 2**spec.n * ancilla_dim_a
    dim_b = 2**spec.n * ancilla_dim_b
    responses_a = {x: random_unitary(dim_a, rng) for x in spec.questions}
    responses_b = {x: random_unitary(dim_b, rng) for x in spec.questions}
    return ParallelStrategy(state.projector(), responses_a, responses_b)


@dataclass(slots=True)
class OverlapReport:
    x: str
    x_prime: str
    t: int
    t_a: int
    t_b: int
    swapped: bool
    bound: float
    sharp_bound: float
    numeric: float | None = None

    @property
    def t_used(self) -> int:
        return self.t_b if self.swapped else self.t_a

    def to_dict(self) -> Dict[str, object]:
        return {
            "x": self.x,
            "x_prime": self.x_prime,
            "t": self.t,
            "t_a": self.t_a,
            "t_b": self.t_b,
            "swapped": self.swapped,
            "bound": self.bound,
            "sharp_bound": self.sharp_bound,
            "numeric": self.numeric,
        }


def overlap_bound(x: str, x_prime: str) -> OverlapReport:
    """‖M^x M^{x'}‖ ≤ 2^{-t/2}；t_A < t/2 时交换 Alice 与 Bob 的角色。"""

    check_bitstring(x)
    check_bitstring(x_prime)
    if len(x) != len(x_prime):
        raise ContractError(f"问题串长度不一致: {len(x)} 与 {len(x_prime)}")
    t = hamming(x, x_prime)
    t_a = sum(1 for a, b in zip(x, x_prime) if a == "0" and b == "1")
    t_b = t - t_a
    swapped = 2 * t_a < t
    report = OverlapReport(
        x=x,
        x_prime=x_prime,
        t=t,
        t_a=t_a,
        t_b=t_b,
        swapped=swapped,
        bound=2.0 ** (-t / 2),
        sharp_bound=2.0 ** (-max(t_a, t_b)),
    )
    n = len(x)
    if 1 <= n <= NUMERIC_OVERLAP_MAX_N:
        spec = ParallelSpec(n)
        report.numeric = prod_norm(parallel_projector(spec, x), parallel_projector(spec, x_prime))
    return report


@dataclass(slots=True)
class RelaxedOverlap:
    t_used: int
    numeric: float
    expected: float

    def to_dict(self) -> Dict[str, object]:
        return {"t_used": self.t_used, "numeric": self.numeric, "expected": self.expected}


def relaxed_overlap(x: str, x_prime: str) -> RelaxedOverlap:
    """松弛算符 M^x_A 与 M^{x'}_B（或交换角色后的一对）乘积的范数，应为 2^{-t_used}。"""

    report = overlap_bound(x, x_prime)
    spec = ParallelSpec(len(x))
    if report.swapped:
        left, right = relaxed_projector(spec, x, "B"), relaxed_projector(spec, x_prime, "A")
    else:
        left, right = relaxed_projector(spec, x, "A"), relaxed_projector(spec, x_prime, "B")
    return RelaxedOverlap(
        t_used=report.t_used,
        numeric=prod_norm(left, right),
        expected=2.0 ** (-report.t_used),
    )


@dataclass(slots=True)
class NormProductCheck:
    premise: bool
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return (not self.premise) or self.lhs >= self.rhs - 1e-9


def norm_product_check(a: Operator, b: Operator, l: Operator, tol: float = 1e-9) -> NormProductCheck:
    """A†A ⪰ B†B 时应有 ‖A L‖ ≥ ‖B L‖。"""

    gap = a.dagger() @ a - b.dagger() @ b
    gap = Operator(gap.layout, (gap.matrix + gap.matrix.conj().T) / 2)
    smallest = float(np.linalg.eigvalsh(gap.matrix)[0])
    return NormProductCheck(premise=smallest >= -tol, lhs=prod_norm(a, l), rhs=prod_norm(b, l))


@dataclass(frozen=True, slots=True)
class PermutationFamily:
    """``[m]`` 上的一族置换，``maps[key][i] = π_key(i)``。"""

    maps: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.maps:
            raise ContractError("置换族不能为空")
        size = len(self.maps[0])
        for key, perm in enumerate(self.maps):
            if sorted(perm) != list(range(size)):
                raise ContractError(f"第 {key} 个映射不是 [{size}] 上的置换")

    @classmethod
    def xor(cls, n: int) -> "PermutationFamily":
        """π_k(x) = x ⊕ k，k 取遍 {0,1}^n。"""

        m = 2**n
        return cls(tuple(tuple(i ^ key for i in range(m)) for key in range(m)))

    @classmethod
    def cyclic(cls, m: int) -> "PermutationFamily":
        """π_k(i) = i + k mod m。"""

        if m < 1:
            raise ContractError(f"置换族大小必须至少为 1: {m}")
        return cls(tuple(tuple((i + key) % m for i in range(m)) for key in range(m)))

    @property
    def size(self) -> int:
        return len(self.maps[0])

    def __len__(self) -> int:
        return len(self.maps)

    def is_mutually_orthogonal(self) -> bool:
        for first in range(len(self.maps)):
            for second in range(first + 1, len(self.maps)):
                if any(a == b for a, b in zip(self.maps[first], self.maps[second])):
                    return False
        return True


def lemma2_bound(projectors: Sequence[Operator], family: PermutationFamily) -> float:
    """‖Σ_i Π^i‖ ≤ Σ_k max_i ‖Π^i Π^{π_k(i)}‖。"""

    if len(projectors) != family.size:
        raise ContractError(f"投影个数 {len(projectors)} 与置换族作用的集合大小 {family.size} 不符")
    if len(family) != family.size:
        raise ContractError(f"置换族需要恰好 {family.size} 个置换，实际为 {len(family)}")
    if not family.is_mutually_orthogonal():
        raise ContractError("置换族不是两两正交的")
    layout = projectors[0].layout
    for projector in projectors[1:]:
        if projector.layout != layout:
            raise LayoutError("所有投影算符必须位于同一布局上")
    cache: Dict[Tuple[int, int], float] = {}

    def pair_norm(i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in cache:
            # ‖PQ‖ = ‖(PQ)†‖ = ‖QP‖
            cache[key] = prod_norm(projectors[i], projectors[j])
        return cache[key]

    return math.fsum(max(pair_norm(i, perm[i]) for i in range(family.size)) for perm in family.maps)


def projector_sum_norm(projectors: Sequence[Operator]) -> float:
    total = projectors[0].matrix.copy()
    for projector in projectors[1:]:
        total = total + projector.matrix
    return op_norm(Operator(projectors[0].layout, total))


def parallel_seesaw_problem(spec: ParallelSpec, ancilla_dim_a: int, ancilla_dim_b: int) -> SeesawProblem:
    layout = spec.strategy_layout(ancilla_dim_a, ancilla_dim_b)
    ensure_dimension(layout)
    projectors = {x: parallel_projector(spec, x, layout).matrix for x in spec.questions}
    return SeesawProblem(layout=layout, projectors=projectors, parties=(spec.alice_labels(), spec.bob_labels()))


def seesaw_optimize(spec: ParallelSpec, cfg: SeesawConfig, seed_index: int = 0) -> SeesawResult:
    """see-saw 启发式下界；结果只是下界，不是 ω* 的证书。"""

    problem = parallel_seesaw_problem(spec, cfg.ancilla_dim_a, cfg.ancilla_dim_b)
    return run_seesaw(problem, cfg, derive_rng(cfg.seed, seed_index), seed_index)


@dataclass(slots=True)
class SeesawSummary:
    n: int
    lower: float
    upper: float
    best: SeesawResult
    runs: List[SeesawResult]

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "lower": self.lower,
            "upper": self.upper,
            "seesaw_best": self.best.value,
            "seeds": len(self.runs),
            "iters": [run.iterations for run in self.runs],
            "best_seed_index": self.best.seed_index,
            "heuristic": True,
        }


def seesaw_best(spec: ParallelSpec, cfg: SeesawConfig, seeds: int = 1, workers: int = 1) -> SeesawSummary:
    if seeds < 1:
        raise ContractError(f"种子个数必须至少为 1: {seeds}")
    problem = parallel_seesaw_problem(spec, cfg.ancilla_dim_a, cfg.ancilla_dim_b)

    def one(index: int) -> SeesawResult:
        return run_seesaw(problem, cfg, derive_rng(cfg.seed, index), index)

    runs = map_ordered(one, range(seeds), workers)
    best = max(runs, key=lambda run: (run.value, -run.seed_index))
    logger.debug("see-saw n=%d seeds=%d best=%.12g", spec.n, seeds, best.value)
    return SeesawSummary(
        n=spec.n,
        lower=SINGLE_ROUND_LOWER**spec.n,
        upper=analytic_upper_bound(spec.n).value,
        best=best,
        runs=runs,
    )


__all__ = [
    "NormProductCheck",
    "OverlapReport",
    "ParallelSpec",
    "ParallelStrategy",
    "PermutationFamily",
    "RelaxedOverlap",
    "SINGLE_ROUND_LOWER",
    "SINGLE_ROUND_UPPER",
    "SeesawSummary",
    "UpperBound",
    "analytic_upper_bound",
    "eval_parallel_strategy",
    "lemma2_bound",
    "norm_product_check",
    "overlap_bound",
    "parallel_projector",
    "parallel_seesaw_problem",
    "projector_sum_norm",
    "random_parallel_strategy",
    "relaxed_overlap",
    "relaxed_projector",
    "seesaw_best",
    "seesaw_optimize",
    "tensor_lower_bound",
]

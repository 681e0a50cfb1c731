"""带标签寄存器的复线性代数。

约定：大端行主序，布局中最左侧的寄存器是基矢下标的最高位。
所有值在构造后只读，所有运算都是纯函数，可在多线程中并发调用。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.stats import unitary_group

from ..config import max_dimension
from .errors import ContractError, LayoutError, ResourceLimitError

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10
UNITARY_TOL = 1e-10
DEGENERACY_TOL = 1e-9
WITNESS_SEED = 0x5EED

PAULI: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in PAULI.values():
    _m.setflags(write=False)


@dataclass(frozen=True, slots=True)
class RegisterLayout:
    """有序的 ``(标签, 维度)`` 列表。"""

    registers: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        registers = tuple((str(label), int(dim)) for label, dim in self.registers)
        labels = [label for label, _ in registers]
        if len(set(labels)) != len(labels):
            duplicated = sorted({label for label in labels if labels.count(label) > 1})
            raise LayoutError(f"寄存器标签重复: {duplicated}")
        for label, dim in registers:
            if dim < 1:
                raise LayoutError(f"寄存器 {label} 的维度必须至少为 1，实际为 {dim}")
        object.__setattr__(self, "registers", registers)

    @classmethod
    def of(cls, *registers: Tuple[str, int]) -> "RegisterLayout":
        return cls(tuple(registers))

    @classmethod
    def qubits(cls, *labels: str) -> "RegisterLayout":
        return cls(tuple((label, 2) for label in labels))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.registers)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.registers)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.registers)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.registers)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"布局中不存在寄存器 {label!r}，现有 {list(self.labels)}") from None

    def dim(self, label: str) -> int:
        return self.registers[self.index(label)][1]

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LayoutError(f"张量积的寄存器标签冲突: {sorted(clash)}")
        return RegisterLayout(self.registers + other.registers)

    def select(self, labels: Iterable[str]) -> "RegisterLayout":
        return RegisterLayout(tuple((label, self.dim(label)) for label in labels))

    def without(self, labels: Iterable[str]) -> "RegisterLayout":
        dropped = set(labels)
        return RegisterLayout(tuple(reg for reg in self.registers if reg[0] not in dropped))

    def rename(self, mapping: Mapping[str, str]) -> "RegisterLayout":
        for label in mapping:
            self.index(label)
        return RegisterLayout(tuple((mapping.get(label, label), dim) for label, dim in self.registers))

    def to_list(self) -> List[List[object]]:
        return [[label, dim] for label, dim in self.registers]


def ensure_dimension(layout: RegisterLayout) -> None:
    limit = max_dimension()
    if layout.total_dim > limit:
        raise ResourceLimitError(
            f"总维度 {layout.total_dim} 超过上限 {limit}（布局 {list(layout.labels)}）"
        )


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True, eq=False)
class Operator:
    """作用在 ``layout`` 上的稠密复方阵。"""

    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self) -> None:
        ensure_dimension(self.layout)
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.layout.total_dim
        if matrix.shape != (dim, dim):
            raise LayoutError(f"算符形状 {matrix.shape} 与布局总维度 {dim} 不符")
        object.__setattr__(self, "matrix", _readonly(matrix))

    @classmethod
    def identity(cls, layout: RegisterLayout) -> "Operator":
        ensure_dimension(layout)
        return cls(layout, np.eye(layout.total_dim, dtype=complex))

    @classmethod
    def zeros(cls, layout: RegisterLayout) -> "Operator":
        ensure_dimension(layout)
        return cls(layout, np.zeros((layout.total_dim, layout.total_dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.layout.labels

    def dagger(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return is_unitary_matrix(self.matrix, tol)

    def is_state(self, tol: float = STATE_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        if abs(self.trace() - 1.0) > tol:
            return False
        return bool(linalg.eigvalsh(self.matrix)[0] >= -tol)

    def relabel(self, mapping: Mapping[str, str]) -> "Operator":
        return Operator(self.layout.rename(mapping), self.matrix)

    def _check_same_layout(self, other: "Operator") -> None:
        if other.layout != self.layout:
            raise LayoutError(f"布局不一致: {list(self.labels)} 与 {list(other.labels)}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_layout(other)
        return Operator(self.layout, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_layout(other)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_layout(other)
        return Operator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, slots=True, eq=False)
class StateVector:
    """归一化的纯态向量。"""

    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        ensure_dimension(self.layout)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = self.layout.total_dim
        if amplitudes.shape != (dim,):
            raise LayoutError(f"态向量长度 {amplitudes.size} 与布局总维度 {dim} 不符")
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > STATE_TOL:
            raise ContractError(f"态向量未归一化: |ψ|² = {norm_sq:.12g}")
        object.__setattr__(self, "amplitudes", _readonly(amplitudes))

    @classmethod
    def normalized(cls, layout: RegisterLayout, amplitudes: Sequence[complex] | np.ndarray) -> "StateVector":
        vector = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ContractError("零向量无法归一化")
        return cls(layout, vector / norm)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.layout.labels

    def projector(self) -> Operator:
        return Operator(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))

    def relabel(self, mapping: Mapping[str, str]) -> "StateVector":
        return StateVector(self.layout.rename(mapping), self.amplitudes)

    def overlap(self, other: "StateVector") -> complex:
        if other.layout != self.layout:
            raise LayoutError(f"布局不一致: {list(self.labels)} 与 {list(other.labels)}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def is_unitary_matrix(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    gram = matrix.conj().T @ matrix
    return bool(np.max(np.abs(gram - np.eye(matrix.shape[0])), initial=0.0) <= tol)


def kron(a: Operator, b: Operator) -> Operator:
    layout = a.layout.concat(b.layout)
    ensure_dimension(layout)
    return Operator(layout, np.kron(a.matrix, b.matrix))


def kron_states(a: StateVector, b: StateVector) -> StateVector:
    layout = a.layout.concat(b.layout)
    ensure_dimension(layout)
    return StateVector(layout, np.kron(a.amplitudes, b.amplitudes))


def kron_all(items: Sequence[StateVector]) -> StateVector:
    if not items:
        raise ContractError("至少需要一个态")
    result = items[0]
    for item in items[1:]:
        result = kron_states(result, item)
    return result


def permute(m: Operator, order: Sequence[str]) -> Operator:
    """把算符的寄存器顺序重排为 ``order``。"""

    if sorted(order) != sorted(m.labels):
        raise LayoutError(f"重排顺序 {list(order)} 不是 {list(m.labels)} 的排列")
    if tuple(order) == m.labels:
        return m
    dims = m.layout.dims
    n = len(dims)
    perm = [m.layout.index(label) for label in order]
    tensor = m.matrix.reshape(dims + dims).transpose(perm + [p + n for p in perm])
    return Operator(m.layout.select(order), tensor.reshape(m.dim, m.dim))


def permute_state(state: StateVector, order: Sequence[str]) -> StateVector:
    if sorted(order) != sorted(state.labels):
        raise LayoutError(f"重排顺序 {list(order)} 不是 {list(state.labels)} 的排列")
    if tuple(order) == state.labels:
        return state
    perm = [state.layout.index(label) for label in order]
    tensor = state.amplitudes.reshape(state.layout.dims).transpose(perm)
    return StateVector(state.layout.select(order), tensor.reshape(-1))


def partial_trace(m: Operator, keep: Iterable[str]) -> Operator:
    """对 ``keep`` 之外的寄存器求偏迹，保留寄存器按原相对顺序排列。"""

    keep_set = set(keep)
    unknown = keep_set - set(m.labels)
    if unknown:
        raise LayoutError(f"偏迹保留的寄存器不存在: {sorted(unknown)}")
    dims = m.layout.dims
    n = len(dims)
    rows = list(range(n))
    cols = [i if label not in keep_set else n + i for i, label in enumerate(m.labels)]
    kept = [i for i, label in enumerate(m.labels) if label in keep_set]
    out = kept + [n + i for i in kept]
    reduced = np.einsum(m.matrix.reshape(dims + dims), rows + cols, out)
    layout = RegisterLayout(tuple(m.layout.registers[i] for i in kept))
    side = layout.total_dim
    return Operator(layout, np.asarray(reduced).reshape(side, side))


def embed(m: Operator, into: RegisterLayout) -> Operator:
    """补上缺失寄存器的单位算符，并按 ``into`` 的顺序排列。"""

    for label, dim in m.layout:
        if label not in into:
            raise LayoutError(f"寄存器 {label!r} 不在目标布局 {list(into.labels)} 中")
        if into.dim(label) != dim:
            raise LayoutError(f"寄存器 {label!r} 维度不一致: {dim} 与 {into.dim(label)}")
    ensure_dimension(into)
    if m.layout == into:
        return m
    missing = into.without(m.labels)
    padded = kron(m, Operator.identity(missing)) if len(missing) else m
    return permute(padded, into.labels)


def op_norm(m: Operator) -> float:
    """Hermitian 算符的 Schatten-∞ 范数（最大绝对特征值）。"""

    if not m.is_hermitian():
        raise ContractError("op_norm 只接受 Hermitian 算符，一般情形请使用 prod_norm")
    eigenvalues = linalg.eigh(m.matrix, eigvals_only=True)
    return float(max(abs(eigenvalues[0]), abs(eigenvalues[-1])))


def prod_norm(a: Operator, b: Operator) -> float:
    """乘积 ``a·b`` 的 Schatten-∞ 范数，归约为 ``sqrt(op_norm(b†a†ab))``。"""

    if a.layout != b.layout:
        raise LayoutError(f"乘积的布局不一致: {list(a.labels)} 与 {list(b.labels)}")
    product = a.matrix @ b.matrix
    gram = product.conj().T @ product
    gram = (gram + gram.conj().T) / 2
    return math.sqrt(max(op_norm(Operator(a.layout, gram)), 0.0))


@lru_cache(maxsize=64)
def _witness_seed_vector(dim: int) -> np.ndarray:
    rng = np.random.default_rng(WITNESS_SEED)
    vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return _readonly(vector / np.linalg.norm(vector))


def top_eigenpair(
    m: Operator,
    seed_vector: np.ndarray | None = None,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> Tuple[float, StateVector]:
    """最大特征值及确定性的本征向量。

    最大特征值简并时，把种子向量投影到整个最大特征子空间后归一化。
    """

    if not m.is_hermitian():
        raise ContractError("top_eigenpair 只接受 Hermitian 算符")
    eigenvalues, eigenvectors = linalg.eigh(m.matrix)
    top = float(eigenvalues[-1])
    basis = eigenvectors[:, eigenvalues >= top - degeneracy_tol]
    seed = _witness_seed_vector(m.dim) if seed_vector is None else np.asarray(seed_vector, dtype=complex)
    vector = basis @ (basis.conj().T @ seed)
    if np.linalg.norm(vector) < 1e-8:
        vector = basis[:, -1]
    return top, StateVector.normalized(m.layout, vector)


def expectation(m: Operator, state: StateVector) -> float:
    if m.layout != state.layout:
        raise LayoutError(f"布局不一致: {list(m.labels)} 与 {list(state.labels)}")
    return float(np.vdot(state.amplitudes, m.matrix @ state.amplitudes).real)


def _local_axes(layout: RegisterLayout, labels: Sequence[str]) -> List[int]:
    axes = [layout.index(label) for label in labels]
    if len(set(axes)) != len(axes):
        raise LayoutError(f"局部寄存器重复: {list(labels)}")
    return axes


def local_matrix(state: StateVector, labels: Sequence[str]) -> np.ndarray:
    """把态向量改写为 ``(d_labels, d_rest)`` 矩阵，行对应 ``labels`` 子系统。"""

    axes = _local_axes(state.layout, labels)
    tensor = np.moveaxis(state.amplitudes.reshape(state.layout.dims), axes, list(range(len(axes))))
    d_sub = math.prod(state.layout.dims[a] for a in axes)
    return tensor.reshape(d_sub, -1)


def apply_local(state: StateVector, labels: Sequence[str], unitary: np.ndarray) -> StateVector:
    """在 ``labels`` 子系统上作用 ``unitary``，其余寄存器不变。"""

    axes = _local_axes(state.layout, labels)
    sub_dims = [state.layout.dims[a] for a in axes]
    d_sub = math.prod(sub_dims)
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (d_sub, d_sub):
        raise LayoutError(f"局部算符形状 {unitary.shape} 与子系统维度 {d_sub} 不符")
    front = list(range(len(axes)))
    tensor = np.moveaxis(state.amplitudes.reshape(state.layout.dims), axes, front)
    rest_shape = tensor.shape[len(axes):]
    updated = (unitary @ tensor.reshape(d_sub, -1)).reshape(tuple(sub_dims) + rest_shape)
    updated = np.moveaxis(updated, front, axes)
    return StateVector(state.layout, updated.reshape(-1))


def measure(
    state: StateVector,
    labels: Sequence[str],
    basis: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[int, np.ndarray, StateVector]:
    """在 ``labels`` 子系统上做投影测量，``basis`` 的每一行是一个测量基矢。

    返回抽到的结果、各结果的 Born 概率以及其余寄存器上坍缩后的态。
    """

    rows = local_matrix(state, labels)
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[1] != rows.shape[0]:
        raise LayoutError(f"测量基形状 {basis.shape} 与子系统维度 {rows.shape[0]} 不符")
    if not is_unitary_matrix(basis, UNITARY_TOL):
        raise ContractError("测量基必须是完备的正交归一基")
    branches = basis.conj() @ rows
    probabilities = np.clip(np.einsum("ij,ij->i", branches.conj(), branches).real, 0.0, None)
    probabilities = probabilities / probabilities.sum()
    cumulative = np.cumsum(probabilities)
    outcome = min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(probabilities) - 1)
    while probabilities[outcome] == 0.0:
        outcome -= 1
    rest = state.layout.without(labels)
    return outcome, probabilities, StateVector.normalized(rest, branches[outcome])


def conjugate_local(m: Operator, labels: Sequence[str], unitary: np.ndarray) -> Operator:
    """计算 ``U m U†``，其中 ``U`` 只作用在 ``labels`` 子系统上。"""

    axes = _local_axes(m.layout, labels)
    n = len(m.layout)
    sub_dims = [m.layout.dims[a] for a in axes]
    d_sub = math.prod(sub_dims)
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (d_sub, d_sub):
        raise LayoutError(f"局部算符形状 {unitary.shape} 与子系统维度 {d_sub} 不符")
    front = list(range(len(axes)))
    tensor = m.matrix.reshape(m.layout.dims + m.layout.dims)
    # 行指标
    tensor = np.moveaxis(tensor, axes, front)
    shape = tensor.shape
    tensor = (unitary @ tensor.reshape(d_sub, -1)).reshape(shape)
    tensor = np.moveaxis(tensor, front, axes)
    # 列指标
    col_axes = [n + a for a in axes]
    tensor = np.moveaxis(tensor, col_axes, front)
    shape = tensor.shape
    tensor = (unitary.conj() @ tensor.reshape(d_sub, -1)).reshape(shape)
    tensor = np.moveaxis(tensor, front, col_axes)
    return Operator(m.layout, tensor.reshape(m.dim, m.dim))


def basis_state(layout: RegisterLayout, digits: Sequence[int]) -> StateVector:
    if len(digits) != len(layout):
        raise LayoutError(f"基矢下标个数 {len(digits)} 与寄存器个数 {len(layout)} 不符")
    index = 0
    for digit, dim in zip(digits, layout.dims):
        if not 0 <= digit < dim:
            raise ContractError(f"基矢下标 {digit} 超出维度 {dim}")
        index = index * dim + int(digit)
    amplitudes = np.zeros(layout.total_dim, dtype=complex)
    amplitudes[index] = 1.0
    return StateVector(layout, amplitudes)


def epr_state(first: str = "R", second: str = "P") -> StateVector:
    """|Φ⁺⟩ = (|00⟩+|11⟩)/√2。"""

    return StateVector(RegisterLayout.qubits(first, second), np.array([1, 0, 0, 1]) / math.sqrt(2))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar 随机酉矩阵。"""

    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_state(layout: RegisterLayout, rng: np.random.Generator) -> StateVector:
    ensure_dimension(layout)
    dim = layout.total_dim
    return StateVector.normalized(layout, rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


__all__ = [
    "DEGENERACY_TOL",
    "HERMITIAN_TOL",
    "Operator",
    "PAULI",
    "RegisterLayout",
    "STATE_TOL",
    "StateVector",
    "UNITARY_TOL",
    "apply_local",
    "basis_state",
    "conjugate_local",
    "embed",
    "ensure_dimension",
    "epr_state",
    "expectation",
    "is_unitary_matrix",
    "kron",
    "kron_all",
    "kron_states",
    "local_matrix",
    "measure",
    "op_norm",
    "partial_trace",
    "permute",
    "permute_state",
    "prod_norm",
    "random_state",
    "random_unitary",
    "top_eigenpair",
]

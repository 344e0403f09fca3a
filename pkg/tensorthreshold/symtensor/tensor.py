#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
对称张量模块

d 阶对称张量以 {有序下标元组 (i_1 ≤ … ≤ i_d): 公共值} 存储，每个值代表该元组的
所有排列位置。张量与 d 次齐次型之间通过极化权重（多重组合数）一一对应：
entries[t] = 系数 / multiplicity(t)。
"""

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import (
    Polynomial,
    is_homogeneous,
    monomial_from_indices,
    monomial_to_indices,
)
from tensorthreshold.exact_algebra.rational import RationalLike, as_rational, as_rational_vector

logger = logging.getLogger(__name__)

# 稠密展开允许的最大元素个数
MAX_DENSE_ENTRIES = 20_000_000


@lru_cache(maxsize=None)
def multiplicity(indices: Tuple[int, ...]) -> int:
    """
    有序下标元组的不同排列个数 d! / Π_k (下标 k 的出现次数)!

    即极化权重。
    """
    counts: Dict[int, int] = {}
    for i in indices:
        counts[i] = counts.get(i, 0) + 1
    result = math.factorial(len(indices))
    for c in counts.values():
        result //= math.factorial(c)
    return result


@lru_cache(maxsize=4096)
def distinct_permutations(indices: Tuple[int, ...]) -> Tuple[Tuple[int, ...], ...]:
    """多重集的全部不同排列"""
    return tuple(sorted(set(itertools.permutations(indices))))


class SymmetricTensor:
    """
    d 阶对称张量（不可变）

    Attributes:
        dimension: 维数 n
        order: 阶数 d
        entries: 只读的 {有序下标元组: 非零有理值}
    """

    __slots__ = ("_n", "_d", "_entries")

    def __init__(self, dimension: int, order: int, entries: Optional[Mapping[Sequence[int], RationalLike]] = None):
        if dimension < 1 or order < 1:
            raise InputError(f"张量维数和阶数必须为正: n={dimension}, d={order}")
        clean: Dict[Tuple[int, ...], Fraction] = {}
        for idx, value in (entries or {}).items():
            key = tuple(sorted(int(i) for i in idx))
            if len(key) != order:
                raise InputError(f"下标元组 {idx} 的长度与阶数 {order} 不一致")
            if key[0] < 0 or key[-1] >= dimension:
                raise InputError(f"下标元组 {idx} 超出维数 {dimension}")
            if key in clean:
                raise InputError(f"下标元组 {key} 重复给出")
            value = as_rational(value)
            if value:
                clean[key] = value
        self._n = dimension
        self._d = order
        self._entries = clean

    @property
    def dimension(self) -> int:
        return self._n

    @property
    def order(self) -> int:
        return self._d

    @property
    def entries(self) -> Mapping[Tuple[int, ...], Fraction]:
        return MappingProxyType(self._entries)

    def sorted_entries(self) -> List[Tuple[Tuple[int, ...], Fraction]]:
        return sorted(self._entries.items())

    def __eq__(self, other):
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        return (self._n, self._d, self._entries) == (other._n, other._d, other._entries)

    def __hash__(self):
        return hash((self._n, self._d, frozenset(self._entries.items())))

    def __repr__(self):
        return f"SymmetricTensor(n={self._n}, d={self._d}, entries={len(self._entries)})"


def tensor_from_form(p: Polynomial, d: int) -> SymmetricTensor:
    """
    极化：d 次齐次型 -> 对称张量

    单项式系数 c 平分到其有序下标元组 t 的全部排列上: entries[t] = c / multiplicity(t)。

    Raises:
        InputError: p 没有变量，或不是 d 次齐次多项式
    """
    if p.variable_count < 1:
        raise InputError("零元多项式没有对应的对称张量")
    if d < 1:
        raise InputError(f"阶数必须为正: {d}")
    if not is_homogeneous(p, d):
        raise InputError(f"多项式不是 {d} 次齐次多项式")
    entries = {}
    for monomial, coeff in p.terms.items():
        idx = monomial_to_indices(monomial)
        entries[idx] = coeff / multiplicity(idx)
    return SymmetricTensor(p.variable_count, d, entries)


def form_from_tensor(T: SymmetricTensor) -> Polynomial:
    """tensor_from_form 的逆映射"""
    terms = {
        monomial_from_indices(idx): value * multiplicity(idx)
        for idx, value in T.entries.items()
    }
    return Polynomial(T.dimension, terms)


def eval_form(T: SymmetricTensor, z: Sequence[RationalLike]) -> Fraction:
    """
    精确计算 T(z, …, z) = Σ_t multiplicity(t)·entries[t]·Π z_{t_k}

    Raises:
        InputError: 维数不匹配
    """
    if len(z) != T.dimension:
        raise InputError(f"向量维数 {len(z)} 与张量维数 {T.dimension} 不一致")
    values = as_rational_vector(z)
    total = Fraction(0)
    for idx, value in T.entries.items():
        term = value * multiplicity(idx)
        for i in idx:
            term *= values[i]
        total += term
    return total


def eval_multilinear(T: SymmetricTensor, vectors: Sequence[Sequence[RationalLike]]) -> Fraction:
    """
    精确多线性缩并 T(x_1, …, x_d)

    每个有序元组在求值时展开为其全部不同排列。

    Raises:
        InputError: 向量个数不等于阶数或维数不匹配
    """
    if len(vectors) != T.order:
        raise InputError(f"需要 {T.order} 个向量，实际 {len(vectors)} 个")
    slots = []
    for k, vec in enumerate(vectors):
        if len(vec) != T.dimension:
            raise InputError(f"第 {k} 个向量维数 {len(vec)} 与张量维数 {T.dimension} 不一致")
        slots.append(as_rational_vector(vec))
    total = Fraction(0)
    for idx, value in T.entries.items():
        acc = Fraction(0)
        for perm in distinct_permutations(idx):
            term = Fraction(1)
            for k, i in enumerate(perm):
                term *= slots[k][i]
                if not term:
                    break
            acc += term
        total += value * acc
    return total


def iter_dense_entries(T: SymmetricTensor) -> Iterator[Tuple[Tuple[int, ...], Fraction]]:
    """逐个给出所有非零位置（含全部排列）及其值"""
    for idx, value in T.entries.items():
        for perm in distinct_permutations(idx):
            yield perm, value


def to_dense(T: SymmetricTensor) -> np.ndarray:
    """
    展开为完整的 n^d 浮点数组

    对称张量本身就是一般（非对称）张量实例，该数组可直接交给一般张量求解器。
    """
    size = T.dimension ** T.order
    if size > MAX_DENSE_ENTRIES:
        raise InputError(f"稠密展开规模 {size} 超过上限 {MAX_DENSE_ENTRIES}")
    arr = np.zeros((T.dimension,) * T.order, dtype=float)
    for perm, value in iter_dense_entries(T):
        arr[perm] = float(value)
    return arr


def gamma_sq(d: int) -> Fraction:
    """
    阶数提升的退化因子平方 γ_d² = (256/d⁴)·(1/d)^{d-4}

    γ_d = (16/d²)·(1/d)^{(d-4)/2} 在奇数 d 时是无理数，因此只存储其平方。
    """
    if d < 4:
        raise InputError(f"阶数提升要求 d ≥ 4，实际 {d}")
    return Fraction(256, d ** 4) * Fraction(1, d ** (d - 4))


def gamma(d: int) -> float:
    """γ_d 的浮点值"""
    return (16.0 / d ** 2) * (1.0 / d) ** ((d - 4) / 2.0)


class OrderFactor(BaseModel):
    """阈值的代数因子描述：只记录 d，γ_d 由 d 推出（γ_4 = 1）"""
    d: int = Field(ge=4, description="张量阶数")

    model_config = ConfigDict(frozen=True)

    @property
    def gamma_sq(self) -> Fraction:
        return gamma_sq(self.d)


class ThresholdInstance(BaseModel):
    """
    张量谱阈值实例 (T, α)，α = B·γ_d

    阈值比较一律使用平方量以保持有理。
    """
    tensor: SymmetricTensor
    threshold_base: Fraction = Field(description="B")
    order_factor: OrderFactor

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("threshold_base", mode="before")
    @classmethod
    def _coerce(cls, value):
        return as_rational(value)

    @model_validator(mode="after")
    def _check(self) -> "ThresholdInstance":
        if self.threshold_base < 1:
            raise InputError(f"阈值基数 B 必须 ≥ 1，实际 {self.threshold_base}")
        if self.order_factor.d != self.tensor.order:
            raise InputError(f"阶数因子 d={self.order_factor.d} 与张量阶数 {self.tensor.order} 不一致")
        return self

    @property
    def threshold_sq(self) -> Fraction:
        """α² = B²·γ_d²"""
        return self.threshold_base ** 2 * self.order_factor.gamma_sq

    @property
    def threshold_float(self) -> float:
        return float(self.threshold_base) * gamma(self.order_factor.d)

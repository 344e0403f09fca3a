#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
二次型模块

对称有理矩阵 Q 及其二次型 q(z) = zᵀQz，是 HQSF 实例的基本单元。
"""

import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import Polynomial
from tensorthreshold.exact_algebra.rational import RationalLike, as_rational, as_rational_vector

logger = logging.getLogger(__name__)


class QuadraticForm:
    """
    对称二次型（不可变）

    Attributes:
        dimension: 维数 N
        entries: N×N 稠密有理矩阵（行优先元组）
    """

    __slots__ = ("_dim", "_entries", "_nonzero")

    def __init__(self, entries: Sequence[Sequence[RationalLike]]):
        dim = len(entries)
        rows = []
        for row in entries:
            if len(row) != dim:
                raise InputError(f"二次型矩阵必须是方阵，行长度 {len(row)} != {dim}")
            rows.append(as_rational_vector(row))
        for i in range(dim):
            for j in range(i + 1, dim):
                if rows[i][j] != rows[j][i]:
                    raise InputError(f"二次型矩阵不对称: Q[{i}][{j}]={rows[i][j]} != Q[{j}][{i}]={rows[j][i]}")
        self._dim = dim
        self._entries: Tuple[Tuple[Fraction, ...], ...] = tuple(rows)
        # 上三角非零元 (i, j, 权重 * Q_ij)，非对角元计两次
        self._nonzero: Tuple[Tuple[int, int, Fraction], ...] = tuple(
            (i, j, rows[i][j] if i == j else 2 * rows[i][j])
            for i in range(dim)
            for j in range(i, dim)
            if rows[i][j]
        )

    @classmethod
    def zero(cls, dimension: int) -> "QuadraticForm":
        return cls([[0] * dimension for _ in range(dimension)])

    @classmethod
    def diagonal(cls, values: Sequence[RationalLike]) -> "QuadraticForm":
        dim = len(values)
        return cls([[values[i] if i == j else 0 for j in range(dim)] for i in range(dim)])

    @classmethod
    def from_entries(cls, dimension: int, entries: Mapping[Tuple[int, int], RationalLike]) -> "QuadraticForm":
        """
        由稀疏的 {(i, j): 值} 构造，(i, j) 与 (j, i) 取同一值

        同一无序对只能给出一次。
        """
        rows: List[List[Fraction]] = [[Fraction(0)] * dimension for _ in range(dimension)]
        seen = set()
        for (i, j), value in entries.items():
            if not (0 <= i < dimension and 0 <= j < dimension):
                raise InputError(f"下标 ({i}, {j}) 超出维数 {dimension}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InputError(f"重复给出矩阵元 {key}")
            seen.add(key)
            value = as_rational(value)
            rows[i][j] = value
            rows[j][i] = value
        return cls(rows)

    @classmethod
    def from_coupling(cls, dimension: int, couplings: Mapping[Tuple[int, int], RationalLike]) -> "QuadraticForm":
        """
        由二次多项式的系数构造：{(i, j): c} 表示项 c·y_i·y_j

        非对角项的系数平分到 Q_ij 与 Q_ji；重复的无序对系数相加。
        """
        acc: Dict[Tuple[int, int], Fraction] = {}
        for (i, j), value in couplings.items():
            key = (min(i, j), max(i, j))
            acc[key] = acc.get(key, Fraction(0)) + as_rational(value)
        return cls.from_entries(
            dimension,
            {key: (value if key[0] == key[1] else value / 2) for key, value in acc.items()},
        )

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def entries(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return self._entries

    def nonzero_upper(self) -> Tuple[Tuple[int, int, Fraction], ...]:
        """上三角非零元 (i, j, 多项式系数)"""
        return self._nonzero

    def to_polynomial(self) -> Polynomial:
        """q(z) 作为 N 元二次齐次多项式"""
        terms = {}
        for i, j, coeff in self._nonzero:
            monomial = ((i, 2),) if i == j else ((i, 1), (j, 1))
            terms[monomial] = coeff
        return Polynomial(self._dim, terms)

    def as_float_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self._entries], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return f"QuadraticForm(dimension={self._dim}, nonzero={len(self._nonzero)})"


def quad_eval(Q: QuadraticForm, z: Sequence[RationalLike]) -> Fraction:
    """
    精确计算 zᵀQz

    Raises:
        InputError: 维数不匹配
    """
    if len(z) != Q.dimension:
        raise InputError(f"向量维数 {len(z)} 与二次型维数 {Q.dimension} 不一致")
    values = as_rational_vector(z)
    total = Fraction(0)
    for i, j, coeff in Q.nonzero_upper():
        total += coeff * values[i] * values[j]
    return total


def frobenius_sq(Q: QuadraticForm) -> Fraction:
    """Frobenius 范数的平方 Σ_{i,j} Q_ij²，保持有理"""
    return sum((v * v for row in Q.entries for v in row), Fraction(0))


def rank_one_form(ell: Sequence[RationalLike]) -> QuadraticForm:
    """
    秩一二次型 ℓℓᵀ

    在 ℝ 上 (ℓᵀy)² = 0 ⟺ ℓᵀy = 0，用于把线性约束编码为齐次二次型。

    Raises:
        InputError: ℓ 为零向量
    """
    vec = as_rational_vector(ell)
    if not any(vec):
        raise InputError("rank_one_form 需要非零向量")
    return QuadraticForm([[a * b for b in vec] for a in vec])

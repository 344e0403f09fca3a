#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
BQ4E -> HQSF 归约的数据模型

变量布局: y = (v, u, w)，其中 v = (x0, z_1..z_n, s_1..s_n) 占下标 0..2n，
u_{ab}（a ≤ b 遍历 v 坐标）按字典序紧随其后，齐次模式下再接修复用松弛变量 w_{ab}。
"""

from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import Polynomial, total_degree
from tensorthreshold.exact_algebra.quadratic import QuadraticForm
from tensorthreshold.exact_algebra.rational import as_rational_vector


class SystemMode(str, Enum):
    """二次系统模式"""
    HOMOGENEOUS = "homogeneous"
    AFFINE = "affine"


class ConstraintFamily(str, Enum):
    """约束族，输出顺序固定为 B1, L1, L2, L3, H"""
    BOX = "B1"
    LIFT = "L1"
    TIE = "L2"
    SLACK = "L3"
    TARGET = "H"


class Bq4eInstance(BaseModel):
    """有界四次等式可行性实例: 是否存在 x ∈ [-1,1]ⁿ 使 h(x) = 0"""
    n: int = Field(ge=1, description="变量个数")
    h: Polynomial

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "Bq4eInstance":
        if self.h.variable_count != self.n:
            raise InputError(f"h 的变量个数 {self.h.variable_count} 与 n={self.n} 不一致")
        if total_degree(self.h) > 4:
            raise InputError(f"h 的总次数 {total_degree(self.h)} 超过 4")
        return self


@lru_cache(maxsize=64)
def _pairs(v_count: int) -> Tuple[Tuple[int, int], ...]:
    return tuple((a, b) for a in range(v_count) for b in range(a, v_count))


class VarLayout(BaseModel):
    """
    提升变量布局

    只存储 n 与是否包含 w 松弛变量，全部下标由二者确定，
    因此布局可以按 {n, with_slacks} 序列化后精确重建。
    """
    n: int = Field(ge=1)
    with_slacks: bool = True

    model_config = ConfigDict(frozen=True)

    @property
    def x0(self) -> int:
        return 0

    @property
    def v_count(self) -> int:
        return 2 * self.n + 1

    def z(self, i: int) -> int:
        return 1 + i

    def s(self, i: int) -> int:
        return 1 + self.n + i

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        """v 坐标上的有序对 (a, b)，a ≤ b，字典序"""
        return _pairs(self.v_count)

    @property
    def pair_count(self) -> int:
        return self.v_count * (self.v_count + 1) // 2

    def u(self, a: int, b: int) -> int:
        a, b = min(a, b), max(a, b)
        return self.v_count + self._pair_position(a, b)

    def w(self, a: int, b: int) -> int:
        if not self.with_slacks:
            raise InputError("该布局不包含 w 松弛变量")
        a, b = min(a, b), max(a, b)
        return self.v_count + self.pair_count + self._pair_position(a, b)

    def _pair_position(self, a: int, b: int) -> int:
        m = self.v_count
        if not 0 <= a <= b < m:
            raise InputError(f"有序对 ({a}, {b}) 超出 v 坐标范围 [0, {m})")
        # 行 a 之前共有 Σ_{r<a} (m - r) 个有序对
        return a * m - a * (a - 1) // 2 + (b - a)

    @property
    def u_index(self) -> Dict[Tuple[int, int], int]:
        return {pair: self.u(*pair) for pair in self.pairs}

    @property
    def w_index(self) -> Dict[Tuple[int, int], int]:
        if not self.with_slacks:
            return {}
        return {pair: self.w(*pair) for pair in self.pairs}

    @property
    def N(self) -> int:
        return self.v_count + self.pair_count * (2 if self.with_slacks else 1)


class Constraint(BaseModel):
    """
    单个约束 q(y) + ℓᵀy + c = 0

    齐次模式下 linear 与 constant 均为空。
    """
    family: ConstraintFamily
    label: str
    form: QuadraticForm
    linear: Optional[Tuple[Fraction, ...]] = None
    constant: Optional[Fraction] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def is_homogeneous(self) -> bool:
        return (self.linear is None or not any(self.linear)) and not self.constant


class QuadraticSystem(BaseModel):
    """单位球面上的二次约束系统"""
    N: int = Field(ge=1)
    mode: SystemMode
    constraints: Tuple[Constraint, ...]
    layout: Optional[VarLayout] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "QuadraticSystem":
        for k, c in enumerate(self.constraints):
            if c.form.dimension != self.N:
                raise InputError(f"约束 {k} 的维数 {c.form.dimension} 与 N={self.N} 不一致")
            if self.mode == SystemMode.HOMOGENEOUS and (c.linear is not None or c.constant is not None):
                raise InputError(f"齐次模式的约束 {k} 不能带线性项或常数项")
            if c.linear is not None and len(c.linear) != self.N:
                raise InputError(f"约束 {k} 的线性项长度 {len(c.linear)} 与 N={self.N} 不一致")
        if self.layout is not None and self.layout.N != self.N:
            raise InputError(f"布局维数 {self.layout.N} 与 N={self.N} 不一致")
        return self

    @property
    def forms(self) -> List[QuadraticForm]:
        return [c.form for c in self.constraints]


class BoxWitness(BaseModel):
    """BQ4E 见证 xi ∈ [-1,1]ⁿ"""
    xi: Tuple[Fraction, ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("xi", mode="before")
    @classmethod
    def _coerce(cls, value):
        return as_rational_vector(value)

    @model_validator(mode="after")
    def _check(self) -> "BoxWitness":
        for i, value in enumerate(self.xi):
            if not -1 <= value <= 1:
                raise InputError(f"见证分量 xi[{i}]={value} 不在 [-1, 1] 内")
        return self


class SphereWitness(BaseModel):
    """
    球面见证

    精确见证以未归一化的有理向量存储（零点集合对缩放不变）；
    无法精确构造时给出双精度浮点向量，exact=False 并附带最大残差。
    """
    y: Tuple[Any, ...] = Field(description="有理分量（精确）或浮点分量")
    exact: bool = True
    normalized: bool = False
    max_residual: Optional[float] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "SphereWitness":
        if not any(self.y):
            raise InputError("球面见证不能是零向量")
        if self.exact and not all(isinstance(v, Fraction) for v in self.y):
            raise InputError("精确见证的所有分量必须是有理数")
        return self

    def as_floats(self) -> List[float]:
        return [float(v) for v in self.y]

    def scaled(self, factor: Fraction) -> "SphereWitness":
        """乘以非零有理数，零点性质保持不变"""
        if not factor:
            raise InputError("缩放因子不能为零")
        if not self.exact:
            raise InputError("只能精确缩放有理见证")
        return SphereWitness(y=tuple(v * factor for v in self.y), exact=True, normalized=False)


def exact_vector(values: Sequence[Union[int, Fraction]]) -> Tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)

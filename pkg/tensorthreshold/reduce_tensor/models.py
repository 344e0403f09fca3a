#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
HQSF -> 张量谱阈值归约的数据模型
"""

from enum import Enum
from fractions import Fraction
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import Polynomial, is_homogeneous
from tensorthreshold.exact_algebra.quadratic import QuadraticForm
from tensorthreshold.exact_algebra.rational import as_rational


class Verdict(str, Enum):
    """
    阈值判定结果

    只有 certified_* 是精确证明；numerically_* 均为浮点估计，不构成证明。
    """
    CERTIFIED_YES = "certified_yes"
    CERTIFIED_EQUAL = "certified_equal"
    NUMERICALLY_ABOVE = "numerically_above"
    NUMERICALLY_BELOW = "numerically_below"
    UNKNOWN = "unknown"

    @property
    def is_certified(self) -> bool:
        return self in (Verdict.CERTIFIED_YES, Verdict.CERTIFIED_EQUAL)


class HqsfInstance(BaseModel):
    """齐次二次球面可行性实例: 是否存在 ‖z‖ = 1 使全部 zᵀQ_i z = 0"""
    N: int = Field(ge=1)
    forms: Tuple[QuadraticForm, ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "HqsfInstance":
        for k, form in enumerate(self.forms):
            if form.dimension != self.N:
                raise InputError(f"二次型 {k} 的维数 {form.dimension} 与 N={self.N} 不一致")
        return self

    @property
    def r(self) -> int:
        return len(self.forms)


class QuarticCertificateData(BaseModel):
    """
    四次型 p(z) = B‖z‖⁴ - Σ q_i(z)² 及其常数

    C = Σ‖Q_i‖_F²，B = C + 1。单位球面上 1 ≤ p ≤ B，且 p = B 当且仅当 z 是公共零点。
    """
    N: int = Field(ge=1)
    C: Fraction
    B: Fraction
    p: Polynomial
    forms: Tuple[QuadraticForm, ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("C", "B", mode="before")
    @classmethod
    def _coerce(cls, value):
        return as_rational(value)

    @model_validator(mode="after")
    def _check(self) -> "QuarticCertificateData":
        if self.B != self.C + 1:
            raise InputError(f"B={self.B} 必须等于 C+1={self.C + 1}")
        if self.p.variable_count != self.N:
            raise InputError(f"p 的变量个数 {self.p.variable_count} 与 N={self.N} 不一致")
        if not is_homogeneous(self.p, 4):
            raise InputError("p 必须是四次齐次多项式")
        return self


class OrderLift(BaseModel):
    """
    阶数提升 p_d(z, t) = p(z)·Π_{k=1}^{d-4} t_k

    gamma_sq = γ_d² 保持有理；d = 4 时 p_d = p，gamma_sq = 1。
    """
    d: int = Field(ge=4)
    N: int = Field(ge=1, description="原四次型的变量个数")
    p_d: Polynomial
    gamma_sq: Fraction

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "OrderLift":
        if self.p_d.variable_count != self.N + self.d - 4:
            raise InputError(f"p_d 的变量个数 {self.p_d.variable_count} 应为 N + d - 4 = {self.N + self.d - 4}")
        return self

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
文件格式模型

使用Pydantic V2定义流水线各阶段的文件格式。所有文件都带 version 字段，
有理数一律以 "p/q" 字符串存储，多项式以稠密指数向量加系数的列表存储，
保证序列化后再解析得到完全相同的值。
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import (
    Monomial,
    Polynomial,
    monomial_from_exponents,
    monomial_to_exponents,
    parse_polynomial,
)
from tensorthreshold.exact_algebra.quadratic import QuadraticForm
from tensorthreshold.exact_algebra.rational import format_rational, format_rational_vector, parse_rational
from tensorthreshold.numopt.models import MaxEstimate
from tensorthreshold.reduce_box.models import (
    BoxWitness,
    Bq4eInstance,
    Constraint,
    ConstraintFamily,
    QuadraticSystem,
    SphereWitness,
    SystemMode,
    VarLayout,
)
from tensorthreshold.reduce_tensor.models import HqsfInstance, OrderLift, QuarticCertificateData
from tensorthreshold.symtensor.tensor import OrderFactor, SymmetricTensor, ThresholdInstance, gamma_sq

FILE_VERSION = 1


class WitnessKind(str, Enum):
    """见证类型"""
    BOX = "box"
    SPHERE = "sphere"


class EstimateKind(str, Enum):
    """估计类型"""
    MAX = "max"
    MIN = "min"
    MULTILINEAR = "multilinear"
    RESIDUAL = "residual"


class VersionedFile(BaseModel):
    """带版本号的文件基类"""
    version: int = Field(default=FILE_VERSION, description="文件格式版本")


# ----------------------------------------------------------------------
# 多项式与二次型


class TermModel(BaseModel):
    """单项式: 稠密指数向量与 "p/q" 系数"""
    exponents: List[int]
    coeff: str


class PolynomialFile(VersionedFile):
    """多项式文件"""
    variable_count: int = Field(ge=0)
    names: Optional[List[str]] = Field(default=None, description="变量名，仅用于显示")
    terms: List[TermModel] = Field(default_factory=list)

    @classmethod
    def from_polynomial(cls, p: Polynomial, names: Optional[List[str]] = None) -> "PolynomialFile":
        return cls(
            variable_count=p.variable_count,
            names=names,
            terms=[
                TermModel(exponents=monomial_to_exponents(m, p.variable_count), coeff=format_rational(c))
                for m, c in p.sorted_terms()
            ],
        )

    def to_polynomial(self) -> Polynomial:
        terms: Dict[Monomial, Fraction] = {}
        for term in self.terms:
            if len(term.exponents) != self.variable_count:
                raise InputError(f"指数向量长度 {len(term.exponents)} 与变量个数 {self.variable_count} 不一致")
            if any(e < 0 for e in term.exponents):
                raise InputError(f"指数不能为负: {term.exponents}")
            monomial = monomial_from_exponents(term.exponents)
            if monomial in terms:
                raise InputError(f"单项式 {term.exponents} 重复出现")
            terms[monomial] = parse_rational(term.coeff)
        return Polynomial(self.variable_count, terms)


class FormEntry(BaseModel):
    """二次型矩阵的上三角元 Q_ij (i ≤ j)"""
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    value: str


class FormModel(BaseModel):
    """稀疏二次型编码"""
    entries: List[FormEntry] = Field(default_factory=list)

    @classmethod
    def from_form(cls, Q: QuadraticForm) -> "FormModel":
        rows = Q.entries
        return cls(entries=[
            FormEntry(i=i, j=j, value=format_rational(rows[i][j]))
            for i in range(Q.dimension)
            for j in range(i, Q.dimension)
            if rows[i][j]
        ])

    def to_form(self, dimension: int) -> QuadraticForm:
        return QuadraticForm.from_entries(dimension, {(e.i, e.j): parse_rational(e.value) for e in self.entries})


# ----------------------------------------------------------------------
# BQ4E 与二次系统


class Bq4eFile(VersionedFile):
    """
    BQ4E 实例文件

    h 可以是多项式编码，也可以是 "x0^2 - 1" 形式的文本（变量名 x0..x{n-1}）。
    """
    name: Optional[str] = None
    n: int = Field(ge=1)
    h: Union[PolynomialFile, str]

    @classmethod
    def from_instance(cls, inst: Bq4eInstance, name: Optional[str] = None) -> "Bq4eFile":
        return cls(name=name, n=inst.n, h=PolynomialFile.from_polynomial(inst.h))

    def to_instance(self) -> Bq4eInstance:
        if isinstance(self.h, str):
            h = parse_polynomial(self.h, self.n)
        else:
            h = self.h.to_polynomial()
        return Bq4eInstance(n=self.n, h=h)


class ConstraintModel(BaseModel):
    """单个约束；仿射模式下附带线性项与常数项"""
    family: ConstraintFamily
    label: str
    form: FormModel
    linear: Optional[List[str]] = None
    constant: Optional[str] = None


class SystemFile(VersionedFile):
    """二次系统文件"""
    N: int = Field(ge=1)
    mode: SystemMode
    layout: Optional[VarLayout] = None
    constraints: List[ConstraintModel]

    @classmethod
    def from_system(cls, system: QuadraticSystem) -> "SystemFile":
        return cls(
            N=system.N,
            mode=system.mode,
            layout=system.layout,
            constraints=[
                ConstraintModel(
                    family=c.family,
                    label=c.label,
                    form=FormModel.from_form(c.form),
                    linear=format_rational_vector(c.linear) if c.linear is not None else None,
                    constant=format_rational(c.constant) if c.constant is not None else None,
                )
                for c in system.constraints
            ],
        )

    def to_system(self) -> QuadraticSystem:
        constraints = []
        for c in self.constraints:
            constraints.append(Constraint(
                family=c.family,
                label=c.label,
                form=c.form.to_form(self.N),
                linear=tuple(parse_rational(v) for v in c.linear) if c.linear is not None else None,
                constant=parse_rational(c.constant) if c.constant is not None else None,
            ))
        return QuadraticSystem(N=self.N, mode=self.mode, constraints=tuple(constraints), layout=self.layout)


class HqsfFile(VersionedFile):
    """直接给出的 HQSF 实例文件，只含二次型列表"""
    N: int = Field(ge=1)
    forms: List[FormModel]

    @classmethod
    def from_instance(cls, inst: HqsfInstance) -> "HqsfFile":
        return cls(N=inst.N, forms=[FormModel.from_form(Q) for Q in inst.forms])

    def to_instance(self) -> HqsfInstance:
        return HqsfInstance(N=self.N, forms=tuple(f.to_form(self.N) for f in self.forms))


# ----------------------------------------------------------------------
# 见证


class WitnessFile(VersionedFile):
    """
    见证文件

    精确见证的分量为 "p/q" 字符串；浮点见证的分量为 repr 形式的十进制字符串。
    """
    kind: WitnessKind = WitnessKind.SPHERE
    y: List[str]
    exact: bool = True
    normalized: bool = False
    max_residual: Optional[float] = None

    @classmethod
    def from_box(cls, witness: BoxWitness) -> "WitnessFile":
        return cls(kind=WitnessKind.BOX, y=format_rational_vector(witness.xi))

    @classmethod
    def from_sphere(cls, witness: SphereWitness) -> "WitnessFile":
        if witness.exact:
            values = format_rational_vector(witness.y)
        else:
            values = [repr(float(v)) for v in witness.y]
        return cls(
            kind=WitnessKind.SPHERE,
            y=values,
            exact=witness.exact,
            normalized=witness.normalized,
            max_residual=witness.max_residual,
        )

    def to_vector(self) -> Tuple[Fraction, ...]:
        """精确分量；浮点见证不能用于精确验证"""
        if not self.exact:
            raise InputError("浮点见证不能用于精确验证")
        return tuple(parse_rational(v) for v in self.y)

    def to_box(self) -> BoxWitness:
        return BoxWitness(xi=self.to_vector())

    def to_sphere(self) -> SphereWitness:
        if self.exact:
            values = self.to_vector()
        else:
            try:
                values = tuple(float(v) for v in self.y)
            except ValueError as e:
                raise InputError(f"无法解析浮点见证: {e}") from e
        return SphereWitness(
            y=values,
            exact=self.exact,
            normalized=self.normalized,
            max_residual=self.max_residual,
        )


# ----------------------------------------------------------------------
# 张量阶段


class TensorEntry(BaseModel):
    """有序下标元组 idx 及其公共值 coeff（"p/q"）"""
    idx: List[int]
    coeff: str


class TensorFile(VersionedFile):
    """对称张量文件 {n, d, entries: [{idx, coeff}]}"""
    n: int = Field(ge=1, description="维数")
    d: int = Field(ge=1, description="阶数")
    entries: List[TensorEntry] = Field(default_factory=list)

    @classmethod
    def from_tensor(cls, T: SymmetricTensor) -> "TensorFile":
        return cls(
            n=T.dimension,
            d=T.order,
            entries=[TensorEntry(idx=list(idx), coeff=format_rational(v)) for idx, v in T.sorted_entries()],
        )

    def to_tensor(self) -> SymmetricTensor:
        return SymmetricTensor(
            self.n,
            self.d,
            {tuple(e.idx): parse_rational(e.coeff) for e in self.entries},
        )


class ThresholdFile(VersionedFile):
    """阈值实例文件 {tensor, B, d, gamma_sq}，阈值 α = B·γ_d，γ_d² 以有理数记录"""
    tensor: TensorFile
    B: str
    d: int = Field(ge=4)
    gamma_sq: str

    @classmethod
    def from_instance(cls, instance: ThresholdInstance) -> "ThresholdFile":
        return cls(
            tensor=TensorFile.from_tensor(instance.tensor),
            B=format_rational(instance.threshold_base),
            d=instance.order_factor.d,
            gamma_sq=format_rational(instance.order_factor.gamma_sq),
        )

    def to_instance(self) -> ThresholdInstance:
        if parse_rational(self.gamma_sq) != gamma_sq(self.d):
            raise InputError(f"gamma_sq={self.gamma_sq} 与 d={self.d} 不一致")
        return ThresholdInstance(
            tensor=self.tensor.to_tensor(),
            threshold_base=parse_rational(self.B),
            order_factor=OrderFactor(d=self.d),
        )


class QuarticFile(VersionedFile):
    """四次证书数据文件 {C, B, p} 以及生成 p 的二次型"""
    N: int = Field(ge=1)
    C: str
    B: str
    p: PolynomialFile
    forms: List[FormModel]

    @classmethod
    def from_data(cls, data: QuarticCertificateData) -> "QuarticFile":
        return cls(
            N=data.N,
            C=format_rational(data.C),
            B=format_rational(data.B),
            p=PolynomialFile.from_polynomial(data.p),
            forms=[FormModel.from_form(Q) for Q in data.forms],
        )

    def to_data(self) -> QuarticCertificateData:
        return QuarticCertificateData(
            N=self.N,
            C=parse_rational(self.C),
            B=parse_rational(self.B),
            p=self.p.to_polynomial(),
            forms=tuple(f.to_form(self.N) for f in self.forms),
        )


class EstimateFile(VersionedFile):
    """数值估计文件，所有值均为浮点，不构成证明"""
    kind: EstimateKind
    value: float
    argmax: List[float]
    iterations: int
    restarts_used: int
    converged: bool
    method: str
    slots: Optional[List[List[float]]] = None

    @classmethod
    def from_estimate(cls, estimate: MaxEstimate, kind: EstimateKind) -> "EstimateFile":
        return cls(
            kind=kind,
            value=estimate.value,
            argmax=list(estimate.argmax),
            iterations=estimate.iterations,
            restarts_used=estimate.restarts_used,
            converged=estimate.converged,
            method=estimate.method,
            slots=[list(s) for s in estimate.slots] if estimate.slots is not None else None,
        )


class LiftFile(VersionedFile):
    """阶数提升文件 {d, N, p_d, gamma_sq}"""
    d: int = Field(ge=4)
    N: int = Field(ge=1)
    p_d: PolynomialFile
    gamma_sq: str

    @classmethod
    def from_lift(cls, lift: OrderLift) -> "LiftFile":
        return cls(d=lift.d, N=lift.N, p_d=PolynomialFile.from_polynomial(lift.p_d), gamma_sq=format_rational(lift.gamma_sq))

    def to_lift(self) -> OrderLift:
        return OrderLift(d=self.d, N=self.N, p_d=self.p_d.to_polynomial(), gamma_sq=parse_rational(self.gamma_sq))

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实例库与流水线报告的数据模型
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.common.models import FILE_VERSION, WitnessFile
from tensorthreshold.exact_algebra.polynomial import Polynomial, poly_eval
from tensorthreshold.exact_algebra.rational import as_rational
from tensorthreshold.reduce_box.models import BoxWitness, Bq4eInstance
from tensorthreshold.reduce_tensor.models import Verdict


class LibraryStatus(str, Enum):
    """实例的已知真值"""
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class CertificateKind(str, Enum):
    """NO 实例的结构正性证书类型"""
    SQUARE_PLUS_CONSTANT = "square_plus_constant"
    EVEN_POWER_SUM = "even_power_sum"


class PositivityCertificate(BaseModel):
    """
    h > 0 的结构证书

    square_plus_constant: h = g² + c，c > 0；even_power_sum: 所有单项式指数全偶、系数为正且常数项为正。
    """
    kind: CertificateKind
    g: Optional[Polynomial] = None
    c: Optional[Fraction] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("c", mode="before")
    @classmethod
    def _coerce(cls, value):
        return None if value is None else as_rational(value)

    @model_validator(mode="after")
    def _check(self) -> "PositivityCertificate":
        if self.kind == CertificateKind.SQUARE_PLUS_CONSTANT and (self.g is None or self.c is None):
            raise InputError("square_plus_constant 证书需要 g 与 c")
        return self


class LibraryInstance(BaseModel):
    """
    实例库条目

    status=yes 时必须给出精确见证且 h(witness) = 0；status=no 时 provenance 必须说明证明方式。
    """
    name: str = Field(min_length=1)
    bq4e: Bq4eInstance
    status: LibraryStatus
    witness: Optional[BoxWitness] = None
    provenance: str = ""
    certificate: Optional[PositivityCertificate] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check(self) -> "LibraryInstance":
        if self.status == LibraryStatus.YES:
            if self.witness is None:
                raise InputError(f"YES 实例 {self.name} 缺少见证")
            if len(self.witness.xi) != self.bq4e.n:
                raise InputError(f"实例 {self.name} 的见证长度与 n 不一致")
            if poly_eval(self.bq4e.h, self.witness.xi) != 0:
                raise InputError(f"实例 {self.name} 的见证不满足 h(xi) = 0")
        if self.status == LibraryStatus.NO and not self.provenance:
            raise InputError(f"NO 实例 {self.name} 必须说明证明来源")
        return self


class StageRecord(BaseModel):
    """流水线单个阶段的记录"""
    stage: str
    input_digest: str
    output_digest: str
    elapsed_ms: float = Field(ge=0)


class PipelineReport(BaseModel):
    """
    流水线报告（即报告文件格式）

    certified_* 结论必须附带精确见证；numerically_* 结论只是浮点估计。
    """
    version: int = Field(default=FILE_VERSION)
    name: str
    status: Optional[LibraryStatus] = None
    N: int
    r: int
    B: str
    d: int = 4
    threshold: float = Field(description="α = B·γ_d 的浮点值")
    stages: List[StageRecord] = Field(default_factory=list)
    verdict: Verdict
    estimate: Optional[float] = None
    margins: Dict[str, float] = Field(default_factory=dict)
    exact_witness: Optional[WitnessFile] = None
    witness_source: Optional[str] = Field(default=None, description="forward / rationalized / given")
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "PipelineReport":
        if self.verdict.is_certified and (self.exact_witness is None or not self.exact_witness.exact):
            raise InputError("certified 结论必须附带精确见证")
        return self

    def deterministic_view(self) -> dict:
        """去掉计时字段后的内容，用于比较两次运行"""
        data = self.model_dump(mode="json")
        for stage in data["stages"]:
            stage.pop("elapsed_ms", None)
        return data

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
端到端流水线

BQ4E -> HQSF -> 四次型 -> 张量阈值实例（-> 阶数提升）。
YES 实例的有理见证被逐级前推并精确验证；其他实例交给数值层估计最大值与残差下界，
结论一律标注为数值结论。每个阶段记录输入输出的内容摘要与耗时。
"""

import asyncio
import json
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from tensorthreshold.common.config import settings
from tensorthreshold.common.exceptions import InputError, StageError
from tensorthreshold.common.file_utils import digest, load_model
from tensorthreshold.common.logging_config import stage_context
from tensorthreshold.common.models import (
    Bq4eFile,
    EstimateFile,
    EstimateKind,
    HqsfFile,
    LiftFile,
    QuarticFile,
    SystemFile,
    ThresholdFile,
    WitnessFile,
    WitnessKind,
)
from tensorthreshold.exact_algebra.polynomial import poly_eval
from tensorthreshold.exact_algebra.quadratic import quad_eval
from tensorthreshold.exact_algebra.rational import RationalLike, as_rational_vector, format_rational
from tensorthreshold.harness.library import get_instance, library
from tensorthreshold.harness.models import LibraryInstance, LibraryStatus, PipelineReport, StageRecord
from tensorthreshold.numopt.models import AscentConfig
from tensorthreshold.numopt.rationalize import rationalize
from tensorthreshold.numopt.service import maximize_lift, maximize_sym, residual_min
from tensorthreshold.reduce_box.models import (
    Constraint,
    ConstraintFamily,
    QuadraticSystem,
    SphereWitness,
    SystemMode,
)
from tensorthreshold.reduce_box.service import (
    compile_homogeneous,
    first_violation,
    nondegeneracy_slice,
    witness_backward,
    witness_forward,
)
from tensorthreshold.reduce_tensor.models import HqsfInstance, Verdict
from tensorthreshold.reduce_tensor.service import (
    build_quartic,
    certify_max,
    certify_threshold,
    hqsf_from_system,
    lift_order,
    tensorize,
    tensorize_lift,
    threshold_compare,
)

logger = logging.getLogger(__name__)

NUMERICAL_NOTE = "numerical verdict: floating-point estimate, not a proof"


class CertificationRecord(BaseModel):
    """精确验证阶段的输出"""
    certified: bool
    witness: WitnessFile


class _StageRecorder:
    """执行阶段函数并记录摘要与耗时，失败时包装为 StageError"""

    def __init__(self):
        self.records: List[StageRecord] = []

    def run(self, stage: str, input_file: BaseModel, fn: Callable[[], Any], to_file: Callable[[Any], BaseModel]) -> Any:
        start = time.perf_counter()
        try:
            with stage_context(stage):
                result = fn()
            output_digest = digest(to_file(result))
        except StageError:
            raise
        except Exception as e:
            logger.error(f"阶段 {stage} 失败: {e}", exc_info=True)
            raise StageError(stage, e) from e
        elapsed = (time.perf_counter() - start) * 1000.0
        self.records.append(StageRecord(
            stage=stage,
            input_digest=digest(input_file),
            output_digest=output_digest,
            elapsed_ms=elapsed,
        ))
        logger.debug(f"阶段 {stage} 完成，耗时 {elapsed:.1f} ms")
        return result


def system_from_hqsf(hqsf: HqsfInstance) -> QuadraticSystem:
    """二次型列表直接作为齐次系统（无变量布局）"""
    constraints = tuple(
        Constraint(family=ConstraintFamily.TARGET, label=f"Q{k}", form=Q)
        for k, Q in enumerate(hqsf.forms)
    )
    return QuadraticSystem(N=hqsf.N, mode=SystemMode.HOMOGENEOUS, constraints=constraints)


def _certify(recorder: _StageRecorder, stage: str, data, z: Sequence[RationalLike]) -> Optional[WitnessFile]:
    witness_file = WitnessFile.from_sphere(SphereWitness(y=as_rational_vector(z), exact=True))
    certified = recorder.run(
        stage,
        witness_file,
        lambda: certify_max(data, z),
        lambda ok: CertificationRecord(certified=ok, witness=witness_file),
    )
    return witness_file if certified else None


def run_hqsf_pipeline(
    hqsf: HqsfInstance,
    cfg: AscentConfig,
    witness: Optional[Sequence[RationalLike]] = None,
    lift_d: Optional[int] = None,
    name: str = "hqsf",
    status: Optional[LibraryStatus] = None,
    system: Optional[QuadraticSystem] = None,
    recorder: Optional[_StageRecorder] = None,
    witness_source: str = "given",
) -> PipelineReport:
    """
    HQSF 实例的流水线

    给出有理见证时先精确验证；验证不通过或没有见证时运行 maximize_sym 与 residual_min，
    残差足够小时尝试有理化并再次精确验证。

    Args:
        hqsf: HQSF 实例
        cfg: 数值优化配置
        witness: 可选的有理见证（无需归一化）
        lift_d: 阶数提升的目标阶数，None 或 4 表示不提升
        system: 计算残差使用的齐次系统，默认由二次型列表直接构造

    Raises:
        StageError: 某阶段失败，携带阶段名
    """
    recorder = recorder or _StageRecorder()
    system = system or system_from_hqsf(hqsf)
    notes: List[str] = []
    margins: Dict[str, float] = {}

    data = recorder.run("build_quartic", HqsfFile.from_instance(hqsf), lambda: build_quartic(hqsf), QuarticFile.from_data)
    quartic_file = QuarticFile.from_data(data)
    instance = recorder.run("tensorize", quartic_file, lambda: tensorize(data), ThresholdFile.from_instance)

    d = lift_d or 4
    target = instance
    if d > 4:
        lift = recorder.run("lift_order", quartic_file, lambda: lift_order(data, d), LiftFile.from_lift)
        target = recorder.run("tensorize_lift", LiftFile.from_lift(lift), lambda: tensorize_lift(lift, data.B),
                              ThresholdFile.from_instance)

    exact_witness: Optional[WitnessFile] = None
    source: Optional[str] = None
    if witness is not None:
        exact_witness = _certify(recorder, "certify", data, witness)
        if exact_witness is not None:
            source = witness_source
        else:
            notes.append("supplied witness does not vanish on every form")

    estimate: Optional[float] = None
    if exact_witness is not None:
        verdict = Verdict.CERTIFIED_YES
        if d > 4:
            notes.append("lifted threshold B*gamma_d follows from the exact factorization of the lift")
    else:
        quartic_estimate = recorder.run("maximize", quartic_file, lambda: maximize_sym(data, cfg),
                                        lambda e: EstimateFile.from_estimate(e, EstimateKind.MAX))
        margins["quartic"] = float(data.B) - quartic_estimate.value
        residual = recorder.run("residual", SystemFile.from_system(system), lambda: residual_min(system, cfg),
                                lambda e: EstimateFile.from_estimate(e, EstimateKind.RESIDUAL))
        margins["residual_floor"] = residual.value

        if residual.value <= settings.PIPELINE.RESIDUAL_TOLERANCE:
            candidate = rationalize(residual.argmax)
            exact_witness = _certify(recorder, "certify_rationalized", data, candidate)
            if exact_witness is not None:
                source = "rationalized"
            else:
                notes.append("rationalized residual minimizer failed exact certification")

        if exact_witness is not None:
            verdict = Verdict.CERTIFIED_YES
            estimate = quartic_estimate.value
        elif d > 4:
            lifted = recorder.run("maximize_lift", quartic_file,
                                  lambda: maximize_lift(data, d, cfg),
                                  lambda e: EstimateFile.from_estimate(e, EstimateKind.MAX))
            estimate = lifted.value
            margins["lifted"] = target.threshold_float - lifted.value
            verdict = threshold_compare(target, estimate)
            notes.append(NUMERICAL_NOTE)
        else:
            estimate = quartic_estimate.value
            verdict = threshold_compare(instance, estimate)
            notes.append(NUMERICAL_NOTE)

    report = PipelineReport(
        name=name,
        status=status,
        N=hqsf.N,
        r=hqsf.r,
        B=format_rational(data.B),
        d=d,
        threshold=target.threshold_float,
        stages=recorder.records,
        verdict=verdict,
        estimate=estimate,
        margins=margins,
        exact_witness=exact_witness,
        witness_source=source,
        notes=notes,
    )
    logger.info(f"流水线完成: {name}, N={hqsf.N}, B={data.B}, 结论={verdict.value}")
    return report


def run_pipeline(inst: LibraryInstance, cfg: AscentConfig, lift_d: Optional[int] = None) -> PipelineReport:
    """
    库实例的完整流水线：compile_homogeneous -> build_quartic -> tensorize (-> lift_order)

    YES 实例的盒见证经 witness_forward 前推后直接精确验证；
    正向见证不精确时退回数值流程。
    """
    recorder = _StageRecorder()
    bq4e_file = Bq4eFile.from_instance(inst.bq4e, name=inst.name)
    system, _ = recorder.run("compile_homogeneous", bq4e_file, lambda: compile_homogeneous(inst.bq4e),
                             lambda r: SystemFile.from_system(r[0]))
    hqsf = hqsf_from_system(system)

    witness = None
    if inst.status == LibraryStatus.YES and inst.witness is not None:
        sphere = recorder.run("witness_forward", WitnessFile.from_box(inst.witness),
                              lambda: witness_forward(inst.bq4e, inst.witness), WitnessFile.from_sphere)
        if sphere.exact:
            witness = sphere.y
        else:
            logger.warning(f"实例 {inst.name} 的正向见证不精确，改用数值流程")

    return run_hqsf_pipeline(
        hqsf,
        cfg,
        witness=witness,
        lift_d=lift_d,
        name=inst.name,
        status=inst.status,
        system=system,
        recorder=recorder,
        witness_source="forward",
    )


async def run_library(
    cfg: AscentConfig,
    names: Optional[Sequence[str]] = None,
    max_concurrency: Optional[int] = None,
    lift_d: Optional[int] = None,
    strict: bool = True,
) -> List[PipelineReport]:
    """
    并发运行多个库实例

    使用信号量限制并发数，每个实例在线程中运行；返回的报告保持输入顺序。
    全部实例结束后逐个记录失败，strict 时重新抛出输入顺序中的第一个异常，
    否则跳过失败实例只返回成功的报告。
    """
    instances = [get_instance(n) for n in names] if names else list(library().values())
    limit = max_concurrency or settings.PIPELINE.MAX_CONCURRENCY
    semaphore = asyncio.Semaphore(limit)

    async def _run_with_semaphore(inst: LibraryInstance) -> PipelineReport:
        async with semaphore:
            return await asyncio.to_thread(run_pipeline, inst, cfg, lift_d)

    results = await asyncio.gather(*[_run_with_semaphore(inst) for inst in instances], return_exceptions=True)

    reports: List[PipelineReport] = []
    failures: List[Exception] = []
    for inst, result in zip(instances, results):
        if isinstance(result, Exception):
            logger.error(f"实例 {inst.name} 运行失败: {result}")
            failures.append(result)
            continue
        reports.append(result)
    logger.info(f"实例库运行完成: 共 {len(instances)} 个, 成功 {len(reports)} 个")
    if failures and strict:
        raise failures[0]
    return reports


def nondegeneracy_floor(inst: LibraryInstance, cfg: AscentConfig) -> float:
    """x0 = 0 切片上残差平方和的数值最小值（应远离零）"""
    system, layout = compile_homogeneous(inst.bq4e)
    return residual_min(nondegeneracy_slice(system, layout), cfg).value


def margin_table(reports: Sequence[PipelineReport]) -> str:
    """纯文本间隔表"""
    header = f"{'name':<22}{'status':<9}{'N':>4}{'B':>8}  {'estimate':>14}  {'margin':>12}  {'residual':>12}  verdict"
    lines = [header, "-" * len(header)]

    def fmt(value: Optional[float]) -> str:
        return "-" if value is None else f"{value:.6g}"

    for r in reports:
        lines.append(
            f"{r.name:<22}{(r.status.value if r.status else '-'):<9}{r.N:>4}{r.B:>8}  "
            f"{fmt(r.estimate):>14}  {fmt(r.margins.get('quartic')):>12}  "
            f"{fmt(r.margins.get('residual_floor')):>12}  {r.verdict.value}"
        )
    return "\n".join(lines)


# ----------------------------------------------------------------------
# 见证文件验证


class VerifyResult(BaseModel):
    """精确验证结果"""
    accepted: bool
    instance_kind: str
    message: str
    violated_index: Optional[int] = None
    xi: Optional[List[str]] = None


_INSTANCE_KINDS = (
    ("h", Bq4eFile),
    ("constraints", SystemFile),
    ("tensor", ThresholdFile),
    ("p", QuarticFile),
    ("forms", HqsfFile),
)


def load_instance_file(path: str) -> BaseModel:
    """
    按字段识别实例文件类型并加载

    Raises:
        InputError: 文件不存在、不是 JSON 或无法识别
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"文件不存在: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"文件 {path} 不是有效的 JSON: {e}") from e
    if not isinstance(data, dict):
        raise InputError(f"文件 {path} 的顶层必须是对象")
    for key, cls in _INSTANCE_KINDS:
        if key in data:
            try:
                return cls.model_validate(data)
            except ValidationError as e:
                raise InputError(f"文件 {path} 不是有效的 {cls.__name__}: {e}") from e
    raise InputError(f"无法识别实例文件类型: {path}")


def _first_nonzero_form(forms, z) -> Optional[int]:
    for k, Q in enumerate(forms):
        if quad_eval(Q, z):
            return k
    return None


def _check_length(vector, expected: int) -> None:
    if len(vector) != expected:
        raise InputError(f"见证维数 {len(vector)} 与实例维数 {expected} 不一致")
    if not any(vector):
        raise InputError("见证不能是零向量")


def _verify_system(system: QuadraticSystem, kind: str, witness: WitnessFile) -> VerifyResult:
    vector = witness.to_vector()
    _check_length(vector, system.N)
    violation = first_violation(system, vector)
    if violation is not None:
        index, label, value = violation
        return VerifyResult(accepted=False, instance_kind=kind, violated_index=index,
                            message=f"constraint {index} ({label}) = {format_rational(value)}")
    xi = None
    if system.mode == SystemMode.HOMOGENEOUS and system.layout is not None and system.layout.with_slacks:
        box = witness_backward(system.layout, witness.to_sphere(), system=system)
        xi = [format_rational(x) for x in box.xi]
    return VerifyResult(accepted=True, instance_kind=kind, message="all constraints vanish", xi=xi)


def verify_witness(instance_file: BaseModel, witness: WitnessFile) -> VerifyResult:
    """
    精确验证见证（从不使用浮点）

    BQ4E 实例接受盒见证（检查 h(xi) = 0）或齐次系统的球面见证（检查全部约束并反推 xi）；
    系统 / HQSF 实例检查全部约束为零；四次数据使用 certify_max；阈值实例使用 certify_threshold。
    拒绝时给出第一个不为零的约束下标。

    Raises:
        InputError: 维数不匹配、零见证或浮点见证
    """
    if isinstance(instance_file, Bq4eFile):
        inst = instance_file.to_instance()
        if witness.kind == WitnessKind.BOX:
            vector = witness.to_vector()
            if len(vector) != inst.n:
                raise InputError(f"见证维数 {len(vector)} 与 n={inst.n} 不一致")
            outside = [i for i, x in enumerate(vector) if x * x > 1]
            if outside:
                return VerifyResult(accepted=False, instance_kind="bq4e", violated_index=outside[0],
                                    message=f"xi[{outside[0]}] lies outside [-1, 1]")
            value = poly_eval(inst.h, vector)
            if value:
                return VerifyResult(accepted=False, instance_kind="bq4e", message=f"h(xi) = {format_rational(value)}")
            return VerifyResult(accepted=True, instance_kind="bq4e", message="h(xi) = 0",
                                xi=[format_rational(x) for x in vector])
        system, _ = compile_homogeneous(inst)
        return _verify_system(system, "bq4e", witness)

    if isinstance(instance_file, SystemFile):
        return _verify_system(instance_file.to_system(), "system", witness)

    if isinstance(instance_file, HqsfFile):
        hqsf = instance_file.to_instance()
        vector = witness.to_vector()
        _check_length(vector, hqsf.N)
        index = _first_nonzero_form(hqsf.forms, vector)
        if index is not None:
            return VerifyResult(accepted=False, instance_kind="hqsf", violated_index=index,
                                message=f"form {index} does not vanish")
        return VerifyResult(accepted=True, instance_kind="hqsf", message="all forms vanish")

    if isinstance(instance_file, QuarticFile):
        data = instance_file.to_data()
        vector = witness.to_vector()
        _check_length(vector, data.N)
        if certify_max(data, vector):
            return VerifyResult(accepted=True, instance_kind="quartic", message="p(z) = B*|z|^4")
        index = _first_nonzero_form(data.forms, vector)
        return VerifyResult(accepted=False, instance_kind="quartic", violated_index=index,
                            message=f"form {index} does not vanish")

    if isinstance(instance_file, ThresholdFile):
        instance = instance_file.to_instance()
        vector = witness.to_vector()
        _check_length(vector, instance.tensor.dimension)
        if certify_threshold(instance, vector):
            return VerifyResult(accepted=True, instance_kind="threshold", message="T(z,...,z)^2 >= alpha^2*|z|^(2d)")
        return VerifyResult(accepted=False, instance_kind="threshold", message="witness does not reach the threshold")

    raise InputError(f"不支持的实例类型: {type(instance_file).__name__}")


def verify_witness_file(instance_path: str, witness_path: str) -> VerifyResult:
    """从文件加载实例与见证并精确验证"""
    instance_file = load_instance_file(instance_path)
    witness = load_model(witness_path, WitnessFile)
    result = verify_witness(instance_file, witness)
    level = logging.INFO if result.accepted else logging.WARNING
    logger.log(level, f"见证验证: kind={result.instance_kind}, accepted={result.accepted}, {result.message}")
    return result

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
TensorThreshold 命令行入口

此模块负责：
1. 逐阶段调用归约链（reduce-box / reduce-tensor / lift-order）
2. 数值估计（maximize / residual）与精确见证验证（verify）
3. 端到端流水线（pipeline）与实例库批量运行（library）

退出码：0 得出结论，1 输入错误，2 内部不变量被破坏。

用法示例：
    python -m tensorthreshold.scheduler.cli_main pipeline --library sq-minus-1
    python -m tensorthreshold.scheduler.cli_main reduce-box inst.json -o system.json --mode affine
"""

import argparse
import asyncio
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel

from tensorthreshold.common.config import CONFIG_ENV_VAR, get_settings
from tensorthreshold.common.exceptions import InputError, InvariantViolation, StageError
from tensorthreshold.common.file_utils import load_model, save_model
from tensorthreshold.common.logging_config import setup_logging
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
)
from tensorthreshold.exact_algebra.rational import format_rational
from tensorthreshold.harness.library import get_instance
from tensorthreshold.harness.models import LibraryInstance, LibraryStatus
from tensorthreshold.harness.pipeline import (
    load_instance_file,
    margin_table,
    run_hqsf_pipeline,
    run_library,
    run_pipeline,
    system_from_hqsf,
    verify_witness_file,
)
from tensorthreshold.numopt.models import AscentConfig
from tensorthreshold.numopt.service import maximize_multilinear, maximize_sym, minimize_sym, residual_min
from tensorthreshold.reduce_box.models import Bq4eInstance, QuadraticSystem, SystemMode
from tensorthreshold.reduce_box.service import (
    affine_forward,
    compile_homogeneous,
    compile_paper_literal,
    witness_forward,
)
from tensorthreshold.reduce_tensor.service import (
    build_quartic,
    equality_compare,
    hqsf_from_system,
    lift_order,
    tensorize,
    tensorize_lift,
    threshold_compare,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INTERNAL_ERROR = 2


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: Optional[str] = None) -> None:
    """按 --format 输出结果到 stdout"""
    if args.format == "json":
        print(json.dumps(payload, indent=2, ensure_ascii=False))
        return
    if text is not None:
        print(text)
        return
    for key, value in payload.items():
        print(f"{key}: {value}")


def _save(path: Optional[str], model: BaseModel) -> None:
    if path:
        save_model(path, model)
        logger.info(f"已写入 {path}")


def _config(args: argparse.Namespace) -> AscentConfig:
    return AscentConfig.from_settings(
        restarts=args.restarts,
        max_iters=args.max_iters,
        step_tolerance=args.tol,
        value_tolerance=args.tol,
        shift=args.shift,
        seed=args.seed,
        workers=args.workers,
    )


def _load_bq4e(args: argparse.Namespace) -> Bq4eInstance:
    if getattr(args, "library", None):
        return get_instance(args.library).bq4e
    if not args.instance:
        raise InputError("需要给出实例文件或 --library 名称")
    return load_model(args.instance, Bq4eFile).to_instance()


def _load_system(path: str) -> QuadraticSystem:
    """系统文件或 HQSF 文件 -> 齐次 / 仿射系统"""
    model = load_instance_file(path)
    if isinstance(model, SystemFile):
        return model.to_system()
    if isinstance(model, HqsfFile):
        return system_from_hqsf(model.to_instance())
    raise InputError(f"需要系统文件或 HQSF 文件: {path}")


# ----------------------------------------------------------------------
# 子命令


def cmd_reduce_box(args: argparse.Namespace) -> int:
    """BQ4E -> 二次系统，可选地前推盒见证"""
    inst = _load_bq4e(args)
    if args.mode == SystemMode.AFFINE.value:
        system = compile_paper_literal(inst)
    else:
        system, _ = compile_homogeneous(inst)
    _save(args.output, SystemFile.from_system(system))

    payload: Dict[str, Any] = {
        "mode": system.mode.value,
        "n": inst.n,
        "N": system.N,
        "constraints": len(system.constraints),
    }
    if args.witness:
        box = load_model(args.witness, WitnessFile).to_box()
        if args.mode == SystemMode.AFFINE.value:
            sphere = affine_forward(inst, box)
        else:
            sphere = witness_forward(inst, box)
        _save(args.witness_output, WitnessFile.from_sphere(sphere))
        payload["witness_exact"] = sphere.exact
        if sphere.max_residual is not None:
            payload["witness_max_residual"] = sphere.max_residual
    _emit(args, payload)
    return EXIT_OK


def cmd_reduce_tensor(args: argparse.Namespace) -> int:
    """齐次系统 / HQSF -> 四次型 -> 4 阶阈值实例"""
    hqsf = hqsf_from_system(_load_system(args.instance))
    data = build_quartic(hqsf)
    instance = tensorize(data)
    _save(args.output, ThresholdFile.from_instance(instance))
    _save(args.quartic_output, QuarticFile.from_data(data))
    _emit(args, {
        "N": data.N,
        "r": hqsf.r,
        "C": format_rational(data.C),
        "B": format_rational(data.B),
        "quartic_terms": len(data.p),
        "tensor_entries": len(instance.tensor.entries),
        "threshold": instance.threshold_float,
    })
    return EXIT_OK


def cmd_lift_order(args: argparse.Namespace) -> int:
    """四次证书数据 -> d 阶阈值实例"""
    data = load_model(args.instance, QuarticFile).to_data()
    lift = lift_order(data, args.d)
    instance = tensorize_lift(lift, data.B)
    _save(args.output, ThresholdFile.from_instance(instance))
    _save(args.lift_output, LiftFile.from_lift(lift))
    _emit(args, {
        "d": lift.d,
        "variables": lift.p_d.variable_count,
        "gamma_sq": format_rational(lift.gamma_sq),
        "threshold": instance.threshold_float,
    })
    return EXIT_OK


def cmd_maximize(args: argparse.Namespace) -> int:
    """四次数据或阈值实例上的球面最大值（最小值）估计，附带数值比较标签"""
    cfg = _config(args)
    model = load_instance_file(args.instance)
    payload: Dict[str, Any] = {}

    if isinstance(model, QuarticFile):
        data = model.to_data()
        if args.multilinear:
            raise InputError("多线性估计需要阈值实例文件")
        if args.minimize:
            estimate, kind = minimize_sym(data, cfg), EstimateKind.MIN
        else:
            estimate, kind = maximize_sym(data, cfg), EstimateKind.MAX
            payload["verdict"] = equality_compare(data, estimate.value).value
        payload["B"] = format_rational(data.B)
    elif isinstance(model, ThresholdFile):
        instance = model.to_instance()
        if args.minimize:
            estimate, kind = minimize_sym(instance.tensor, cfg), EstimateKind.MIN
        elif args.multilinear:
            estimate, kind = maximize_multilinear(instance.tensor, cfg), EstimateKind.MULTILINEAR
            payload["verdict"] = threshold_compare(instance, estimate.value).value
        else:
            estimate, kind = maximize_sym(instance.tensor, cfg), EstimateKind.MAX
            payload["verdict"] = threshold_compare(instance, estimate.value).value
        payload["threshold"] = instance.threshold_float
    else:
        raise InputError(f"maximize 需要四次数据文件或阈值实例文件: {args.instance}")

    _save(args.output, EstimateFile.from_estimate(estimate, kind))
    payload.update({
        "kind": kind.value,
        "value": estimate.value,
        "converged": estimate.converged,
        "restarts_used": estimate.restarts_used,
        "method": estimate.method,
    })
    if "verdict" in payload:
        payload["note"] = "numerical: floating-point estimate, not a proof"
    _emit(args, payload)
    return EXIT_OK


def cmd_residual(args: argparse.Namespace) -> int:
    """齐次系统在球面上的残差平方和最小值"""
    cfg = _config(args)
    system = _load_system(args.instance)
    estimate = residual_min(system, cfg, fixed_zero=args.fixed_zero)
    _save(args.output, EstimateFile.from_estimate(estimate, EstimateKind.RESIDUAL))
    _emit(args, {
        "N": system.N,
        "constraints": len(system.constraints),
        "value": estimate.value,
        "converged": estimate.converged,
        "restarts_used": estimate.restarts_used,
    })
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """精确验证见证文件；接受与拒绝都是结论"""
    result = verify_witness_file(args.instance, args.witness)
    verdict = "accepted" if result.accepted else "rejected"
    _emit(args, result.model_dump(mode="json"), text=f"{verdict}: {result.message}")
    return EXIT_OK


def _pipeline_report(args: argparse.Namespace, cfg: AscentConfig):
    if args.mode == SystemMode.AFFINE.value:
        raise InputError("流水线只支持齐次模式，仿射系统请使用 reduce-box --mode affine")
    if args.library:
        return run_pipeline(get_instance(args.library), cfg, lift_d=args.lift_d)
    if not args.instance:
        raise InputError("需要给出实例文件或 --library 名称")

    model = load_instance_file(args.instance)
    if isinstance(model, Bq4eFile):
        witness = load_model(args.witness, WitnessFile).to_box() if args.witness else None
        inst = LibraryInstance(
            name=model.name or Path(args.instance).stem,
            bq4e=model.to_instance(),
            status=LibraryStatus.YES if witness is not None else LibraryStatus.UNKNOWN,
            witness=witness,
        )
        return run_pipeline(inst, cfg, lift_d=args.lift_d)

    if isinstance(model, (SystemFile, HqsfFile)):
        system = _load_system(args.instance)
        witness = load_model(args.witness, WitnessFile).to_vector() if args.witness else None
        return run_hqsf_pipeline(
            hqsf_from_system(system),
            cfg,
            witness=witness,
            lift_d=args.lift_d,
            name=Path(args.instance).stem,
            system=system,
        )
    raise InputError(f"pipeline 需要 BQ4E、系统或 HQSF 文件: {args.instance}")


def cmd_pipeline(args: argparse.Namespace) -> int:
    """端到端流水线，输出报告"""
    report = _pipeline_report(args, _config(args))
    _save(args.output, report)
    text = margin_table([report]) + "\n" + "\n".join(f"note: {n}" for n in report.notes)
    _emit(args, report.model_dump(mode="json"), text=text.rstrip())
    return EXIT_OK


def cmd_library(args: argparse.Namespace) -> int:
    """并发运行实例库并输出间隔表"""
    reports = asyncio.run(run_library(
        _config(args),
        names=args.names or None,
        max_concurrency=args.max_concurrency,
        lift_d=args.lift_d,
    ))
    if args.output_dir:
        for report in reports:
            _save(os.path.join(args.output_dir, f"{report.name}.report.json"), report)
    payload = {"reports": [r.model_dump(mode="json") for r in reports]}
    _emit(args, payload, text=margin_table(reports))
    return EXIT_OK


# ----------------------------------------------------------------------
# 参数解析


def _common_parser() -> argparse.ArgumentParser:
    """各子命令共享的全局参数"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--format", choices=["text", "json"], default="text", help="stdout 输出格式")
    parser.add_argument("--mode", choices=[m.value for m in SystemMode], default=SystemMode.HOMOGENEOUS.value,
                        help="BQ4E 编译模式")
    parser.add_argument("--seed", type=int, default=None, help="随机种子")
    parser.add_argument("--restarts", type=int, default=None, help="随机重启次数")
    parser.add_argument("--max-iters", type=int, default=None, help="单次重启的最大迭代次数")
    parser.add_argument("--tol", type=float, default=None, help="步长与目标值收敛阈值")
    parser.add_argument("--shift", type=float, default=None, help="幂迭代位移")
    parser.add_argument("--workers", type=int, default=None, help="并行执行重启的线程数")
    parser.add_argument("--config", type=str, default=None, help="TOML 配置文件路径")
    parser.add_argument("--log-level", type=str, default=None, help="日志级别")
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="tensorthreshold", description="TensorThreshold 归约编译与验证工具")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce-box", parents=[common], help="BQ4E -> 二次系统")
    p.add_argument("instance", nargs="?", help="BQ4E 实例文件")
    p.add_argument("--library", type=str, help="使用实例库中的实例")
    p.add_argument("-o", "--output", type=str, help="系统文件输出路径")
    p.add_argument("--witness", type=str, help="盒见证文件")
    p.add_argument("--witness-output", type=str, help="球面见证输出路径")
    p.set_defaults(handler=cmd_reduce_box)

    p = sub.add_parser("reduce-tensor", parents=[common], help="齐次系统 / HQSF -> 张量阈值实例")
    p.add_argument("instance", help="系统文件或 HQSF 文件")
    p.add_argument("-o", "--output", type=str, help="阈值实例输出路径")
    p.add_argument("--quartic-output", type=str, help="四次证书数据输出路径")
    p.set_defaults(handler=cmd_reduce_tensor)

    p = sub.add_parser("lift-order", parents=[common], help="四次证书数据 -> d 阶阈值实例")
    p.add_argument("instance", help="四次证书数据文件")
    p.add_argument("--d", type=int, required=True, help="目标阶数 (≥ 4)")
    p.add_argument("-o", "--output", type=str, help="阈值实例输出路径")
    p.add_argument("--lift-output", type=str, help="提升后多项式输出路径")
    p.set_defaults(handler=cmd_lift_order)

    p = sub.add_parser("maximize", parents=[common], help="球面最大值估计")
    p.add_argument("instance", help="四次证书数据文件或阈值实例文件")
    p.add_argument("--multilinear", action="store_true", help="多线性（非对称）估计")
    p.add_argument("--minimize", action="store_true", help="估计球面最小值")
    p.add_argument("-o", "--output", type=str, help="估计文件输出路径")
    p.set_defaults(handler=cmd_maximize)

    p = sub.add_parser("residual", parents=[common], help="齐次系统残差最小化")
    p.add_argument("instance", help="系统文件或 HQSF 文件")
    p.add_argument("--fixed-zero", type=int, nargs="*", default=None, help="固定为零的坐标下标")
    p.add_argument("-o", "--output", type=str, help="估计文件输出路径")
    p.set_defaults(handler=cmd_residual)

    p = sub.add_parser("verify", parents=[common], help="精确验证见证")
    p.add_argument("instance", help="实例文件")
    p.add_argument("witness", help="见证文件")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("pipeline", parents=[common], help="端到端流水线")
    p.add_argument("instance", nargs="?", help="BQ4E、系统或 HQSF 文件")
    p.add_argument("--library", type=str, help="使用实例库中的实例")
    p.add_argument("--witness", type=str, help="见证文件（BQ4E 为盒见证，系统 / HQSF 为球面见证）")
    p.add_argument("--lift-d", type=int, default=None, help="阶数提升的目标阶数")
    p.add_argument("-o", "--output", type=str, help="报告输出路径")
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("library", parents=[common], help="批量运行实例库")
    p.add_argument("--names", type=str, nargs="*", default=None, help="实例名称，默认全部")
    p.add_argument("--lift-d", type=int, default=None, help="阶数提升的目标阶数")
    p.add_argument("--max-concurrency", type=int, default=None, help="最大并发数")
    p.add_argument("--output-dir", type=str, help="报告输出目录")
    p.set_defaults(handler=cmd_library)

    return parser


def _exit_code(error: Exception) -> int:
    cause = error.cause if isinstance(error, StageError) else error
    if isinstance(cause, InvariantViolation):
        return EXIT_INTERNAL_ERROR
    if isinstance(cause, (InputError, ValueError)):
        return EXIT_INPUT_ERROR
    return EXIT_INTERNAL_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    """
    主函数

    Returns:
        int: 退出码
    """
    args = build_parser().parse_args(argv)
    if args.config:
        os.environ[CONFIG_ENV_VAR] = args.config
        get_settings.cache_clear()
    setup_logging(log_level=args.log_level)

    try:
        return args.handler(args)
    except Exception as e:
        code = _exit_code(e)
        stage = f" [{e.stage}]" if isinstance(e, StageError) else ""
        if code == EXIT_INPUT_ERROR:
            logger.error(f"输入错误{stage}: {e}")
        else:
            logger.error(f"内部错误{stage}: {e}", exc_info=True)
        print(f"error{stage}: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

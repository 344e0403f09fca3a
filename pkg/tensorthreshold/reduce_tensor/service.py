#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
HQSF -> 张量谱阈值编译服务

流程：
1. 四次型构造：p(z) = B‖z‖⁴ - Σ q_i(z)²，C = Σ‖Q_i‖_F²，B = C + 1
2. 极化：p -> 4 阶对称张量，阈值基数为 B
3. 阶数提升：p_d = p·Π t_k，阈值为 B·γ_d
4. 阈值比较：只有有理见证能给出 certified_yes，浮点估计只给出数值标签

阈值比较一律使用平方量，奇数阶时 γ_d 为无理数，平方后仍是有理数。
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Sequence

from tensorthreshold.common.config import settings
from tensorthreshold.common.exceptions import InputError, InvariantViolation
from tensorthreshold.exact_algebra.polynomial import Monomial, Polynomial, poly_eval
from tensorthreshold.exact_algebra.quadratic import frobenius_sq, quad_eval
from tensorthreshold.exact_algebra.rational import RationalLike, as_rational_vector, squared_norm
from tensorthreshold.reduce_box.models import QuadraticSystem, SystemMode
from tensorthreshold.reduce_tensor.models import HqsfInstance, OrderLift, QuarticCertificateData, Verdict
from tensorthreshold.symtensor.tensor import (
    OrderFactor,
    ThresholdInstance,
    eval_form,
    gamma_sq,
    tensor_from_form,
)

logger = logging.getLogger(__name__)


def hqsf_from_system(system: QuadraticSystem) -> HqsfInstance:
    """
    齐次系统 -> HQSF 实例

    Raises:
        InputError: 仿射系统不能直接送入张量阶段
    """
    if system.mode != SystemMode.HOMOGENEOUS:
        raise InputError("只有齐次模式的系统可以转换为 HQSF 实例")
    return HqsfInstance(N=system.N, forms=tuple(system.forms))


def _norm_fourth(N: int) -> Dict[Monomial, Fraction]:
    """(Σ z_j²)² 的系数表"""
    terms: Dict[Monomial, Fraction] = {}
    for i in range(N):
        terms[((i, 4),)] = Fraction(1)
        for j in range(i + 1, N):
            terms[((i, 2), (j, 2))] = Fraction(2)
    return terms


def build_quartic(inst: HqsfInstance, max_dimension: Optional[int] = None) -> QuarticCertificateData:
    """
    构造 p(z) = B·(Σz_j²)² - Σ q_i(z)² 并完全展开

    Args:
        inst: HQSF 实例
        max_dimension: N 的上限，默认取 settings.LIMITS.MAX_QUARTIC_DIMENSION

    Returns:
        QuarticCertificateData: C、B、展开后的 p 以及原始二次型

    Raises:
        InputError: 二次型列表为空或 N 超过上限
    """
    if not inst.forms:
        raise InputError("HQSF 实例至少需要一个二次型")
    cap = max_dimension if max_dimension is not None else settings.LIMITS.MAX_QUARTIC_DIMENSION
    if inst.N > cap:
        raise InputError(f"四次型维数 N={inst.N} 超过上限 {cap}")

    C = sum((frobenius_sq(Q) for Q in inst.forms), Fraction(0))
    B = C + 1
    p = Polynomial(inst.N, _norm_fourth(inst.N)) * B
    for Q in inst.forms:
        q = Q.to_polynomial()
        p = p - q * q

    logger.info(f"四次型构造完成: N={inst.N}, r={inst.r}, C={C}, B={B}, 单项式数={len(p)}")
    return QuarticCertificateData(N=inst.N, C=C, B=B, p=p, forms=inst.forms)


def _nonzero_witness(data_dim: int, z: Sequence[RationalLike]):
    if len(z) != data_dim:
        raise InputError(f"见证维数 {len(z)} 与 N={data_dim} 不一致")
    values = as_rational_vector(z)
    if not any(values):
        raise InputError("见证不能是零向量")
    return values


def certify_max(data: QuarticCertificateData, z: Sequence[RationalLike]) -> bool:
    """
    精确判定 p(z) = B·‖z‖⁴，即全部 q_i(z) = 0

    返回 True 即证明球面上 max p = B，从而张量谱范数 ≥ B；z 无需归一化。

    Raises:
        InputError: z 为零向量或维数不匹配
    """
    values = _nonzero_witness(data.N, z)
    if any(quad_eval(Q, values) for Q in data.forms):
        return False
    # 由 p 的构造这是恒等式，仍然在展开后的多项式上复核
    norm_sq = squared_norm(values)
    if poly_eval(data.p, values) != data.B * norm_sq * norm_sq:
        raise InvariantViolation("展开后的四次型与二次型列表不一致")
    return True


def sandwich_holds(data: QuarticCertificateData, z: Sequence[RationalLike]) -> bool:
    """精确检查 (Σz²)² ≤ p(z) ≤ B·(Σz²)²"""
    values = _nonzero_witness(data.N, z)
    norm_sq = squared_norm(values)
    value = poly_eval(data.p, values)
    return norm_sq * norm_sq <= value <= data.B * norm_sq * norm_sq


def tensorize(data: QuarticCertificateData) -> ThresholdInstance:
    """
    四次型极化为 4 阶对称张量，阈值基数 B

    p 在球面上恒正，因此 |p| 与 p 的球面最大值相同。
    """
    tensor = tensor_from_form(data.p, 4)
    logger.info(f"张量化完成: n={tensor.dimension}, d=4, 非零有序元={len(tensor.entries)}")
    return ThresholdInstance(tensor=tensor, threshold_base=data.B, order_factor=OrderFactor(d=4))


def lift_order(data: QuarticCertificateData, d: int) -> OrderLift:
    """
    阶数提升 p_d(z, t_1..t_{d-4}) = p(z)·Π t_k

    球面上 max|p_d| = γ_d·max p：目标按 ‖z‖² = c² 与 Σt_k² = 1 - c² 分解，
    等模的 t_k 使 Π|t_k| 最大，最优 c² = 4/d。

    Raises:
        InputError: d < 4
    """
    if d < 4:
        raise InputError(f"阶数提升要求 d ≥ 4，实际 {d}")
    extra = d - 4
    total = data.N + extra
    p_d = data.p.embed(total, list(range(data.N)))
    if extra:
        t_product = Polynomial(total, {tuple((data.N + k, 1) for k in range(extra)): 1})
        p_d = p_d * t_product
    logger.info(f"阶数提升完成: d={d}, 变量数={total}, γ_d²={gamma_sq(d)}")
    return OrderLift(d=d, N=data.N, p_d=p_d, gamma_sq=gamma_sq(d))


def tensorize_lift(lift: OrderLift, B: RationalLike) -> ThresholdInstance:
    """提升后的 d 阶阈值实例，阈值为 B·γ_d"""
    tensor = tensor_from_form(lift.p_d, lift.d)
    return ThresholdInstance(tensor=tensor, threshold_base=B, order_factor=OrderFactor(d=lift.d))


def certify_threshold(instance: ThresholdInstance, z: Sequence[RationalLike]) -> bool:
    """
    精确判定 T(z,…,z)² ≥ α²·(Σz²)^d

    成立即证明 ‖T‖ ≥ α。两边均为有理数。
    """
    values = _nonzero_witness(instance.tensor.dimension, z)
    value = eval_form(instance.tensor, values)
    return value * value >= instance.threshold_sq * squared_norm(values) ** instance.tensor.order


def _numerical_label(threshold_sq: Fraction, estimate: Optional[float], tolerance: float) -> Verdict:
    if estimate is None:
        return Verdict.UNKNOWN
    # float -> Fraction 是精确转换
    estimate_sq = Fraction(abs(estimate)) ** 2
    if estimate_sq >= threshold_sq * (1 - Fraction(tolerance)):
        return Verdict.NUMERICALLY_ABOVE
    return Verdict.NUMERICALLY_BELOW


def threshold_compare(
    instance: ThresholdInstance,
    estimate: Optional[float],
    witness: Optional[Sequence[RationalLike]] = None,
    tolerance: Optional[float] = None,
) -> Verdict:
    """
    比较谱范数估计与阈值 α = B·γ_d

    有理见证通过 certify_threshold 给出 certified_yes；否则把 estimate² 与 B²·γ_d²
    作为有理数比较，相对容差 tolerance 内视为 numerically_above。
    """
    tol = tolerance if tolerance is not None else settings.PIPELINE.COMPARE_TOLERANCE
    if witness is not None:
        if certify_threshold(instance, witness):
            return Verdict.CERTIFIED_YES
        logger.warning("有理见证未能证明阈值，退回数值比较")
    verdict = _numerical_label(instance.threshold_sq, estimate, tol)
    logger.info(f"阈值比较: estimate={estimate}, α={instance.threshold_float:.12g}, 结果={verdict.value}")
    return verdict


def equality_compare(
    data: QuarticCertificateData,
    estimate: Optional[float],
    witness: Optional[Sequence[RationalLike]] = None,
    tolerance: Optional[float] = None,
) -> Verdict:
    """
    等式判定：max p 是否等于 B

    编译实例上阈值判定与等式判定一致，有理见证经 certify_max 给出 certified_equal。
    """
    tol = tolerance if tolerance is not None else settings.PIPELINE.COMPARE_TOLERANCE
    if witness is not None:
        if certify_max(data, witness):
            return Verdict.CERTIFIED_EQUAL
        logger.warning("有理见证不是全部二次型的公共零点，退回数值比较")
    return _numerical_label(data.B * data.B, estimate, tol)

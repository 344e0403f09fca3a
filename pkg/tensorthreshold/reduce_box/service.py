#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
BQ4E -> HQSF 编译服务

该模块负责把有界四次等式可行性实例编译为单位球面上的二次约束系统，流程为：
1. 齐次化：h(x) -> H(x0, z)，H(1, x) = h(x)
2. 盒约束编码：z_i² + s_i² - x0² = 0
3. 二次提升：四次的 H 改写为提升变量 u 上的二次型 H̃(u)
4. 见证映射：正向 xi -> y，反向 y -> xi = z/x0

齐次模式对提升方程做了修复：u_ab - v_a v_b 含线性项，不是齐次二次型，
因此改用 u_ab·x0 = v_a v_b、线性绑定 u_00 = x0 与 u_0a = v_a 的秩一平方形式，
以及松弛约束 u_00² - u_ab² - w_ab² = 0。后者排除 x0 = 0 的分支：
x0 = 0 ⇒ v = 0 ⇒ u_00 = 0 ⇒ 全部 u, w = 0 ⇒ y = 0。
逐字的仿射系统作为单独模式保留，用于对照测试，不进入张量阶段。
"""

import logging
import math
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tensorthreshold.common.exceptions import InputError, InvariantViolation, PreconditionError
from tensorthreshold.exact_algebra.polynomial import (
    Polynomial,
    monomial_degree,
    monomial_to_indices,
    poly_eval,
    total_degree,
)
from tensorthreshold.exact_algebra.quadratic import QuadraticForm, quad_eval, rank_one_form
from tensorthreshold.exact_algebra.rational import rational_sqrt
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

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]


def homogenize(inst: Bq4eInstance) -> Polynomial:
    """
    齐次化为四次型 H(x0, z_1..z_n)

    h 中 k 次单项式乘以 x0^{4-k}，变量 x_i 重命名为 z_i（下标 i+1），x0 为下标 0。

    Raises:
        InputError: h 的次数超过 4
    """
    degree = total_degree(inst.h)
    if degree > 4:
        raise InputError(f"h 的总次数 {degree} 超过 4")
    terms = {}
    for monomial, coeff in inst.h.terms.items():
        shifted = [(var + 1, exp) for var, exp in monomial]
        pad = 4 - monomial_degree(monomial)
        if pad:
            shifted.insert(0, (0, pad))
        terms[tuple(shifted)] = coeff
    return Polynomial(inst.n + 1, terms)


def _target_form(inst: Bq4eInstance, layout: VarLayout) -> QuadraticForm:
    """
    H̃(u)：H 的每个四次单项式 v_a v_b v_c v_d（下标有序）替换为 u_ab·u_cd

    H 的变量 (x0, z_1..z_n) 恰好占 v 的下标 0..n。
    """
    H = homogenize(inst)
    couplings = {}
    for monomial, coeff in H.terms.items():
        a, b, c, d = monomial_to_indices(monomial)
        key = (layout.u(a, b), layout.u(c, d))
        couplings[key] = couplings.get(key, Fraction(0)) + coeff
    return QuadraticForm.from_coupling(layout.N, couplings)


def _box_constraints(layout: VarLayout) -> List[Tuple[str, QuadraticForm]]:
    result = []
    for i in range(layout.n):
        form = QuadraticForm.from_coupling(
            layout.N,
            {(layout.z(i), layout.z(i)): 1, (layout.s(i), layout.s(i)): 1, (layout.x0, layout.x0): -1},
        )
        result.append((f"B1[{i}]", form))
    return result


def structural_constraints(layout: VarLayout) -> List[Constraint]:
    """
    齐次系统中只依赖布局的约束族 B1, L1, L2, L3（按此顺序，各族内按下标顺序）
    """
    if not layout.with_slacks:
        raise InputError("结构约束只适用于包含 w 松弛变量的齐次布局")
    N = layout.N
    x0 = layout.x0
    constraints = [
        Constraint(family=ConstraintFamily.BOX, label=label, form=form)
        for label, form in _box_constraints(layout)
    ]

    # L1: u_ab·x0 - v_a v_b
    for a, b in layout.pairs:
        form = QuadraticForm.from_coupling(N, {(layout.u(a, b), x0): 1, (a, b): -1})
        constraints.append(Constraint(family=ConstraintFamily.LIFT, label=f"L1({a},{b})", form=form))

    # L2: (u_00 - x0)² 与 (u_0a - v_a)²
    for a in range(layout.v_count):
        ell = [0] * N
        ell[layout.u(0, a)] = 1
        ell[a] = -1
        constraints.append(
            Constraint(family=ConstraintFamily.TIE, label=f"L2(u0{a})", form=rank_one_form(ell))
        )

    # L3: u_00² - u_ab² - w_ab²（(a, b) = (0, 0) 时前两项抵消，只剩 -w_00²）
    u00 = layout.u(0, 0)
    for a, b in layout.pairs:
        couplings = {(u00, u00): Fraction(1)}
        uab = layout.u(a, b)
        couplings[(uab, uab)] = couplings.get((uab, uab), Fraction(0)) - 1
        couplings[(layout.w(a, b), layout.w(a, b))] = Fraction(-1)
        form = QuadraticForm.from_coupling(N, couplings)
        constraints.append(Constraint(family=ConstraintFamily.SLACK, label=f"L3({a},{b})", form=form))
    return constraints


def compile_homogeneous(inst: Bq4eInstance) -> Tuple[QuadraticSystem, VarLayout]:
    """
    编译为齐次二次球面可行性系统（修复后的提升）

    y = (v, u, w) 上依次输出 B1, L1, L2, L3, H 五族约束，全部是真正的齐次二次型；
    系统在单位球面上可解当且仅当实例可行。

    Returns:
        Tuple[QuadraticSystem, VarLayout]: 齐次系统及其变量布局
    """
    layout = VarLayout(n=inst.n, with_slacks=True)
    constraints = structural_constraints(layout)
    constraints.append(Constraint(family=ConstraintFamily.TARGET, label="H", form=_target_form(inst, layout)))
    system = QuadraticSystem(
        N=layout.N,
        mode=SystemMode.HOMOGENEOUS,
        constraints=tuple(constraints),
        layout=layout,
    )
    logger.info(f"齐次系统编译完成: n={inst.n}, N={layout.N}, 约束数={len(constraints)}")
    return system, layout


def compile_paper_literal(inst: Bq4eInstance) -> QuadraticSystem:
    """
    编译为逐字的仿射系统

    约束: z_i² + s_i² - x0² = 0，u_ab - v_a v_b = 0（带线性 u 项），H̃(u) = 0；
    球面归一化 ‖(v, u)‖² = 1 由系统语义隐含。布局不含 w 松弛变量。
    """
    layout = VarLayout(n=inst.n, with_slacks=False)
    N = layout.N
    zeros = tuple(Fraction(0) for _ in range(N))
    constraints = [
        Constraint(family=ConstraintFamily.BOX, label=label, form=form, linear=zeros, constant=Fraction(0))
        for label, form in _box_constraints(layout)
    ]
    for a, b in layout.pairs:
        linear = [Fraction(0)] * N
        linear[layout.u(a, b)] = Fraction(1)
        constraints.append(
            Constraint(
                family=ConstraintFamily.LIFT,
                label=f"L1({a},{b})",
                form=QuadraticForm.from_coupling(N, {(a, b): -1}),
                linear=tuple(linear),
                constant=Fraction(0),
            )
        )
    constraints.append(
        Constraint(
            family=ConstraintFamily.TARGET,
            label="H",
            form=_target_form(inst, layout),
            linear=zeros,
            constant=Fraction(0),
        )
    )
    system = QuadraticSystem(N=N, mode=SystemMode.AFFINE, constraints=tuple(constraints), layout=layout)
    logger.info(f"仿射系统编译完成: n={inst.n}, N={N}, 约束数={len(constraints)}")
    return system


# ----------------------------------------------------------------------
# 残差


def constraint_value(constraint: Constraint, y: Sequence[Fraction]) -> Fraction:
    """精确计算 q(y) + ℓᵀy + c"""
    value = quad_eval(constraint.form, y)
    if constraint.linear is not None:
        value += sum((l * v for l, v in zip(constraint.linear, y) if l), Fraction(0))
    if constraint.constant is not None:
        value += constraint.constant
    return value


def system_residuals(system: QuadraticSystem, y: Sequence[Fraction]) -> List[Fraction]:
    """
    各约束在 y 处的精确值

    Raises:
        InputError: 维数不匹配
    """
    if len(y) != system.N:
        raise InputError(f"见证维数 {len(y)} 与系统维数 {system.N} 不一致")
    return [constraint_value(c, y) for c in system.constraints]


def system_residuals_float(system: QuadraticSystem, y: Sequence[float]) -> np.ndarray:
    """各约束在浮点点 y 处的值（双精度）"""
    vec = np.asarray(y, dtype=float)
    if vec.shape != (system.N,):
        raise InputError(f"见证维数 {vec.shape} 与系统维数 {system.N} 不一致")
    values = []
    for c in system.constraints:
        value = float(vec @ c.form.as_float_array() @ vec)
        if c.linear is not None:
            value += float(np.dot([float(l) for l in c.linear], vec))
        if c.constant is not None:
            value += float(c.constant)
        values.append(value)
    return np.array(values)


def first_violation(system: QuadraticSystem, y: Sequence[Fraction]) -> Optional[Tuple[int, str, Fraction]]:
    """第一个不为零的约束 (下标, 标签, 值)，全部为零时返回 None"""
    for k, (constraint, value) in enumerate(zip(system.constraints, system_residuals(system, y))):
        if value:
            return k, constraint.label, value
    return None


# ----------------------------------------------------------------------
# 见证映射


def _lifted_point(
    layout: VarLayout,
    xi: Sequence[Fraction],
    sqrt: Callable[[Scalar], Optional[Scalar]],
    one: Scalar,
) -> Optional[List[Scalar]]:
    """
    构造 x0 = 1, z = xi, s = √(1-xi²), u = vvᵀ, w = √(u_00² - u_ab²)

    sqrt 返回 None 表示该值在当前数域中无法开方。
    """
    v: List[Scalar] = [one] + [one * x for x in xi]
    for x in xi:
        root = sqrt(one - one * x * x)
        if root is None:
            return None
        v.append(root)
    y: List[Scalar] = list(v) + [one * 0] * (layout.N - layout.v_count)
    for a, b in layout.pairs:
        y[layout.u(a, b)] = v[a] * v[b]
    if layout.with_slacks:
        for a, b in layout.pairs:
            u_ab = y[layout.u(a, b)]
            root = sqrt(one - u_ab * u_ab)
            if root is None:
                return None
            y[layout.w(a, b)] = root
    return y


def _float_sqrt(value: float) -> float:
    return math.sqrt(max(value, 0.0))


def _check_box_witness(inst: Bq4eInstance, xi: Union[BoxWitness, Sequence]) -> BoxWitness:
    witness = xi if isinstance(xi, BoxWitness) else BoxWitness(xi=tuple(xi))
    if len(witness.xi) != inst.n:
        raise InputError(f"见证长度 {len(witness.xi)} 与 n={inst.n} 不一致")
    value = poly_eval(inst.h, witness.xi)
    if value != 0:
        raise PreconditionError(f"h(xi) = {value} ≠ 0，不是可行见证")
    return witness


def witness_forward(
    inst: Bq4eInstance,
    xi: Union[BoxWitness, Sequence],
    exact: bool = True,
) -> SphereWitness:
    """
    正向见证映射 xi -> y（齐次系统）

    x0 := 1, z_i := xi_i, u_ab := v_a v_b。精确模式要求所有需要开方的量都是有理数平方，
    否则退化为双精度见证并标记 exact=False，附带最大残差。

    Raises:
        PreconditionError: h(xi) ≠ 0
    """
    witness = _check_box_witness(inst, xi)
    layout = VarLayout(n=inst.n, with_slacks=True)
    if exact:
        point = _lifted_point(layout, witness.xi, rational_sqrt, Fraction(1))
        if point is not None:
            return SphereWitness(y=tuple(point), exact=True)
        logger.warning(f"见证 {[str(x) for x in witness.xi]} 需要无理平方根，改为输出浮点见证")

    floats = _lifted_point(layout, [float(x) for x in witness.xi], _float_sqrt, 1.0)
    system, _ = compile_homogeneous(inst)
    residual = float(np.max(np.abs(system_residuals_float(system, floats))))
    return SphereWitness(y=tuple(floats), exact=False, max_residual=residual)


def witness_backward(
    layout: VarLayout,
    y: SphereWitness,
    system: Optional[QuadraticSystem] = None,
    inst: Optional[Bq4eInstance] = None,
) -> BoxWitness:
    """
    反向见证映射 y -> xi = z / x0

    结构约束 B1, L1, L2, L3 由布局重建并精确校验；给出 system 时校验全部约束，
    给出 inst 时额外断言 h(xi) = 0。

    Raises:
        InputError: 见证不是精确有理向量或维数不匹配
        PreconditionError: 存在不为零的约束
        InvariantViolation: x0 = 0 或 xi 越出盒子（系统构造缺陷）
    """
    if not y.exact:
        raise InputError("反向映射需要精确的有理见证")
    if len(y.y) != layout.N:
        raise InputError(f"见证维数 {len(y.y)} 与布局维数 {layout.N} 不一致")
    values = list(y.y)

    checked = QuadraticSystem(
        N=layout.N,
        mode=SystemMode.HOMOGENEOUS,
        constraints=tuple(structural_constraints(layout)),
        layout=layout,
    )
    for candidate in (checked, system):
        if candidate is None:
            continue
        violation = first_violation(candidate, values)
        if violation is not None:
            index, label, value = violation
            raise PreconditionError(f"约束 {index} ({label}) 在见证处的值为 {value} ≠ 0")

    x0 = values[layout.x0]
    if x0 == 0:
        raise InvariantViolation("非零见证满足结构约束却有 x0 = 0，系统构造有误")
    xi = tuple(values[layout.z(i)] / x0 for i in range(layout.n))
    for i, value in enumerate(xi):
        if value * value > 1:
            raise InvariantViolation(f"xi[{i}] = {value} 越出 [-1, 1]，盒约束编码有误")
    if inst is not None and poly_eval(inst.h, xi) != 0:
        raise InvariantViolation("H̃ 约束为零但 h(xi) ≠ 0，提升编码有误")
    return BoxWitness(xi=xi)


def affine_forward(inst: Bq4eInstance, xi: Union[BoxWitness, Sequence]) -> SphereWitness:
    """
    逐字仿射系统的未归一化见证: v = (1, xi, s), u = vvᵀ

    s 需要无理平方根时给出浮点见证。
    """
    witness = _check_box_witness(inst, xi)
    layout = VarLayout(n=inst.n, with_slacks=False)
    point = _lifted_point(layout, witness.xi, rational_sqrt, Fraction(1))
    if point is not None:
        return SphereWitness(y=tuple(point), exact=True)
    floats = _lifted_point(layout, [float(x) for x in witness.xi], _float_sqrt, 1.0)
    return SphereWitness(y=tuple(floats), exact=False)


def normalize_affine(y: SphereWitness, layout: VarLayout) -> SphereWitness:
    """
    各向异性缩放 v -> λv, u -> λ²u，使 ‖(v, u)‖ = 1

    该缩放保持仿射系统的全部方程；λ² 是 a·t² + b·t - 1 = 0 的正根，
    其中 a = ‖u‖², b = ‖v‖²。
    """
    if layout.with_slacks:
        raise InputError("各向异性归一化只适用于仿射布局")
    vec = np.asarray(y.as_floats(), dtype=float)
    v = vec[:layout.v_count]
    u = vec[layout.v_count:]
    a = float(u @ u)
    b = float(v @ v)
    if a == 0.0:
        t = 1.0 / b
    else:
        t = (-b + math.sqrt(b * b + 4.0 * a)) / (2.0 * a)
    lam = math.sqrt(t)
    scaled = np.concatenate([lam * v, t * u])
    return SphereWitness(y=tuple(float(x) for x in scaled), exact=False, normalized=True)


def normalize_witness(y: SphereWitness) -> SphereWitness:
    """齐次系统见证的均匀归一化（浮点）"""
    vec = np.asarray(y.as_floats(), dtype=float)
    vec = vec / np.linalg.norm(vec)
    return SphereWitness(y=tuple(float(x) for x in vec), exact=False, normalized=True, max_residual=y.max_residual)


def nondegeneracy_slice(system: QuadraticSystem, layout: VarLayout) -> QuadraticSystem:
    """
    齐次系统在 x0 = 0 坐标切片上的限制

    删去 x0 对应的行与列，得到 N-1 维系统；修复后的提升保证该系统在球面上无解。
    """
    if system.mode != SystemMode.HOMOGENEOUS:
        raise InputError("非退化切片只适用于齐次系统")
    keep = [k for k in range(system.N) if k != layout.x0]
    constraints = []
    for c in system.constraints:
        rows = c.form.entries
        form = QuadraticForm([[rows[i][j] for j in keep] for i in keep])
        constraints.append(Constraint(family=c.family, label=c.label, form=form))
    return QuadraticSystem(N=len(keep), mode=SystemMode.HOMOGENEOUS, constraints=tuple(constraints))

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
单位球面上的浮点优化服务

两种上升方法取优：
1. 带 Armijo 回溯线搜索的投影梯度上升（每步目标值充分增加）
2. 位移对称幂迭代 z <- normalize(T·z^{d-1} + shift·z)

残差目标 Σ q_i² 是非线性最小二乘，梯度阶段结束后再做球面上的 Levenberg-Marquardt 细化，
零残差系统上收敛到机器精度附近。

重启点是固定种子下归一化的高斯向量；重启之间相互独立，workers > 1 时用线程池执行，
合并时取最优值，值相同取重启序号最小者。浮点结果只用于引导与度量，证明由精确层完成。
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.numopt.models import AscentConfig, AscentRun, MaxEstimate
from tensorthreshold.reduce_box.models import QuadraticSystem, SystemMode
from tensorthreshold.reduce_tensor.models import QuarticCertificateData
from tensorthreshold.symtensor.tensor import SymmetricTensor, to_dense

logger = logging.getLogger(__name__)

# 回溯线搜索的最小 / 最大步长
MIN_STEP = 1e-20
MAX_STEP = 1e6
# Armijo 充分增加系数
ARMIJO_C = 1e-4
# Levenberg-Marquardt 阻尼范围与相对改进阈值
LM_DAMPING_MIN = 1e-12
LM_DAMPING_MAX = 1e12
LM_RELATIVE_GAIN = 1e-10


def _normalize(z: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(z)
    if norm == 0.0:
        raise InputError("无法归一化零向量")
    return z / norm


def _project(z: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is not None:
        z = z * mask
    return _normalize(z)


# ----------------------------------------------------------------------
# 目标函数


class SphereObjective:
    """
    球面上的光滑目标 f(z)

    sign = -1 时表示对原函数取负，把最小化转成最大化。
    """

    dimension: int = 0
    sign: float = 1.0

    def value(self, z: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def power_map(self, z: np.ndarray) -> Optional[np.ndarray]:
        """T·z^{d-1}（与梯度同向），不支持幂迭代时返回 None"""
        return None

    def refine(self, run: AscentRun, cfg: AscentConfig, mask: Optional[np.ndarray] = None) -> Optional[AscentRun]:
        """梯度阶段之后的二阶细化，不支持时返回 None"""
        return None

    @property
    def default_shift(self) -> float:
        return 0.0


class QuarticObjective(SphereObjective):
    """
    p(z) = B‖z‖⁴ - Σ q_i(z)² 的闭式求值

    ∇p(z) = 4B‖z‖²z - 4Σ q_i(z)·Q_i z
    """

    def __init__(self, data: QuarticCertificateData, sign: float = 1.0):
        self.dimension = data.N
        self.sign = sign
        self.B = float(data.B)
        self.stack = np.stack([Q.as_float_array() for Q in data.forms])

    def _parts(self, z: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        Qz = self.stack @ z
        return float(z @ z), Qz, Qz @ z

    def value(self, z: np.ndarray) -> float:
        s, _, q = self._parts(z)
        return self.sign * (self.B * s * s - float(q @ q))

    def gradient(self, z: np.ndarray) -> np.ndarray:
        s, Qz, q = self._parts(z)
        return self.sign * (4.0 * self.B * s * z - 4.0 * (q @ Qz))

    def power_map(self, z: np.ndarray) -> Optional[np.ndarray]:
        if self.sign < 0:
            return None
        return self.gradient(z) / 4.0

    @property
    def default_shift(self) -> float:
        return 2.0 * self.B


class LiftedQuarticObjective(SphereObjective):
    """
    p_d(z, t) = p(z)·Π t_k 的闭式求值，变量 (z, t_1..t_{d-4})

    p 在球面上恒正，翻转一个 t_k 即改变符号，因此 max p_d = max |p_d|。
    """

    def __init__(self, data: QuarticCertificateData, d: int):
        if d < 4:
            raise InputError(f"阶数提升要求 d ≥ 4，实际 {d}")
        self.quartic = QuarticObjective(data)
        self.N = data.N
        self.extra = d - 4
        self.order = d
        self.dimension = data.N + self.extra

    def _split(self, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return y[:self.N], y[self.N:]

    def value(self, y: np.ndarray) -> float:
        z, t = self._split(y)
        return self.quartic.value(z) * float(np.prod(t))

    def gradient(self, y: np.ndarray) -> np.ndarray:
        z, t = self._split(y)
        p = self.quartic.value(z)
        t_grad = np.array([p * float(np.prod(np.delete(t, k))) for k in range(self.extra)])
        return np.concatenate([self.quartic.gradient(z) * float(np.prod(t)), t_grad])

    def power_map(self, y: np.ndarray) -> Optional[np.ndarray]:
        return self.gradient(y) / self.order

    @property
    def default_shift(self) -> float:
        return 2.0 * self.quartic.B


def _contract(A: np.ndarray, z: np.ndarray, times: int) -> np.ndarray:
    result = A
    for _ in range(times):
        result = np.dot(result, z)
    return result


class DenseFormObjective(SphereObjective):
    """稠密对称张量的 T(z,…,z)"""

    def __init__(self, A: np.ndarray, sign: float = 1.0):
        self.A = A
        self.order = A.ndim
        self.dimension = A.shape[0]
        self.sign = sign

    def value(self, z: np.ndarray) -> float:
        return self.sign * float(_contract(self.A, z, self.order))

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return self.sign * self.order * _contract(self.A, z, self.order - 1)

    def power_map(self, z: np.ndarray) -> Optional[np.ndarray]:
        return self.sign * _contract(self.A, z, self.order - 1)

    @property
    def default_shift(self) -> float:
        # 保证位移映射凸性的经典上界 (d-1)·Σ|T|
        return (self.order - 1) * float(np.abs(self.A).sum())


class ResidualObjective(SphereObjective):
    """-Σ q_i(y)²，用于最小化齐次系统的残差平方和"""

    def __init__(self, system: QuadraticSystem):
        self.dimension = system.N
        self.sign = -1.0
        self.stack = np.stack([c.form.as_float_array() for c in system.constraints])

    def value(self, z: np.ndarray) -> float:
        q = (self.stack @ z) @ z
        return -float(q @ q)

    def gradient(self, z: np.ndarray) -> np.ndarray:
        Qz = self.stack @ z
        q = Qz @ z
        return -4.0 * (q @ Qz)

    def refine(self, run: AscentRun, cfg: AscentConfig, mask: Optional[np.ndarray] = None) -> Optional[AscentRun]:
        """
        球面上的 Levenberg-Marquardt：q_i(z + δ) ≈ q_i(z) + 2(Q_i z)·δ，附加切向条件 z·δ = 0

        每步解 (AᵀA + μI)δ = -Aᵀr 后归一化，只接受残差严格下降的步；
        失败时增大阻尼 μ，阻尼超过上限或相对改进低于阈值时停止。
        """
        z = _project(np.asarray(run.point, dtype=float), mask)
        residual = -self.value(z)
        history = list(run.history) or [-residual]
        damping = 1e-3
        identity = np.eye(self.dimension)
        converged = False
        iterations = 0
        while iterations < cfg.max_iters:
            if residual == 0.0:
                converged = True
                break
            iterations += 1
            Qz = self.stack @ z
            jacobian = 2.0 * Qz
            if mask is not None:
                jacobian = jacobian * mask
            A = np.vstack([jacobian, z[None, :]])
            r = np.concatenate([Qz @ z, [0.0]])
            normal, rhs = A.T @ A, A.T @ r

            accepted = False
            while damping <= LM_DAMPING_MAX:
                try:
                    delta = -np.linalg.solve(normal + damping * identity, rhs)
                except np.linalg.LinAlgError:
                    damping *= 10.0
                    continue
                trial = _project(z + delta, mask)
                trial_residual = -self.value(trial)
                if trial_residual < residual:
                    accepted = True
                    break
                damping *= 10.0
            if not accepted:
                converged = True
                break

            gain = residual - trial_residual
            z, residual = trial, trial_residual
            history.append(-residual)
            damping = max(damping / 10.0, LM_DAMPING_MIN)
            if gain <= LM_RELATIVE_GAIN * (residual + gain):
                converged = True
                break

        return AscentRun(
            value=-residual,
            point=tuple(float(x) for x in z),
            iterations=run.iterations + iterations,
            converged=converged,
            method="lm",
            history=history,
        )


def grad_p(data: QuarticCertificateData, z: Sequence[float]) -> np.ndarray:
    """
    ∇p(z) = 4B‖z‖²z - 4Σ q_i(z)·Q_i z

    Raises:
        InputError: 维数不匹配
    """
    vec = np.asarray(z, dtype=float)
    if vec.shape != (data.N,):
        raise InputError(f"向量维数 {vec.shape} 与 N={data.N} 不一致")
    return QuarticObjective(data).gradient(vec)


# ----------------------------------------------------------------------
# 单次重启


def projected_ascent(
    objective: SphereObjective,
    start: np.ndarray,
    cfg: AscentConfig,
    mask: Optional[np.ndarray] = None,
) -> AscentRun:
    """
    投影梯度上升：沿切向梯度 g 前进后投影回球面

    回溯线搜索只接受满足 Armijo 条件 f(trial) ≥ f + c·step·‖g‖² 的步，
    接受后步长加倍（不超过 MAX_STEP）。mask 非空时迭代点限制在 mask 为零的坐标恒为零的切片上。
    """
    z = _project(np.asarray(start, dtype=float), mask)
    f = objective.value(z)
    history = [f]
    step = 1.0
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        iterations += 1
        g = objective.gradient(z)
        if mask is not None:
            g = g * mask
        g = g - (g @ z) * z
        slope = float(g @ g)
        if np.sqrt(slope) <= cfg.step_tolerance:
            converged = True
            break

        candidate, f_new = None, f
        while step > MIN_STEP:
            trial = _project(z + step * g, mask)
            f_trial = objective.value(trial)
            if f_trial >= f + ARMIJO_C * step * slope:
                candidate, f_new = trial, f_trial
                break
            step *= 0.5
        if candidate is None:
            converged = True
            break

        move = float(np.linalg.norm(candidate - z))
        gain = f_new - f
        z, f = candidate, f_new
        history.append(f)
        step = min(step * 2.0, MAX_STEP)
        if move < cfg.step_tolerance or gain <= cfg.value_tolerance * max(1.0, abs(f)):
            converged = True
            break

    return AscentRun(
        value=f,
        point=tuple(float(x) for x in z),
        iterations=iterations,
        converged=converged,
        method="gradient",
        history=history,
    )


def shifted_power_iteration(
    objective: SphereObjective,
    start: np.ndarray,
    cfg: AscentConfig,
) -> Optional[AscentRun]:
    """
    位移对称幂迭代，返回迭代过程中目标值最高的点

    目标不支持幂迭代时返回 None。
    """
    if objective.power_map(np.asarray(start, dtype=float)) is None:
        return None
    shift = cfg.shift if cfg.shift is not None else objective.default_shift
    z = _normalize(np.asarray(start, dtype=float))
    best_z, best_f = z, objective.value(z)
    history = [best_f]
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        iterations += 1
        w = objective.power_map(z) + shift * z
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        new = w / norm
        move = float(np.linalg.norm(new - z))
        z = new
        f = objective.value(z)
        history.append(f)
        if f > best_f:
            best_z, best_f = z, f
        if move < cfg.step_tolerance:
            converged = True
            break

    return AscentRun(
        value=best_f,
        point=tuple(float(x) for x in best_z),
        iterations=iterations,
        converged=converged,
        method="power",
        history=history,
    )


# ----------------------------------------------------------------------
# 多重启


def _starts(cfg: AscentConfig, dimension: int, extra: Optional[Sequence[Sequence[float]]]) -> List[np.ndarray]:
    """预先生成全部重启点，保证与执行顺序和线程数无关"""
    points = [np.asarray(s, dtype=float) for s in (extra or [])]
    for s in points:
        if s.shape != (dimension,):
            raise InputError(f"起始点维数 {s.shape} 与 {dimension} 不一致")
    rng = np.random.default_rng(cfg.seed)
    points.extend(rng.standard_normal((cfg.restarts, dimension)))
    return points


def _run_restarts(
    cfg: AscentConfig,
    count: int,
    run: Callable[[int], AscentRun],
) -> Tuple[int, AscentRun, int]:
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            runs = list(executor.map(run, range(count)))
    else:
        runs = [run(index) for index in range(count)]
    for index, r in enumerate(runs):
        logger.debug(f"重启 {index}: method={r.method}, value={r.value:.12g}, iters={r.iterations}")
    best_index = max(range(count), key=lambda k: (runs[k].value, -k))
    return best_index, runs[best_index], sum(r.iterations for r in runs)


def ascend(
    objectives: Sequence[SphereObjective],
    cfg: AscentConfig,
    starts: Optional[Sequence[Sequence[float]]] = None,
    mask: Optional[np.ndarray] = None,
    use_power: bool = True,
) -> Tuple[MaxEstimate, SphereObjective]:
    """
    在若干目标上做多重启上升，返回全局最优估计及其所属目标

    每个重启点对每个目标都先做投影梯度上升并（若支持）细化，再（若支持）做位移幂迭代，取最优。
    """
    dimension = objectives[0].dimension
    if mask is not None and not mask.any():
        raise InputError("切片不能固定全部坐标")
    points = _starts(cfg, dimension, starts)

    def run(index: int) -> AscentRun:
        best: Optional[AscentRun] = None
        for k, objective in enumerate(objectives):
            ascent = projected_ascent(objective, points[index], cfg, mask)
            candidates = [ascent]
            refined = objective.refine(ascent, cfg, mask)
            if refined is not None:
                candidates.append(refined)
            if use_power and mask is None:
                power = shifted_power_iteration(objective, points[index], cfg)
                if power is not None:
                    candidates.append(power)
            for c in candidates:
                c = c.model_copy(update={"method": f"{c.method}:{k}"})
                if best is None or c.value > best.value:
                    best = c
        return best

    best_index, best, iterations = _run_restarts(cfg, len(points), run)
    method, objective_index = best.method.split(":")
    objective = objectives[int(objective_index)]
    z = _normalize(np.asarray(best.point, dtype=float))
    estimate = MaxEstimate(
        value=objective.value(z),
        argmax=tuple(float(x) for x in z),
        iterations=iterations,
        restarts_used=len(points),
        converged=best.converged,
        method=method,
        restart_index=best_index,
    )
    return estimate, objective


def _dense_tensor(T: SymmetricTensor) -> np.ndarray:
    if T.order < 2:
        raise InputError(f"张量阶数必须 ≥ 2，实际 {T.order}")
    return to_dense(T)


def maximize_sym(
    form: Union[SymmetricTensor, QuarticCertificateData],
    cfg: AscentConfig,
    starts: Optional[Sequence[Sequence[float]]] = None,
) -> MaxEstimate:
    """
    估计 max_{‖z‖=1} |T(z,…,z)|

    四次证书数据使用闭式梯度（p 在球面上恒正）；一般对称张量展开为稠密数组，
    偶数阶时同时对 T 与 -T 上升以覆盖绝对值。

    Raises:
        InputError: 阶数小于 2 或不支持的输入类型
    """
    if isinstance(form, QuarticCertificateData):
        objectives: List[SphereObjective] = [QuarticObjective(form)]
    elif isinstance(form, SymmetricTensor):
        A = _dense_tensor(form)
        objectives = [DenseFormObjective(A, 1.0)]
        if form.order % 2 == 0:
            objectives.append(DenseFormObjective(A, -1.0))
    else:
        raise InputError(f"不支持的目标类型: {type(form).__name__}")

    estimate, _ = ascend(objectives, cfg, starts)
    logger.info(
        f"球面最大值估计: value={estimate.value:.12g}, restarts={estimate.restarts_used}, "
        f"method={estimate.method}, converged={estimate.converged}"
    )
    return estimate


def maximize_lift(
    data: QuarticCertificateData,
    d: int,
    cfg: AscentConfig,
    starts: Optional[Sequence[Sequence[float]]] = None,
) -> MaxEstimate:
    """
    估计提升后 d 次型 p_d 在 N + d - 4 维球面上的最大值

    直接使用 p 的闭式表示，不展开 d 阶张量。d = 4 时与 maximize_sym(data) 相同。
    """
    estimate, _ = ascend([LiftedQuarticObjective(data, d)], cfg, starts)
    logger.info(f"提升后最大值估计: d={d}, value={estimate.value:.12g}, restarts={estimate.restarts_used}")
    return estimate


def minimize_sym(
    form: Union[SymmetricTensor, QuarticCertificateData],
    cfg: AscentConfig,
    starts: Optional[Sequence[Sequence[float]]] = None,
) -> MaxEstimate:
    """估计 min_{‖z‖=1} T(z,…,z)，value 为最小值本身（argmax 字段存放最小点）"""
    if isinstance(form, QuarticCertificateData):
        objective: SphereObjective = QuarticObjective(form, -1.0)
    elif isinstance(form, SymmetricTensor):
        objective = DenseFormObjective(_dense_tensor(form), -1.0)
    else:
        raise InputError(f"不支持的目标类型: {type(form).__name__}")
    estimate, _ = ascend([objective], cfg, starts, use_power=False)
    estimate = estimate.model_copy(update={"value": -estimate.value})
    logger.info(f"球面最小值估计: value={estimate.value:.12g}, restarts={estimate.restarts_used}")
    return estimate


def residual_min(
    system: QuadraticSystem,
    cfg: AscentConfig,
    fixed_zero: Optional[Sequence[int]] = None,
    starts: Optional[Sequence[Sequence[float]]] = None,
) -> MaxEstimate:
    """
    最小化 Σ q_i(y)² over ‖y‖ = 1

    接近零的最小值提示可行（可交给有理化与精确验证）；各重启都停在正值上时，
    该下界作为经验不可行间隔报告，不构成证明。

    Args:
        fixed_zero: 固定为零的坐标下标，迭代限制在对应坐标切片上

    Raises:
        InputError: 仿射系统或下标越界
    """
    if system.mode != SystemMode.HOMOGENEOUS:
        raise InputError("残差最小化只适用于齐次系统")
    mask = None
    if fixed_zero:
        mask = np.ones(system.N)
        for index in fixed_zero:
            if not 0 <= index < system.N:
                raise InputError(f"固定坐标 {index} 超出维数 {system.N}")
            mask[index] = 0.0
    estimate, _ = ascend([ResidualObjective(system)], cfg, starts, mask=mask, use_power=False)
    estimate = estimate.model_copy(update={"value": -estimate.value})
    logger.info(f"残差最小值: value={estimate.value:.6g}, restarts={estimate.restarts_used}")
    return estimate


# ----------------------------------------------------------------------
# 多线性估计


def _contract_except(A: np.ndarray, vectors: Sequence[np.ndarray], slot: int) -> np.ndarray:
    result = A
    # 从最后一个轴开始缩并，前面轴的编号保持不变
    for j in reversed(range(len(vectors))):
        if j != slot:
            result = np.tensordot(result, vectors[j], axes=([j], [0]))
    return result


def _alternating_run(A: np.ndarray, slots: List[np.ndarray], cfg: AscentConfig) -> Tuple[float, List[np.ndarray], int, bool]:
    d = A.ndim
    value = float(np.dot(_contract_except(A, slots, 0), slots[0]))
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        iterations += 1
        norm = 0.0
        for k in range(d):
            g = _contract_except(A, slots, k)
            norm = float(np.linalg.norm(g))
            if norm == 0.0:
                return abs(value), slots, iterations, True
            slots[k] = g / norm
        # 更新最后一个槽后目标值恰为 ‖g‖
        if norm - value <= cfg.value_tolerance * max(1.0, norm):
            value = norm
            converged = True
            break
        value = norm
    return abs(value), slots, iterations, converged


def maximize_multilinear(
    T: SymmetricTensor,
    cfg: AscentConfig,
    starts: Optional[Sequence[Sequence[float]]] = None,
) -> MaxEstimate:
    """
    估计 max |T(x_1,…,x_d)| over 单位向量 x_1..x_d（交替最大化）

    每次只更新一个槽为其余槽缩并结果的归一化，目标值单调不减。
    starts 中的向量作为对称起点（所有槽取同一向量）排在随机重启之前。
    """
    A = _dense_tensor(T)
    d, n = A.ndim, A.shape[0]
    initial: List[List[np.ndarray]] = []
    for s in starts or []:
        vec = np.asarray(s, dtype=float)
        if vec.shape != (n,):
            raise InputError(f"起始点维数 {vec.shape} 与 {n} 不一致")
        initial.append([_normalize(vec) for _ in range(d)])
    rng = np.random.default_rng(cfg.seed)
    for draw in rng.standard_normal((cfg.restarts, d, n)):
        initial.append([_normalize(v) for v in draw])

    def run(index: int) -> AscentRun:
        value, slots, iterations, converged = _alternating_run(A, [v.copy() for v in initial[index]], cfg)
        point = tuple(float(x) for s in slots for x in s)
        return AscentRun(value=value, point=point, iterations=iterations, converged=converged, method="alternating")

    best_index, best, iterations = _run_restarts(cfg, len(initial), run)
    flat = np.asarray(best.point).reshape(d, n)
    slots = [_normalize(v) for v in flat]
    value = abs(float(np.dot(_contract_except(A, slots, 0), slots[0])))
    estimate = MaxEstimate(
        value=value,
        argmax=tuple(float(x) for x in slots[0]),
        iterations=iterations,
        restarts_used=len(initial),
        converged=best.converged,
        method="alternating",
        restart_index=best_index,
        slots=tuple(tuple(float(x) for x in s) for s in slots),
    )
    logger.info(f"多线性范数估计: value={estimate.value:.12g}, restarts={estimate.restarts_used}")
    return estimate

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
数值优化的配置与结果模型
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from tensorthreshold.common.config import settings


class AscentConfig(BaseModel):
    """
    球面上升 / 下降的参数

    默认值来自 settings.NUMOPT，命令行参数可以逐项覆盖。
    """
    restarts: int = Field(default=20, ge=1, description="随机重启次数")
    max_iters: int = Field(default=500, ge=1, description="单次重启的最大迭代次数")
    step_tolerance: float = Field(default=1e-12, gt=0, description="步长收敛阈值")
    value_tolerance: float = Field(default=1e-14, gt=0, description="目标值收敛阈值（相对）")
    shift: Optional[float] = Field(default=None, ge=0, description="幂迭代位移，None 时自动选择")
    seed: int = Field(default=0, description="随机种子")
    workers: int = Field(default=1, ge=1, description="并行执行重启的线程数")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_settings(cls, **overrides) -> "AscentConfig":
        """以 settings.NUMOPT 为默认值构造，overrides 中为 None 的项被忽略"""
        numopt = settings.NUMOPT
        values = {
            "restarts": numopt.RESTARTS,
            "max_iters": numopt.MAX_ITERS,
            "step_tolerance": numopt.STEP_TOLERANCE,
            "value_tolerance": numopt.VALUE_TOLERANCE,
            "shift": numopt.SHIFT,
            "seed": numopt.SEED,
            "workers": numopt.WORKERS,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class MaxEstimate(BaseModel):
    """
    球面最大值（或最小值）估计

    value 是在 argmax 处重新计算的目标值；最大化时它是真实最大值的下界（忽略浮点误差）。
    """
    value: float
    argmax: Tuple[float, ...]
    iterations: int = Field(ge=0, description="全部重启的迭代总数")
    restarts_used: int = Field(ge=1)
    converged: bool
    method: str = Field(description="取得最优值的方法: gradient / lm / power / alternating")
    restart_index: int = Field(ge=0, description="取得最优值的重启序号")
    slots: Optional[Tuple[Tuple[float, ...], ...]] = Field(default=None, description="多线性估计的各槽向量")

    model_config = ConfigDict(frozen=True)


class AscentRun(BaseModel):
    """单次重启的轨迹"""
    value: float
    point: Tuple[float, ...]
    iterations: int
    converged: bool
    method: str
    history: List[float] = Field(default_factory=list)

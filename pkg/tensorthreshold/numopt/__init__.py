#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
数值优化模块

球面上齐次型的浮点最大化 / 最小化、多线性范数估计、残差最小化与有理化。
"""

from .models import AscentConfig, AscentRun, MaxEstimate
from .rationalize import rationalize
from .service import (
    DenseFormObjective,
    LiftedQuarticObjective,
    QuarticObjective,
    ResidualObjective,
    grad_p,
    maximize_lift,
    maximize_multilinear,
    maximize_sym,
    minimize_sym,
    projected_ascent,
    residual_min,
    shifted_power_iteration,
)

__all__ = [
    'AscentConfig',
    'AscentRun',
    'MaxEstimate',
    'rationalize',
    'DenseFormObjective',
    'LiftedQuarticObjective',
    'QuarticObjective',
    'ResidualObjective',
    'grad_p',
    'maximize_lift',
    'maximize_multilinear',
    'maximize_sym',
    'minimize_sym',
    'projected_ascent',
    'residual_min',
    'shifted_power_iteration',
]

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
浮点向量到有理向量的舍入

数值层找到的近似零点经有理化后交给精确层验证；验证失败只会被报告，不会被接受。
"""

import logging
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from tensorthreshold.common.config import settings
from tensorthreshold.common.exceptions import InputError

logger = logging.getLogger(__name__)


def rationalize(vector: Sequence[float], max_denominator: Optional[int] = None) -> Tuple[Fraction, ...]:
    """
    按绝对值最大的分量缩放，使其恰为 1，再对每个分量做连分数舍入

    齐次系统的零点集合对缩放不变，因此缩放不影响可行性。

    Args:
        vector: 浮点向量
        max_denominator: 分母上限，默认取 settings.LIMITS.RATIONALIZE_MAX_DENOMINATOR

    Raises:
        InputError: 零向量或含非有限值
    """
    arr = np.asarray(vector, dtype=float)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise InputError("有理化需要有限值的一维向量")
    pivot = int(np.argmax(np.abs(arr)))
    if arr[pivot] == 0.0:
        raise InputError("无法有理化零向量")
    cap = max_denominator if max_denominator is not None else settings.LIMITS.RATIONALIZE_MAX_DENOMINATOR
    scaled = arr / arr[pivot]
    result = tuple(Fraction(float(x)).limit_denominator(cap) for x in scaled)
    logger.debug(f"有理化: 维数={len(result)}, 分母上限={cap}")
    return result

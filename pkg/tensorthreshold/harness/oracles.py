#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
穷举预言机

与优化器相互独立的小规模对照：BQ4E 的有理网格扫描、低维球面网格上的最大值，
以及阶数提升因子 γ_d 的一维最大化。网格结果只是启发式，不能证明 NO。
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel

from tensorthreshold.common.config import settings
from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import Polynomial, monomial_to_exponents, poly_eval
from tensorthreshold.reduce_box.models import BoxWitness, Bq4eInstance

logger = logging.getLogger(__name__)

# 每批求值的球面点数
SPHERE_CHUNK = 4096


class BruteResult(BaseModel):
    """网格扫描结果：找到的精确根，或观察到的最小 |h|"""
    found: Optional[BoxWitness] = None
    min_abs: float
    points_scanned: int


def brute_bq4e(inst: Bq4eInstance, grid: int, max_vars: Optional[int] = None) -> BruteResult:
    """
    扫描有理网格 {-1, -1+2/grid, …, 1}ⁿ

    找到精确根即返回；否则返回最小 |h|（不能证明无解）。

    Raises:
        InputError: grid < 2 或变量数超过上限
    """
    cap = max_vars if max_vars is not None else settings.LIMITS.MAX_BRUTE_BQ4E_VARS
    if inst.n > cap:
        raise InputError(f"变量数 n={inst.n} 超过网格穷举上限 {cap}")
    if grid < 2:
        raise InputError(f"网格参数必须 ≥ 2，实际 {grid}")
    axis = [Fraction(-1) + Fraction(2 * k, grid) for k in range(grid + 1)]
    best = math.inf
    scanned = 0
    for point in itertools.product(axis, repeat=inst.n):
        scanned += 1
        value = poly_eval(inst.h, point)
        if value == 0:
            logger.info(f"网格扫描找到精确根: {[str(x) for x in point]}")
            return BruteResult(found=BoxWitness(xi=point), min_abs=0.0, points_scanned=scanned)
        best = min(best, abs(float(value)))
    logger.info(f"网格扫描未找到根: grid={grid}, min|h|={best:.6g}")
    return BruteResult(found=None, min_abs=best, points_scanned=scanned)


class _PolynomialEvaluator:
    """多项式在一批浮点点上的向量化求值"""

    def __init__(self, p: Polynomial):
        terms = p.sorted_terms()
        n = p.variable_count
        self.exponents = np.array([monomial_to_exponents(m, n) for m, _ in terms], dtype=float).reshape(len(terms), n)
        self.coeffs = np.array([float(c) for _, c in terms], dtype=float)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if not len(self.coeffs):
            return np.zeros(len(points))
        monomials = np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=2)
        return monomials @ self.coeffs


def _sphere_points(dimension: int, grid: int):
    """角分辨率 π/grid 的球面网格，按批给出"""
    if dimension == 1:
        yield np.array([[1.0], [-1.0]])
        return
    phi = np.pi * np.arange(2 * grid) / grid
    if dimension == 2:
        yield np.column_stack([np.cos(phi), np.sin(phi)])
        return
    for i in range(grid + 1):
        theta = np.pi * i / grid
        yield np.column_stack([
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.full_like(phi, np.cos(theta)),
        ])


def brute_sphere_max(p: Polynomial, grid: int, max_dim: Optional[int] = None) -> float:
    """
    p 在单位球面网格上的最大值（N ≤ 3）

    Raises:
        InputError: 维数超过上限或 grid < 1
    """
    cap = max_dim if max_dim is not None else settings.LIMITS.MAX_BRUTE_SPHERE_DIM
    N = p.variable_count
    if N < 1 or N > cap:
        raise InputError(f"球面网格穷举只支持 1 ≤ N ≤ {cap}，实际 N={N}")
    if grid < 1:
        raise InputError(f"网格参数必须 ≥ 1，实际 {grid}")
    evaluate = _PolynomialEvaluator(p)
    best = -math.inf
    for batch in _sphere_points(N, grid):
        for start in range(0, len(batch), SPHERE_CHUNK):
            values = evaluate(batch[start:start + SPHERE_CHUNK])
            best = max(best, float(values.max()))
    logger.debug(f"球面网格最大值: N={N}, grid={grid}, max={best:.12g}")
    return best


def one_dimensional_gamma_oracle(d: int, grid: int = 100000) -> Tuple[float, float]:
    """
    在 c ∈ [0, 1] 上穷举 c⁴·((1-c²)/(d-4))^{(d-4)/2}

    Returns:
        Tuple[float, float]: (最大值，取得最大值的 c²)
    """
    if d < 4:
        raise InputError(f"阶数提升要求 d ≥ 4，实际 {d}")
    c = np.linspace(0.0, 1.0, grid + 1)
    if d == 4:
        values = c ** 4
    else:
        values = c ** 4 * ((1.0 - c ** 2) / (d - 4)) ** ((d - 4) / 2.0)
    k = int(np.argmax(values))
    return float(values[k]), float(c[k] ** 2)

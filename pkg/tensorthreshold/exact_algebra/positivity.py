#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
结构化正性证书

用于机器校验 NO 实例的来源说明：两类证书都能证明 h > 0 在 ℝⁿ 上处处成立，
因此 h 在 [-1,1]ⁿ 上没有零点。
"""

import logging
from fractions import Fraction

from tensorthreshold.exact_algebra.polynomial import ONE, Polynomial
from tensorthreshold.exact_algebra.rational import RationalLike, as_rational

logger = logging.getLogger(__name__)


def check_square_plus_constant(h: Polynomial, g: Polynomial, c: RationalLike) -> bool:
    """
    校验 h = g² + c 且 c > 0（多项式恒等式，精确比较）

    Args:
        h: 待校验的多项式
        g: 平方项
        c: 正常数
    """
    c = as_rational(c)
    if c <= 0:
        logger.warning(f"平方加常数证书的常数必须为正: {c}")
        return False
    if g.variable_count != h.variable_count:
        return False
    return h == g * g + c


def check_even_power_sum(h: Polynomial) -> bool:
    """
    校验 h 是偶次幂单项式的正系数和，且常数项为正

    每个单项式的每个指数都是偶数且系数为正，则各项非负，常数项严格为正。
    """
    constant = h.coefficient(ONE)
    if constant <= 0:
        return False
    for monomial, coeff in h.terms.items():
        if coeff <= Fraction(0):
            return False
        if any(exp % 2 for _, exp in monomial):
            return False
    return True

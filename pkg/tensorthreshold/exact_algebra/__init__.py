#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
精确代数模块

任意精度有理数上的稀疏多元多项式与对称二次型，是所有编译阶段的基础。
"""

from .rational import (
    as_rational,
    as_rational_vector,
    format_rational,
    parse_rational,
    rational_sqrt,
    squared_norm,
)
from .polynomial import (
    Monomial,
    Polynomial,
    is_homogeneous,
    monomial_degree,
    monomial_from_indices,
    monomial_to_indices,
    parse_polynomial,
    poly_eval,
    to_text,
    total_degree,
)
from .quadratic import QuadraticForm, frobenius_sq, quad_eval, rank_one_form
from .positivity import check_even_power_sum, check_square_plus_constant

__all__ = [
    'as_rational',
    'as_rational_vector',
    'format_rational',
    'parse_rational',
    'rational_sqrt',
    'squared_norm',
    'Monomial',
    'Polynomial',
    'is_homogeneous',
    'monomial_degree',
    'monomial_from_indices',
    'monomial_to_indices',
    'parse_polynomial',
    'poly_eval',
    'to_text',
    'total_degree',
    'QuadraticForm',
    'frobenius_sq',
    'quad_eval',
    'rank_one_form',
    'check_even_power_sum',
    'check_square_plus_constant',
]

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
对称张量模块

张量与齐次型之间的极化对应，以及阈值实例的张量侧。
"""

from .tensor import (
    OrderFactor,
    SymmetricTensor,
    ThresholdInstance,
    distinct_permutations,
    eval_form,
    eval_multilinear,
    form_from_tensor,
    gamma,
    gamma_sq,
    multiplicity,
    tensor_from_form,
    to_dense,
)

__all__ = [
    'OrderFactor',
    'SymmetricTensor',
    'ThresholdInstance',
    'distinct_permutations',
    'eval_form',
    'eval_multilinear',
    'form_from_tensor',
    'gamma',
    'gamma_sq',
    'multiplicity',
    'tensor_from_form',
    'to_dense',
]

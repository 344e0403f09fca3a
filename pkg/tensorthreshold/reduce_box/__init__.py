#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
BQ4E -> HQSF 归约模块

齐次化、盒约束编码与修复后的二次提升，以及双向见证映射。
"""

from .models import (
    BoxWitness,
    Bq4eInstance,
    Constraint,
    ConstraintFamily,
    QuadraticSystem,
    SphereWitness,
    SystemMode,
    VarLayout,
)
from .service import (
    affine_forward,
    compile_homogeneous,
    compile_paper_literal,
    first_violation,
    homogenize,
    nondegeneracy_slice,
    normalize_affine,
    normalize_witness,
    structural_constraints,
    system_residuals,
    system_residuals_float,
    witness_backward,
    witness_forward,
)

__all__ = [
    'BoxWitness',
    'Bq4eInstance',
    'Constraint',
    'ConstraintFamily',
    'QuadraticSystem',
    'SphereWitness',
    'SystemMode',
    'VarLayout',
    'affine_forward',
    'compile_homogeneous',
    'compile_paper_literal',
    'first_violation',
    'homogenize',
    'nondegeneracy_slice',
    'normalize_affine',
    'normalize_witness',
    'structural_constraints',
    'system_residuals',
    'system_residuals_float',
    'witness_backward',
    'witness_forward',
]

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
HQSF -> 张量谱阈值归约模块

四次型构造、极化、阶数提升与阈值比较。
"""

from .models import HqsfInstance, OrderLift, QuarticCertificateData, Verdict
from .service import (
    build_quartic,
    certify_max,
    certify_threshold,
    equality_compare,
    hqsf_from_system,
    lift_order,
    sandwich_holds,
    tensorize,
    tensorize_lift,
    threshold_compare,
)

__all__ = [
    'HqsfInstance',
    'OrderLift',
    'QuarticCertificateData',
    'Verdict',
    'build_quartic',
    'certify_max',
    'certify_threshold',
    'equality_compare',
    'hqsf_from_system',
    'lift_order',
    'sandwich_holds',
    'tensorize',
    'tensorize_lift',
    'threshold_compare',
]

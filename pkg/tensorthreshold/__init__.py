#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
TensorThreshold - 张量谱阈值归约编译与验证工具

BQ4E -> HQSF -> 张量谱阈值的精确归约链，附带双向见证映射与数值/穷举验证器。
"""

__version__ = "0.1.0"

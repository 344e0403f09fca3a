#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
异常定义模块

命令行退出码约定: InputError -> 1，InvariantViolation 及其他内部错误 -> 2。
"""


class TensorThresholdError(Exception):
    """所有领域异常的基类"""


class InputError(TensorThresholdError, ValueError):
    """输入错误：维数不匹配、次数超限、文件解析失败、规模超过上限等"""


class PreconditionError(InputError):
    """操作前置条件不成立，例如 h(xi) != 0 或残差不为零"""


class InvariantViolation(TensorThresholdError, RuntimeError):
    """内部不变量被破坏，通常意味着系统构造存在缺陷"""


class StageError(TensorThresholdError):
    """流水线某个阶段失败，携带阶段名称"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"阶段 {stage} 失败: {cause}")

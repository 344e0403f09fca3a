#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
有理数工具模块

所有流水线算术都是精确有理数运算，基于 fractions.Fraction（分母恒为正且已约分）。
有理数以 "p/q" 字符串序列化，整数省略分母，例如 "-3/4"、"2"。
"""

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from tensorthreshold.common.exceptions import InputError

RationalLike = Union[int, str, Fraction]


def as_rational(value: RationalLike) -> Fraction:
    """
    转换为 Fraction

    浮点数会被拒绝，精确层不允许静默引入舍入误差。

    Args:
        value: 整数、Fraction 或 "p/q" 字符串

    Returns:
        Fraction: 规范形式的有理数
    """
    if isinstance(value, bool):
        raise InputError(f"布尔值不是有理数: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return parse_rational(value)
    raise InputError(f"无法精确转换为有理数: {value!r} ({type(value).__name__})")


def as_rational_vector(values: Iterable[RationalLike]) -> Tuple[Fraction, ...]:
    """逐个分量转换为 Fraction 元组"""
    return tuple(as_rational(v) for v in values)


def parse_rational(text: str) -> Fraction:
    """
    解析 "p/q" 或整数字符串

    Raises:
        InputError: 格式错误或分母为零
    """
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            den_int = int(den)
            if den_int == 0:
                raise InputError(f"分母为零: {text!r}")
            return Fraction(int(num), den_int)
        return Fraction(int(text))
    except ValueError as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"无法解析有理数: {text!r}") from e


def format_rational(value: Fraction) -> str:
    """格式化为 "p/q"，分母为 1 时只输出分子"""
    value = as_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_rational_vector(values: Sequence[Fraction]) -> List[str]:
    return [format_rational(v) for v in values]


def rational_sqrt(value: Fraction) -> Optional[Fraction]:
    """
    有理数的精确平方根

    Returns:
        Optional[Fraction]: 若 value 是有理数的平方则返回非负平方根，否则返回 None
    """
    value = as_rational(value)
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


def squared_norm(values: Sequence[Fraction]) -> Fraction:
    """精确计算 Σ v_i²"""
    return sum((v * v for v in values), Fraction(0))

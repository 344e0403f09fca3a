#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
稀疏多元多项式模块

多项式以 {单项式: 非零有理系数} 的字典存储。单项式是按变量下标排序的
(变量下标, 正指数) 元组，不存储零指数，因此相等的多项式拥有完全相同的字典，
可直接用于比较和哈希。h、H、H̃、p、p_d 都由本模块承载。
"""

import logging
import re
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.rational import (
    RationalLike,
    as_rational,
    as_rational_vector,
    format_rational,
)

logger = logging.getLogger(__name__)

# 单项式: ((变量下标, 指数), ...)，按下标升序，指数均为正
Monomial = Tuple[Tuple[int, int], ...]

ONE: Monomial = ()


def monomial_degree(monomial: Monomial) -> int:
    """单项式的总次数"""
    return sum(exp for _, exp in monomial)


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    """两个单项式相乘（合并有序列表）"""
    if not a:
        return b
    if not b:
        return a
    merged: Dict[int, int] = dict(a)
    for var, exp in b:
        merged[var] = merged.get(var, 0) + exp
    return tuple(sorted(merged.items()))


def monomial_from_exponents(exponents: Sequence[int]) -> Monomial:
    """从稠密指数向量构造单项式"""
    for exp in exponents:
        if exp < 0:
            raise InputError(f"指数不能为负: {list(exponents)}")
    return tuple((i, int(e)) for i, e in enumerate(exponents) if e)


def monomial_to_exponents(monomial: Monomial, variable_count: int) -> List[int]:
    """展开为长度为 variable_count 的稠密指数向量"""
    exponents = [0] * variable_count
    for var, exp in monomial:
        exponents[var] = exp
    return exponents


def monomial_from_indices(indices: Iterable[int]) -> Monomial:
    """从下标多重集（如张量的有序下标元组）构造单项式"""
    counts: Dict[int, int] = {}
    for i in indices:
        counts[i] = counts.get(i, 0) + 1
    return tuple(sorted(counts.items()))


def monomial_to_indices(monomial: Monomial) -> Tuple[int, ...]:
    """单项式转为有序下标元组，例如 x0^2*x1 -> (0, 0, 1)"""
    indices: List[int] = []
    for var, exp in monomial:
        indices.extend([var] * exp)
    return tuple(indices)


class Polynomial:
    """
    有理系数稀疏多元多项式（不可变）

    Attributes:
        variable_count: 变量个数 n，所有变量下标小于 n
        terms: 只读的 {单项式: 非零系数} 映射
    """

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, variable_count: int, terms: Optional[Mapping[Monomial, RationalLike]] = None):
        if variable_count < 0:
            raise InputError(f"变量个数不能为负: {variable_count}")
        clean: Dict[Monomial, Fraction] = {}
        for monomial, coeff in (terms or {}).items():
            monomial = tuple(sorted(tuple(pair) for pair in monomial))
            if len({var for var, _ in monomial}) != len(monomial):
                raise InputError(f"单项式中变量重复: {monomial}")
            for var, exp in monomial:
                if not 0 <= var < variable_count:
                    raise InputError(f"变量下标 {var} 超出范围 [0, {variable_count})")
                if exp <= 0:
                    raise InputError(f"单项式中不能存储非正指数: {monomial}")
            coeff = as_rational(coeff)
            if coeff:
                clean[monomial] = coeff
        self._n = variable_count
        self._terms = clean
        self._hash: Optional[int] = None

    # ------------------------------------------------------------------
    # 构造函数

    @classmethod
    def zero(cls, variable_count: int) -> "Polynomial":
        return cls(variable_count)

    @classmethod
    def constant(cls, value: RationalLike, variable_count: int) -> "Polynomial":
        return cls(variable_count, {ONE: value})

    @classmethod
    def variable(cls, index: int, variable_count: int) -> "Polynomial":
        return cls(variable_count, {((index, 1),): 1})

    @classmethod
    def from_terms(cls, variable_count: int, terms: Iterable[Tuple[Monomial, RationalLike]]) -> "Polynomial":
        """累加 (单项式, 系数) 序列，重复单项式的系数相加"""
        acc: Dict[Monomial, Fraction] = {}
        for monomial, coeff in terms:
            acc[monomial] = acc.get(monomial, Fraction(0)) + as_rational(coeff)
        return cls(variable_count, acc)

    # ------------------------------------------------------------------
    # 属性

    @property
    def variable_count(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self.sorted_terms())

    def coefficient(self, monomial: Monomial) -> Fraction:
        return self._terms.get(tuple(monomial), Fraction(0))

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """按次数降序、再按稠密指数向量降序排列的项（规范输出顺序）"""
        n = self._n
        return sorted(
            self._terms.items(),
            key=lambda item: (monomial_degree(item[0]), monomial_to_exponents(item[0], n)),
            reverse=True,
        )

    # ------------------------------------------------------------------
    # 环运算

    def _coerce(self, other: Union["Polynomial", RationalLike]) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise InputError(f"多项式变量个数不一致: {self._n} != {other._n}")
            return other
        return Polynomial.constant(other, self._n)

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self._terms)
        for monomial, coeff in other._terms.items():
            acc[monomial] = acc.get(monomial, Fraction(0)) + coeff
        return Polynomial(self._n, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            scalar = as_rational(other)
            return Polynomial(self._n, {m: c * scalar for m, c in self._terms.items()})
        other = self._coerce(other)
        acc: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = monomial_mul(m1, m2)
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return Polynomial(self._n, acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise InputError(f"只支持非负整数次幂: {exponent!r}")
        result = Polynomial.constant(1, self._n)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self._n}, {to_text(self)!r})"

    # ------------------------------------------------------------------
    # 变量变换

    def embed(self, variable_count: int, index_map: Sequence[int]) -> "Polynomial":
        """
        把变量 i 重命名为 index_map[i]，放入 variable_count 个变量的环中

        index_map 必须是单射，否则不同单项式可能合并。
        """
        if len(index_map) != self._n:
            raise InputError(f"index_map 长度 {len(index_map)} 与变量个数 {self._n} 不一致")
        if len(set(index_map)) != len(index_map):
            raise InputError("index_map 必须是单射")
        terms = {}
        for monomial, coeff in self._terms.items():
            renamed = tuple(sorted((index_map[var], exp) for var, exp in monomial))
            terms[renamed] = coeff
        return Polynomial(variable_count, terms)


# ----------------------------------------------------------------------
# 基本操作


def poly_eval(p: Polynomial, point: Sequence[RationalLike]) -> Fraction:
    """
    在有理点处精确求值

    Args:
        p: 多项式
        point: 长度为 variable_count 的有理向量

    Returns:
        Fraction: p(point)

    Raises:
        InputError: 维数不匹配
    """
    if len(point) != p.variable_count:
        raise InputError(f"求值点维数 {len(point)} 与变量个数 {p.variable_count} 不一致")
    values = as_rational_vector(point)
    powers: Dict[Tuple[int, int], Fraction] = {}
    total = Fraction(0)
    for monomial, coeff in p.terms.items():
        term = coeff
        for var, exp in monomial:
            key = (var, exp)
            power = powers.get(key)
            if power is None:
                power = values[var] ** exp
                powers[key] = power
            term *= power
            if not term:
                break
        total += term
    return total


def total_degree(p: Polynomial) -> int:
    """最高总次数；零多项式约定为 0"""
    return max((monomial_degree(m) for m in p.terms), default=0)


def is_homogeneous(p: Polynomial, d: int) -> bool:
    """每个单项式的总次数都恰为 d；零多项式对任意 d 都是齐次的"""
    return all(monomial_degree(m) == d for m in p.terms)


# ----------------------------------------------------------------------
# 文本形式


def default_names(variable_count: int, prefix: str = "x") -> List[str]:
    return [f"{prefix}{i}" for i in range(variable_count)]


def to_text(p: Polynomial, names: Optional[Sequence[str]] = None) -> str:
    """
    规范文本形式，例如 "2*x0^4 + 8*x0^2*x1^2 - 1/2"

    parse_polynomial(to_text(p)) == p
    """
    names = list(names) if names is not None else default_names(p.variable_count)
    if p.is_zero():
        return "0"
    pieces: List[Tuple[str, str]] = []
    for monomial, coeff in p.sorted_terms():
        sign = "-" if coeff < 0 else "+"
        magnitude = abs(coeff)
        factors = [names[var] if exp == 1 else f"{names[var]}^{exp}" for var, exp in monomial]
        if not factors:
            body = format_rational(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([format_rational(magnitude)] + factors)
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


_TERM_RE = re.compile(r"[+-]?[^+-]+")
_NUMBER_RE = re.compile(r"^\d+(?:/\d+)?$")
_POWER_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")


def parse_polynomial(text: str, variable_count: int, names: Optional[Sequence[str]] = None) -> Polynomial:
    """
    解析 to_text 产生的文本形式

    语法: term (('+'|'-') term)*，term = [coef '*'] var['^'k] ('*' var['^'k])*

    Raises:
        InputError: 未知变量或语法错误
    """
    names = list(names) if names is not None else default_names(variable_count)
    index_of = {name: i for i, name in enumerate(names)}
    compact = "".join(text.split())
    if not compact:
        raise InputError("空的多项式文本")
    if compact == "0":
        return Polynomial.zero(variable_count)

    terms: List[Tuple[Monomial, Fraction]] = []
    consumed = 0
    for match in _TERM_RE.finditer(compact):
        if match.start() != consumed:
            raise InputError(f"多项式文本语法错误: {text!r}")
        consumed = match.end()
        chunk = match.group(0)
        sign = -1 if chunk.startswith("-") else 1
        chunk = chunk.lstrip("+-")
        coeff = Fraction(sign)
        exponents: Dict[int, int] = {}
        for factor in chunk.split("*"):
            if _NUMBER_RE.match(factor):
                coeff *= as_rational(factor)
                continue
            power = _POWER_RE.match(factor)
            if not power or power.group(1) not in index_of:
                raise InputError(f"无法识别的因子 {factor!r}（文本 {text!r}）")
            var = index_of[power.group(1)]
            exponents[var] = exponents.get(var, 0) + int(power.group(2) or 1)
        terms.append((tuple(sorted((v, e) for v, e in exponents.items() if e)), coeff))
    if consumed != len(compact):
        raise InputError(f"多项式文本语法错误: {text!r}")
    return Polynomial.from_terms(variable_count, terms)

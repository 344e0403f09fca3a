#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
BQ4E 实例库

每个实例的真值都不依赖任何求解器：YES 实例给出坐标取 {-1, 0, 1} 的精确见证
（所有松弛变量的平方根都是有理数），NO 实例给出结构正性证书。
变量名为 x0..x{n-1}。
"""

import logging
from typing import Dict, List, Optional, Sequence

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra.polynomial import parse_polynomial
from tensorthreshold.exact_algebra.positivity import check_even_power_sum, check_square_plus_constant
from tensorthreshold.harness.models import (
    CertificateKind,
    LibraryInstance,
    LibraryStatus,
    PositivityCertificate,
)
from tensorthreshold.reduce_box.models import BoxWitness, Bq4eInstance

logger = logging.getLogger(__name__)


def _instance(name: str, n: int, h: str, status: LibraryStatus, provenance: str,
              witness: Optional[Sequence[int]] = None,
              certificate: Optional[PositivityCertificate] = None) -> LibraryInstance:
    return LibraryInstance(
        name=name,
        bq4e=Bq4eInstance(n=n, h=parse_polynomial(h, n)),
        status=status,
        witness=BoxWitness(xi=witness) if witness is not None else None,
        provenance=provenance,
        certificate=certificate,
    )


def _square_plus(g: str, n: int, c: str) -> PositivityCertificate:
    return PositivityCertificate(kind=CertificateKind.SQUARE_PLUS_CONSTANT, g=parse_polynomial(g, n), c=c)


def _even_powers() -> PositivityCertificate:
    return PositivityCertificate(kind=CertificateKind.EVEN_POWER_SUM)


def build_library() -> List[LibraryInstance]:
    """构造全部库实例（按名称排序前的定义顺序：先 YES 后 NO）"""
    yes, no = LibraryStatus.YES, LibraryStatus.NO
    return [
        _instance("sq-minus-1", 1, "x0^2 - 1", yes, "witness x0 = 1", witness=[1]),
        _instance("line-sum", 2, "x0 + x1 - 1", yes, "witness (1, 0)", witness=[1, 0]),
        _instance("quartic-diff", 2, "x0^4 - x1^2", yes, "witness (1, 1)", witness=[1, 1]),
        _instance("cubic-product", 2, "x0^3 - x0*x1", yes, "witness (1, 1)", witness=[1, 1]),
        _instance("quartic-univariate", 1, "x0^4 - x0^2", yes, "witness x0 = -1", witness=[-1]),
        _instance("sq-plus-1", 1, "x0^2 + 1", no, "h = x0^2 + 1 >= 1",
                  certificate=_square_plus("x0", 1, "1")),
        _instance("shifted-square", 2, "x0^2 - 2*x0*x1 + x1^2 + 1", no, "h = (x0 - x1)^2 + 1 >= 1",
                  certificate=_square_plus("x0 - x1", 2, "1")),
        _instance("quartic-plus-half", 2, "x0^4 + x1^4 + 1/2", no, "even powers plus 1/2 >= 1/2",
                  certificate=_even_powers()),
        _instance("square-of-quadratic", 2, "x0^4 - 2*x0^2*x1 + x1^2 + 1", no, "h = (x0^2 - x1)^2 + 1 >= 1",
                  certificate=_square_plus("x0^2 - x1", 2, "1")),
        _instance("even-powers", 1, "x0^4 + 3*x0^2 + 1", no, "even powers plus 1 >= 1",
                  certificate=_even_powers()),
    ]


_LIBRARY: Optional[Dict[str, LibraryInstance]] = None


def library() -> Dict[str, LibraryInstance]:
    """名称 -> 实例（首次访问时构造）"""
    global _LIBRARY
    if _LIBRARY is None:
        _LIBRARY = {inst.name: inst for inst in build_library()}
    return _LIBRARY


def get_instance(name: str) -> LibraryInstance:
    """
    按名称获取库实例

    Raises:
        InputError: 名称不存在
    """
    instances = library()
    if name not in instances:
        raise InputError(f"未知的库实例: {name}（可选: {', '.join(sorted(instances))}）")
    return instances[name]


def check_provenance(inst: LibraryInstance) -> bool:
    """
    机器检查实例的真值来源

    YES 实例在模型构造时已检查 h(witness) = 0；NO 实例按证书类型精确检查 h > 0。
    没有证书的 NO 实例返回 False。
    """
    if inst.status == LibraryStatus.YES:
        return True
    if inst.status == LibraryStatus.UNKNOWN:
        return False
    cert = inst.certificate
    if cert is None:
        logger.warning(f"NO 实例 {inst.name} 没有可机器检查的证书")
        return False
    if cert.kind == CertificateKind.SQUARE_PLUS_CONSTANT:
        return check_square_plus_constant(inst.bq4e.h, cert.g, cert.c)
    return check_even_power_sum(inst.bq4e.h)

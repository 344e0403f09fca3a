#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
日志配置模块

日志统一输出到 stderr（stdout 留给命令结果），可选同时写文件。
每条记录带有当前流水线阶段名（stage_context 设置，阶段外为 "-"），
并发运行实例库时可以据此区分各阶段的日志。
"""

import contextlib
import logging
import sys
from contextvars import ContextVar
from pathlib import Path
from typing import Iterator, Optional

from tensorthreshold.common.config import settings

DEFAULT_FORMAT = '%(asctime)s - %(levelname)s - [%(stage)s] [%(module)s.%(funcName)s:%(lineno)d] - %(message)s'

_current_stage: ContextVar[str] = ContextVar("tensorthreshold_stage", default="-")


class StageFilter(logging.Filter):
    """为日志记录补充 stage 字段"""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "stage"):
            record.stage = _current_stage.get()
        return True


@contextlib.contextmanager
def stage_context(stage: str) -> Iterator[None]:
    """在 with 块内把日志记录的阶段名设为 stage"""
    token = _current_stage.set(stage)
    try:
        yield
    finally:
        _current_stage.reset(token)


def current_stage() -> str:
    return _current_stage.get()


def _handler(handler: logging.Handler, formatter: logging.Formatter, level: int) -> logging.Handler:
    handler.setFormatter(formatter)
    handler.setLevel(level)
    handler.addFilter(StageFilter())
    return handler


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    log_format: Optional[str] = None,
) -> None:
    """
    配置根日志记录器

    Args:
        log_level: 日志级别，默认取 settings.LOG_LEVEL；无法识别时按 INFO 处理
        log_file: 可选的日志文件路径，默认取 settings.LOG_FILE
        log_format: 自定义日志格式，可以使用 %(stage)s
    """
    level_name = log_level or settings.LOG_LEVEL
    level_num = getattr(logging, level_name.upper(), logging.INFO)
    formatter = logging.Formatter(log_format or DEFAULT_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(level_num)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    root_logger.addHandler(_handler(logging.StreamHandler(sys.stderr), formatter, level_num))

    log_file = log_file or settings.LOG_FILE
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        root_logger.addHandler(_handler(logging.FileHandler(log_file, encoding='utf-8'), formatter, level_num))

    # 线程池与事件循环的调试日志没有阶段信息
    for logger_name in ['asyncio', 'concurrent.futures']:
        logging.getLogger(logger_name).setLevel(max(level_num, logging.INFO))

    logging.debug(f"日志系统已初始化，级别: {level_name}")


def get_logger(name: str) -> logging.Logger:
    """获取指定名称的日志记录器"""
    return logging.getLogger(name)

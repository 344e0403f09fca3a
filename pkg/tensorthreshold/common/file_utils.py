#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
文件读写工具模块

所有产物以 JSON 保存；摘要是规范序列化（键排序、无空白）的 SHA-256，
相同内容在任何机器上得到相同摘要。
"""

import hashlib
import json
import logging
import os
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from tensorthreshold.common.exceptions import InputError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def canonical_json(model: BaseModel) -> str:
    """规范 JSON 序列化"""
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(model: BaseModel) -> str:
    """内容摘要: 规范 JSON 的 SHA-256 十六进制串"""
    return hashlib.sha256(canonical_json(model).encode("utf-8")).hexdigest()


def save_model(path: str, model: BaseModel) -> None:
    """
    保存模型到 JSON 文件

    Args:
        path: 目标文件路径，父目录不存在时自动创建
        model: 任意 pydantic 模型
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.model_dump(mode="json"), f, indent=2, ensure_ascii=False)
        f.write("\n")
    logger.info(f"已保存 {type(model).__name__} 到文件: {path}")


def load_model(path: str, cls: Type[ModelT]) -> ModelT:
    """
    从 JSON 文件加载模型

    Raises:
        InputError: 文件不存在或格式错误
    """
    if not os.path.exists(path):
        raise InputError(f"文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        return cls.model_validate_json(text)
    except ValidationError as e:
        raise InputError(f"文件 {path} 不是有效的 {cls.__name__}: {e}") from e

#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置管理模块

使用 pydantic-settings 的 BaseSettings 创建配置类，支持从 TOML 文件和环境变量加载配置。
环境变量（前缀 TENSORTHRESHOLD_，嵌套分隔符 __）优先级高于 TOML 文件，
例如 TENSORTHRESHOLD_NUMOPT__RESTARTS=50。
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import toml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# 指定配置文件路径的环境变量
CONFIG_ENV_VAR = "TENSORTHRESHOLD_CONFIG"


class NumoptSettings(BaseModel):
    """
    数值优化配置

    对应 AscentConfig 的默认值
    """
    RESTARTS: int = Field(default=20, ge=1, description="随机重启次数")
    MAX_ITERS: int = Field(default=500, ge=1, description="单次重启的最大迭代次数")
    STEP_TOLERANCE: float = Field(default=1e-12, gt=0, description="步长收敛阈值")
    VALUE_TOLERANCE: float = Field(default=1e-14, gt=0, description="目标值收敛阈值")
    SHIFT: Optional[float] = Field(default=None, description="幂迭代位移，None 表示按 2B 自动选择")
    SEED: int = Field(default=0, description="随机种子")
    WORKERS: int = Field(default=1, ge=1, description="并行执行重启的线程数")


class LimitSettings(BaseModel):
    """规模上限配置"""
    MAX_QUARTIC_DIMENSION: int = Field(default=40, ge=1, description="展开四次型允许的最大维数 N")
    MAX_BRUTE_BQ4E_VARS: int = Field(default=4, ge=1, description="BQ4E 网格穷举允许的最大变量数")
    MAX_BRUTE_SPHERE_DIM: int = Field(default=3, ge=1, description="球面网格穷举允许的最大维数")
    RATIONALIZE_MAX_DENOMINATOR: int = Field(default=1000, ge=1, description="有理化时的分母上限")


class PipelineSettings(BaseModel):
    """流水线配置"""
    COMPARE_TOLERANCE: float = Field(default=1e-6, gt=0, description="阈值比较的相对容差")
    RESIDUAL_TOLERANCE: float = Field(default=1e-12, gt=0, description="残差视为零的阈值")
    MAX_CONCURRENCY: int = Field(default=4, ge=1, description="批量运行的最大并发数")


class Settings(BaseSettings):
    """
    应用配置类

    从 TOML 配置文件和环境变量加载配置项
    """
    LOG_LEVEL: str = "INFO"
    PROJECT_NAME: str = "TensorThreshold"
    LOG_FILE: Optional[str] = None

    NUMOPT: NumoptSettings = Field(default_factory=NumoptSettings)
    LIMITS: LimitSettings = Field(default_factory=LimitSettings)
    PIPELINE: PipelineSettings = Field(default_factory=PipelineSettings)

    model_config = SettingsConfigDict(
        env_prefix="TENSORTHRESHOLD_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # 环境变量优先于 TOML 文件传入的值
        return env_settings, dotenv_settings, init_settings, file_secret_settings

    @classmethod
    def from_toml(cls, toml_path: str) -> "Settings":
        """从TOML文件加载配置"""
        if not os.path.exists(toml_path):
            return cls()

        with open(toml_path, "r", encoding="utf-8") as f:
            toml_data = toml.load(f)

        config_dict: Dict[str, Any] = {}

        # 顶级字段
        for key, value in toml_data.items():
            if not isinstance(value, dict):
                config_dict[key.upper()] = value

        # 嵌套配置段
        for section in ("numopt", "limits", "pipeline"):
            if section in toml_data:
                config_dict[section.upper()] = {
                    key.upper(): value for key, value in toml_data[section].items()
                }

        return cls(**config_dict)


@lru_cache()
def get_settings(config_path: Optional[str] = None) -> Settings:
    """
    获取应用配置实例

    使用LRU缓存避免重复加载配置

    Args:
        config_path: TOML配置文件路径，默认为None，此时依次查找环境变量
            TENSORTHRESHOLD_CONFIG 与默认路径

    Returns:
        Settings: 配置实例
    """
    config_path = config_path or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        return Settings.from_toml(config_path)

    default_paths = [
        Path("config/settings.toml"),
        Path("../config/settings.toml"),
        Path("/etc/tensorthreshold/settings.toml"),
    ]

    for path in default_paths:
        if path.exists():
            return Settings.from_toml(str(path))

    # 没有配置文件时使用默认值和环境变量
    return Settings()


class LazySettings:
    """延迟加载的设置类，只有在实际访问时才加载配置"""

    def __getattr__(self, name):
        return getattr(get_settings(), name)

    def __str__(self):
        return str(get_settings())

    def __repr__(self):
        return repr(get_settings())


# 全局可访问的配置实例
settings = LazySettings()

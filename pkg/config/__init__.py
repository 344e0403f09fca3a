#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置文件目录

settings.template.toml 列出全部配置项，复制为 settings.toml 后生效。
"""

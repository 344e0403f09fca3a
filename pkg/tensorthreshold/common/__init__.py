#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
通用工具和辅助函数模块
"""

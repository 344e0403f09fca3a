#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
测试模块
"""

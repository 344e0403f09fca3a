#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行入口模块
"""

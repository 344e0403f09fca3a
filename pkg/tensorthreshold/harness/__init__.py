#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验支撑模块

实例库、穷举预言机、端到端流水线编排与见证文件验证。
"""

from .library import build_library, check_provenance, get_instance, library
from .models import (
    CertificateKind,
    LibraryInstance,
    LibraryStatus,
    PipelineReport,
    PositivityCertificate,
    StageRecord,
)
from .oracles import BruteResult, brute_bq4e, brute_sphere_max, one_dimensional_gamma_oracle
from .pipeline import (
    VerifyResult,
    load_instance_file,
    margin_table,
    nondegeneracy_floor,
    run_hqsf_pipeline,
    run_library,
    run_pipeline,
    system_from_hqsf,
    verify_witness,
    verify_witness_file,
)

__all__ = [
    'build_library',
    'check_provenance',
    'get_instance',
    'library',
    'CertificateKind',
    'LibraryInstance',
    'LibraryStatus',
    'PipelineReport',
    'PositivityCertificate',
    'StageRecord',
    'BruteResult',
    'brute_bq4e',
    'brute_sphere_max',
    'one_dimensional_gamma_oracle',
    'VerifyResult',
    'load_instance_file',
    'margin_table',
    'nondegeneracy_floor',
    'run_hqsf_pipeline',
    'run_library',
    'run_pipeline',
    'system_from_hqsf',
    'verify_witness',
    'verify_witness_file',
]

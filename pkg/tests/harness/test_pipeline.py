#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
端到端流水线测试

NO 实例的间隔下限固定在 tests/baselines/margins.json 中（只读），
200 次重启下每个实例的间隔都必须不低于该下限。
"""

import asyncio
import json
from pathlib import Path

import pytest

from tensorthreshold.common.exceptions import InputError, InvariantViolation, StageError
from tensorthreshold.exact_algebra import QuadraticForm
from tensorthreshold.harness import (
    LibraryStatus,
    margin_table,
    nondegeneracy_floor,
    run_hqsf_pipeline,
    run_library,
    run_pipeline,
)
from tensorthreshold.harness import pipeline
from tensorthreshold.harness.pipeline import NUMERICAL_NOTE
from tensorthreshold.numopt import AscentConfig
from tensorthreshold.reduce_tensor.models import HqsfInstance, Verdict

BASELINE_PATH = Path(__file__).resolve().parent.parent / "baselines" / "margins.json"
MARGIN_CFG = AscentConfig(restarts=200, max_iters=400, seed=11)


@pytest.fixture(scope="module")
def yes_reports(yes_instances, pipeline_cfg):
    return {inst.name: run_pipeline(inst, pipeline_cfg) for inst in yes_instances}


@pytest.fixture(scope="module")
def no_reports(no_instances, pipeline_cfg):
    return {inst.name: run_pipeline(inst, pipeline_cfg) for inst in no_instances}


class TestYesInstances:
    """YES 实例经正向见证得到精确证明"""

    def test_certified(self, yes_reports):
        for name, report in yes_reports.items():
            assert report.verdict == Verdict.CERTIFIED_YES, name
            assert report.status == LibraryStatus.YES
            assert report.exact_witness is not None and report.exact_witness.exact
            assert report.witness_source == "forward"
            assert report.estimate is None
            assert NUMERICAL_NOTE not in report.notes

    def test_stage_records(self, yes_reports):
        report = yes_reports["sq-minus-1"]
        stages = [s.stage for s in report.stages]
        assert stages == ["compile_homogeneous", "witness_forward", "build_quartic", "tensorize", "certify"]
        for record in report.stages:
            assert len(record.input_digest) == 64
            assert len(record.output_digest) == 64
        assert report.N == 15
        assert report.r == 17
        assert report.d == 4


@pytest.mark.slow
class TestNoInstances:
    """NO 实例只得到数值结论，并报告间隔"""

    def test_numerically_below(self, no_reports):
        for name, report in no_reports.items():
            assert report.verdict == Verdict.NUMERICALLY_BELOW, name
            assert report.exact_witness is None
            assert NUMERICAL_NOTE in report.notes
            assert report.margins["quartic"] > 0
            assert report.margins["residual_floor"] > 0
            assert report.estimate < report.threshold

    def test_margins_against_baseline(self, no_instances):
        baseline = json.loads(BASELINE_PATH.read_text(encoding="utf-8"))
        assert set(baseline) == {inst.name for inst in no_instances}
        for inst in no_instances:
            report = run_pipeline(inst, MARGIN_CFG)
            assert report.verdict == Verdict.NUMERICALLY_BELOW, inst.name
            assert report.margins["quartic"] >= baseline[inst.name], inst.name

    def test_deterministic(self, lib, no_reports, pipeline_cfg):
        again = run_pipeline(lib["sq-plus-1"], pipeline_cfg)
        assert again.deterministic_view() == no_reports["sq-plus-1"].deterministic_view()

    def test_margin_table(self, no_reports, yes_reports):
        table = margin_table(list(yes_reports.values()) + list(no_reports.values()))
        lines = table.splitlines()
        assert lines[0].startswith("name")
        assert len(lines) == 2 + 10
        assert any("numerically_below" in line for line in lines)
        assert any("certified_yes" in line for line in lines)

    def test_nondegeneracy_floor(self, lib, pipeline_cfg):
        assert nondegeneracy_floor(lib["even-powers"], pipeline_cfg) > 1e-6


@pytest.mark.slow
class TestLiftedPipeline:
    """阶数提升后的流水线"""

    def test_yes_lifted(self, lib, pipeline_cfg):
        report = run_pipeline(lib["sq-minus-1"], pipeline_cfg, lift_d=6)
        assert report.verdict == Verdict.CERTIFIED_YES
        assert report.d == 6
        assert report.threshold == pytest.approx(float(report.B) * 2 / 27)
        stages = [s.stage for s in report.stages]
        assert "lift_order" in stages and "tensorize_lift" in stages
        assert any("factorization" in note for note in report.notes)

    def test_no_lifted(self, lib, pipeline_cfg):
        report = run_pipeline(lib["sq-plus-1"], pipeline_cfg, lift_d=5)
        assert report.verdict == Verdict.NUMERICALLY_BELOW
        assert report.margins["lifted"] > 0
        assert "maximize_lift" in [s.stage for s in report.stages]


class TestHqsfPipeline:
    """直接给出的 HQSF 实例"""

    def test_given_witness(self, saddle_hqsf, pipeline_cfg):
        report = run_hqsf_pipeline(saddle_hqsf, pipeline_cfg, witness=[1, 1], name="saddle")
        assert report.verdict == Verdict.CERTIFIED_YES
        assert report.witness_source == "given"
        assert report.B == "3"

    def test_bad_witness_falls_back(self, saddle_hqsf):
        cfg = AscentConfig(restarts=4, max_iters=400, seed=1, value_tolerance=1e-30)
        report = run_hqsf_pipeline(saddle_hqsf, cfg, witness=[1, 0])
        assert "supplied witness does not vanish on every form" in report.notes
        # 残差最小点有理化后得到 (1, ±1)
        assert report.verdict == Verdict.CERTIFIED_YES
        assert report.witness_source == "rationalized"

    def test_irrational_common_zero(self, pipeline_cfg):
        """公共零点 z0² = 2z1² 无理，只能得到数值结论"""
        hqsf = HqsfInstance(N=2, forms=(QuadraticForm.diagonal([1, -2]),))
        report = run_hqsf_pipeline(hqsf, pipeline_cfg)
        assert report.verdict == Verdict.NUMERICALLY_ABOVE
        assert NUMERICAL_NOTE in report.notes

    def test_stage_failure_is_named(self, pipeline_cfg):
        hqsf = HqsfInstance(N=2, forms=())
        with pytest.raises(StageError) as exc_info:
            run_hqsf_pipeline(hqsf, pipeline_cfg)
        assert exc_info.value.stage == "build_quartic"


@pytest.mark.slow
class TestRunLibrary:
    """并发运行实例库"""

    def test_selected_names(self, pipeline_cfg):
        names = ["sq-minus-1", "sq-plus-1", "even-powers"]
        reports = asyncio.run(run_library(pipeline_cfg, names=names, max_concurrency=2))
        assert [r.name for r in reports] == names
        assert reports[0].verdict == Verdict.CERTIFIED_YES
        assert reports[1].verdict == Verdict.NUMERICALLY_BELOW


@pytest.fixture
def failing_line_sum(monkeypatch):
    """line-sum 在 certify 阶段失败，其余实例返回名称"""
    def fake_pipeline(inst, cfg, lift_d=None):
        if inst.name == "line-sum":
            raise StageError("certify", InvariantViolation("展开后的四次型不一致"))
        return inst.name

    monkeypatch.setattr(pipeline, "run_pipeline", fake_pipeline)


class TestRunLibraryFailures:
    """实例失败不会被静默吞掉"""

    def test_first_failure_is_raised(self, failing_line_sum, pipeline_cfg):
        names = ["sq-minus-1", "line-sum", "sq-plus-1"]
        with pytest.raises(StageError) as exc_info:
            asyncio.run(run_library(pipeline_cfg, names=names, max_concurrency=2))
        assert exc_info.value.stage == "certify"
        assert isinstance(exc_info.value.cause, InvariantViolation)

    def test_lenient_mode_skips_failures(self, failing_line_sum, pipeline_cfg):
        names = ["sq-minus-1", "line-sum", "sq-plus-1"]
        reports = asyncio.run(run_library(pipeline_cfg, names=names, strict=False))
        assert reports == ["sq-minus-1", "sq-plus-1"]

    def test_unknown_name_fails_before_running(self, pipeline_cfg):
        with pytest.raises(InputError):
            asyncio.run(run_library(pipeline_cfg, names=["nope"]))

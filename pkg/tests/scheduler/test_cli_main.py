#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行入口测试
"""

import json

import pytest

from tensorthreshold.common.config import CONFIG_ENV_VAR, get_settings
from tensorthreshold.common.exceptions import InputError, InvariantViolation, StageError
from tensorthreshold.common.file_utils import load_model, save_model
from tensorthreshold.common.models import (
    Bq4eFile,
    EstimateFile,
    FormModel,
    HqsfFile,
    PolynomialFile,
    QuarticFile,
    SystemFile,
    ThresholdFile,
    WitnessFile,
    WitnessKind,
)
from tensorthreshold.exact_algebra import QuadraticForm, parse_polynomial
from tensorthreshold.harness import pipeline
from tensorthreshold.harness.models import PipelineReport
from tensorthreshold.reduce_tensor.service import tensorize
from tensorthreshold.scheduler import cli_main
from tensorthreshold.scheduler.cli_main import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK, main

FAST = ["--restarts", "6", "--max-iters", "400", "--seed", "3"]


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """命令行测试不重新配置根日志器"""
    monkeypatch.setattr(cli_main, "setup_logging", lambda **kwargs: None)


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


class TestReduceCommands:
    """逐阶段子命令"""

    def test_reduce_box_library(self, tmp_path, capsys):
        output = tmp_path / "system.json"
        code, payload = run_json(capsys, ["reduce-box", "--library", "sq-minus-1", "-o", str(output)])
        assert code == EXIT_OK
        assert payload == {"mode": "homogeneous", "n": 1, "N": 15, "constraints": 17}
        assert load_model(str(output), SystemFile).N == 15

    def test_reduce_box_with_witness(self, tmp_path, capsys):
        instance = tmp_path / "inst.json"
        witness = tmp_path / "box.json"
        sphere = tmp_path / "y.json"
        save_model(str(instance), Bq4eFile(name="demo", n=2, h="x0^4 - x1^2"))
        save_model(str(witness), WitnessFile(kind=WitnessKind.BOX, y=["1", "-1"]))
        code, payload = run_json(capsys, [
            "reduce-box", str(instance), "--witness", str(witness), "--witness-output", str(sphere),
        ])
        assert code == EXIT_OK
        assert payload["witness_exact"] is True
        assert load_model(str(sphere), WitnessFile).exact

    def test_reduce_box_affine(self, capsys):
        code, payload = run_json(capsys, ["reduce-box", "--library", "sq-minus-1", "--mode", "affine"])
        assert code == EXIT_OK
        assert payload["mode"] == "affine"
        assert payload["N"] == 9
        assert payload["constraints"] == 8

    def test_reduce_tensor_and_lift(self, tmp_path, capsys):
        system = tmp_path / "system.json"
        threshold = tmp_path / "threshold.json"
        quartic = tmp_path / "quartic.json"
        lifted = tmp_path / "threshold6.json"
        assert main(["reduce-box", "--library", "sq-minus-1", "-o", str(system)]) == EXIT_OK
        capsys.readouterr()

        code, payload = run_json(capsys, [
            "reduce-tensor", str(system), "-o", str(threshold), "--quartic-output", str(quartic),
        ])
        assert code == EXIT_OK
        assert payload["N"] == 15
        assert payload["r"] == 17
        assert load_model(str(quartic), QuarticFile).B == payload["B"]
        assert load_model(str(threshold), ThresholdFile).d == 4

        code, payload = run_json(capsys, ["lift-order", str(quartic), "--d", "6", "-o", str(lifted)])
        assert code == EXIT_OK
        assert payload["gamma_sq"] == "4/729"
        assert payload["variables"] == 17
        assert load_model(str(lifted), ThresholdFile).d == 6

    def test_text_output(self, capsys):
        assert main(["reduce-box", "--library", "sq-minus-1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "N: 15" in out.splitlines()


class TestNumericalCommands:
    """maximize 与 residual"""

    def test_maximize_quartic(self, tmp_path, capsys, saddle_quartic):
        path = tmp_path / "quartic.json"
        estimate = tmp_path / "estimate.json"
        save_model(str(path), QuarticFile.from_data(saddle_quartic))
        code, payload = run_json(capsys, ["maximize", str(path), "-o", str(estimate)] + FAST)
        assert code == EXIT_OK
        assert payload["value"] == pytest.approx(3.0, abs=1e-6)
        assert payload["verdict"] == "numerically_above"
        assert "not a proof" in payload["note"]
        assert load_model(str(estimate), EstimateFile).kind.value == "max"

    def test_maximize_threshold_multilinear(self, tmp_path, capsys, saddle_quartic):
        path = tmp_path / "threshold.json"
        save_model(str(path), ThresholdFile.from_instance(tensorize(saddle_quartic)))
        code, payload = run_json(capsys, ["maximize", str(path), "--multilinear"] + FAST)
        assert code == EXIT_OK
        assert payload["kind"] == "multilinear"
        assert payload["threshold"] == pytest.approx(3.0)
        assert payload["value"] == pytest.approx(3.0, abs=1e-4)
        assert payload["verdict"] == "numerically_above"

    def test_maximize_multilinear_needs_tensor(self, tmp_path, capsys, saddle_quartic):
        path = tmp_path / "quartic.json"
        save_model(str(path), QuarticFile.from_data(saddle_quartic))
        assert main(["maximize", str(path), "--multilinear"] + FAST) == EXIT_INPUT_ERROR
        assert "error" in capsys.readouterr().err

    def test_residual_fixed_zero(self, tmp_path, capsys, saddle_hqsf):
        path = tmp_path / "hqsf.json"
        save_model(str(path), HqsfFile.from_instance(saddle_hqsf))
        code, payload = run_json(capsys, ["residual", str(path), "--fixed-zero", "0"] + FAST)
        assert code == EXIT_OK
        assert payload["value"] == pytest.approx(1.0, abs=1e-9)


class TestVerifyAndPipeline:
    """verify、pipeline 与 library"""

    def test_verify_accept_and_reject(self, tmp_path, capsys, saddle_hqsf):
        instance = tmp_path / "hqsf.json"
        good = tmp_path / "good.json"
        bad = tmp_path / "bad.json"
        save_model(str(instance), HqsfFile.from_instance(saddle_hqsf))
        save_model(str(good), WitnessFile(y=["3", "3"]))
        save_model(str(bad), WitnessFile(y=["1", "2"]))

        assert main(["verify", str(instance), str(good)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("accepted:")
        # 拒绝也是结论
        assert main(["verify", str(instance), str(bad)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("rejected:")

    def test_verify_float_witness(self, tmp_path, capsys, saddle_hqsf):
        instance = tmp_path / "hqsf.json"
        witness = tmp_path / "float.json"
        save_model(str(instance), HqsfFile.from_instance(saddle_hqsf))
        save_model(str(witness), WitnessFile(y=["0.7071", "0.7071"], exact=False))
        assert main(["verify", str(instance), str(witness)]) == EXIT_INPUT_ERROR

    def test_internal_error_exit_code(self, tmp_path, capsys):
        """展开后的四次型与二次型不一致属于内部缺陷"""
        broken = QuarticFile(
            N=2,
            C="2",
            B="3",
            p=PolynomialFile.from_polynomial(parse_polynomial("x0^4 + x1^4", 2)),
            forms=[FormModel.from_form(QuadraticForm.diagonal([1, -1]))],
        )
        instance = tmp_path / "quartic.json"
        witness = tmp_path / "witness.json"
        save_model(str(instance), broken)
        save_model(str(witness), WitnessFile(y=["1", "1"]))
        assert main(["verify", str(instance), str(witness)]) == EXIT_INTERNAL_ERROR

    def test_pipeline_library(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code, payload = run_json(capsys, ["pipeline", "--library", "sq-minus-1", "-o", str(report_path)] + FAST)
        assert code == EXIT_OK
        assert payload["verdict"] == "certified_yes"
        assert load_model(str(report_path), PipelineReport).exact_witness.exact

    def test_pipeline_bq4e_file_with_witness(self, tmp_path, capsys):
        instance = tmp_path / "inst.json"
        witness = tmp_path / "box.json"
        save_model(str(instance), Bq4eFile(n=1, h="x0^4 - x0^2"))
        save_model(str(witness), WitnessFile(kind=WitnessKind.BOX, y=["0"]))
        code, payload = run_json(capsys, ["pipeline", str(instance), "--witness", str(witness)] + FAST)
        assert code == EXIT_OK
        assert payload["name"] == "inst"
        assert payload["verdict"] == "certified_yes"

    def test_pipeline_text_output(self, capsys):
        assert main(["pipeline", "--library", "quartic-univariate"] + FAST) == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("name")
        assert "certified_yes" in out

    def test_pipeline_rejects_affine(self, capsys):
        assert main(["pipeline", "--library", "sq-minus-1", "--mode", "affine"]) == EXIT_INPUT_ERROR

    @pytest.mark.slow
    def test_library_command(self, tmp_path, capsys):
        out_dir = tmp_path / "reports"
        code, payload = run_json(capsys, [
            "library", "--names", "sq-minus-1", "line-sum", "--output-dir", str(out_dir),
        ] + FAST)
        assert code == EXIT_OK
        assert [r["name"] for r in payload["reports"]] == ["sq-minus-1", "line-sum"]
        assert (out_dir / "line-sum.report.json").exists()


class TestErrors:
    """错误与退出码"""

    @pytest.mark.parametrize(
        "cause, expected",
        [(InvariantViolation("展开不一致"), EXIT_INTERNAL_ERROR), (InputError("维数不符"), EXIT_INPUT_ERROR)],
    )
    def test_library_failure_exit_code(self, monkeypatch, capsys, cause, expected):
        """实例库中任一实例失败时命令以非零码退出"""
        def failing_pipeline(inst, cfg, lift_d=None):
            raise StageError("certify", cause)

        monkeypatch.setattr(pipeline, "run_pipeline", failing_pipeline)
        assert main(["library", "--names", "sq-minus-1", "line-sum"] + FAST) == expected
        assert "error [certify]" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["reduce-tensor", str(tmp_path / "missing.json")]) == EXIT_INPUT_ERROR
        assert "error" in capsys.readouterr().err

    def test_unknown_library_instance(self, capsys):
        assert main(["reduce-box", "--library", "nope"]) == EXIT_INPUT_ERROR

    def test_missing_instance_argument(self, capsys):
        assert main(["reduce-box"]) == EXIT_INPUT_ERROR

    def test_lift_order_below_four(self, tmp_path, capsys, saddle_quartic):
        path = tmp_path / "quartic.json"
        save_model(str(path), QuarticFile.from_data(saddle_quartic))
        assert main(["lift-order", str(path), "--d", "3"]) == EXIT_INPUT_ERROR

    @pytest.mark.parametrize(
        "error, expected",
        [
            (InputError("x"), EXIT_INPUT_ERROR),
            (ValueError("x"), EXIT_INPUT_ERROR),
            (InvariantViolation("x"), EXIT_INTERNAL_ERROR),
            (RuntimeError("x"), EXIT_INTERNAL_ERROR),
            (StageError("certify", InputError("x")), EXIT_INPUT_ERROR),
            (StageError("certify", InvariantViolation("x")), EXIT_INTERNAL_ERROR),
        ],
    )
    def test_exit_code_mapping(self, error, expected):
        assert cli_main._exit_code(error) == expected

    def test_config_file_limits(self, tmp_path, capsys, monkeypatch, saddle_hqsf):
        """--config 指定的 TOML 文件生效"""
        config = tmp_path / "settings.toml"
        config.write_text("[limits]\nmax_quartic_dimension = 1\n", encoding="utf-8")
        path = tmp_path / "hqsf.json"
        save_model(str(path), HqsfFile.from_instance(saddle_hqsf))
        monkeypatch.setenv(CONFIG_ENV_VAR, str(config))
        try:
            assert main(["reduce-tensor", str(path), "--config", str(config)]) == EXIT_INPUT_ERROR
        finally:
            monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
            get_settings.cache_clear()
        assert main(["reduce-tensor", str(path)]) == EXIT_OK

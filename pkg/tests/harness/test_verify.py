#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
见证文件验证与文件格式测试
"""

import json
from fractions import Fraction

import pytest

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.common.file_utils import digest, load_model, save_model
from tensorthreshold.common.models import (
    Bq4eFile,
    HqsfFile,
    LiftFile,
    QuarticFile,
    SystemFile,
    ThresholdFile,
    WitnessFile,
    WitnessKind,
)
from tensorthreshold.exact_algebra import format_rational
from tensorthreshold.harness import load_instance_file, verify_witness, verify_witness_file
from tensorthreshold.reduce_box import SphereWitness, normalize_witness, witness_forward
from tensorthreshold.reduce_tensor.service import lift_order, tensorize


def exact_witness(values) -> WitnessFile:
    return WitnessFile(y=[format_rational(Fraction(v)) for v in values])


def box_witness(values) -> WitnessFile:
    return WitnessFile(kind=WitnessKind.BOX, y=[format_rational(Fraction(v)) for v in values])


class TestBq4eVerification:
    """BQ4E 实例的盒见证与球面见证"""

    def test_box_witness(self, lib):
        instance_file = Bq4eFile.from_instance(lib["line-sum"].bq4e)
        accepted = verify_witness(instance_file, box_witness([1, 0]))
        assert accepted.accepted
        assert accepted.xi == ["1", "0"]
        rejected = verify_witness(instance_file, box_witness([0, 0]))
        assert not rejected.accepted
        assert rejected.message == "h(xi) = -1"

    def test_box_witness_outside_box(self, lib):
        instance_file = Bq4eFile(n=2, h="x0 + x1 - 1")
        result = verify_witness(instance_file, box_witness([2, -1]))
        assert not result.accepted
        assert result.violated_index == 0

    def test_sphere_witness_maps_back(self, lib):
        inst = lib["cubic-product"]
        sphere = witness_forward(inst.bq4e, inst.witness).scaled(Fraction(2, 5))
        result = verify_witness(Bq4eFile.from_instance(inst.bq4e), WitnessFile.from_sphere(sphere))
        assert result.accepted
        assert result.instance_kind == "bq4e"
        assert result.xi == ["1", "1"]

    def test_float_witness_rejected(self, lib):
        inst = lib["sq-minus-1"]
        y = normalize_witness(witness_forward(inst.bq4e, inst.witness))
        with pytest.raises(InputError):
            verify_witness(Bq4eFile.from_instance(inst.bq4e), WitnessFile.from_sphere(y))

    def test_dimension_mismatch(self, lib):
        instance_file = Bq4eFile.from_instance(lib["line-sum"].bq4e)
        with pytest.raises(InputError):
            verify_witness(instance_file, box_witness([1]))


class TestSystemVerification:
    """二次系统与 HQSF 实例"""

    def test_system_file(self, lib, compiled):
        inst = lib["quartic-univariate"]
        system, layout = compiled["quartic-univariate"]
        instance_file = SystemFile.from_system(system)
        y = witness_forward(inst.bq4e, inst.witness)
        result = verify_witness(instance_file, WitnessFile.from_sphere(y))
        assert result.accepted
        assert result.xi == ["-1"]

        values = list(y.y)
        values[layout.x0] += 1
        rejected = verify_witness(instance_file, WitnessFile.from_sphere(SphereWitness(y=tuple(values))))
        assert not rejected.accepted
        assert rejected.violated_index == 0

    def test_hqsf_file(self, saddle_hqsf):
        instance_file = HqsfFile.from_instance(saddle_hqsf)
        assert verify_witness(instance_file, exact_witness([1, -1])).accepted
        rejected = verify_witness(instance_file, exact_witness([1, 0]))
        assert not rejected.accepted
        assert rejected.violated_index == 0

    def test_zero_witness(self, saddle_hqsf):
        with pytest.raises(InputError):
            verify_witness(HqsfFile.from_instance(saddle_hqsf), exact_witness([0, 0]))


class TestTensorVerification:
    """四次证书数据与阈值实例"""

    def test_quartic_file(self, saddle_quartic):
        instance_file = QuarticFile.from_data(saddle_quartic)
        assert verify_witness(instance_file, exact_witness([1, 1])).accepted
        rejected = verify_witness(instance_file, exact_witness([0, 1]))
        assert not rejected.accepted
        assert rejected.violated_index == 0

    def test_threshold_file(self, saddle_quartic):
        instance_file = ThresholdFile.from_instance(tensorize(saddle_quartic))
        assert verify_witness(instance_file, exact_witness([2, 2])).accepted
        assert not verify_witness(instance_file, exact_witness([1, 0])).accepted

    def test_gamma_mismatch(self, saddle_quartic):
        data = ThresholdFile.from_instance(tensorize(saddle_quartic)).model_dump()
        data["gamma_sq"] = "1/2"
        with pytest.raises(InputError):
            ThresholdFile.model_validate(data).to_instance()


class TestFiles:
    """文件读写"""

    def test_tensor_and_threshold_keys(self, saddle_quartic):
        """张量文件为 {n, d, entries: [{idx, coeff}]}，阈值文件另加 B、d 与 gamma_sq"""
        data = ThresholdFile.from_instance(tensorize(saddle_quartic)).model_dump(mode="json")
        assert set(data) == {"version", "tensor", "B", "d", "gamma_sq"}
        assert (data["B"], data["d"], data["gamma_sq"]) == ("3", 4, "1")
        tensor = data["tensor"]
        assert set(tensor) == {"version", "n", "d", "entries"}
        assert (tensor["n"], tensor["d"]) == (2, 4)
        assert tensor["entries"] == [
            {"idx": [0, 0, 0, 0], "coeff": "2"},
            {"idx": [0, 0, 1, 1], "coeff": "4/3"},
            {"idx": [1, 1, 1, 1], "coeff": "2"},
        ]

    def test_verify_from_files(self, tmp_path, saddle_quartic):
        instance_path = tmp_path / "quartic.json"
        witness_path = tmp_path / "witness.json"
        save_model(str(instance_path), QuarticFile.from_data(saddle_quartic))
        save_model(str(witness_path), exact_witness([1, -1]))
        result = verify_witness_file(str(instance_path), str(witness_path))
        assert result.accepted
        assert result.instance_kind == "quartic"

    @pytest.mark.parametrize(
        "make_file, expected",
        [
            (lambda ctx: Bq4eFile(n=1, h="x0^2 - 1"), Bq4eFile),
            (lambda ctx: SystemFile.from_system(ctx["system"]), SystemFile),
            (lambda ctx: HqsfFile.from_instance(ctx["hqsf"]), HqsfFile),
            (lambda ctx: QuarticFile.from_data(ctx["quartic"]), QuarticFile),
            (lambda ctx: ThresholdFile.from_instance(tensorize(ctx["quartic"])), ThresholdFile),
        ],
    )
    def test_instance_kind_detection(self, tmp_path, compiled, saddle_hqsf, saddle_quartic, make_file, expected):
        ctx = {"system": compiled["sq-minus-1"][0], "hqsf": saddle_hqsf, "quartic": saddle_quartic}
        model = make_file(ctx)
        path = tmp_path / "instance.json"
        save_model(str(path), model)
        loaded = load_instance_file(str(path))
        assert isinstance(loaded, expected)
        assert digest(loaded) == digest(model)

    def test_reloaded_objects_are_equal(self, tmp_path, compiled, saddle_quartic):
        system, _ = compiled["line-sum"]
        path = tmp_path / "system.json"
        save_model(str(path), SystemFile.from_system(system))
        assert load_model(str(path), SystemFile).to_system() == system

        path = tmp_path / "quartic.json"
        save_model(str(path), QuarticFile.from_data(saddle_quartic))
        assert load_model(str(path), QuarticFile).to_data().p == saddle_quartic.p

        lift = lift_order(saddle_quartic, 6)
        path = tmp_path / "lift.json"
        save_model(str(path), LiftFile.from_lift(lift))
        assert load_model(str(path), LiftFile).to_lift() == lift

    def test_text_and_encoded_polynomials_agree(self):
        text = Bq4eFile(n=2, h="x0^4 - x1^2").to_instance()
        encoded = Bq4eFile.from_instance(text)
        assert encoded.to_instance().h == text.h

    def test_unreadable_files(self, tmp_path):
        with pytest.raises(InputError):
            load_instance_file(str(tmp_path / "missing.json"))
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(InputError):
            load_instance_file(str(broken))
        unknown = tmp_path / "unknown.json"
        unknown.write_text(json.dumps({"version": 1, "foo": 1}), encoding="utf-8")
        with pytest.raises(InputError):
            load_instance_file(str(unknown))
        with pytest.raises(InputError):
            load_model(str(unknown), WitnessFile)

    def test_digest_is_stable(self, saddle_quartic):
        first = digest(QuarticFile.from_data(saddle_quartic))
        second = digest(QuarticFile.from_data(saddle_quartic))
        assert first == second
        assert len(first) == 64

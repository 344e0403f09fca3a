#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
球面优化、残差最小化与有理化测试
"""

from fractions import Fraction

import numpy as np
import pytest

from tensorthreshold.common.exceptions import InputError
from tensorthreshold.exact_algebra import parse_polynomial
from tensorthreshold.harness.pipeline import system_from_hqsf
from tensorthreshold.numopt import (
    AscentConfig,
    LiftedQuarticObjective,
    QuarticObjective,
    ResidualObjective,
    grad_p,
    maximize_lift,
    maximize_multilinear,
    maximize_sym,
    minimize_sym,
    projected_ascent,
    rationalize,
    residual_min,
)
from tensorthreshold.reduce_box import compile_paper_literal, first_violation, normalize_witness, witness_forward
from tensorthreshold.reduce_tensor.service import build_quartic, hqsf_from_system, lift_order, tensorize_lift
from tensorthreshold.symtensor import gamma, tensor_from_form


def central_difference(f, z: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(z)
    for k in range(len(z)):
        step = np.zeros_like(z)
        step[k] = h
        grad[k] = (f(z + step) - f(z - step)) / (2 * h)
    return grad


@pytest.fixture
def small_quartic_tensor():
    """三元四次型的对称张量，用于多线性对照"""
    p = parse_polynomial("x0^4 - 3*x0^2*x1^2 + 2*x0*x1*x2^2 + 1/2*x1^4 - x2^4 + x0^3*x2", 3)
    return tensor_from_form(p, 4)


class TestGradients:
    """闭式梯度与有限差分一致"""

    def test_grad_p(self, saddle_quartic):
        objective = QuarticObjective(saddle_quartic)
        rng = np.random.default_rng(3)
        for _ in range(100):
            z = rng.standard_normal(2)
            numeric = central_difference(objective.value, z)
            assert np.allclose(grad_p(saddle_quartic, z), numeric, rtol=1e-5, atol=1e-6)

    def test_grad_p_on_compiled_quartic(self, compiled):
        data = build_quartic(hqsf_from_system(compiled["sq-minus-1"][0]))
        objective = QuarticObjective(data)
        rng = np.random.default_rng(4)
        for _ in range(100):
            z = rng.standard_normal(data.N)
            z /= np.linalg.norm(z)
            numeric = central_difference(objective.value, z)
            assert np.allclose(grad_p(data, z), numeric, rtol=1e-5, atol=1e-5)

    def test_grad_p_dimension(self, saddle_quartic):
        with pytest.raises(InputError):
            grad_p(saddle_quartic, [1.0, 0.0, 0.0])

    @pytest.mark.parametrize("d", [5, 6, 7])
    def test_lifted_gradient(self, saddle_quartic, d):
        objective = LiftedQuarticObjective(saddle_quartic, d)
        assert objective.dimension == 2 + d - 4
        rng = np.random.default_rng(d)
        for _ in range(5):
            y = rng.standard_normal(objective.dimension)
            numeric = central_difference(objective.value, y)
            assert np.allclose(objective.gradient(y), numeric, rtol=1e-5, atol=1e-6)


class TestSymmetricMaximum:
    """球面最大值估计"""

    def test_saddle_maximum(self, saddle_quartic, cfg):
        estimate = maximize_sym(saddle_quartic, cfg)
        assert estimate.value == pytest.approx(3.0, abs=1e-6)
        assert estimate.value <= 3.0 + 1e-12
        z = np.asarray(estimate.argmax)
        assert np.linalg.norm(z) == pytest.approx(1.0)
        assert abs(z[0]) == pytest.approx(abs(z[1]), abs=1e-3)
        assert estimate.restarts_used == cfg.restarts

    def test_saddle_minimum(self, saddle_quartic, cfg):
        estimate = minimize_sym(saddle_quartic, cfg)
        assert estimate.value == pytest.approx(2.0, abs=1e-6)

    def test_dense_tensor_agrees_with_closed_form(self, saddle_quartic, cfg):
        closed = maximize_sym(saddle_quartic, cfg)
        dense = maximize_sym(tensor_from_form(saddle_quartic.p, 4), cfg)
        assert dense.value == pytest.approx(closed.value, abs=1e-6)

    def test_history_is_monotone(self, saddle_quartic, cfg):
        """Armijo 条件下每个接受的步都严格增加目标值"""
        objective = QuarticObjective(saddle_quartic)
        rng = np.random.default_rng(5)
        for _ in range(5):
            run = projected_ascent(objective, rng.standard_normal(2), cfg)
            assert all(b > a for a, b in zip(run.history, run.history[1:]))
            assert run.converged

    @pytest.mark.parametrize("sign, expected", [(1.0, 3.0), (-1.0, -2.0)])
    def test_single_run_reaches_critical_value(self, saddle_quartic, cfg, sign, expected):
        """单次梯度运行即收敛到极值，不在两侧来回跳"""
        objective = QuarticObjective(saddle_quartic, sign)
        rng = np.random.default_rng(17)
        for _ in range(5):
            run = projected_ascent(objective, rng.standard_normal(2), cfg)
            assert run.value == pytest.approx(expected, abs=1e-9)

    def test_deterministic_and_thread_independent(self, saddle_quartic):
        serial = AscentConfig(restarts=8, max_iters=200, seed=42)
        threaded = serial.model_copy(update={"workers": 2})
        first = maximize_sym(saddle_quartic, serial)
        second = maximize_sym(saddle_quartic, serial)
        parallel = maximize_sym(saddle_quartic, threaded)
        assert first == second
        assert parallel.value == first.value
        assert parallel.restart_index == first.restart_index
        assert np.allclose(parallel.argmax, first.argmax, atol=1e-12)

    def test_extra_starts_come_first(self, saddle_quartic, cfg):
        start = [1 / np.sqrt(2), 1 / np.sqrt(2)]
        estimate = maximize_sym(saddle_quartic, cfg, starts=[start])
        assert estimate.restarts_used == cfg.restarts + 1
        with pytest.raises(InputError):
            maximize_sym(saddle_quartic, cfg, starts=[[1.0, 0.0, 0.0]])

    def test_unsupported_input(self, cfg):
        with pytest.raises(InputError):
            maximize_sym("x0^4", cfg)


class TestMultilinear:
    """对称张量的多线性范数等于对称范数"""

    @pytest.mark.slow
    def test_cross_check(self, small_quartic_tensor):
        cfg = AscentConfig(restarts=40, max_iters=500, seed=9)
        symmetric = maximize_sym(small_quartic_tensor, cfg)
        multi = maximize_multilinear(small_quartic_tensor, cfg, starts=[symmetric.argmax])
        assert multi.value >= abs(symmetric.value) - 1e-9
        assert multi.value == pytest.approx(abs(symmetric.value), rel=1e-4)
        assert len(multi.slots) == 4
        for slot in multi.slots:
            assert np.linalg.norm(slot) == pytest.approx(1.0)

    @pytest.mark.slow
    def test_random_symmetric_tensors(self, rng, random_form):
        """对称估计与多线性估计互为起点后数值一致"""
        cfg = AscentConfig(restarts=30, max_iters=300, seed=13)
        for _ in range(50):
            n = rng.randint(2, 6)
            T = tensor_from_form(random_form(n, 4, terms=8), 4)
            if not T.entries:
                continue
            symmetric = maximize_sym(T, cfg)
            multi = maximize_multilinear(T, cfg, starts=[symmetric.argmax])
            symmetric = maximize_sym(T, cfg, starts=[symmetric.argmax, *multi.slots])
            value = abs(symmetric.value)
            assert abs(value - multi.value) <= 1e-6 * max(1.0, value)

    def test_rank_one_tensor(self, cfg):
        """x0^4 的多线性范数为 1"""
        T = tensor_from_form(parse_polynomial("x0^4", 2), 4)
        estimate = maximize_multilinear(T, cfg)
        assert estimate.value == pytest.approx(1.0, abs=1e-8)


class TestLiftedMaximum:
    """提升后的最大值为 B·γ_d"""

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [5, 6])
    def test_closed_form_lift(self, saddle_quartic, cfg, d):
        estimate = maximize_lift(saddle_quartic, d, cfg)
        assert estimate.value == pytest.approx(3 * gamma(d), rel=1e-3)
        assert estimate.value <= 3 * gamma(d) * (1 + 1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [5, 6])
    def test_dense_lift_tensor(self, saddle_quartic, cfg, d):
        instance = tensorize_lift(lift_order(saddle_quartic, d), saddle_quartic.B)
        estimate = maximize_sym(instance.tensor, cfg)
        assert abs(estimate.value) == pytest.approx(instance.threshold_float, rel=1e-3)

    def test_order_four_matches_quartic(self, saddle_quartic, cfg):
        assert maximize_lift(saddle_quartic, 4, cfg).value == pytest.approx(3.0, abs=1e-6)

    def test_order_below_four(self, saddle_quartic):
        with pytest.raises(InputError):
            LiftedQuarticObjective(saddle_quartic, 3)


class TestResidual:
    """残差最小化"""

    def test_saddle_residual(self, saddle_hqsf, cfg):
        estimate = residual_min(system_from_hqsf(saddle_hqsf), cfg)
        assert 0.0 <= estimate.value < 1e-12
        assert estimate.converged
        z = np.asarray(estimate.argmax)
        assert abs(z[0]) == pytest.approx(abs(z[1]), abs=1e-6)

    @pytest.mark.parametrize("name", ["sq-minus-1", "quartic-univariate"])
    def test_full_sphere_yes_system(self, compiled, name):
        """可行系统仅凭随机重启即把残差压到 1e-12 以下"""
        system, _ = compiled[name]
        estimate = residual_min(system, AscentConfig(restarts=20, max_iters=500, seed=5))
        assert 0.0 <= estimate.value < 1e-12

    def test_refinement_only_improves(self, compiled, cfg):
        """细化只接受残差下降的步，在不可行系统上也不会变差"""
        system, _ = compiled["sq-plus-1"]
        objective = ResidualObjective(system)
        rng = np.random.default_rng(8)
        for _ in range(3):
            ascent = projected_ascent(objective, rng.standard_normal(system.N), cfg)
            refined = objective.refine(ascent, cfg)
            assert refined.method == "lm"
            assert refined.value >= ascent.value - 1e-15
            assert all(b > a for a, b in zip(refined.history[len(ascent.history):], refined.history[len(ascent.history) + 1:]))
            assert refined.value < 0.0

    def test_start_at_forward_witness(self, lib, compiled, cfg):
        inst = lib["sq-minus-1"]
        system, _ = compiled["sq-minus-1"]
        y = normalize_witness(witness_forward(inst.bq4e, inst.witness))
        estimate = residual_min(system, cfg, starts=[y.as_floats()])
        assert estimate.value < 1e-12

    def test_fixed_zero(self, saddle_hqsf, cfg):
        estimate = residual_min(system_from_hqsf(saddle_hqsf), cfg, fixed_zero=[0])
        assert estimate.value == pytest.approx(1.0, abs=1e-9)
        assert estimate.argmax[0] == 0.0

    def test_invalid_arguments(self, saddle_hqsf, lib, cfg):
        system = system_from_hqsf(saddle_hqsf)
        with pytest.raises(InputError):
            residual_min(system, cfg, fixed_zero=[5])
        with pytest.raises(InputError):
            residual_min(system, cfg, fixed_zero=[0, 1])
        with pytest.raises(InputError):
            residual_min(compile_paper_literal(lib["sq-minus-1"].bq4e), cfg)


class TestRationalize:
    """浮点向量有理化"""

    def test_scale_by_largest(self):
        assert rationalize([0.5, 1.0, -0.25], max_denominator=1000) == (Fraction(1, 2), Fraction(1), Fraction(-1, 4))
        assert rationalize([0.0, -2.0, 1.0], max_denominator=1000) == (Fraction(0), Fraction(1), Fraction(-1, 2))

    def test_invalid_vectors(self):
        with pytest.raises(InputError):
            rationalize([0.0, 0.0])
        with pytest.raises(InputError):
            rationalize([float("nan"), 1.0])

    def test_recovers_exact_witness(self, lib, compiled):
        """归一化的正向见证有理化后仍是精确零点"""
        inst = lib["quartic-diff"]
        system, _ = compiled["quartic-diff"]
        y = normalize_witness(witness_forward(inst.bq4e, inst.witness))
        exact = rationalize(y.as_floats())
        assert first_violation(system, exact) is None

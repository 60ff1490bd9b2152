"""Kernel objects, exponent profiles, and the gamma/kappa helpers."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GAMMA_REFS, KAPPA_025, KAPPA_05, KAPPA_075, VAR_KERNEL_AT_025
from sonine_kit import (
    DomainError,
    ExponentFunction,
    KernelSpec,
    SampledFunction,
    SoninePair,
    affine_exponent,
    classical_abel_kernel,
    gamma,
    graded_mesh,
    kappa,
    make_classical_abel_pair,
    make_variable_exponent_pair,
    power_kernel,
    variable_exponent_kernel,
)


class TestGamma:
    def test_reference_values(self):
        for x, ref in GAMMA_REFS:
            assert abs(gamma(x) - ref) <= 1e-12 * abs(ref), x

    def test_domain_errors(self):
        for bad in (0.0, -1.0, 50.5, float("inf"), float("nan")):
            with pytest.raises(DomainError):
                gamma(bad)
        with pytest.raises(DomainError):
            gamma("0.5")
        with pytest.raises(DomainError):
            gamma(True)

    @settings(deadline=None, max_examples=80, derandomize=True)
    @given(st.floats(min_value=0.05, max_value=49.0))
    def test_recurrence(self, x):
        assert abs(gamma(x + 1.0) - x * gamma(x)) <= 1e-11 * abs(x * gamma(x))


class TestKappa:
    def test_reference_values(self):
        assert abs(kappa(0.25) - KAPPA_025) <= 1e-12 * KAPPA_025
        assert abs(kappa(0.5) - KAPPA_05) <= 1e-12 * KAPPA_05
        assert abs(kappa(0.75) - KAPPA_075) <= 1e-12 * KAPPA_075

    @settings(deadline=None, max_examples=80, derandomize=True)
    @given(st.floats(min_value=0.05, max_value=0.95))
    def test_reflection_formula(self, a):
        ref = math.pi / math.sin(math.pi * a)
        assert abs(kappa(a) - ref) <= 1e-12 * abs(ref)

    @settings(deadline=None, max_examples=40, derandomize=True)
    @given(st.floats(min_value=0.05, max_value=0.95))
    def test_symmetry(self, a):
        # 1.0 - a rounds, so the reflected argument is a few ulps off a
        assert abs(kappa(a) - kappa(1.0 - a)) <= 1e-14 * kappa(a)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.3, 1.7, float("nan")):
            with pytest.raises(DomainError):
                kappa(bad)


class TestExponentFunction:
    def test_affine_basics(self):
        af = affine_exponent(0.5, 0.2, 0.5)
        assert af.eval(0.0) == 0.5
        assert af.eval(0.5) == 0.6
        assert af.deriv(0.25) == 0.2
        assert af.alpha_lo == 0.5 and af.alpha_hi == 0.6
        af.validate(0.5)  # no raise
        assert not af.is_constant(0.5)
        assert affine_exponent(0.37, 0.0, 1.0).is_constant(1.0)

    def test_affine_range_rejected(self):
        with pytest.raises(DomainError):
            affine_exponent(0.5, 2.0, 0.5)  # alpha(b) = 1.5
        with pytest.raises(DomainError):
            affine_exponent(0.0, 0.1, 1.0)  # alpha(0) = 0
        with pytest.raises(DomainError):
            affine_exponent(0.9, 0.3, 1.0)  # exits above 1

    def test_declared_bounds_are_verified(self):
        # claims a constant profile but actually varies
        lying = ExponentFunction(
            fn=lambda t: 0.5 + 0.2 * np.asarray(t, dtype=float),
            dfn=lambda t: np.full_like(np.asarray(t, dtype=float), 0.2),
            L=0.0,
            alpha_lo=0.5,
            alpha_hi=0.5,
        )
        with pytest.raises(DomainError):
            lying.validate(0.5)

    def test_vector_eval(self):
        af = affine_exponent(0.5, 0.2, 0.5)
        ts = np.array([0.0, 0.25, 0.5])
        np.testing.assert_allclose(af.eval(ts), [0.5, 0.55, 0.6], rtol=0, atol=0)


class TestKernelSpec:
    def test_classical_values(self):
        k = classical_abel_kernel(0.5, 1.0)
        assert k.eval(0.25) == 0.25**-0.5
        assert k.smooth(0.0) == 1.0
        assert k.sing_exponent == 0.5 and k.local_exponent == 0.5

    def test_zero_is_domain_error(self):
        k = classical_abel_kernel(0.5, 1.0)
        with pytest.raises(DomainError):
            k.eval(0.0)
        with pytest.raises(DomainError):
            k.eval(1.5)
        with pytest.raises(DomainError):
            k.eval(-0.1)

    def test_variable_kernel_value(self):
        af = affine_exponent(0.5, 0.2, 0.5)
        k = variable_exponent_kernel(af, 0.5)
        assert abs(k.eval(0.25) - VAR_KERNEL_AT_025) <= 1e-12 * VAR_KERNEL_AT_025
        # worst-case order is the sup of alpha; the factored order is alpha(0)
        assert k.sing_exponent == 0.6
        assert k.local_exponent == 0.5
        assert k.smooth(0.0) == 1.0

    def test_smooth_factor_consistency(self):
        af = affine_exponent(0.5, 0.2, 0.5)
        k = variable_exponent_kernel(af, 0.5)
        for t in (1e-6, 0.01, 0.3, 0.5):
            assert abs(k.smooth(t) - k.eval(t) * t**k.local_exponent) <= 1e-12

    def test_power_kernel_rejects_bad_args(self):
        with pytest.raises(DomainError):
            power_kernel(0.0, 0.5, 1.0)
        with pytest.raises(DomainError):
            power_kernel(1.0, 1.2, 1.0)
        with pytest.raises(DomainError):
            power_kernel(1.0, 0.5, -1.0)

    def test_from_samples_roundtrip(self):
        mesh = graded_mesh(64, 2.0, 1.0)
        vals = np.empty(65)
        vals[0] = np.nan
        vals[1:] = 0.7 * mesh.nodes[1:] ** -0.3
        tab = KernelSpec.from_samples(SampledFunction(mesh=mesh, values=vals))
        assert abs(tab.sing_exponent - 0.3) <= 1e-10
        for t in (0.01, 0.2, 0.9):
            assert abs(tab.eval(t) - 0.7 * t**-0.3) <= 1e-3 * abs(0.7 * t**-0.3)

    def test_from_samples_needs_enough_nodes(self):
        mesh = graded_mesh(2, 1.0, 1.0)
        vals = np.array([np.nan, -1.0, -2.0])
        with pytest.raises(DomainError):
            KernelSpec.from_samples(SampledFunction(mesh=mesh, values=vals))


class TestSoninePair:
    def test_classical_pair_structure(self):
        pair = make_classical_abel_pair(0.5, 1.0)
        assert pair.is_classical
        assert abs(pair.kappa - math.pi) <= 1e-12
        assert abs(pair.K.eval(0.25) - 0.25**-0.5 / math.pi) <= 1e-14
        assert pair.b == 1.0

    def test_variable_pair_structure(self):
        pair = make_variable_exponent_pair(affine_exponent(0.5, 0.2, 0.5), 0.5)
        assert not pair.is_classical
        assert pair.exponent is not None
        assert abs(pair.kappa - KAPPA_05) <= 1e-12 * KAPPA_05
        # associate has the constant order 1 - alpha(0)
        assert pair.K.local_exponent == 0.5

    def test_constant_profile_is_classical(self):
        pair = make_variable_exponent_pair(affine_exponent(0.37, 0.0, 1.0), 1.0)
        assert pair.is_classical

    def test_mismatched_intervals_rejected(self):
        k1 = classical_abel_kernel(0.5, 1.0)
        k2 = classical_abel_kernel(0.5, 2.0)
        with pytest.raises(DomainError):
            SoninePair(k=k1, K=k2, kappa=float("nan"), is_classical=False)

    def test_classical_claim_needs_order_sum_one(self):
        k = classical_abel_kernel(0.5, 1.0)
        K = power_kernel(1.0, 0.3, 1.0)
        with pytest.raises(DomainError):
            SoninePair(k=k, K=K, kappa=1.0, is_classical=True)

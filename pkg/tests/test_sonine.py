"""The g = K * k analysis: routes, extrapolation, derivative, verdict."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import (
    G_A_025,
    G_A_05,
    GPRIME_A_025,
    geometric_times,
)
from sonine_kit import (
    DomainError,
    SoninePair,
    affine_exponent,
    check_gsc,
    compute_g_substituted,
    convolve_pair,
    estimate_g0,
    estimate_gprime,
    graded_mesh,
    make_classical_abel_pair,
    make_variable_exponent_pair,
    power_kernel,
)


class TestComputeGSubstituted:
    def test_constant_profile_is_exactly_one(self):
        pair = make_variable_exponent_pair(affine_exponent(0.5, 0.0, 1.0), 1.0)
        for t in (0.03, 0.4, 1.0):
            assert abs(compute_g_substituted(pair, t, M=64) - 1.0) <= 1e-6

    def test_oracle_values(self, pair_a):
        assert abs(compute_g_substituted(pair_a, 0.5, M=256) - G_A_05) <= 1e-6
        assert abs(compute_g_substituted(pair_a, 0.25, M=256) - G_A_025) <= 1e-6

    def test_defect_shrinks_towards_origin(self, pair_a):
        ts = 0.5 * 0.5 ** np.arange(4, 13, dtype=float)
        defects = np.abs(compute_g_substituted(pair_a, ts, M=256) - 1.0)
        assert np.all(np.diff(defects) < 0.0)

    def test_requires_profile(self, classical_half):
        with pytest.raises(DomainError):
            compute_g_substituted(classical_half, 0.5)

    def test_validation(self, pair_a):
        with pytest.raises(DomainError):
            compute_g_substituted(pair_a, 0.5, M=8)
        with pytest.raises(DomainError):
            compute_g_substituted(pair_a, 0.0)
        with pytest.raises(DomainError):
            compute_g_substituted(pair_a, 0.7)  # beyond b = 0.5

    def test_route_agreement(self, pair_a, mesh_512_half):
        direct = convolve_pair(pair_a.K, pair_a.k, mesh_512_half, M=256)
        subst = compute_g_substituted(pair_a, mesh_512_half.nodes[1:], M=256)
        assert np.max(np.abs(direct.values[1:] - subst)) <= 5e-5


class TestEstimateGprime:
    def test_oracle_value(self, pair_a):
        mesh = graded_mesh(2, 1.0, 0.5)  # nodes 0, 0.25, 0.5
        gp = estimate_gprime(pair_a, mesh, M=1024)
        assert abs(gp.values[1] - GPRIME_A_025) <= 1e-6 * GPRIME_A_025
        assert np.isnan(gp.values[0])

    def test_agrees_with_finite_difference(self, pair_a):
        mesh = graded_mesh(2, 1.0, 0.5)
        gp = estimate_gprime(pair_a, mesh, M=256)
        h = 1e-4
        fd = (
            compute_g_substituted(pair_a, 0.25 + h, M=256)
            - compute_g_substituted(pair_a, 0.25 - h, M=256)
        ) / (2.0 * h)
        assert abs(gp.values[1] - fd) <= 1e-5

    def test_constant_profile_derivative_vanishes(self):
        pair = make_variable_exponent_pair(affine_exponent(0.5, 0.0, 1.0), 1.0)
        gp = estimate_gprime(pair, graded_mesh(16, 2.0, 1.0), M=64)
        assert np.max(np.abs(gp.values[1:])) <= 1e-8

    def test_fd_consistency_across_nodes(self, pair_a):
        """Analytic derivative vs central differences of g, away from 0."""
        mesh = graded_mesh(64, 1.0, 0.5)
        gp = estimate_gprime(pair_a, mesh, M=256)
        nodes = mesh.nodes
        sel = np.arange(2, 63)
        sel = sel[nodes[sel] >= 0.05]  # t >= b/10
        g_plus = compute_g_substituted(pair_a, nodes[sel + 1], M=256)
        g_minus = compute_g_substituted(pair_a, nodes[sel - 1], M=256)
        fd = (g_plus - g_minus) / (nodes[sel + 1] - nodes[sel - 1])
        # the gap is the central-difference truncation h^2 g'''/6, largest
        # at the left edge of the window where g''' ~ 30
        assert np.max(np.abs(gp.values[sel] - fd)) <= 1e-3

    def test_requires_profile(self, classical_half):
        with pytest.raises(DomainError):
            estimate_gprime(classical_half, graded_mesh(8, 2.0, 1.0))

    def test_near_origin_growth_is_integrable(self, pair_a):
        """|g'| follows a power law milder than t^{-1/2} approaching 0."""
        ts = 0.5 * 0.5 ** np.arange(2, 13, dtype=float)
        mesh_vals = [
            estimate_gprime(pair_a, graded_mesh(2, 1.0, 2.0 * t), M=128).values[1]
            for t in ts
        ]
        y = np.log(np.abs(mesh_vals))
        x = np.log(ts)
        slope = np.polyfit(x, y, 1)[0]
        assert -slope < 0.5


class TestEstimateG0:
    def test_recovers_constructed_limit(self):
        ts = [1e-2, 1e-3, 1e-4]
        samples = [(t, 1.0 + t * math.log(1.0 / t)) for t in ts]
        assert abs(estimate_g0(samples) - 1.0) <= 1e-3

    def test_constant_data_exact(self):
        assert estimate_g0([(1e-2, 1.0), (1e-3, 1.0), (1e-4, 1.0)]) == 1.0

    def test_profile_samples(self, pair_a):
        ts = geometric_times(0.5)
        gs = compute_g_substituted(pair_a, ts, M=256)
        assert abs(estimate_g0(zip(ts, gs)) - 1.0) <= 1e-3

    def test_validation(self):
        with pytest.raises(DomainError):
            estimate_g0([(1e-2, 1.0), (1e-3, 1.0)])  # too few
        with pytest.raises(DomainError):
            estimate_g0([(1e-2, 1.0), (9.9e-3, 1.0), (9.8e-3, 1.0)])  # not geometric
        with pytest.raises(DomainError):
            estimate_g0([(1e-2, 1.0), (1e-3, float("nan")), (1e-4, 1.0)])
        with pytest.raises(DomainError):
            estimate_g0([(0.0, 1.0), (1e-3, 1.0), (1e-4, 1.0)])  # t must be positive


class TestCheckGsc:
    def test_classical_report(self, mesh_512_unit):
        report = check_gsc(make_classical_abel_pair(0.5, 1.0), mesh_512_unit)
        assert report.sc_residual <= 1e-4
        assert report.g0_defect <= 1e-6
        assert report.gprime_l1 <= 1e-3
        assert report.gsc_pass
        assert math.isnan(report.route_diff)

    def test_variable_report(self, pair_a, mesh_512_half):
        report = check_gsc(pair_a, mesh_512_half)
        assert report.g0_defect <= 1e-3
        assert report.eps_fit.passed
        assert math.isfinite(report.gprime_l1)
        assert report.route_diff <= 5e-5
        assert report.gsc_pass

    def test_mismatched_pair_flags_failure(self):
        kk = power_kernel(1.0, 0.5, 1.0)
        pair = SoninePair(k=kk, K=kk, kappa=float("nan"), is_classical=False)
        report = check_gsc(pair, graded_mesh(128, 2.0, 1.0))
        assert report.sc_residual > 2.0  # g is pi everywhere
        assert abs(report.g0_defect - (math.pi - 1.0)) <= 1e-3
        assert not report.gsc_pass

    def test_constant_profile_degenerates(self):
        pair = make_variable_exponent_pair(affine_exponent(0.5, 0.0, 1.0), 1.0)
        report = check_gsc(pair, graded_mesh(256, 2.0, 1.0))
        assert report.sc_residual <= 1e-4
        assert abs(report.eps_fit.C) <= 1e-6
        assert report.eps_fit.passed
        assert report.route_diff <= 5e-5
        assert report.gsc_pass

    def test_eps_bound_when_profile_attached(self, pair_a, mesh_512_half):
        report = check_gsc(pair_a, mesh_512_half)
        if report.eps_fit.passed and report.eps_fit.C > 1e-6:
            alpha0 = pair_a.exponent.eval(0.0)
            assert report.eps_fit.eps < 1.0 - alpha0

    def test_nonnegative_diagnostics(self, pair_a, mesh_512_half):
        report = check_gsc(pair_a, mesh_512_half)
        assert report.sc_residual >= 0.0
        assert report.g0_defect >= 0.0
        assert report.gprime_l1 >= 0.0

    def test_g0_tol_is_respected(self, pair_a, mesh_512_half):
        strict = check_gsc(pair_a, mesh_512_half, g0_tol=1e-9)
        assert not strict.gsc_pass
        with pytest.raises(DomainError):
            check_gsc(pair_a, mesh_512_half, g0_tol=0.0)

    def test_deterministic(self, pair_a, mesh_512_half):
        r1 = check_gsc(pair_a, mesh_512_half)
        r2 = check_gsc(pair_a, mesh_512_half)
        np.testing.assert_array_equal(r1.g.values[1:], r2.g.values[1:])
        np.testing.assert_array_equal(r1.gprime.values[1:], r2.gprime.values[1:])
        assert r1.g0 == r2.g0
        assert r1.gprime_l1 == r2.gprime_l1

import math

import numpy as np
import pytest

from ntdball import fields, sphere
from ntdball.errors import DataMismatch, InvalidParams, ZeroData

from conftest import make_solution_pair

AREA = 4.0 * math.pi


class TestBoundaryField:
    def test_round_trip_band_limited(self, grid16):
        f = fields.BoundaryField.random(grid16, 11)
        resynth = sphere.synthesize(grid16, f.coeffs)
        assert np.max(np.abs(resynth - f.values)) < 1e-10 * max(1.0, np.abs(f.values).max())

    def test_aliased_values_are_authoritative(self, grid16):
        f = fields.BoundaryField.random(grid16, 12)
        aliased = fields.BoundaryField.from_values(grid16, np.abs(f.values) ** 2.5)
        # stored values kept verbatim; coeffs are merely their projection
        assert np.array_equal(aliased.values, np.abs(f.values) ** 2.5)

    def test_harmonic_outside_band_rejected(self, grid16):
        with pytest.raises(InvalidParams):
            fields.BoundaryField.harmonic(grid16, 17, 0)


class TestBoundaryNorm:
    def test_constant_any_exponent(self, grid16):
        f = fields.BoundaryField.constant(grid16, -2.0)
        for r in (1.0, 2.0, 5.5):
            assert fields.boundary_norm(f, r) == pytest.approx(
                AREA ** (1.0 / r) * 2.0, rel=1e-13)

    def test_orthonormal_mode_l2(self, grid16):
        f = fields.BoundaryField.harmonic(grid16, 1, 0)
        assert fields.boundary_norm(f, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_y10_sup_closed_form(self, grid16):
        f = fields.BoundaryField.harmonic(grid16, 1, 0)
        assert fields.boundary_norm(f, math.inf) == pytest.approx(
            math.sqrt(3.0 / AREA), rel=1e-12)

    def test_rejects_r_below_one(self, grid16):
        with pytest.raises(InvalidParams):
            fields.boundary_norm(fields.BoundaryField.constant(grid16, 1.0), 0.5)

    def test_normalized_norms_nondecreasing_in_r(self, grid16):
        # power-mean monotonicity of |f| under the normalized measure
        f = fields.BoundaryField.random(grid16, 13)
        rs = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0, 64.0]
        vals = [fields.boundary_norm(f, r) / AREA ** (1.0 / r) for r in rs]
        for a, b in zip(vals, vals[1:]):
            assert b >= a * (1.0 - 1e-12)

    def test_huge_exponent_no_overflow(self, grid16):
        f = fields.BoundaryField.random(grid16, 14, scale=40.0)
        val = fields.boundary_norm(f, 4096.0, oversample=3)
        assert np.isfinite(val)
        assert val <= fields.linf_boundary(f) * (1.0 + 1e-9)


class TestVolumeSamples:
    def test_ball_volume(self, grid16):
        vol = fields.volume_samples(grid16)
        ones = np.ones((vol.radii.size, grid16.n_theta, grid16.n_phi))
        assert vol.integrate(ones) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)

    def test_polynomial_moment(self, grid16):
        # int r^4 over the ball = 4 pi / 7
        vol = fields.volume_samples(grid16)
        vals = np.broadcast_to(
            (vol.radii**4)[:, None, None],
            (vol.radii.size, grid16.n_theta, grid16.n_phi))
        assert vol.integrate(np.array(vals)) == pytest.approx(4.0 * math.pi / 7.0, rel=1e-12)


class TestSolutionNorms:
    def test_constant_data_closed_forms(self, grid16, spectrum16, lam0):
        h = fields.BoundaryField.constant(grid16, 1.0)
        trace = fields.BoundaryField.from_coeffs(
            grid16, h.coeffs.scaled_by_degree(spectrum16.lam))
        rep = fields.solution_norms(trace, h)
        assert rep.h1**2 == pytest.approx(AREA * lam0, rel=1e-12)
        assert rep.h1_quadrature == pytest.approx(rep.h1, rel=1e-8)
        assert rep.linf_volume == pytest.approx(lam0, rel=1e-12)
        assert rep.linf_boundary == pytest.approx(lam0, rel=1e-12)

    def test_zero_data(self, grid16):
        z = fields.BoundaryField.constant(grid16, 0.0)
        rep = fields.solution_norms(z, z)
        assert rep.h1 == 0.0
        assert rep.linf_volume == 0.0
        assert all(v == 0.0 for v in rep.boundary_lr.values())

    def test_green_identity_random_data(self, grid16, spectrum16):
        for seed in range(6):
            trace, h = make_solution_pair(grid16, spectrum16, 200 + seed)
            rep = fields.solution_norms(trace, h)
            assert rep.h1_quadrature == pytest.approx(rep.h1, rel=1e-8)

    def test_max_principle_discrete(self, grid16, spectrum16):
        trace, h = make_solution_pair(grid16, spectrum16, 321)
        rep = fields.solution_norms(trace, h)
        assert rep.linf_volume <= rep.linf_boundary + 1e-9

    def test_mismatched_pair_rejected(self, grid16, spectrum16):
        trace, h = make_solution_pair(grid16, spectrum16, 55)
        wrong = fields.BoundaryField.from_coeffs(
            grid16, sphere.HarmonicCoeffs(16, h.coeffs.c * 1.5))
        with pytest.raises(DataMismatch):
            fields.solution_norms(trace, wrong)


class TestCoefficientField:
    def test_zero_input(self, grid16):
        v = fields.BoundaryField.constant(grid16, 0.0)
        a, a_norm = fields.coefficient_field(v, 2.0, 1.0, 3)
        assert np.max(np.abs(a.values - 1.0)) < 1e-14
        assert a_norm == pytest.approx(math.sqrt(AREA), rel=1e-12)

    def test_unit_input_p2(self, grid16):
        v = fields.BoundaryField.constant(grid16, 1.0)
        a, _ = fields.coefficient_field(v, 2.0, 1.0, 3)
        assert np.max(np.abs(a.values - 1.0)) < 1e-14

    def test_constant_three(self, grid16):
        v = fields.BoundaryField.constant(grid16, 3.0)
        a, _ = fields.coefficient_field(v, 2.0, 2.0, 3)
        assert np.max(np.abs(a.values - 5.0)) < 1e-13

    def test_pointwise_domination(self, grid16):
        v = fields.BoundaryField.random(grid16, 77, scale=6.0)
        for p in (1.5, 2.0, 4.0):
            a, _ = fields.coefficient_field(v, p, 2.0, 3)
            bound = 2.0 * (1.0 + np.abs(v.values) ** (p - 1.0))
            assert np.all(a.values <= bound * (1.0 + 1e-12))

    def test_validation(self, grid16):
        v = fields.BoundaryField.constant(grid16, 1.0)
        with pytest.raises(InvalidParams):
            fields.coefficient_field(v, 1.0, 1.0, 3)
        with pytest.raises(InvalidParams):
            fields.coefficient_field(v, 2.0, 0.0, 3)


class TestNeumannEstimateRatio:
    def test_constant_data(self, grid16):
        h = fields.BoundaryField.constant(grid16, 1.0)
        m, ratio = fields.neumann_estimate_ratio(h, 2.0)
        assert m == pytest.approx(3.0)
        assert 0.0 < ratio < 10.0

    def test_constant_data_against_radial_quadrature_oracle(self, grid16, lam0):
        # h == 1 gives the radial solution u = lam0 sinh(r)/(r sinh 1);
        # evaluate ||u||_{W^{1,3}} with an independent 1-D quadrature
        from scipy.integrate import quad

        u = lambda r: lam0 * math.sinh(r) / (r * math.sinh(1.0))
        du = lambda r: lam0 * (r * math.cosh(r) - math.sinh(r)) / (r**2 * math.sinh(1.0))
        int_u3 = 4.0 * math.pi * quad(lambda r: abs(u(r)) ** 3 * r**2, 0.0, 1.0)[0]
        int_du3 = 4.0 * math.pi * quad(lambda r: abs(du(r)) ** 3 * r**2, 0.0, 1.0)[0]
        want = (int_du3 + int_u3) ** (1.0 / 3.0) / math.sqrt(AREA)

        h = fields.BoundaryField.constant(grid16, 1.0)
        m, ratio = fields.neumann_estimate_ratio(h, 2.0)
        assert ratio == pytest.approx(want, rel=1e-9)

    def test_harmonic_data_finite(self, grid16):
        h = fields.BoundaryField.harmonic(grid16, 1, 0)
        m, ratio = fields.neumann_estimate_ratio(h, 2.0)
        assert np.isfinite(ratio) and ratio > 0.0

    def test_scale_invariance(self, grid16):
        h1 = fields.BoundaryField.constant(grid16, 1.0)
        h2 = fields.BoundaryField.constant(grid16, 2.0)
        _, r1 = fields.neumann_estimate_ratio(h1, 2.0)
        _, r2 = fields.neumann_estimate_ratio(h2, 2.0)
        assert r1 == pytest.approx(r2, rel=1e-12)

    def test_zero_data_rejected(self, grid16):
        with pytest.raises(ZeroData):
            fields.neumann_estimate_ratio(fields.BoundaryField.constant(grid16, 0.0), 2.0)

    def test_bounded_over_random_batches(self, grid16):
        vol = fields.volume_samples(grid16)
        for q in (1.0, 2.0, 4.0):
            ratios = []
            for seed in range(8):
                h = fields.BoundaryField.random(grid16, 900 + seed)
                _, ratio = fields.neumann_estimate_ratio(h, q, volume=vol)
                ratios.append(ratio)
            assert np.all(np.isfinite(ratios))
            assert max(ratios) < 50.0


class TestTraceEmbedding:
    def test_fitted_constant_stable_across_batches(self, grid16, spectrum16):
        # ||u||_{L^4(boundary)} <= C ||u||_{H1(ball)} with one fitted C
        def batch_max(seed0, count):
            worst = 0.0
            for k in range(count):
                trace, h = make_solution_pair(grid16, spectrum16, seed0 + k)
                l4 = fields.boundary_norm(trace, 4.0)
                h1 = fields.spectral_h1(h.coeffs, spectrum16)
                worst = max(worst, l4 / h1)
            return worst

        c_a = batch_max(1000, 100)
        c_b = batch_max(5000, 100)
        assert np.isfinite(c_a) and np.isfinite(c_b)
        assert 0.8 * c_a <= c_b <= 1.2 * c_a

import math

import numpy as np
import pytest
from scipy.special import spherical_in

from ntdball import sphere
from ntdball.errors import BandLimitMismatch, InvalidParams

LAMBDA0 = (np.e**2 - 1.0) / 2.0
# lambda_1 from the closed forms: i_1(1) = 1/e, i_1'(1) = sinh(1) - 2/e
LAMBDA1 = math.exp(-1.0) / (math.sinh(1.0) - 2.0 * math.exp(-1.0))


class TestBuildGrid:
    def test_weight_sum_is_sphere_area(self):
        for L in (0, 3, 16):
            g = sphere.build_grid(L)
            assert g.weights.sum() == pytest.approx(4.0 * math.pi, rel=1e-13)

    def test_single_band_grid(self):
        g = sphere.build_grid(0)
        assert (g.n_theta, g.n_phi) == (1, 1)
        assert g.weights.sum() == pytest.approx(4.0 * math.pi, rel=1e-13)

    def test_orthonormality_gram_identity(self):
        g = sphere.build_grid(8)
        n = sphere.num_coeffs(8)
        gram = np.empty((n, n))
        for j in range(n):
            c = np.zeros(n)
            c[j] = 1.0
            vals = sphere.synthesize(g, sphere.HarmonicCoeffs(8, c))
            gram[:, j] = sphere.analyze(g, vals).c
        assert np.max(np.abs(gram - np.eye(n))) < 1e-12

    def test_y10_is_normalized(self):
        g = sphere.build_grid(8)
        c = np.zeros(sphere.num_coeffs(8))
        c[sphere.coeff_index(1, 0)] = 1.0
        vals = sphere.synthesize(g, sphere.HarmonicCoeffs(8, c))
        assert g.integrate(vals**2) == pytest.approx(1.0, rel=1e-13)

    @pytest.mark.parametrize("L", [-1, 257])
    def test_band_limit_range(self, L):
        with pytest.raises(InvalidParams):
            sphere.build_grid(L)


class TestTransforms:
    def test_constant_field_projects_to_y00(self):
        g = sphere.build_grid(6)
        coeffs = sphere.analyze(g, np.ones((g.n_theta, g.n_phi)))
        assert coeffs.get(0, 0) == pytest.approx(math.sqrt(4.0 * math.pi), rel=1e-14)
        assert np.max(np.abs(coeffs.c[1:])) < 1e-12

    def test_single_mode_round_trip(self):
        g = sphere.build_grid(6)
        c = np.zeros(sphere.num_coeffs(6))
        c[sphere.coeff_index(2, 1)] = 1.0
        back = sphere.analyze(g, sphere.synthesize(g, sphere.HarmonicCoeffs(6, c)))
        assert np.max(np.abs(back.c - c)) < 1e-12

    def test_parseval(self):
        g = sphere.build_grid(12)
        rng = np.random.default_rng(1)
        c = rng.standard_normal(sphere.num_coeffs(12))
        vals = sphere.synthesize(g, sphere.HarmonicCoeffs(12, c))
        assert g.integrate(vals**2) == pytest.approx(np.sum(c**2), rel=1e-10)

    def test_round_trip_both_ways(self):
        g = sphere.build_grid(10)
        rng = np.random.default_rng(2)
        c = rng.standard_normal(sphere.num_coeffs(10))
        hc = sphere.HarmonicCoeffs(10, c)
        vals = sphere.synthesize(g, hc)
        assert np.max(np.abs(sphere.analyze(g, vals).c - c)) < 1e-11 * np.max(np.abs(c))
        vals2 = sphere.synthesize(g, sphere.analyze(g, vals))
        assert np.max(np.abs(vals2 - vals)) < 1e-11 * np.max(np.abs(vals))

    def test_band_mismatch_raises(self):
        g = sphere.build_grid(4)
        with pytest.raises(BandLimitMismatch):
            sphere.analyze(g, np.ones((3, 3)))
        big = sphere.HarmonicCoeffs(8, np.zeros(sphere.num_coeffs(8)))
        with pytest.raises(BandLimitMismatch):
            sphere.synthesize(g, big)

    def test_synthesis_onto_oversampled_grid(self):
        g = sphere.build_grid(5)
        go = sphere.build_grid(15)
        rng = np.random.default_rng(3)
        c = rng.standard_normal(sphere.num_coeffs(5))
        hc = sphere.HarmonicCoeffs(5, c)
        vals = sphere.synthesize(go, hc)
        back = sphere.analyze(go, vals).truncated(5)
        assert np.max(np.abs(back.c - c)) < 1e-12

    def test_deterministic(self):
        g = sphere.build_grid(9)
        rng = np.random.default_rng(4)
        c = rng.standard_normal(sphere.num_coeffs(9))
        a = sphere.synthesize(g, sphere.HarmonicCoeffs(9, c))
        b = sphere.synthesize(g, sphere.HarmonicCoeffs(9, c.copy()))
        assert np.array_equal(a, b)

    def test_surface_gradient_eigenvalue(self):
        # int |grad_S Y_lm|^2 = l(l+1) for orthonormal harmonics
        g = sphere.build_grid(8)
        for (ell, m) in [(1, 0), (2, 1), (5, -3), (8, 8)]:
            c = np.zeros(sphere.num_coeffs(8))
            c[sphere.coeff_index(ell, m)] = 1.0
            dt, dp = sphere.synthesize_gradient(g, sphere.HarmonicCoeffs(8, c))
            assert g.integrate(dt**2 + dp**2) == pytest.approx(ell * (ell + 1), rel=1e-11)


class TestBessel:
    def test_order_zero_closed_form(self):
        val = sphere.bessel_i(0, 1.0)
        assert val.value == pytest.approx(math.sinh(1.0), rel=1e-14)
        assert val.deriv == pytest.approx(math.exp(-1.0), rel=1e-13)
        assert not val.underflow

    def test_order_one_derivative(self):
        val = sphere.bessel_i(1, 1.0)
        assert val.deriv == pytest.approx(math.sinh(1.0) - 2.0 * math.exp(-1.0), rel=1e-13)

    def test_recurrence(self):
        # i_{l-1} - i_{l+1} = (2l+1) i_l / r
        for r in (0.3, 0.75, 1.0):
            for ell in range(1, 40):
                lo = sphere.bessel_i(ell - 1, r).value
                mid = sphere.bessel_i(ell, r).value
                hi = sphere.bessel_i(ell + 1, r).value
                assert lo - hi == pytest.approx((2 * ell + 1) * mid / r, rel=1e-10)

    def test_against_scipy(self):
        for ell in (0, 1, 2, 7, 25, 80):
            for r in (0.05, 0.4, 1.0):
                got = sphere.bessel_i(ell, r)
                ref = spherical_in(ell, r)
                ref_d = spherical_in(ell, r, derivative=True)
                if ref < 1e-280:
                    continue
                assert got.value == pytest.approx(ref, rel=1e-11)
                assert got.deriv == pytest.approx(ref_d, rel=1e-11)

    def test_small_r_asymptotics(self):
        # i_l(r) / r^l -> 1/(2l+1)!! as r -> 0
        r = 1e-3
        dfact = 1.0
        for ell in range(6):
            if ell > 0:
                dfact *= 2 * ell + 1
            got = sphere.bessel_i(ell, r).value / r**ell
            assert got == pytest.approx(1.0 / dfact, rel=1e-5)

    def test_underflow_flagged(self):
        val = sphere.bessel_i(280, 1e-2)
        assert val.underflow
        assert val.value == 0.0

    def test_order_range(self):
        with pytest.raises(InvalidParams):
            sphere.bessel_i(-1, 0.5)
        with pytest.raises(InvalidParams):
            sphere.bessel_i(301, 0.5)
        with pytest.raises(InvalidParams):
            sphere.bessel_i(2, 0.0)


class TestNtDSpectrum:
    def test_lambda0_closed_form(self):
        spec = sphere.ntd_spectrum(4)
        assert spec.lam[0] == pytest.approx(LAMBDA0, rel=1e-12)

    def test_lambda1_closed_form(self):
        spec = sphere.ntd_spectrum(4)
        assert spec.lam[1] == pytest.approx(LAMBDA1, rel=1e-12)

    def test_monotone_positive_decay(self):
        spec = sphere.ntd_spectrum(64)
        assert np.all(spec.lam > 0.0)
        assert np.all(np.diff(spec.lam) < 0.0)
        assert spec.lam[64] < 0.02

    def test_contraction_above_degree_one(self):
        spec = sphere.ntd_spectrum(64)
        assert np.all(spec.lam[2:] < 1.0)

    def test_survives_value_underflow(self):
        # i_l(1) underflows near l = 150; the ratio route keeps lambda_l
        # finite, positive and ~ 1/l out there.
        spec = sphere.ntd_spectrum(256)
        assert np.all(np.isfinite(spec.lam))
        assert np.all(spec.lam > 0.0)
        assert spec.lam[256] == pytest.approx(1.0 / 256.0, rel=0.01)


class TestHarmonicExtension:
    def test_constant_trace_profile(self):
        g = sphere.build_grid(4)
        c = np.zeros(sphere.num_coeffs(4))
        c[0] = math.sqrt(4.0 * math.pi) * 2.5  # trace == 2.5
        hc = sphere.HarmonicCoeffs(4, c)
        for r in (0.2, 0.7, 1.0):
            vals = sphere.harmonic_extension(hc, r, g)
            expect = 2.5 * math.sinh(r) / (r * math.sinh(1.0))
            assert np.max(np.abs(vals - expect)) < 1e-12

    def test_identity_at_boundary(self):
        g = sphere.build_grid(6)
        rng = np.random.default_rng(8)
        hc = sphere.HarmonicCoeffs(6, rng.standard_normal(sphere.num_coeffs(6)))
        vals = sphere.harmonic_extension(hc, 1.0, g)
        assert np.max(np.abs(vals - sphere.synthesize(g, hc))) < 1e-12

    def test_interior_maximum_principle(self):
        g = sphere.build_grid(12)
        spec = sphere.ntd_spectrum(12)
        rng = np.random.default_rng(9)
        for seed in range(5):
            c = rng.standard_normal(sphere.num_coeffs(12))
            trace = sphere.HarmonicCoeffs(12, c).scaled_by_degree(spec.lam)
            over = sphere.build_grid(36)
            sup = np.max(np.abs(sphere.synthesize(over, trace)))
            for r in np.arange(0.1, 0.95, 0.1):
                vals = sphere.harmonic_extension(trace, float(r), g)
                assert np.max(np.abs(vals)) <= sup + 1e-9

    def test_radius_validation(self):
        hc = sphere.HarmonicCoeffs(2, np.zeros(9))
        for r in (0.0, -0.5, 1.5):
            with pytest.raises(InvalidParams):
                sphere.harmonic_extension(hc, r)


def test_radial_profiles_match_scipy():
    p, dp = sphere.radial_profiles(24, 0.6)
    for ell in range(25):
        denom = spherical_in(ell, 1.0)
        assert p[ell] == pytest.approx(spherical_in(ell, 0.6) / denom, rel=1e-11)
        assert dp[ell] == pytest.approx(
            spherical_in(ell, 0.6, derivative=True) / denom, rel=1e-11)

import numpy as np
import pytest
from scipy.integrate import quad

from vesselflow import errors
from vesselflow.closures import (coriolis, gamma_chain_factor, pressure,
                                 pressure_products, pressure_source_gradients,
                                 source_terms)
from vesselflow.geometry import PhysicalConstants

GS, GT = 9.0, 2.0


class TestStraightLimits:
    # closed forms at Gamma = 0 for the production profile exponents
    def test_psi_so(self):
        assert abs(float(coriolis(0.0, GS, GT).psi_so) - 1.0) < 1e-12

    def test_psi_s1(self):
        assert abs(float(coriolis(0.0, GS, GT).psi_s1) - 1.1) < 1e-12

    def test_psi_s2(self):
        assert abs(float(coriolis(0.0, GS, GT).psi_s2) - 77.0 / 78.0) < 1e-12

    def test_psi_th1(self):
        assert abs(float(coriolis(0.0, GS, GT).psi_th1) - 143.0 / 168.0) < 1e-12

    def test_psi_th2(self):
        assert abs(float(coriolis(0.0, GS, GT).psi_th2) - 15.0 / 14.0) < 1e-12

    def test_a_theta(self):
        assert abs(float(coriolis(0.0, GS, GT).a_theta_over_r2) - 8.0 / 15.0) < 1e-12


def test_psi_so_curved_value():
    # 1 - (44/36) Gamma + (11/26) Gamma^2 at Gamma = 0.1
    val = float(coriolis(0.1, GS, GT).psi_so)
    assert val == pytest.approx(0.882008547008547, abs=1e-12)


def test_finite_on_gamma_range():
    g = np.linspace(-1.0, 1.0, 2001)
    cl = coriolis(g, GS, GT)
    for name in ("psi_so", "psi_s1", "psi_s2", "psi_th1", "psi_th2",
                 "a_theta_over_r2"):
        assert np.all(np.isfinite(getattr(cl, name))), name


def test_derivatives_match_finite_differences():
    h = 1e-6
    g = np.linspace(-0.9, 0.9, 181)
    cl = coriolis(g, GS, GT)
    clp = coriolis(g + h, GS, GT)
    clm = coriolis(g - h, GS, GT)
    pairs = [("psi_so", "d_psi_so"), ("psi_s1", "d_psi_s1"),
             ("psi_s2", "d_psi_s2"), ("psi_th1", "d_psi_th1"),
             ("psi_th2", "d_psi_th2"), ("a_theta_over_r2", "d_a_theta_over_r2")]
    for val, der in pairs:
        fd = (getattr(clp, val) - getattr(clm, val)) / (2 * h)
        an = getattr(cl, der)
        err = np.abs(fd - an) / np.maximum(1.0, np.abs(an))
        assert np.max(err) < 1e-6, val


def test_chain_factor_matches_geometry():
    # A dGamma/dA from the cubic area map, checked by finite differences of
    # Gamma(A) along fixed (theta, alpha')
    from vesselflow.geometry import radius_from_area
    k = 20.0
    r0 = 0.02
    a0 = r0**2 / 2 - k * r0**3 / 3
    da = a0 * 1e-7
    g_of = lambda a: radius_from_area(a, np.pi / 2, k) * k
    fd = (g_of(a0 + da) - g_of(a0 - da)) / (2 * da) * a0
    gamma0 = r0 * k
    assert fd == pytest.approx(float(gamma_chain_factor(gamma0)), rel=1e-6)


class TestPressure:
    def test_rest_state(self):
        p = pressure(2e-4, 2e-4, 5e4, 2.0)
        assert p.p == 0.0 and p.p_hat == 0.0 and p.p_bar == 0.0

    def test_quadruple_area(self):
        p = pressure(8e-4, 2e-4, 5e4, 2.0)
        assert p.p == pytest.approx(3 * 5e4, rel=1e-14)

    def test_dp_da_beta2(self):
        p = pressure(2e-4, 2e-4, 5e4, 2.0)
        assert p.dp_dA == pytest.approx(5e4 / 2e-4, rel=1e-14)

    def test_collapsed_raises(self):
        with pytest.raises(errors.CollapsedVesselError):
            pressure(0.0, 2e-4, 5e4, 2.0)

    def test_splitting_identity_random(self):
        rng = np.random.default_rng(11)
        a = rng.uniform(1e-6, 1e-3, 10_000)
        a_o = rng.uniform(1e-6, 1e-3, 10_000)
        g_o = rng.uniform(1e3, 1e5, 10_000)
        beta = rng.uniform(1.1, 4.0, 10_000)
        p = pressure(a, a_o, g_o, beta)
        lhs = p.p_hat + p.p_bar
        # a few ulps of headroom for the reassociation in p_hat + (p - p_hat)
        scale = np.maximum.reduce([np.abs(p.p), np.abs(p.p_hat), np.abs(p.p_bar)])
        assert np.max(np.abs(lhs - p.p) / np.maximum(scale, 1.0)) < 5e-14

    def test_p_hat_equals_defining_integral(self):
        # p_hat = (1/A) int_{A_o}^{A} x dp/dx dx, by adaptive quadrature
        rng = np.random.default_rng(5)
        for _ in range(25):
            a_o = rng.uniform(1e-5, 5e-4)
            a = a_o * rng.uniform(0.3, 3.0)
            g_o = rng.uniform(1e3, 1e5)
            beta = rng.uniform(1.2, 3.5)
            dp = lambda x: g_o * (beta / 2.0) * x ** (beta / 2.0 - 1.0) / a_o ** (beta / 2.0)
            val, _ = quad(lambda x: x * dp(x), a_o, a, epsabs=0.0, epsrel=1e-11)
            p = pressure(a, a_o, g_o, beta)
            assert val / a == pytest.approx(float(p.p_hat), rel=1e-8)

    def test_products_consistent_with_pressure(self):
        rng = np.random.default_rng(8)
        a = rng.uniform(1e-6, 1e-3, 100)
        a_o = rng.uniform(1e-6, 1e-3, 100)
        g_o = rng.uniform(1e3, 1e5, 100)
        for beta in (2.0, 2.7):
            ap_hat, ap_bar, dp_da = pressure_products(a, a_o, g_o, beta)
            p = pressure(a, a_o, g_o, beta)
            assert np.allclose(ap_hat, a * p.p_hat, rtol=1e-12)
            assert np.allclose(ap_bar, a * p.p_bar, rtol=1e-12)
            assert np.allclose(dp_da, p.dp_dA, rtol=1e-12)

    def test_products_regular_when_collapsed(self):
        ap_hat, ap_bar, dp_da = pressure_products(0.0, 2e-4, 5e4, 2.0)
        assert ap_hat == pytest.approx(-0.5 * 5e4 * 2e-4, rel=1e-14)
        assert np.isfinite(dp_da)


class TestSourceGradients:
    def test_uniform_parameters(self):
        ap_hat, ap_bar, _ = pressure_products(3e-4, 2e-4, 5e4, 2.0)
        d2, d3 = pressure_source_gradients(ap_hat, ap_bar, 2e-4, 5e4,
                                           0.0, 0.0, 0.0, 0.0)
        assert d2 == 0.0 and d3 == 0.0

    def test_rest_state_any_parameters(self):
        ap_hat, ap_bar, _ = pressure_products(2e-4, 2e-4, 5e4, 2.0)
        d2, d3 = pressure_source_gradients(ap_hat, ap_bar, 2e-4, 5e4,
                                           123.0, -7.0, 1e-3, 2e-3)
        assert d2 == 0.0 and d3 == 0.0

    def test_against_finite_difference_in_s(self):
        # d2 p_bar at fixed A for tapered A_o(s) and constant G_o
        g_o, beta = 5e4, 2.0
        a = 1.5e-4
        a_o = lambda s: 2e-4 * (1.0 - 0.5 * s)
        s0, h = 0.2, 1e-6
        p_bar = lambda s: (pressure(a, a_o(s), g_o, beta).p_bar)
        fd = (p_bar(s0 + h) - p_bar(s0 - h)) / (2 * h)
        da_o_ds = (a_o(s0 + h) - a_o(s0 - h)) / (2 * h)
        ap_hat, ap_bar, _ = pressure_products(a, a_o(s0), g_o, beta)
        d2, _ = pressure_source_gradients(ap_hat, ap_bar, a_o(s0), g_o,
                                          0.0, 0.0, da_o_ds, 0.0)
        assert d2 / a == pytest.approx(fd, rel=1e-6)


class TestSourceTerms:
    consts = PhysicalConstants()

    def _call(self, **kw):
        base = dict(a=2e-4, r=0.02, gamma=0.0, u=0.0, ll=0.0,
                    a_d2_pbar=0.0, a_d3_pbar=0.0, sin_alpha=0.0,
                    alpha_prime=0.0, alpha_pp=0.0, sin_theta=1.0,
                    cos_theta=0.0, constants=self.consts)
        base.update(kw)
        return source_terms(**base)

    def test_rest_horizontal_is_zero(self):
        s2, s3 = self._call()
        assert s2 == 0.0 and s3 == 0.0

    def test_axial_friction_coefficient(self):
        # gamma_s = 9, Gamma = 0, A = R^2/2: coefficient 11 on u
        u = 0.37
        r = 0.02
        s2, _ = self._call(a=r * r / 2, r=r, u=u)
        nu_rho = self.consts.nu / self.consts.rho
        assert s2 == pytest.approx(-nu_rho * 11.0 * u, rel=1e-12)

    def test_angular_friction_coefficient(self):
        # gamma_theta = 2, Gamma = 0, A = R^2/2: coefficient 3*5*6/16 = 5.625 on L
        ll = 0.011
        r = 0.02
        _, s3 = self._call(a=r * r / 2, r=r, ll=ll)
        nu_rho = self.consts.nu / self.consts.rho
        assert s3 == pytest.approx(-nu_rho * 5.625 * ll, rel=1e-12)

    def test_gravity_term(self):
        s2, _ = self._call(sin_alpha=1.0)
        assert s2 == pytest.approx(-self.consts.g * 2e-4, rel=1e-14)

    def test_curvature_terms_signs(self):
        # axial curvature source carries sin(theta) alpha'' u^2
        r = 0.02
        a = r * r / 2
        k = 8.0 * 11.0**2 / (12.0 * 21.0)
        s2, _ = self._call(a=a, r=r, u=1.0, alpha_pp=2.0, sin_theta=1.0)
        fric = -(self.consts.nu / self.consts.rho) * 11.0
        assert s2 - fric == pytest.approx(-k * (a / r) ** 2 * r * 2.0, rel=1e-12)
        _, s3 = self._call(a=a, r=r, u=1.0, alpha_prime=3.0, cos_theta=1.0,
                           sin_theta=0.0)
        assert s3 == pytest.approx(-k * (a / r) ** 2 * r * 3.0, rel=1e-12)

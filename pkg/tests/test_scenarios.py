import numpy as np
import pytest
from scipy.optimize import brentq

from vesselflow import PhysicalConstants
from vesselflow import scenarios as scn
from vesselflow.closures import pressure
from vesselflow.errors import ConfigError
from vesselflow.scenarios import (InletWaveform, PerturbationSpec,
                                  ScenarioConfig, initial_condition,
                                  inlet_velocity, perturbation_ratio,
                                  scenario_preset, steady_diagnostics)


class TestInlet:
    def test_constant_waveform(self):
        wf = InletWaveform(period=1.0, cos_coefficients=(0.5,),
                           sin_coefficients=(0.0,))
        t = np.linspace(0, 3, 50)
        assert np.allclose(inlet_velocity(wf, t), 0.5, rtol=0, atol=0)

    def test_periodicity(self):
        wf = InletWaveform()
        t = np.linspace(0, 1, 37)
        assert np.allclose(inlet_velocity(wf, t), inlet_velocity(wf, t + wf.period),
                           rtol=1e-12, atol=1e-14)

    def test_default_pulse_peak(self):
        wf = InletWaveform()
        t = np.linspace(0, wf.period, 200_001)
        u = inlet_velocity(wf, t)
        assert abs(u.max() - 1.0) < 0.01
        # positive base flow keeps the vessel pressurized through diastole
        assert u.min() > 0.0

    def test_empty_coefficients(self):
        with pytest.raises(ConfigError):
            InletWaveform(cos_coefficients=(), sin_coefficients=())


class TestInitialCondition:
    def test_rest_is_bitwise_rest(self):
        cfg = scenario_preset("horizontal_tapered", n_s=20, n_theta=8,
                              initial_condition="rest", perturbation=None)
        geom = scn.build_geometry(cfg)
        field = initial_condition(cfg, geom)
        assert np.array_equal(field.a, geom.a_o_c)
        assert not field.q1.any() and not field.q2.any()
        p = pressure(field.a, geom.a_o_c, geom.g_o_c, cfg.constants.beta)
        assert not np.asarray(p.p).any()

    def test_perturbation_center_value_exact(self):
        cfg = scenario_preset("horizontal_tapered", n_s=40, n_theta=16)
        geom = scn.build_geometry(cfg)
        spec = cfg.perturbation
        # at the exact center d = 0 and sin(pi/2) = 1: ratio = 1.2
        val = perturbation_ratio(spec.s_center, spec.theta_center, spec, geom)
        assert float(val) == pytest.approx(1.2, abs=1e-14)

    def test_perturbation_far_field_exactly_rest(self):
        cfg = scenario_preset("horizontal_tapered", n_s=60, n_theta=24)
        geom = scn.build_geometry(cfg)
        field = initial_condition(cfg, geom)
        # outside the bump support the state is bitwise the rest state
        s_c = geom.grid.s_centers
        far = np.abs(s_c - 0.25) > 0.05
        assert np.array_equal(field.a[far], geom.a_o_c[far])

    def test_perturbation_grid_peak(self):
        cfg = scenario_preset("horizontal_tapered")  # 200 x 90
        geom = scn.build_geometry(cfg)
        field = initial_condition(cfg, geom)
        ratio = np.sqrt(field.a / geom.a_o_c)  # straight: R = sqrt(2A)
        assert ratio.max() == pytest.approx(1.2, abs=2e-3)
        assert ratio.min() == pytest.approx(1.0, abs=0)

    def test_center_outside_domain(self):
        cfg = scenario_preset("horizontal_tapered", n_s=16, n_theta=8,
                              perturbation=PerturbationSpec(s_center=0.9,
                                                            theta_center=0.0))
        geom = scn.build_geometry(cfg)
        with pytest.raises(ConfigError):
            initial_condition(cfg, geom)


class TestConfigInvariants:
    def test_inlet_iff_dirichlet(self):
        with pytest.raises(ConfigError):
            scenario_preset("aorta_base", n_s=8, n_theta=8, inlet=None)
        with pytest.raises(ConfigError):
            scenario_preset("horizontal_tapered", n_s=8, n_theta=8,
                            inlet=InletWaveform())

    def test_probe_range(self):
        with pytest.raises(ConfigError):
            scenario_preset("horizontal_tapered", n_s=8, n_theta=8,
                            probe_s=(0.9,), initial_condition="rest",
                            perturbation=None)

    def test_end_time_positive(self):
        with pytest.raises(ConfigError):
            scenario_preset("horizontal_tapered", n_s=8, n_theta=8,
                            end_time=0.0, initial_condition="rest",
                            perturbation=None)


def build_steady_state(geom, constants, u_inlet=0.3):
    """Constant-discharge, constant-energy smooth steady state on a tapered
    straight vessel, solved per axial station by bracketed root finding."""
    a_in = float(geom.a_o_c[0, 0])
    q1 = a_in * u_inlet
    cl_ps1 = 1.1
    g_in = float(geom.g_o_c[0, 0])
    energy = cl_ps1 * u_inlet**2 / 2.0
    a_prof = np.empty(geom.grid.n_s)
    for j in range(geom.grid.n_s):
        a_o = float(geom.a_o_c[j, 0])
        g_o = float(geom.g_o_c[j, 0])

        def balance(a):
            u = q1 / a
            p = g_o * (a / a_o - 1.0)
            return cl_ps1 * u * u / 2.0 + p / constants.rho - energy

        a_prof[j] = brentq(balance, 0.2 * a_o, 3.0 * a_o, xtol=1e-18, rtol=1e-15)
    return q1, energy, a_prof


class TestSteadyDiagnostics:
    def test_rest_energy_is_elevation(self):
        cfg = scenario_preset("horizontal_tapered", n_s=16, n_theta=8,
                              initial_condition="rest", perturbation=None)
        geom = scn.build_geometry(cfg)
        field = initial_condition(cfg, geom)
        diag = steady_diagnostics(field, geom, cfg.constants)
        assert np.allclose(diag.q1, 0.0, atol=0)
        assert np.allclose(diag.energy, 0.0, atol=1e-16)

    def test_constructed_steady_state_constant(self):
        constants = PhysicalConstants(nu=0.0)
        cfg = scenario_preset("horizontal_tapered", n_s=64, n_theta=8,
                              constants=constants, initial_condition="rest",
                              perturbation=None)
        geom = scn.build_geometry(cfg)
        q1, energy, a_prof = build_steady_state(geom, constants)
        field = initial_condition(cfg, geom)
        field.a = np.repeat(a_prof[:, None], 8, axis=1)
        field.q1 = np.full_like(field.a, q1)
        diag = steady_diagnostics(field, geom, constants)
        assert diag.q1_drift < 1e-12
        assert np.allclose(diag.q1, q1, rtol=1e-12)
        assert np.allclose(diag.energy, energy, rtol=1e-10)

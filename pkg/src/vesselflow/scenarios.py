"""Executable scenario configurations: presets, initial states, inlet waveform,
and the smooth-steady-state diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import ConfigError
from .geometry import (GridSpec, PhysicalConstants, VesselGeometry,
                       area_from_radius, radius_from_area, weighted_distance)
from .scheme import ConservedField

# Synthetic default inlet pulse: 0.2 m/s base flow (mean aortic velocity)
# plus a 0.3 s squared-sine systolic burst, projected on 15 Fourier terms and
# normalized to a 1.0 m/s peak.  The base flow keeps the vessel pressurized
# through diastole.  A repository choice, not a measured waveform.
DEFAULT_PULSE_COS = (
    0.291471250716, 0.138520083625, -0.060863444549, -0.136675805302,
    -0.071621179601, 0.0, 0.009378963995, -0.003263728908,
    -0.002045830069, 0.002226696274, 0.0, -0.001158684402,
    0.000542817789, 0.000421724728, -0.000541094077,
)
DEFAULT_PULSE_SIN = (
    0.0, 0.190656538723, 0.187318421303, 0.044408661141,
    -0.052035832886, -0.042412882579, -0.006814216211, -0.001060449805,
    -0.006296417523, -0.003064784495, 0.0, -0.001594792263,
    -0.001670621372, -0.000137026671, -0.000393127858,
)
DEFAULT_PULSE_PERIOD = 1.0

PROBE_THETAS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)


@dataclass(frozen=True)
class InletWaveform:
    """Truncated Fourier series u_in(t) with period t_period."""

    period: float = DEFAULT_PULSE_PERIOD
    cos_coefficients: tuple = DEFAULT_PULSE_COS
    sin_coefficients: tuple = DEFAULT_PULSE_SIN

    def __post_init__(self):
        if len(self.cos_coefficients) == 0:
            raise ConfigError("inlet waveform needs at least the constant coefficient")
        if len(self.sin_coefficients) != len(self.cos_coefficients):
            raise ConfigError("inlet waveform coefficient lists must have equal length")
        if not self.period > 0:
            raise ConfigError("inlet waveform period must be positive")

    def __call__(self, t):
        return inlet_velocity(self, t)


def inlet_velocity(waveform: InletWaveform, t):
    """Evaluate the inlet Fourier series at time t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    omega0 = 2.0 * np.pi / waveform.period
    out = np.full_like(t, waveform.cos_coefficients[0], dtype=float)
    for n in range(1, len(waveform.cos_coefficients)):
        out = out + (waveform.cos_coefficients[n] * np.cos(n * omega0 * t)
                     + waveform.sin_coefficients[n] * np.sin(n * omega0 * t))
    return out[()] if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class PerturbationSpec:
    """Localized radius bump: R -> (1 + amplitude sin((1 - d/d0) pi/2)) R_o."""

    s_center: float
    theta_center: float
    amplitude: float = 0.2
    x_weight: float = 0.25


@dataclass(frozen=True)
class OutputPlan:
    """Probe cadence (steps or seconds) and snapshot times."""

    probe_every_steps: int | None = None
    probe_every_seconds: float | None = None
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.probe_every_steps is not None and self.probe_every_steps < 1:
            raise ConfigError("probe_every_steps must be >= 1")
        if self.probe_every_seconds is not None and self.probe_every_seconds <= 0:
            raise ConfigError("probe_every_seconds must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str
    grid: GridSpec
    constants: PhysicalConstants = PhysicalConstants()
    bc_left: str = "neumann"
    bc_right: str = "neumann"
    inlet: InletWaveform | None = None
    initial_condition: str = "rest"
    perturbation: PerturbationSpec | None = None
    probe_s: tuple = ()
    probe_theta: tuple = ()
    end_time: float = 0.1
    max_steps: int | None = None
    output: OutputPlan = OutputPlan()
    custom_geometry: dict | None = None

    def __post_init__(self):
        if not self.end_time > 0:
            raise ConfigError("end_time must be positive")
        if (self.bc_left == "dirichlet_inlet") != (self.inlet is not None):
            raise ConfigError("an inlet waveform is required iff bc_left is dirichlet_inlet")
        if self.initial_condition not in ("rest", "radius_perturbation"):
            raise ConfigError(f"unknown initial condition {self.initial_condition!r}")
        if self.initial_condition == "radius_perturbation" and self.perturbation is None:
            raise ConfigError("radius_perturbation needs a perturbation spec")
        for s in self.probe_s:
            if not 0.0 <= s <= self.grid.s_length:
                raise ConfigError(f"probe s={s} outside [0, {self.grid.s_length}]")
        if self.preset == "custom":
            if self.custom_geometry is None:
                raise ConfigError("preset 'custom' needs geometry tables")
        elif self.preset not in geo.PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")


def scenario_preset(name: str, n_s=None, n_theta=None, **overrides) -> ScenarioConfig:
    """Scenario with the published defaults for one of the named presets."""
    if name == "horizontal_tapered":
        grid = GridSpec(n_s or 200, n_theta or 90, 0.5)
        base = dict(
            preset=name, grid=grid,
            bc_left="neumann", bc_right="neumann",
            initial_condition="radius_perturbation",
            perturbation=PerturbationSpec(s_center=0.25, theta_center=math.pi / 4.0),
            end_time=0.1,
            output=OutputPlan(probe_every_steps=50,
                              snapshot_times=(0.0005, 0.001, 0.0045, 0.005, 0.1)),
        )
    elif name in ("aorta_base", "aorta_bulge", "aorta_vortex"):
        grid = GridSpec(n_s or 200, n_theta or 180, geo.AORTA_LENGTH)
        base = dict(
            preset=name, grid=grid,
            bc_left="dirichlet_inlet", bc_right="neumann",
            inlet=InletWaveform(),
            initial_condition="rest",
            probe_s=(0.2110,), probe_theta=PROBE_THETAS,
            end_time=2.0,
            output=OutputPlan(probe_every_steps=20, snapshot_times=(0.2, 0.3, 0.4)),
        )
    else:
        raise ConfigError(f"unknown scenario preset {name!r}")
    base.update(overrides)
    return ScenarioConfig(**base)


def build_geometry(config: ScenarioConfig) -> VesselGeometry:
    if config.preset == "custom":
        tabs = config.custom_geometry
        return geo.build_custom_geometry(
            config.grid, tabs["s"], tabs["alpha"], tabs["r_o"], tabs["g_o"],
            eccentricity=tabs.get("eccentricity", 0.0))
    return geo.build_scenario_geometry(config.preset, config.grid, config.constants)


def perturbation_ratio(s, theta, spec: PerturbationSpec, geom: VesselGeometry):
    """The radius ratio field of the localized bump (1 outside its support)."""
    r_at = lambda q, th: geom.r_o_fn(np.clip(q, 0.0, geom.grid.s_length), th)
    centerline = lambda q: (geom.x_o_fn(q), geom.z_o_fn(q))
    d = weighted_distance(s, theta, spec.s_center, spec.theta_center, r_at,
                          lambda q: geom.alpha_fn(np.clip(q, 0.0, geom.grid.s_length)),
                          centerline, x_weight=spec.x_weight)
    d0 = float(r_at(spec.s_center, spec.theta_center))
    inside = d <= d0
    arg = (1.0 - np.where(inside, d, d0) / d0) * (np.pi / 2.0)
    return np.where(inside, 1.0 + spec.amplitude * np.sin(arg), 1.0)


def initial_condition(config: ScenarioConfig, geom: VesselGeometry) -> ConservedField:
    """Rest state A = A_o, or the localized radius perturbation on top of it.

    Outside the perturbation support the field is bitwise equal to the rest
    state, so the far field carries no spurious transients.
    """
    a_rest = geom.a_o_c.copy()
    q1 = np.zeros_like(a_rest)
    q2 = np.zeros_like(a_rest)
    if config.initial_condition == "rest":
        return ConservedField(a_rest, q1, q2, 0.0)

    spec = config.perturbation
    if not 0.0 <= spec.s_center <= config.grid.s_length:
        raise ConfigError("perturbation center outside the vessel")
    s_c = geom.grid.s_centers[:, None]
    th_c = geom.theta_c[None, :]
    ratio = perturbation_ratio(s_c, th_c, spec, geom)
    r_rest = radius_from_area(a_rest, th_c, geom.alpha_prime_c[:, None])
    perturbed = ratio != 1.0
    a = np.where(perturbed,
                 area_from_radius(ratio * r_rest, th_c, geom.alpha_prime_c[:, None]),
                 a_rest)
    return ConservedField(a, q1, q2, 0.0)


@dataclass(frozen=True)
class SteadyDiagnostics:
    """Per-column discharge and energy with their relative spreads across s."""

    s: np.ndarray
    q1: np.ndarray
    energy: np.ndarray
    q1_drift: float
    energy_drift: float


def steady_diagnostics(field: ConservedField, geom: VesselGeometry,
                       constants: PhysicalConstants) -> SteadyDiagnostics:
    """Discharge Q1 = A u and energy psi_s1 u^2/2 + p/rho + g z_o per column.

    Meaningful for straight, inviscid, axial flows where both are s-invariant;
    the caller is responsible for running it on such a configuration.
    """
    from . import closures as cls

    r = radius_from_area(field.a, geom.theta_c[None, :], geom.alpha_prime_c[:, None])
    gamma = r * np.sin(geom.theta_c)[None, :] * geom.alpha_prime_c[:, None]
    closures = cls.coriolis(gamma, constants.gamma_s, constants.gamma_theta)
    u = field.q1 / (closures.psi_so * field.a)
    press = cls.pressure(field.a, geom.a_o_c, geom.g_o_c, constants.beta)
    z_o = np.sin(geom.alpha_c)[:, None] * geom.grid.s_centers[:, None]
    energy = closures.psi_s1 * u * u / 2.0 + press.p / constants.rho + constants.g * z_o
    q1_col = (field.a * u).mean(axis=-1)
    e_col = energy.mean(axis=-1)

    def drift(x):
        scale = max(abs(float(np.mean(x))), 1e-300)
        return float(np.max(np.abs(x - np.mean(x))) / scale)

    return SteadyDiagnostics(s=geom.grid.s_centers, q1=q1_col, energy=e_col,
                             q1_drift=drift(q1_col), energy_drift=drift(e_col))

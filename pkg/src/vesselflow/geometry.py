"""Vessel geometry: grids, cross-section change of variables, and scenario presets.

The vessel centerline lies in the x-z plane, parametrized by arclength s with
tilt angle alpha(s) against the horizontal axis.  A point at radius r and
angle theta in the cross section at s sits at

    x = x_o(s) - r sin(alpha) sin(theta)
    y = r cos(theta)
    z = z_o(s) + r cos(alpha) sin(theta)

with Jacobian |J| = r (1 - r sin(theta) alpha'(s)).  The radially integrated
Jacobian A = R^2/2 - R^3 sin(theta) alpha'/3 is the conserved "area-like"
variable; the map is valid while R |alpha'| < 1 (radius below the radius of
curvature of the centerline).

All internal quantities are SI (m, Pa, s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GeometryError, NumericError

GHOST_LAYERS = 2

# Idealized aorta segments: length, end radii, end pulse-wave speeds.
# Lengths/radii in cm, speeds in m/s; converted to SI on use.
AORTA_SEGMENTS_CM = [
    # length, r_left, r_right, c_left, c_right
    (7.0357, 1.52, 1.39, 4.77, 4.91),
    (0.8, 1.39, 1.37, 4.91, 4.93),
    (0.9, 1.37, 1.35, 4.93, 4.94),
    (6.4737, 1.35, 1.23, 4.94, 5.09),
    (15.2, 1.23, 0.99, 5.09, 5.43),
    (1.8, 0.99, 0.97, 5.43, 5.46),
    (0.7, 0.97, 0.962, 5.46, 5.48),
    (0.7, 0.962, 0.955, 5.48, 5.49),
    (4.3, 0.955, 0.907, 5.49, 5.57),
    (4.3, 0.907, 0.86, 5.57, 5.66),
]

AORTA_LENGTH = sum(seg[0] for seg in AORTA_SEGMENTS_CM) * 1e-2  # 0.422094 m
AORTA_BEND_LENGTH = 12.63e-2  # arch: alpha ramps pi/2 -> -pi/2 over this span
AORTA_ECCENTRICITY = 0.4

TAPERED_AREA_STAR = 0.0082**2        # (0.82 cm)^2, rest value of A at s=0
TAPERED_FACTOR = 0.5                 # 0.005 cm^-1 tapering rate
TAPERED_WAVE_SPEED = 5.0             # m/s; sets uniform G_o (not pinned by the model)

PRESETS = ("horizontal_tapered", "aorta_base", "aorta_bulge", "aorta_vortex")


@dataclass(frozen=True)
class GridSpec:
    """Structured (s, theta) grid; theta covers [0, 2pi) periodically."""

    n_s: int
    n_theta: int
    s_length: float
    ghost_layers: int = GHOST_LAYERS

    def __post_init__(self):
        if self.n_s < 4 or self.n_theta < 4:
            raise ConfigError(f"grid too small: n_s={self.n_s}, n_theta={self.n_theta} (need >= 4)")
        if not self.s_length > 0:
            raise ConfigError(f"s_length must be positive, got {self.s_length}")
        if self.ghost_layers != GHOST_LAYERS:
            raise ConfigError("ghost_layers is fixed at 2")

    @property
    def delta_s(self) -> float:
        return self.s_length / self.n_s

    @property
    def delta_theta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def s_centers(self) -> np.ndarray:
        return (np.arange(self.n_s) + 0.5) * self.delta_s

    @property
    def s_interfaces(self) -> np.ndarray:
        return np.arange(self.n_s + 1) * self.delta_s

    @property
    def theta_centers(self) -> np.ndarray:
        return (np.arange(self.n_theta) + 0.5) * self.delta_theta

    @property
    def theta_interfaces(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.delta_theta


@dataclass(frozen=True)
class PhysicalConstants:
    """Fluid and wall-law constants (SI)."""

    rho: float = 1050.0        # blood density, kg/m^3
    nu: float = 4.0e-3         # dynamic viscosity, Pa s (4 cP)
    g: float = 9.81            # gravity, m/s^2
    beta: float = 2.0          # stress-strain exponent
    gamma_s: float = 9.0       # axial profile exponent
    gamma_theta: float = 2.0   # angular profile exponent

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.nu < 0:
            raise ConfigError(f"nu must be nonnegative, got {self.nu}")
        if not self.beta > 1:
            raise ConfigError(f"beta must exceed 1, got {self.beta}")
        if not self.gamma_s > 0:
            raise ConfigError(f"gamma_s must be positive, got {self.gamma_s}")
        if self.gamma_theta < 1:
            raise ConfigError(f"gamma_theta must be >= 1, got {self.gamma_theta}")


def area_from_radius(r, theta, alpha_prime):
    """Radially integrated Jacobian A(R) = R^2/2 - R^3 sin(theta) alpha'/3.

    Strictly increasing in R while R |alpha'| < 1; raises GeometryError if any
    sample violates that validity bound.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise GeometryError("negative radius")
    if np.any(r * np.abs(alpha_prime) >= 1.0):
        raise GeometryError("radius exceeds radius of curvature (R |alpha'| >= 1)")
    return r * r / 2.0 - (r**3 / 3.0) * np.sin(theta) * alpha_prime


def gamma_parameter(r, theta, alpha_prime):
    """Dimensionless curvature parameter R sin(theta) alpha'(s)."""
    return np.asarray(r, dtype=float) * np.sin(theta) * alpha_prime


def radius_from_area(a, theta, alpha_prime, max_iter=100):
    """Invert A(R) for the unique root in [0, 1/|alpha'|).

    Newton iteration seeded at sqrt(2A) with absolute tolerance
    1e-12 * max(1, sqrt(2A)); falls back to bisection on
    [0, 0.999/|alpha'|] where Newton stalls.  Closed form sqrt(2A) when
    sin(theta) * alpha' = 0.
    """
    a = np.asarray(a, dtype=float)
    k = np.sin(theta) * alpha_prime
    return _invert_area(a, np.broadcast_to(np.asarray(k, dtype=float), a.shape),
                        np.broadcast_to(np.asarray(alpha_prime, dtype=float), a.shape),
                        max_iter=max_iter)


def _invert_area(a, k, alpha_prime, max_iter=100):
    """Vectorized inversion of A = R^2/2 - k R^3/3 with k = sin(theta) alpha'."""
    scalar = np.ndim(a) == 0
    a = np.atleast_1d(np.asarray(a, dtype=float))
    k2 = np.atleast_1d(np.asarray(k, dtype=float)) * np.ones_like(a)
    ap2 = np.abs(np.atleast_1d(np.asarray(alpha_prime, dtype=float))) * np.ones_like(a)
    r = invert_area_masked(a, k2, ap2, k2 != 0.0, max_iter=max_iter)
    return r[()] if scalar else r


def invert_area_masked(a, k2d, absap2d, curved_mask, max_iter=100):
    """Radius inversion where ``curved_mask`` marks the entries with k != 0.

    The mask and the k/|alpha'| grids span the trailing axes of ``a`` so that
    leading batch dimensions ride along for free; straight entries use the
    closed form sqrt(2A).
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise GeometryError(f"negative area in radius inversion (min {a.min():.3e})")
    r = np.sqrt(2.0 * a)
    if not curved_mask.any():
        return r

    av = a[..., curved_mask]
    kv = np.asarray(k2d, dtype=float)[curved_mask]
    apv = np.asarray(absap2d, dtype=float)[curved_mask]

    # Feasibility: the root must stay below 0.999 / |alpha'|.
    r_hi = 0.999 / np.maximum(apv, 1e-300)
    a_hi = r_hi * r_hi / 2.0 - kv * r_hi**3 / 3.0
    if np.any(av > a_hi):
        raise GeometryError("area too large for the curvature bound (no root below 1/|alpha'|)")

    seed = r[..., curved_mask]
    tol = 1e-12 * np.maximum(1.0, seed)
    rv = seed.copy()
    converged = False
    for _ in range(max_iter):
        f = rv * rv * 0.5 - kv * rv**3 / 3.0 - av
        fp = rv * (1.0 - kv * rv)
        step = f / np.where(fp > 0.0, fp, 1.0)
        step = np.where(fp > 0.0, step, 0.0)
        rv = rv - step
        if np.all(np.abs(step) <= tol):
            converged = np.all((rv >= 0.0) & (kv * rv < 1.0))
            if converged:
                break
    if not converged:
        lo = np.zeros_like(rv)
        hi = r_hi * np.ones_like(rv)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = mid * mid * 0.5 - kv * mid**3 / 3.0 - av
            above = fm > 0.0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        rv = 0.5 * (lo + hi)
        res = np.abs(rv * rv * 0.5 - kv * rv**3 / 3.0 - av)
        if np.any(res > 1e-9 * np.maximum(av, 1.0)):
            raise NumericError("radius inversion failed to converge")

    rv = np.where(av == 0.0, 0.0, rv)
    r[..., curved_mask] = rv
    return r


def wall_position(r, s, theta, alpha, x_o, z_o):
    """Cartesian position of the point at radius r, station s, angle theta."""
    sa, ca = np.sin(alpha), np.cos(alpha)
    st, ct = np.sin(theta), np.cos(theta)
    return (x_o - r * sa * st, r * ct, z_o + r * ca * st)


class VesselGeometry:
    """Sampled vessel geometry on an extended (ghosted) structured grid.

    Parameters live at interfaces: alpha at s-interfaces, R_o and G_o at
    (s-interface, theta-center) and (s-center, theta-interface) points.
    Cell-center R_o and G_o are 4-point interface averages; cell-center A_o is
    the 4-point average of the interface A_o values, which keeps the discrete
    rest state exactly consistent with the reconstruction budget used by the
    positivity correction.

    Array layout: axis 0 runs over the extended s range with 2 ghost cells on
    each side (cells -2..n_s+1); axis 1 runs over theta.  Interface arrays in s
    have one more row than cell arrays.  Ghost samples are taken with s clamped
    to [0, s_length].
    """

    def __init__(self, grid: GridSpec, alpha_fn, r_o_fn, g_o_fn,
                 x_o_fn=None, z_o_fn=None):
        self.grid = grid
        self.alpha_fn = alpha_fn
        self.r_o_fn = r_o_fn
        self.g_o_fn = g_o_fn
        if x_o_fn is None or z_o_fn is None:
            x_o_fn, z_o_fn = _integrate_centerline(alpha_fn, grid.s_length)
        self.x_o_fn = x_o_fn
        self.z_o_fn = z_o_fn
        self._sample()
        self._validate()

    def _sample(self):
        grid = self.grid
        ng = grid.ghost_layers
        ds, n_s, n_th = grid.delta_s, grid.n_s, grid.n_theta
        # Ghost stations sample the analytic parameter functions beyond
        # [0, s_length]; the preset functions extrapolate smoothly, which keeps
        # boundary reconstructions consistent with the interior trend.

        self.theta_c = grid.theta_centers
        self.theta_if = grid.theta_interfaces
        self.sin_theta_c = np.sin(self.theta_c)
        self.cos_theta_c = np.cos(self.theta_c)
        self.sin_theta_if = np.sin(self.theta_if)
        self.cos_theta_if = np.cos(self.theta_if)

        # Extended s stations: cells -2..n_s+1, interfaces -2..n_s+2, with one
        # extra interface/cell on each side to form centered differences.
        if_idx = np.arange(-(ng + 1), n_s + ng + 2)          # interfaces, 1 spare each side
        s_if_wide = if_idx * ds
        alpha_if_wide = np.asarray(self.alpha_fn(s_if_wide), dtype=float)
        alpha_c_wide = 0.5 * (alpha_if_wide[:-1] + alpha_if_wide[1:])   # cells -3/2 offset
        # centered difference of cell-center alpha gives alpha' at interfaces
        ap_if_wide = (alpha_c_wide[1:] - alpha_c_wide[:-1]) / ds

        self.s_if_ext = s_if_wide[1:-1]                      # interfaces -2..n_s+2
        self.alpha_if_ext = alpha_if_wide[1:-1]
        self.alpha_prime_if_ext = ap_if_wide                 # same stations
        self.s_c_ext = 0.5 * (self.s_if_ext[:-1] + self.s_if_ext[1:])
        self.alpha_c_ext = alpha_c_wide[1:-1]                # cells -2..n_s+1
        self.alpha_prime_c_ext = (self.alpha_if_ext[1:] - self.alpha_if_ext[:-1]) / ds
        self.alpha_pp_c_ext = (ap_if_wide[1:] - ap_if_wide[:-1]) / ds

        s_if_cl = self.s_if_ext
        s_c_cl = self.s_c_ext
        self.r_o_sif_ext = np.asarray(
            self.r_o_fn(s_if_cl[:, None], self.theta_c[None, :]), dtype=float)
        self.g_o_sif_ext = np.asarray(
            self.g_o_fn(s_if_cl[:, None], self.theta_c[None, :]), dtype=float)
        self.r_o_tif_ext = np.asarray(
            self.r_o_fn(s_c_cl[:, None], self.theta_if[None, :]), dtype=float)
        self.g_o_tif_ext = np.asarray(
            self.g_o_fn(s_c_cl[:, None], self.theta_if[None, :]), dtype=float)

        self.a_o_sif_ext = area_from_radius(
            self.r_o_sif_ext, self.theta_c[None, :], self.alpha_prime_if_ext[:, None])
        self.a_o_tif_ext = area_from_radius(
            self.r_o_tif_ext, self.theta_if[None, :], self.alpha_prime_c_ext[:, None])

        roll = lambda arr: np.roll(arr, -1, axis=1)
        self.r_o_c_ext = 0.25 * ((self.r_o_sif_ext[:-1] + self.r_o_sif_ext[1:])
                                 + (self.r_o_tif_ext + roll(self.r_o_tif_ext)))
        self.g_o_c_ext = 0.25 * ((self.g_o_sif_ext[:-1] + self.g_o_sif_ext[1:])
                                 + (self.g_o_tif_ext + roll(self.g_o_tif_ext)))
        # Cell A_o as the same 4-point average; the sum order here must match
        # the reconstruction budget sum in scheme.reconstruct exactly.
        self.a_o_c_ext = 0.25 * ((self.a_o_sif_ext[:-1] + self.a_o_sif_ext[1:])
                                 + (self.a_o_tif_ext + roll(self.a_o_tif_ext)))

        sl = slice(ng, ng + n_s)
        self.a_o_c = self.a_o_c_ext[sl]
        self.r_o_c = self.r_o_c_ext[sl]
        self.g_o_c = self.g_o_c_ext[sl]
        self.alpha_c = self.alpha_c_ext[sl]
        self.sin_alpha_c = np.sin(self.alpha_c)
        self.alpha_prime_c = self.alpha_prime_c_ext[sl]
        self.alpha_pp_c = self.alpha_pp_c_ext[sl]
        # flux interfaces 0..n_s
        fsl = slice(ng, ng + n_s + 1)
        self.a_o_sif = self.a_o_sif_ext[fsl]
        self.g_o_sif = self.g_o_sif_ext[fsl]
        self.r_o_sif = self.r_o_sif_ext[fsl]
        self.alpha_prime_if = self.alpha_prime_if_ext[fsl]
        self.a_o_tif = self.a_o_tif_ext[sl]
        self.g_o_tif = self.g_o_tif_ext[sl]
        self.r_o_tif = self.r_o_tif_ext[sl]

        # parameter gradients at cell centers (centered interface differences)
        dth = grid.delta_theta
        self.dg_o_ds = (self.g_o_sif[1:] - self.g_o_sif[:-1]) / ds
        self.da_o_ds = (self.a_o_sif[1:] - self.a_o_sif[:-1]) / ds
        self.dg_o_dth = (roll(self.g_o_tif) - self.g_o_tif) / dth
        self.da_o_dth = (roll(self.a_o_tif) - self.a_o_tif) / dth

        self.a_o_max = float(self.a_o_sif_ext.max())
        self.mean_r_o = float(self.r_o_sif.mean())
        self.is_straight = bool(
            np.all(self.alpha_prime_if_ext == 0.0) and np.all(self.alpha_prime_c_ext == 0.0))

        # precomputed k = sin(theta) alpha' and |alpha'| grids for the hot path
        self.k_sif = self.sin_theta_c[None, :] * self.alpha_prime_if[:, None]
        self.k_tif = self.sin_theta_if[None, :] * self.alpha_prime_c[:, None]
        self.k_c = self.sin_theta_c[None, :] * self.alpha_prime_c[:, None]
        self.k_c_ext = self.sin_theta_c[None, :] * self.alpha_prime_c_ext[:, None]
        ones_th = np.ones((1, n_th))
        self.absap_sif = np.abs(self.alpha_prime_if)[:, None] * ones_th
        self.absap_tif = np.abs(self.alpha_prime_c)[:, None] * ones_th
        self.absap_c = self.absap_tif
        self.absap_c_ext = np.abs(self.alpha_prime_c_ext)[:, None] * ones_th

    def _validate(self):
        if np.any(self.r_o_sif_ext <= 0) or np.any(self.r_o_tif_ext <= 0):
            raise GeometryError("rest radius must be positive everywhere")
        if np.any(self.g_o_sif_ext <= 0) or np.any(self.g_o_tif_ext <= 0):
            raise GeometryError("elasticity coefficient must be positive everywhere")
        checks = [
            (self.r_o_sif_ext, self.alpha_prime_if_ext[:, None]),
            (self.r_o_tif_ext, self.alpha_prime_c_ext[:, None]),
            (self.r_o_c_ext, self.alpha_prime_c_ext[:, None]),
        ]
        for r, ap in checks:
            prod = r * np.abs(ap)
            if np.any(prod >= 1.0):
                raise GeometryError(
                    f"rest radius exceeds radius of curvature (max R|alpha'| = {prod.max():.4f})")

    def interior(self, cell_array):
        """Strip the s ghost layers from an extended cell array."""
        ng = self.grid.ghost_layers
        return cell_array[..., ng:ng + self.grid.n_s, :]


def _integrate_centerline(alpha_fn, s_length, n=4001):
    """Centerline (x_o, z_o) by cumulative trapezoid of (cos alpha, sin alpha)."""
    s = np.linspace(0.0, s_length, n)
    ca, sa = np.cos(alpha_fn(s)), np.sin(alpha_fn(s))
    h = s[1] - s[0]
    x = np.concatenate([[0.0], np.cumsum(0.5 * (ca[1:] + ca[:-1]) * h)])
    z = np.concatenate([[0.0], np.cumsum(0.5 * (sa[1:] + sa[:-1]) * h)])
    x_fn = lambda q: np.interp(np.clip(q, 0.0, s_length), s, x)
    z_fn = lambda q: np.interp(np.clip(q, 0.0, s_length), s, z)
    return x_fn, z_fn


# ---------------------------------------------------------------------------
# scenario presets


def _ellipse_shape(theta, xi):
    """Cross-section shape factor h(theta); identically 1 for xi = 0."""
    return np.sqrt((1.0 - xi**2 * np.sin(theta) ** 2) / (1.0 - xi**2))


def _aorta_tables(rho):
    bp = np.concatenate([[0.0], np.cumsum([seg[0] for seg in AORTA_SEGMENTS_CM])]) * 1e-2
    radii = np.array([AORTA_SEGMENTS_CM[0][1]] + [seg[2] for seg in AORTA_SEGMENTS_CM]) * 1e-2
    speeds = np.array([AORTA_SEGMENTS_CM[0][3]] + [seg[4] for seg in AORTA_SEGMENTS_CM])

    def r_star(s):
        return np.interp(s, bp, radii)

    def g_star(s):
        # G_o = (4/3) E_Y h_d / r_d with E_Y = (3/2) rho (r_d/h_d) c_d^2,
        # which collapses to 2 rho c_d^2.
        return 2.0 * rho * np.interp(s, bp, speeds) ** 2

    return r_star, g_star


def aorta_alpha(s):
    """Arch tilt: linear ramp pi/2 -> -pi/2 over the bend, constant after."""
    s = np.asarray(s, dtype=float)
    ramp = (1.0 - 2.0 * s / AORTA_BEND_LENGTH) * (np.pi / 2.0)
    return np.where(s <= AORTA_BEND_LENGTH, ramp, -np.pi / 2.0)


def aorta_centerline(s):
    """Analytic (x_o, z_o) for the arch ramp plus the straight descent."""
    s = np.asarray(s, dtype=float)
    sb = AORTA_BEND_LENGTH
    al = aorta_alpha(np.minimum(s, sb))
    x_bend = (1.0 - np.sin(al)) * sb / np.pi
    z_bend = np.cos(al) * sb / np.pi
    x = np.where(s <= sb, x_bend, (1.0 - np.sin(-np.pi / 2)) * sb / np.pi)
    z = np.where(s <= sb, z_bend, -(s - sb))
    return x, z


def weighted_distance(s, theta, s_star, theta_star, r_at, alpha_fn, centerline_fn,
                      x_weight=1.0):
    """Distance between wall points at (s, theta) and (s*, theta*).

    ``r_at(s, theta)`` supplies the wall radius; the x-term may carry a
    fractional weight (0.25 for the bulge-style perturbations).
    """
    x_o, z_o = centerline_fn(s)
    xs, ys, zs = wall_position(r_at(s, theta), s, theta, alpha_fn(s), x_o, z_o)
    x_oc, z_oc = centerline_fn(np.asarray(s_star, dtype=float))
    xc, yc, zc = wall_position(r_at(s_star, theta_star), np.asarray(s_star, dtype=float),
                               theta_star, alpha_fn(np.asarray(s_star, dtype=float)), x_oc, z_oc)
    return np.sqrt(x_weight * (xc - xs) ** 2 + (yc - ys) ** 2 + (zc - zs) ** 2)


def _bulge_profile(d, radius, amplitude):
    """Smooth bump factor: amplitude * sin((1 - d/radius) pi/2) inside d <= radius."""
    inside = d <= radius
    arg = (1.0 - np.where(inside, d, radius) / radius) * (np.pi / 2.0)
    return np.where(inside, amplitude * np.sin(arg), 0.0)


def _aorta_fns(preset, rho):
    r_star, g_star = _aorta_tables(rho)
    xi = AORTA_ECCENTRICITY

    def base_r(s, theta):
        return r_star(s) * _ellipse_shape(theta, xi)

    def base_g(s, theta):
        s_b, _ = np.broadcast_arrays(np.asarray(s, dtype=float),
                                     np.asarray(theta, dtype=float))
        return g_star(s_b)

    centerline = lambda s: aorta_centerline(s)

    if preset == "aorta_base":
        return base_r, base_g, centerline

    if preset == "aorta_bulge":
        s_star, theta_star, x_weight, r_amp = 0.21, 1.5 * np.pi, 0.25, 0.2
    elif preset == "aorta_vortex":
        s_star, theta_star, x_weight, r_amp = 0.05, np.pi, 1.0, 0.75
    else:
        raise ConfigError(f"unknown aorta preset {preset!r}")

    def dist(s, theta):
        return weighted_distance(s, theta, s_star, theta_star, base_r,
                                 aorta_alpha, centerline, x_weight=x_weight)

    def r_o(s, theta):
        base = base_r(s, theta)
        return (1.0 + _bulge_profile(dist(s, theta), base_r(s, theta), r_amp)) * base

    def g_o(s, theta):
        base = base_g(s, theta)
        return (1.0 - _bulge_profile(dist(s, theta), base_r(s, theta), 0.5)) * base

    return r_o, g_o, centerline


def build_scenario_geometry(preset: str, grid: GridSpec,
                            constants: PhysicalConstants | None = None) -> VesselGeometry:
    """Build the sampled geometry for one of the named scenario presets."""
    constants = constants or PhysicalConstants()
    if preset == "horizontal_tapered":
        g_o_val = 2.0 * constants.rho * TAPERED_WAVE_SPEED**2

        def r_o(s, theta):
            s_b, _ = np.broadcast_arrays(np.asarray(s, dtype=float),
                                         np.asarray(theta, dtype=float))
            return np.sqrt(2.0 * TAPERED_AREA_STAR * (1.0 - s_b * TAPERED_FACTOR))

        def g_o(s, theta):
            return np.full(np.broadcast_shapes(np.shape(s), np.shape(theta)), g_o_val)

        alpha = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        x_o = lambda s: np.asarray(s, dtype=float)
        z_o = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        return VesselGeometry(grid, alpha, r_o, g_o, x_o_fn=x_o, z_o_fn=z_o)

    if preset in ("aorta_base", "aorta_bulge", "aorta_vortex"):
        if abs(grid.s_length - AORTA_LENGTH) > 1e-9:
            raise ConfigError(
                f"aorta presets require s_length = {AORTA_LENGTH:.6f} m, got {grid.s_length}")
        r_o, g_o, centerline = _aorta_fns(preset, constants.rho)
        x_o = lambda s: centerline(s)[0]
        z_o = lambda s: centerline(s)[1]
        return VesselGeometry(grid, aorta_alpha, r_o, g_o, x_o_fn=x_o, z_o_fn=z_o)

    raise ConfigError(f"unknown geometry preset {preset!r} (expected one of {PRESETS})")


def build_custom_geometry(grid: GridSpec, s_table, alpha_table, r_o_table, g_o_table,
                          eccentricity=0.0) -> VesselGeometry:
    """Geometry from tabulated interface samples, linearly interpolated in s."""
    s_table = np.asarray(s_table, dtype=float)
    if s_table.ndim != 1 or len(s_table) < 2 or np.any(np.diff(s_table) <= 0):
        raise ConfigError("custom geometry s samples must be strictly increasing, length >= 2")
    for name, tab in (("alpha", alpha_table), ("r_o", r_o_table), ("g_o", g_o_table)):
        if len(np.asarray(tab)) != len(s_table):
            raise ConfigError(f"custom geometry {name} table length mismatch")
    alpha_t = np.asarray(alpha_table, dtype=float)
    r_t = np.asarray(r_o_table, dtype=float)
    g_t = np.asarray(g_o_table, dtype=float)
    xi = float(eccentricity)
    if not 0.0 <= xi < 1.0:
        raise ConfigError("eccentricity must lie in [0, 1)")

    alpha = lambda s: np.interp(s, s_table, alpha_t)
    r_o = lambda s, theta: np.interp(s, s_table, r_t) * _ellipse_shape(theta, xi)

    def g_o(s, theta):
        s_b, _ = np.broadcast_arrays(np.asarray(s, dtype=float),
                                     np.asarray(theta, dtype=float))
        return np.interp(s_b, s_table, g_t)

    return VesselGeometry(grid, alpha, r_o, g_o)

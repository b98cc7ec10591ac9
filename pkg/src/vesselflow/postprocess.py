"""Physical-space reconstruction (3D wall velocity field) and file writers.

Outputs: probe CSV series, VTK legacy ASCII structured-grid snapshots, and a
flat key=value run manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import VesselflowError
from .geometry import PhysicalConstants, VesselGeometry, radius_from_area, wall_position
from .scheme import ConservedField, _recover

PROBE_HEADER = "t,s,theta,R,R_over_Ro,u,omega,p,U_Tang"
RC_DENOM_FLOOR = 1e-14


def tangential_velocity(omega, r, gamma, gamma_theta=2.0):
    """Radially averaged linear tangential velocity (1/A) int r V_theta |J| dr.

    For the power-law angular profile the integral collapses to
    omega * R * (a1 - b1 Gamma) / (c1 - a1 Gamma); the coefficients come from
    the beta-function moments of the profile (unit-tested against quadrature).
    """
    gt = float(gamma_theta)
    a1 = (2.0 * gt + 3.0) / ((gt + 1.0) * (gt + 2.0) * (gt + 3.0))
    b1 = 2.0 * (gt + 2.0) / ((gt + 1.0) * (gt + 3.0) * (gt + 4.0))
    c1 = 2.0 / ((gt + 1.0) * (gt + 2.0))
    return omega * r * (a1 - b1 * np.asarray(gamma)) / (c1 - a1 * np.asarray(gamma))


@dataclass
class SurfaceSample:
    """Cell-centered wall samples: positions, velocity, and scalar channels."""

    s: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    velocity: np.ndarray          # (3, n_s, n_theta)
    r_over_ro: np.ndarray
    u: np.ndarray
    p: np.ndarray
    u_tang: np.ndarray
    degenerate: np.ndarray        # curvature-radius fallback mask


def surface_velocity_field(field: ConservedField, geom: VesselGeometry,
                           constants: PhysicalConstants) -> SurfaceSample:
    """Wall positions and the two-term 3D velocity at every cell center.

    The tangential frame uses the cross-section curvature radius computed from
    periodic centered theta-differences of R; where its denominator degenerates
    the sample keeps only the axial term and is flagged.
    """
    grid = geom.grid
    a_th = 1e-10 * geom.a_o_max
    st = _recover(field.a, field.q1, field.q2, geom.k_c, geom.absap_c,
                  geom.a_o_c, geom.g_o_c, constants, a_th,
                  straight=geom.is_straight)
    r = st.r
    r_o = radius_from_area(geom.a_o_c, geom.theta_c[None, :], geom.alpha_prime_c[:, None])
    dth = grid.delta_theta
    r_up, r_dn = np.roll(r, -1, axis=-1), np.roll(r, 1, axis=-1)
    r_t = (r_up - r_dn) / (2.0 * dth)
    r_tt = (r_up - 2.0 * r + r_dn) / dth**2

    wet = r > 0.0
    r_safe = np.where(wet, r, 1.0)
    q = np.where(wet, r_t / r_safe, 0.0)
    denom = 1.0 + 2.0 * q * q - np.where(wet, r_tt / r_safe, 0.0)
    degenerate = np.abs(denom) < RC_DENOM_FLOOR
    r_c = r * (1.0 + q * q) ** 1.5 / np.where(degenerate, 1.0, denom)

    u_tang = tangential_velocity(st.omega, r, st.gamma, constants.gamma_theta)
    alpha = geom.alpha_c[:, None]
    sa, ca = np.sin(alpha), np.cos(alpha)
    sth, cth = geom.sin_theta_c[None, :], geom.cos_theta_c[None, :]
    axial = np.stack([ca * np.ones_like(r), np.zeros_like(r), sa * np.ones_like(r)])
    frame = np.stack([-sa * (cth + q * sth), -sth + q * cth, ca * (cth + q * sth)])
    pref = np.where(degenerate | ~wet, 0.0,
                    (r_c / r_safe) / np.sqrt(1.0 + q * q))
    velocity = axial * st.u[None] + frame * (pref * u_tang)[None]

    x_o = geom.x_o_fn(grid.s_centers)[:, None]
    z_o = geom.z_o_fn(grid.s_centers)[:, None]
    x, y, z = wall_position(r, grid.s_centers[:, None], geom.theta_c[None, :],
                            alpha, x_o, z_o)
    p = geom.g_o_c * ((field.a / geom.a_o_c) ** (constants.beta / 2.0) - 1.0)
    return SurfaceSample(
        s=grid.s_centers, theta=geom.theta_c, r=r, x=x, y=y, z=z,
        velocity=velocity, r_over_ro=r / r_o, u=st.u, p=p, u_tang=u_tang,
        degenerate=degenerate)


def _cell_to_corner(arr):
    """Average cell values to (n_s+1, n_theta+1) corners.

    theta wraps, so the first and last corner columns are the duplicated seam;
    the s ends use one-sided (copied-edge) averages.
    """
    padded = np.concatenate([arr[:1], arr, arr[-1:]], axis=0)
    wrap = np.concatenate([padded[:, -1:], padded, padded[:, :1]], axis=1)
    return 0.25 * (wrap[:-1, :-1] + wrap[:-1, 1:] + wrap[1:, :-1] + wrap[1:, 1:])


def write_vtk_snapshot(path, sample: SurfaceSample, title="vesselflow surface"):
    """VTK legacy ASCII STRUCTURED_GRID with the SurfaceSample point channels.

    Points sit at cell corners: (n_s+1) x (n_theta+1) with the theta seam
    duplicated so viewers close the tube.
    """
    n_s1 = len(sample.s) + 1
    n_t1 = len(sample.theta) + 1
    xs = _cell_to_corner(sample.x)
    ys = _cell_to_corner(sample.y)
    zs = _cell_to_corner(sample.z)
    n_pts = n_s1 * n_t1
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {n_t1} {n_s1} 1",
        f"POINTS {n_pts} double",
    ]
    fmt = "%.17g"
    for j in range(n_s1):
        for k in range(n_t1):
            lines.append(f"{fmt % xs[j, k]} {fmt % ys[j, k]} {fmt % zs[j, k]}")
    lines.append(f"POINT_DATA {n_pts}")
    for name, arr in (("R_over_Ro", sample.r_over_ro), ("u", sample.u),
                      ("p", sample.p), ("U_Tang", sample.u_tang)):
        corner = _cell_to_corner(arr)
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        for j in range(n_s1):
            for k in range(n_t1):
                lines.append(fmt % corner[j, k])
    vx = _cell_to_corner(sample.velocity[0])
    vy = _cell_to_corner(sample.velocity[1])
    vz = _cell_to_corner(sample.velocity[2])
    lines.append("VECTORS velocity double")
    for j in range(n_s1):
        for k in range(n_t1):
            lines.append(f"{fmt % vx[j, k]} {fmt % vy[j, k]} {fmt % vz[j, k]}")
    _write_text(path, "\n".join(lines) + "\n")


def probe_rows(field: ConservedField, geom: VesselGeometry,
               constants: PhysicalConstants, probe_s, probe_theta):
    """One CSV row per probe: nearest-cell samples of the probe channels.

    Probes sitting exactly on an interface resolve to the lower cell index.
    """
    rows = []
    if not probe_s or not probe_theta:
        return rows
    a_th = 1e-10 * geom.a_o_max
    st = _recover(field.a, field.q1, field.q2, geom.k_c, geom.absap_c,
                  geom.a_o_c, geom.g_o_c, constants, a_th,
                  straight=geom.is_straight)
    gamma = np.broadcast_to(np.asarray(st.gamma), field.a.shape)
    r_o = radius_from_area(geom.a_o_c, geom.theta_c[None, :],
                           geom.alpha_prime_c[:, None])
    for s_p in probe_s:
        j = int(np.argmin(np.abs(geom.grid.s_centers - s_p)))
        for th_p in probe_theta:
            dist = np.abs((geom.theta_c - th_p + np.pi) % (2.0 * np.pi) - np.pi)
            k = int(np.argmin(dist))
            a = field.a[j, k]
            p = geom.g_o_c[j, k] * ((a / geom.a_o_c[j, k]) ** (constants.beta / 2.0) - 1.0)
            u_tang = tangential_velocity(st.omega[j, k], st.r[j, k], gamma[j, k],
                                         constants.gamma_theta)
            rows.append((field.time, s_p, th_p, float(st.r[j, k]),
                         float(st.r[j, k] / r_o[j, k]), float(st.u[j, k]),
                         float(st.omega[j, k]), float(p), float(u_tang)))
    return rows


def write_probe_csv(path, rows):
    """Probe series as CSV with 17 significant digits, dot decimal."""
    fmt = "%.17g"
    lines = [PROBE_HEADER]
    for row in rows:
        lines.append(",".join(fmt % v for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def write_manifest(path, entries: dict):
    """Flat key=value manifest (config echo, version, timing, step count)."""
    lines = [f"{key}={value}" for key, value in entries.items()]
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path, text):
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise VesselflowError(f"failed writing {path}: {exc}") from exc

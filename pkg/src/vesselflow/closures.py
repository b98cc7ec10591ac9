"""Velocity-profile closures, the elastic pressure law, and source terms.

The axial profile is Hagen-Poiseuille-like with exponent gamma_s and the
angular profile vanishes at the center with exponent gamma_theta.  Radial
integration of those profiles turns every momentum-flux shape factor into an
explicit rational function of the curvature parameter Gamma = R sin(theta)
alpha'(s); Gamma = 0 recovers the straight-vessel constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ClosureSingularityError, CollapsedVesselError

DENOM_FLOOR = 1e-14


@dataclass(frozen=True)
class ClosureSet:
    """Shape factors and their Gamma-derivatives at a given Gamma.

    ``a_theta_over_r2`` is A_theta / R^2, so A_theta itself is recovered by
    multiplying with the local R^2.
    """

    gamma: np.ndarray
    psi_so: np.ndarray
    psi_s1: np.ndarray
    psi_s2: np.ndarray
    psi_th1: np.ndarray
    psi_th2: np.ndarray
    a_theta_over_r2: np.ndarray
    d_psi_so: np.ndarray
    d_psi_s1: np.ndarray
    d_psi_s2: np.ndarray
    d_psi_th1: np.ndarray
    d_psi_th2: np.ndarray
    d_a_theta_over_r2: np.ndarray


def coriolis(gamma, gamma_s=9.0, gamma_theta=2.0) -> ClosureSet:
    """Evaluate all six closure coefficients and their Gamma-derivatives."""
    g = np.asarray(gamma, dtype=float)
    gs, gt = float(gamma_s), float(gamma_theta)

    cso1 = 4.0 * (gs + 2.0) / (3.0 * (gs + 3.0))
    cso2 = (gs + 2.0) / (2.0 * (gs + 4.0))
    psi_so = 1.0 - cso1 * g + cso2 * g * g
    d_psi_so = -cso1 + 2.0 * cso2 * g

    k1 = (gs + 2.0) / (gs + 1.0)
    c11 = 2.0 * (2.0 * gs + 2.0) * (gs + 2.0) / (3.0 * (2.0 * gs + 3.0) * (gs + 3.0))
    psi_s1 = k1 * (1.0 - 2.0 * g / 3.0) * (1.0 - c11 * g)
    d_psi_s1 = k1 * (-(2.0 / 3.0) * (1.0 - c11 * g) - c11 * (1.0 - 2.0 * g / 3.0))

    # shared denominators of the angular-profile moments
    c_a = (2.0 * gt + 3.0) / (2.0 * (gt + 3.0))
    c_b = (gt + 3.0) * (2.0 * gt + 5.0) / (2.0 * (gt + 2.0) * (gt + 5.0))
    den_a = 1.0 - c_a * g
    den_b = 1.0 - c_b * g
    if np.any(np.abs(den_a) < DENOM_FLOOR) or np.any(np.abs(den_b) < DENOM_FLOOR):
        raise ClosureSingularityError("closure denominator vanished")

    k2 = (gs + 2.0) / gs * (
        1.0 - (gt + 2.0) * (2.0 * gt + gs + 2.0)
        / (2.0 * (gt + gs + 1.0) * (gt + gs + 2.0)))
    p21 = (2.0 * (gt + gs + 1.0) * (3.0 * gt**2 + 2.0 * gt * gs + 11.0 * gt + 3.0 * gs + 9.0)
           / ((gt + 3.0) * (gt + gs + 3.0) * (3.0 * gt + 2.0 * gs + 4.0)))
    p22 = ((gt + 2.0) * (gt + gs + 1.0) * (gt + gs + 2.0)
           * (3.0 * gt**2 + 2.0 * gs * gt + 15.0 * gt + 4.0 * gs + 16.0)
           / ((gt + 3.0) * (gt + 4.0) * (gt + gs + 3.0) * (gt + gs + 4.0)
              * (3.0 * gt + 2.0 * gs + 4.0)))
    poly2 = 1.0 - p21 * g + p22 * g * g
    n2 = (1.0 - 2.0 * g / 3.0) * poly2
    dn2 = -(2.0 / 3.0) * poly2 + (1.0 - 2.0 * g / 3.0) * (-p21 + 2.0 * p22 * g)
    psi_s2 = k2 * n2 / den_a
    d_psi_s2 = k2 * (dn2 * den_a + c_a * n2) / (den_a * den_a)

    k3 = (gs + 2.0) / gs * (
        1.0 - (gt + 3.0) * (gt + 4.0) * (2.0 * gt + gs + 4.0)
        / (2.0 * (gt + 2.0) * (gt + gs + 3.0) * (gt + gs + 4.0)))
    psi_th1 = k3 * (1.0 - 2.0 * g / 3.0) / den_b
    d_psi_th1 = k3 * (-(2.0 / 3.0) * den_b + c_b * (1.0 - 2.0 * g / 3.0)) / (den_b * den_b)

    k4 = ((gt + 3.0) * (gt + 4.0) * (5.0 * gt + 6.0)
          / (16.0 * (gt + 2.0) * (2.0 * gt + 3.0)))
    c41 = 2.0 * (5.0 * gt**2 + 14.0 * gt + 10.0) / ((2.0 * gt + 5.0) * (5.0 * gt + 6.0))
    n4 = (1.0 - 2.0 * g / 3.0) * (1.0 - c41 * g)
    dn4 = -(2.0 / 3.0) * (1.0 - c41 * g) - c41 * (1.0 - 2.0 * g / 3.0)
    d4 = den_a * den_b
    dd4 = -c_a * den_b - c_b * den_a
    psi_th2 = k4 * n4 / d4
    d_psi_th2 = k4 * (dn4 * d4 - n4 * dd4) / (d4 * d4)

    k5 = (gt + 2.0) ** 2 / ((gt + 3.0) * (gt + 4.0))
    a_theta_over_r2 = k5 * den_b / den_a
    d_a_theta_over_r2 = k5 * (c_a - c_b) / (den_a * den_a)

    return ClosureSet(
        gamma=g,
        psi_so=psi_so, psi_s1=psi_s1, psi_s2=psi_s2,
        psi_th1=psi_th1, psi_th2=psi_th2, a_theta_over_r2=a_theta_over_r2,
        d_psi_so=d_psi_so, d_psi_s1=d_psi_s1, d_psi_s2=d_psi_s2,
        d_psi_th1=d_psi_th1, d_psi_th2=d_psi_th2,
        d_a_theta_over_r2=d_a_theta_over_r2,
    )


@lru_cache(maxsize=16)
def coriolis_straight(gamma_s, gamma_theta) -> ClosureSet:
    """Cached straight-vessel (Gamma = 0) closure constants."""
    return coriolis(0.0, gamma_s, gamma_theta)


def gamma_chain_factor(gamma):
    """A * dGamma/dA for states with consistent (A, R, Gamma).

    From A = R^2 (1/2 - Gamma/3) and Gamma linear in R:
    dR/dA = 1/(R (1 - Gamma)), dGamma/dA = Gamma/(R^2 (1 - Gamma)), hence
    A dGamma/dA = Gamma (3 - 2 Gamma) / (6 (1 - Gamma)).
    """
    g = np.asarray(gamma, dtype=float)
    den = 1.0 - g
    if np.any(np.abs(den) < DENOM_FLOOR):
        raise ClosureSingularityError("chain-rule denominator vanished (Gamma -> 1)")
    return g * (3.0 - 2.0 * g) / (6.0 * den)


@dataclass(frozen=True)
class PressureState:
    """Transmural pressure, its conservative/residual split, and d p / d A."""

    p: np.ndarray
    p_hat: np.ndarray
    p_bar: np.ndarray
    dp_dA: np.ndarray


def pressure(a, a_o, g_o, beta) -> PressureState:
    """Elastic wall law p = G_o ((A/A_o)^(beta/2) - 1) with its splitting.

    p_hat is the conservative part entering the fluxes, p_bar the residual
    entering the sources; p = p_hat + p_bar and p(A_o) = 0.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0.0):
        raise CollapsedVesselError("pressure evaluation at non-positive cross section")
    ratio_pow = (a / a_o) ** (beta / 2.0)
    p = g_o * (ratio_pow - 1.0)
    w = beta / (beta + 2.0)
    p_hat = w * p - w * g_o * (a_o - a) / a
    p_bar = p - p_hat
    dp_dA = g_o * (beta / 2.0) * ratio_pow / a
    return PressureState(p=p, p_hat=p_hat, p_bar=p_bar, dp_dA=dp_dA)


def pressure_products(a, a_o, g_o, beta):
    """(A p_hat, A p_bar, dp/dA), every piece regular down to A = 0.

    The products stay finite at a collapsed section
    (A p_hat -> -beta/(beta+2) G_o A_o), which the flux and source assembly
    rely on in dry cells; dp/dA is finite at A = 0 for beta >= 2.
    """
    a = np.asarray(a, dtype=float)
    if beta == 2.0:
        ratio_pow = a / a_o
        dp_da = g_o / a_o * np.ones_like(a)
    else:
        ratio_pow = np.power(a / a_o, beta / 2.0)
        dp_da = g_o * (beta / 2.0) * np.power(a, beta / 2.0 - 1.0) / np.power(a_o, beta / 2.0)
    pa = g_o * (ratio_pow - 1.0) * a
    w = beta / (beta + 2.0)
    ap_hat = w * (pa - g_o * (a_o - a))
    ap_bar = pa - ap_hat
    return ap_hat, ap_bar, dp_da


def pressure_source_gradients(ap_hat, ap_bar, a_o, g_o, dg_o_ds, dg_o_dth,
                              da_o_ds, da_o_dth):
    """(A d2 p_bar, A d3 p_bar) from the parameter gradients of G_o and A_o.

    Written with the products A p_hat, A p_bar so the result stays regular in
    dry cells; divide by A for the pointwise gradients where A > 0.
    """
    a_d2 = (ap_bar / g_o) * dg_o_ds - (ap_hat / a_o) * da_o_ds
    a_d3 = (ap_bar / g_o) * dg_o_dth - (ap_hat / a_o) * da_o_dth
    return a_d2, a_d3


def source_terms(a, r, gamma, u, ll, a_d2_pbar, a_d3_pbar, sin_alpha,
                 alpha_prime, alpha_pp, sin_theta, cos_theta, constants,
                 r_collapse=1e-6):
    """Momentum source densities (S2, S3): pressure-parameter terms, gravity,
    centerline-curvature transfer, and wall friction.

    Friction uses 2A/R^2 with R clamped at ``r_collapse`` so near-dry cells
    stay finite; the recovered velocities are zero there anyway.
    """
    gs, gt = constants.gamma_s, constants.gamma_theta
    nu_rho = constants.nu / constants.rho
    rho = constants.rho

    r_safe = np.maximum(r, r_collapse)
    two_a_r2 = 2.0 * a / (r_safe * r_safe)
    a_r = a / r_safe

    k_curv = 8.0 * (gs + 2.0) ** 2 / ((gs + 3.0) * (2.0 * gs + 3.0))
    fric_s = -(gs + 2.0) * (1.0 - gamma) ** 2 * two_a_r2 * u
    c_b = (gt + 3.0) * (2.0 * gt + 5.0) / (2.0 * (gt + 2.0) * (gt + 5.0))
    fric_th = (-(gt + 1.0) * (gt + 3.0) * (gt + 4.0) / (4.0 * (gt + 2.0))
               * ((1.0 - gamma) / (1.0 - c_b * gamma)) * two_a_r2 * ll)

    s2 = (-a_d2_pbar / rho
          - constants.g * a * sin_alpha
          - k_curv * a_r * a_r * r * sin_theta * alpha_pp * u * u
          + nu_rho * fric_s)
    s3 = (-a_d3_pbar / rho
          - k_curv * a_r * a_r * r * cos_theta * alpha_prime * u * u
          + nu_rho * fric_th)
    return s2, s3

"""Quasilinear structure: coefficient matrices, closed-form wave speeds,
eigenvectors, and the conditional-hyperbolicity checks.

Both coefficient matrices have a column with two zero entries, so their
spectra split into one advective eigenvalue plus a 2x2 block with closed-form
roots.  The closed forms are cross-checked against a numeric
characteristic-polynomial oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closures import ClosureSet, coriolis, gamma_chain_factor
from .errors import HyperbolicityError

DEGENERATE_REL = 1e-10


@dataclass(frozen=True)
class WaveSpeeds:
    """Closed-form eigenvalues of the axial and angular coefficient matrices."""

    lambda0_s: np.ndarray
    lambdaP_s: np.ndarray
    lambdaM_s: np.ndarray
    lambda0_th: np.ndarray
    lambdaP_th: np.ndarray
    lambdaM_th: np.ndarray
    upsilon1: np.ndarray
    upsilon2: np.ndarray


def wave_speeds(a, u, omega, ll, r, gamma, cl: ClosureSet, dp_da, rho,
                check=True) -> WaveSpeeds:
    """Closed-form eigenvalues of both coefficient matrices.

    ``dp_da`` is the pressure-law derivative d p/d A, so d(A p_hat)/dA = A dp_da.
    All A_theta ratios are rewritten through A/R^2 = 1/2 - Gamma/3, which keeps
    every expression finite down to collapsed sections (where the recovered
    velocities are zero anyway).  Raises HyperbolicityError when a square-root
    argument turns genuinely negative.
    """
    a = np.asarray(a, dtype=float)
    chain = gamma_chain_factor(gamma)
    a_d_pso = cl.d_psi_so * chain
    a_d_ps1 = cl.d_psi_s1 * chain
    a_d_pt2 = cl.d_psi_th2 * chain

    ups1 = ((cl.psi_s1 - 0.5 * a_d_pso) ** 2 / cl.psi_so**2
            + (a_d_ps1 - cl.psi_s1) / cl.psi_so)

    at_r2 = cl.a_theta_over_r2
    # (A d1 A_theta) / A_theta, regular for all R >= 0
    adat_over_at = (0.5 - gamma / 3.0) * (
        cl.d_a_theta_over_r2 * gamma + 2.0 * at_r2) / ((1.0 - gamma) * at_r2)
    ups2 = ((cl.psi_th2 - 0.5 * adat_over_at) ** 2
            + cl.psi_th2 * adat_over_at + a_d_pt2 - cl.psi_th2)

    d_ap_hat = a * dp_da
    disc_s = d_ap_hat / (rho * cl.psi_so) + ups1 * u * u
    # d(A p_hat)/dA / A_theta = dp_da * (A/R^2) / (A_theta/R^2)
    disc_th = dp_da * (0.5 - gamma / 3.0) / (at_r2 * rho) + ups2 * omega * omega

    if check:
        tol = -1e-12 * (np.abs(d_ap_hat) / rho + 1.0)
        if np.any(disc_s < tol) or np.any(disc_th < tol):
            raise HyperbolicityError("negative eigenvalue discriminant",
                                     state=dict(a=a, u=u, omega=omega, gamma=gamma))
    disc_s = np.maximum(disc_s, 0.0)
    disc_th = np.maximum(disc_th, 0.0)

    mean_s = (2.0 * cl.psi_s1 - a_d_pso) / (2.0 * cl.psi_so) * u
    root_s = np.sqrt(disc_s)
    mean_th = (cl.psi_th2 - 0.5 * adat_over_at) * omega
    root_th = np.sqrt(disc_th)

    return WaveSpeeds(
        lambda0_s=cl.psi_th1 * u,
        lambdaP_s=mean_s + root_s,
        lambdaM_s=mean_s - root_s,
        lambda0_th=(cl.psi_s2 / cl.psi_so) * omega,
        lambdaP_th=mean_th + root_th,
        lambdaM_th=mean_th - root_th,
        upsilon1=ups1,
        upsilon2=ups2,
    )


def assemble_quasilinear(a, u, omega, ll, r, gamma, cl: ClosureSet, dp_da, rho):
    """The two 3x3 coefficient matrices of the quasilinear form, entry by entry.

    Scalar states only; this feeds the eigen cross-check oracle and the
    eigenvector construction.
    """
    a = float(a)
    d_ap_hat = a * float(dp_da)
    chain = float(gamma_chain_factor(gamma))
    pso, ps1, ps2 = float(cl.psi_so), float(cl.psi_s1), float(cl.psi_s2)
    pt1, pt2 = float(cl.psi_th1), float(cl.psi_th2)
    a_d_pso = float(cl.d_psi_so) * chain
    a_d_ps1 = float(cl.d_psi_s1) * chain
    a_d_ps2 = float(cl.d_psi_s2) * chain
    a_d_pt1 = float(cl.d_psi_th1) * chain
    a_d_pt2 = float(cl.d_psi_th2) * chain
    a_theta = float(cl.a_theta_over_r2) * r * r
    a_d_at = a * (float(cl.d_a_theta_over_r2) * gamma
                  + 2.0 * float(cl.a_theta_over_r2)) / (1.0 - gamma)
    ll = float(ll)

    # A * d1 of the flux coefficient groups, by logarithmic differentiation
    ad_pso2a_ps1 = (pso**2 * a / ps1) * (2.0 * a_d_pso / pso + 1.0 - a_d_ps1 / ps1)
    ad_psoa_pt1 = (pso * a / pt1) * (a_d_pso / pso + 1.0 - a_d_pt1 / pt1)
    ad_psoaat_ps2 = (pso * a * a_theta / ps2) * (
        a_d_pso / pso + 1.0 + a_d_at / a_theta - a_d_ps2 / ps2)
    ad_aat_pt2 = (a * a_theta / pt2) * (1.0 + a_d_at / a_theta - a_d_pt2 / pt2)

    m_s = np.array([
        [-(a_d_pso / pso) * u, 1.0 / pso, 0.0],
        [d_ap_hat / rho - (ps1 / pso) ** 2 * ad_pso2a_ps1 * u * u / a,
         2.0 * ps1 / pso * u, 0.0],
        [-(pt1**2 / pso) * ad_psoa_pt1 * u * ll / a, pt1 / pso * ll, pt1 * u],
    ])
    m_th = np.array([
        [-(a_d_at / a_theta) * omega, 0.0, 1.0 / a_theta],
        [-(ps2**2 / (pso * a_theta)) * ad_psoaat_ps2 * u * omega / a,
         ps2 / pso * omega, ps2 / a_theta * u],
        [d_ap_hat / rho - pt2**2 * ad_aat_pt2 * omega * omega / a, 0.0,
         2.0 * pt2 * omega],
    ])
    return m_s, m_th


def numeric_eigenvalues(m, rel_tol=1e-8):
    """Roots of the characteristic polynomial of a 3x3 matrix, sorted ascending.

    Detects complex pairs and raises HyperbolicityError; this is the
    independent oracle for the closed-form spectra.
    """
    m = np.asarray(m, dtype=float)
    tr = np.trace(m)
    minors = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
              + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
              + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    det = np.linalg.det(m)
    roots = np.roots([1.0, -tr, minors, -det])
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.any(np.abs(roots.imag) > rel_tol * scale):
        raise HyperbolicityError("complex eigenvalue pair detected", state=m)
    return np.sort(roots.real)


def eigenvectors_s(m_s, speeds: WaveSpeeds):
    """Eigenvectors of the axial matrix as (v_o, v_minus, v_plus).

    The generic branch carries the closed-form third component; when lambda_o
    collides with lambda_+/- (or the denominator underflows) the degenerate
    branch zeroes that component.
    """
    m = np.asarray(m_s, dtype=float)
    lam_o = float(speeds.lambda0_s)
    v_o = np.array([0.0, 0.0, 1.0])
    scale = max(abs(lam_o), abs(float(speeds.lambdaP_s)),
                abs(float(speeds.lambdaM_s)), 1e-300)

    def branch(lam):
        den = m[2, 2] - lam
        if abs(lam_o - lam) < DEGENERATE_REL * scale or abs(den) < 1e-14:
            v3 = 0.0
        else:
            v3 = ((m[0, 0] - lam) * m[2, 1] - m[0, 1] * m[2, 0]) / den
        return np.array([m[0, 1], lam - m[0, 0], v3])

    return v_o, branch(float(speeds.lambdaM_s)), branch(float(speeds.lambdaP_s))


def eigenvectors_theta(m_th, speeds: WaveSpeeds):
    """Eigenvectors of the angular matrix; same construction on rows (1, 3)."""
    m = np.asarray(m_th, dtype=float)
    lam_o = float(speeds.lambda0_th)
    v_o = np.array([0.0, 1.0, 0.0])
    scale = max(abs(lam_o), abs(float(speeds.lambdaP_th)),
                abs(float(speeds.lambdaM_th)), 1e-300)

    def branch(lam):
        v1, v3 = m[0, 2], lam - m[0, 0]
        den = lam - m[1, 1]
        if abs(lam_o - lam) < DEGENERATE_REL * scale or abs(den) < 1e-14:
            v2 = 0.0
        else:
            v2 = (m[1, 0] * v1 + m[1, 2] * v3) / den
        return np.array([v1, v2, v3])

    return v_o, branch(float(speeds.lambdaM_th)), branch(float(speeds.lambdaP_th))


def hyperbolicity_sufficient(cl: ClosureSet):
    """Evaluate the four sufficient inequalities on straight-vessel constants.

    Returns (all_pass, residuals); each residual must be strictly positive.
    """
    ps1 = float(np.asarray(cl.psi_s1))
    ps2 = float(np.asarray(cl.psi_s2))
    pt1 = float(np.asarray(cl.psi_th1))
    r1 = ps1 - 1.0
    r2 = 20.0 * ps1**2 + pt1 * (9.0 * ps2 + 5.0 * pt1) - ps1 * (6.0 + 9.0 * ps2 + 19.0 * pt1)
    r3 = (16.0 * ps1**4 - ps2 * pt1**3
          - 4.0 * ps1**3 * (5.0 + 2.0 * ps2 + 4.0 * pt1)
          + ps1 * pt1 * (3.0 * ps2 * (-3.0 + pt1) + (-5.0 + pt1) * pt1)
          + ps1**2 * (3.0 + pt1 * (19.0 + 2.0 * pt1) + ps2 * (9.0 + 6.0 * pt1)))
    r4 = (-32.0 * ps1**2 - 27.0 * ps2**2 - 18.0 * ps2 * pt1 + pt1**2
          + 4.0 * ps1 * (-3.0 + 18.0 * ps2 + 4.0 * pt1))
    residuals = (r1, r2, r3, r4)
    return all(r > 0.0 for r in residuals), residuals


def cardano_discriminant(a, u, a_o, g_o, rho, beta, gamma_s, gamma_theta,
                         n_s, n_theta, r_o_ref):
    """Sign-carrying discriminant of the characteristic polynomial of
    n_s M_s + n_theta R_o_ref M_theta for a horizontal vessel with zero
    angular velocity; positive means three distinct real roots.

    ``r_o_ref`` weights the angular direction (s and theta carry different
    units); the caller chooses it, typically the scenario mean rest radius.
    """
    if np.any(np.abs(np.asarray(n_s) ** 2 + np.asarray(n_theta) ** 2 - 1.0) > 1e-12):
        raise ValueError("(n_s, n_theta) must lie on the unit circle")
    cl = coriolis(0.0, gamma_s, gamma_theta)
    ps1, ps2, pt1 = float(cl.psi_s1), float(cl.psi_s2), float(cl.psi_th1)
    a = np.asarray(a, dtype=float)
    c = g_o * (beta / 2.0) * (a / a_o) ** (beta / 2.0) / rho   # (1/rho) d(A p_hat)/dA
    a_theta = float(cl.a_theta_over_r2) * 2.0 * a              # horizontal: R^2 = 2A
    w = r_o_ref**2 / a_theta

    c2 = (2.0 * ps1 + pt1) * u * n_s
    c1 = c * (n_s**2 + w * n_theta**2) + (-ps1 - 2.0 * ps1 * pt1) * u * u * n_s**2
    c0 = ((-c + ps1 * u * u) * pt1 * n_s**3 * u
          + c * w * (-2.0 * ps1 + ps2) * n_theta**2 * u * n_s)
    return (-27.0 * c0**2 - 18.0 * c2 * c1 * c0 + 4.0 * c1**3
            - 4.0 * c2**3 * c0 + c2**2 * c1**2)

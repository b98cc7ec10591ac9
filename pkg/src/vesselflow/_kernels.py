"""Fused numba kernels for the interface-state hot path.

The reconstruction of primitives (cubic radius inversion, closure rational
functions, velocity recovery) and the closed-form wave speeds are evaluated
per element in single passes, which removes the few dozen numpy temporaries
per call that otherwise dominate the runtime.  scheme.py falls back to the
pure-numpy implementations when numba is unavailable; results agree to
floating-point identity because the arithmetic mirrors closures.py and
eigensystem.py operation by operation.
"""

from __future__ import annotations

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @nb.njit(cache=True)
    def recover_kernel(a, q1, q2, k, absap, a_o, g_o,
                       gs, gt, beta, rho, a_th, speed_cap):
        n = a.size
        r = np.empty(n)
        gamma = np.empty(n)
        u = np.empty(n)
        ll = np.empty(n)
        omega = np.empty(n)
        ap_hat = np.empty(n)
        dp_da = np.empty(n)
        pso = np.empty(n)
        ps1 = np.empty(n)
        ps2 = np.empty(n)
        pt1 = np.empty(n)
        pt2 = np.empty(n)
        at_r2 = np.empty(n)
        status = 0

        cso1 = 4.0 * (gs + 2.0) / (3.0 * (gs + 3.0))
        cso2 = (gs + 2.0) / (2.0 * (gs + 4.0))
        k1 = (gs + 2.0) / (gs + 1.0)
        c11 = 2.0 * (2.0 * gs + 2.0) * (gs + 2.0) / (3.0 * (2.0 * gs + 3.0) * (gs + 3.0))
        c_a = (2.0 * gt + 3.0) / (2.0 * (gt + 3.0))
        c_b = (gt + 3.0) * (2.0 * gt + 5.0) / (2.0 * (gt + 2.0) * (gt + 5.0))
        k2 = (gs + 2.0) / gs * (1.0 - (gt + 2.0) * (2.0 * gt + gs + 2.0)
                                / (2.0 * (gt + gs + 1.0) * (gt + gs + 2.0)))
        p21 = (2.0 * (gt + gs + 1.0) * (3.0 * gt * gt + 2.0 * gt * gs + 11.0 * gt + 3.0 * gs + 9.0)
               / ((gt + 3.0) * (gt + gs + 3.0) * (3.0 * gt + 2.0 * gs + 4.0)))
        p22 = ((gt + 2.0) * (gt + gs + 1.0) * (gt + gs + 2.0)
               * (3.0 * gt * gt + 2.0 * gs * gt + 15.0 * gt + 4.0 * gs + 16.0)
               / ((gt + 3.0) * (gt + 4.0) * (gt + gs + 3.0) * (gt + gs + 4.0)
                  * (3.0 * gt + 2.0 * gs + 4.0)))
        k3 = (gs + 2.0) / gs * (1.0 - (gt + 3.0) * (gt + 4.0) * (2.0 * gt + gs + 4.0)
                                / (2.0 * (gt + 2.0) * (gt + gs + 3.0) * (gt + gs + 4.0)))
        k4 = ((gt + 3.0) * (gt + 4.0) * (5.0 * gt + 6.0)
              / (16.0 * (gt + 2.0) * (2.0 * gt + 3.0)))
        c41 = 2.0 * (5.0 * gt * gt + 14.0 * gt + 10.0) / ((2.0 * gt + 5.0) * (5.0 * gt + 6.0))
        k5 = (gt + 2.0) ** 2 / ((gt + 3.0) * (gt + 4.0))
        w = beta / (beta + 2.0)

        for i in range(n):
            ai = a[i]
            if ai < 0.0:
                ai = 0.0
            ki = k[i]
            # radius from area: A = R^2/2 - k R^3/3
            ri = np.sqrt(2.0 * ai)
            if ki != 0.0 and ai > 0.0:
                r_hi = 0.999 / absap[i]
                a_hi = r_hi * r_hi * 0.5 - ki * r_hi**3 / 3.0
                if ai > a_hi:
                    status = 1
                    ri = r_hi
                else:
                    tol = 1e-12 * (1.0 if ri < 1.0 else ri)
                    ok = False
                    for _ in range(100):
                        f = ri * ri * 0.5 - ki * ri**3 / 3.0 - ai
                        fp = ri * (1.0 - ki * ri)
                        if fp <= 0.0:
                            break
                        step = f / fp
                        ri = ri - step
                        if abs(step) <= tol:
                            ok = ri >= 0.0 and ki * ri < 1.0
                            if ok:
                                break
                    if not ok:
                        lo = 0.0
                        hi = r_hi
                        for _ in range(200):
                            mid = 0.5 * (lo + hi)
                            fm = mid * mid * 0.5 - ki * mid**3 / 3.0 - ai
                            if fm > 0.0:
                                hi = mid
                            else:
                                lo = mid
                        ri = 0.5 * (lo + hi)
            r[i] = ri
            g = ri * ki
            gamma[i] = g

            den_a = 1.0 - c_a * g
            den_b = 1.0 - c_b * g
            if abs(den_a) < 1e-14 or abs(den_b) < 1e-14 or abs(1.0 - g) < 1e-14:
                status = 2
                den_a = 1.0
                den_b = 1.0
            pso_i = 1.0 - cso1 * g + cso2 * g * g
            ps1_i = k1 * (1.0 - 2.0 * g / 3.0) * (1.0 - c11 * g)
            poly2 = 1.0 - p21 * g + p22 * g * g
            ps2_i = k2 * (1.0 - 2.0 * g / 3.0) * poly2 / den_a
            pt1_i = k3 * (1.0 - 2.0 * g / 3.0) / den_b
            pt2_i = k4 * (1.0 - 2.0 * g / 3.0) * (1.0 - c41 * g) / (den_a * den_b)
            at_i = k5 * den_b / den_a
            pso[i] = pso_i
            ps1[i] = ps1_i
            ps2[i] = ps2_i
            pt1[i] = pt1_i
            pt2[i] = pt2_i
            at_r2[i] = at_i

            a_raw = a[i]
            if beta == 2.0:
                ratio_pow = a_raw / a_o[i]
                dp = g_o[i] / a_o[i]
            else:
                ratio_pow = (a_raw / a_o[i]) ** (beta / 2.0)
                dp = g_o[i] * (beta / 2.0) * a_raw ** (beta / 2.0 - 1.0) / a_o[i] ** (beta / 2.0)
            pa = g_o[i] * (ratio_pow - 1.0) * a_raw
            ap_hat[i] = w * (pa - g_o[i] * (a_o[i] - a_raw))
            dp_da[i] = dp

            a_theta = at_i * ri * ri
            if a_raw >= a_th:
                ui = q1[i] / (pso_i * a_raw)
                li = q2[i] / a_raw
                om = li / a_theta if a_theta > 0.0 else 0.0
            else:
                ui = 0.0
                om = 0.0
            u_cap = speed_cap * np.sqrt(ai * dp / (rho * pso_i))
            if ui > u_cap:
                ui = u_cap
            elif ui < -u_cap:
                ui = -u_cap
            om_cap = speed_cap * np.sqrt(dp * (0.5 - g / 3.0) / (at_i * rho))
            if om > om_cap:
                om = om_cap
            elif om < -om_cap:
                om = -om_cap
            u[i] = ui
            omega[i] = om
            ll[i] = om * a_theta
        return (r, gamma, u, ll, omega, ap_hat, dp_da,
                pso, ps1, ps2, pt1, pt2, at_r2, status)

    @nb.njit(cache=True)
    def _minmod(z1, z2, z3):
        if z1 > 0.0 and z2 > 0.0 and z3 > 0.0:
            return min(z1, min(z2, z3))
        if z1 < 0.0 and z2 < 0.0 and z3 < 0.0:
            return max(z1, max(z2, z3))
        return 0.0

    @nb.njit(cache=True)
    def reconstruct_kernel(a, q1, q2, a_o_c, a_o_sif, a_o_tif,
                           a_th, dry_level, phi, ds, dth, positivity):
        """Minmod reconstruction plus positivity correction for all active cells.

        Inputs are extended cell arrays of shape (batch, rows, n_theta) with
        parameter grids spanning the trailing axes; outputs cover the active
        rows 1..rows-2.  The correction's budget sum must stay bit-identical
        to the 4-point average in VesselGeometry.a_o_c_ext, so the pair-sum
        order below is load-bearing.
        """
        nb_, rows, nk = a.shape
        ra = rows - 2
        v_sm = np.empty((nb_, ra, nk))
        v_sp = np.empty((nb_, ra, nk))
        v_tm = np.empty((nb_, ra, nk))
        v_tp = np.empty((nb_, ra, nk))
        q1_sm = np.empty((nb_, ra, nk))
        q1_sp = np.empty((nb_, ra, nk))
        q1_tm = np.empty((nb_, ra, nk))
        q1_tp = np.empty((nb_, ra, nk))
        q2_sm = np.empty((nb_, ra, nk))
        q2_sp = np.empty((nb_, ra, nk))
        q2_tm = np.empty((nb_, ra, nk))
        q2_tp = np.empty((nb_, ra, nk))
        trigger = np.zeros((nb_, ra, nk), dtype=np.bool_)

        for flat in range(nb_ * ra):
            b = flat // ra
            i = flat % ra + 1
            for k in range(nk):
                km = k - 1 if k > 0 else nk - 1
                kp = k + 1 if k < nk - 1 else 0
                rc = a[b, i, k] / a_o_c[i, k]
                rl = a[b, i - 1, k] / a_o_c[i - 1, k]
                rr = a[b, i + 1, k] / a_o_c[i + 1, k]
                rd = a[b, i, km] / a_o_c[i, km]
                ru = a[b, i, kp] / a_o_c[i, kp]
                sl = _minmod(phi * (rc - rl) / ds, (rr - rl) / (2.0 * ds),
                             phi * (rr - rc) / ds)
                tl = _minmod(phi * (rc - rd) / dth, (ru - rd) / (2.0 * dth),
                             phi * (ru - rc) / dth)
                raw_sm = (rc + 0.5 * ds * sl) * a_o_sif[i + 1, k]
                raw_sp = (rc - 0.5 * ds * sl) * a_o_sif[i, k]
                raw_tm = (rc + 0.5 * dth * tl) * a_o_tif[i, kp]
                raw_tp = (rc - 0.5 * dth * tl) * a_o_tif[i, k]
                ia = i - 1
                if positivity:
                    total = (raw_sp + raw_sm) + (raw_tp + raw_tm)
                    low = min(min(raw_sm, raw_sp), min(raw_tm, raw_tp))
                    abar = a[b, i, k]
                    if low < a_th or (total > 4.0 * abar and abar < dry_level):
                        trigger[b, ia, k] = True
                        two = 2.0 * abar
                        c_sm = min(max(raw_sm, a_th), two)
                        c_tm = min(max(raw_tm, a_th), two)
                        raw_sm, raw_sp = c_sm, two - c_sm
                        raw_tm, raw_tp = c_tm, two - c_tm
                v_sm[b, ia, k] = raw_sm
                v_sp[b, ia, k] = raw_sp
                v_tm[b, ia, k] = raw_tm
                v_tp[b, ia, k] = raw_tp

                s1 = _minmod(phi * (q1[b, i, k] - q1[b, i - 1, k]) / ds,
                             (q1[b, i + 1, k] - q1[b, i - 1, k]) / (2.0 * ds),
                             phi * (q1[b, i + 1, k] - q1[b, i, k]) / ds)
                t1 = _minmod(phi * (q1[b, i, k] - q1[b, i, km]) / dth,
                             (q1[b, i, kp] - q1[b, i, km]) / (2.0 * dth),
                             phi * (q1[b, i, kp] - q1[b, i, k]) / dth)
                s2 = _minmod(phi * (q2[b, i, k] - q2[b, i - 1, k]) / ds,
                             (q2[b, i + 1, k] - q2[b, i - 1, k]) / (2.0 * ds),
                             phi * (q2[b, i + 1, k] - q2[b, i, k]) / ds)
                t2 = _minmod(phi * (q2[b, i, k] - q2[b, i, km]) / dth,
                             (q2[b, i, kp] - q2[b, i, km]) / (2.0 * dth),
                             phi * (q2[b, i, kp] - q2[b, i, k]) / dth)
                q1_sm[b, ia, k] = q1[b, i, k] + 0.5 * ds * s1
                q1_sp[b, ia, k] = q1[b, i, k] - 0.5 * ds * s1
                q1_tm[b, ia, k] = q1[b, i, k] + 0.5 * dth * t1
                q1_tp[b, ia, k] = q1[b, i, k] - 0.5 * dth * t1
                q2_sm[b, ia, k] = q2[b, i, k] + 0.5 * ds * s2
                q2_sp[b, ia, k] = q2[b, i, k] - 0.5 * ds * s2
                q2_tm[b, ia, k] = q2[b, i, k] + 0.5 * dth * t2
                q2_tp[b, ia, k] = q2[b, i, k] - 0.5 * dth * t2
        return (v_sm, v_sp, v_tm, v_tp, q1_sm, q1_sp, q1_tm, q1_tp,
                q2_sm, q2_sp, q2_tm, q2_tp, trigger)

    @nb.njit(cache=True)
    def flux_kernel(a, u, ll, omega, ap_hat, pso, ps1, ps2, pt1, pt2,
                    sp, sm, rho, axial):
        """Central-upwind flux for one interface family from stacked sides.

        State arrays are (2, n) with [0] the minus and [1] the plus side;
        ``axial`` switches between the F and G physical fluxes.
        """
        n = sp.size
        h1 = np.empty(n)
        h2 = np.empty(n)
        h3 = np.empty(n)
        for i in range(n):
            if axial:
                f1m = a[0, i] * u[0, i]
                f1p = a[1, i] * u[1, i]
                f2m = ps1[0, i] * f1m * u[0, i] + ap_hat[0, i] / rho
                f2p = ps1[1, i] * f1p * u[1, i] + ap_hat[1, i] / rho
                f3m = pt1[0, i] * f1m * ll[0, i]
                f3p = pt1[1, i] * f1p * ll[1, i]
            else:
                f1m = a[0, i] * omega[0, i]
                f1p = a[1, i] * omega[1, i]
                f2m = ps2[0, i] * a[0, i] * u[0, i] * omega[0, i]
                f2p = ps2[1, i] * a[1, i] * u[1, i] * omega[1, i]
                f3m = pt2[0, i] * a[0, i] * ll[0, i] * omega[0, i] + ap_hat[0, i] / rho
                f3p = pt2[1, i] * a[1, i] * ll[1, i] * omega[1, i] + ap_hat[1, i] / rho
            gap = sp[i] - sm[i]
            if gap < 1e-14:
                h1[i] = 0.5 * (f1m + f1p)
                h2[i] = 0.5 * (f2m + f2p)
                h3[i] = 0.5 * (f3m + f3p)
            else:
                prod = sp[i] * sm[i] / gap
                u1m = a[0, i]
                u1p = a[1, i]
                u2m = pso[0, i] * a[0, i] * u[0, i]
                u2p = pso[1, i] * a[1, i] * u[1, i]
                u3m = a[0, i] * ll[0, i]
                u3p = a[1, i] * ll[1, i]
                h1[i] = (sp[i] * f1m - sm[i] * f1p) / gap + prod * (u1p - u1m)
                h2[i] = (sp[i] * f2m - sm[i] * f2p) / gap + prod * (u2p - u2m)
                h3[i] = (sp[i] * f3m - sm[i] * f3p) / gap + prod * (u3p - u3m)
        return h1, h2, h3

    @nb.njit(cache=True)
    def speeds_kernel(a, gamma, u, omega, dp_da, gs, gt, rho):
        n = a.size
        l0s = np.empty(n)
        lps = np.empty(n)
        lms = np.empty(n)
        l0t = np.empty(n)
        lpt = np.empty(n)
        lmt = np.empty(n)
        status = 0

        cso1 = 4.0 * (gs + 2.0) / (3.0 * (gs + 3.0))
        cso2 = (gs + 2.0) / (2.0 * (gs + 4.0))
        k1 = (gs + 2.0) / (gs + 1.0)
        c11 = 2.0 * (2.0 * gs + 2.0) * (gs + 2.0) / (3.0 * (2.0 * gs + 3.0) * (gs + 3.0))
        c_a = (2.0 * gt + 3.0) / (2.0 * (gt + 3.0))
        c_b = (gt + 3.0) * (2.0 * gt + 5.0) / (2.0 * (gt + 2.0) * (gt + 5.0))
        k3 = (gs + 2.0) / gs * (1.0 - (gt + 3.0) * (gt + 4.0) * (2.0 * gt + gs + 4.0)
                                / (2.0 * (gt + 2.0) * (gt + gs + 3.0) * (gt + gs + 4.0)))
        k2 = (gs + 2.0) / gs * (1.0 - (gt + 2.0) * (2.0 * gt + gs + 2.0)
                                / (2.0 * (gt + gs + 1.0) * (gt + gs + 2.0)))
        p21 = (2.0 * (gt + gs + 1.0) * (3.0 * gt * gt + 2.0 * gt * gs + 11.0 * gt + 3.0 * gs + 9.0)
               / ((gt + 3.0) * (gt + gs + 3.0) * (3.0 * gt + 2.0 * gs + 4.0)))
        p22 = ((gt + 2.0) * (gt + gs + 1.0) * (gt + gs + 2.0)
               * (3.0 * gt * gt + 2.0 * gs * gt + 15.0 * gt + 4.0 * gs + 16.0)
               / ((gt + 3.0) * (gt + 4.0) * (gt + gs + 3.0) * (gt + gs + 4.0)
                  * (3.0 * gt + 2.0 * gs + 4.0)))
        k4 = ((gt + 3.0) * (gt + 4.0) * (5.0 * gt + 6.0)
              / (16.0 * (gt + 2.0) * (2.0 * gt + 3.0)))
        c41 = 2.0 * (5.0 * gt * gt + 14.0 * gt + 10.0) / ((2.0 * gt + 5.0) * (5.0 * gt + 6.0))
        k5 = (gt + 2.0) ** 2 / ((gt + 3.0) * (gt + 4.0))

        for i in range(n):
            g = gamma[i]
            den_a = 1.0 - c_a * g
            den_b = 1.0 - c_b * g
            one_m = 1.0 - g
            pso_i = 1.0 - cso1 * g + cso2 * g * g
            d_pso = -cso1 + 2.0 * cso2 * g
            ps1_i = k1 * (1.0 - 2.0 * g / 3.0) * (1.0 - c11 * g)
            d_ps1 = k1 * (-(2.0 / 3.0) * (1.0 - c11 * g) - c11 * (1.0 - 2.0 * g / 3.0))
            n4 = (1.0 - 2.0 * g / 3.0) * (1.0 - c41 * g)
            dn4 = -(2.0 / 3.0) * (1.0 - c41 * g) - c41 * (1.0 - 2.0 * g / 3.0)
            d4 = den_a * den_b
            dd4 = -c_a * den_b - c_b * den_a
            pt2_i = k4 * n4 / d4
            d_pt2 = k4 * (dn4 * d4 - n4 * dd4) / (d4 * d4)
            at_i = k5 * den_b / den_a
            d_at = k5 * (c_a - c_b) / (den_a * den_a)
            ps2_i = k2 * (1.0 - 2.0 * g / 3.0) * (1.0 - p21 * g + p22 * g * g) / den_a
            pt1_i = k3 * (1.0 - 2.0 * g / 3.0) / den_b

            chain = g * (3.0 - 2.0 * g) / (6.0 * one_m)
            a_d_pso = d_pso * chain
            a_d_ps1 = d_ps1 * chain
            a_d_pt2 = d_pt2 * chain
            ups1 = ((ps1_i - 0.5 * a_d_pso) ** 2 / (pso_i * pso_i)
                    + (a_d_ps1 - ps1_i) / pso_i)
            half_term = 0.5 - g / 3.0
            adat_over_at = half_term * (d_at * g + 2.0 * at_i) / (one_m * at_i)
            ups2 = ((pt2_i - 0.5 * adat_over_at) ** 2
                    + pt2_i * adat_over_at + a_d_pt2 - pt2_i)

            d_ap_hat = a[i] * dp_da[i]
            disc_s = d_ap_hat / (rho * pso_i) + ups1 * u[i] * u[i]
            disc_t = dp_da[i] * half_term / (at_i * rho) + ups2 * omega[i] * omega[i]
            tol = -1e-12 * (abs(d_ap_hat) / rho + 1.0)
            if disc_s < tol or disc_t < tol:
                status = 1
            if disc_s < 0.0:
                disc_s = 0.0
            if disc_t < 0.0:
                disc_t = 0.0

            mean_s = (2.0 * ps1_i - a_d_pso) / (2.0 * pso_i) * u[i]
            root_s = np.sqrt(disc_s)
            mean_t = (pt2_i - 0.5 * adat_over_at) * omega[i]
            root_t = np.sqrt(disc_t)
            l0s[i] = pt1_i * u[i]
            lps[i] = mean_s + root_s
            lms[i] = mean_s - root_s
            l0t[i] = ps2_i / pso_i * omega[i]
            lpt[i] = mean_t + root_t
            lmt[i] = mean_t - root_t
        return l0s, lps, lms, l0t, lpt, lmt, status

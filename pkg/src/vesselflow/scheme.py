"""Semi-discrete central-upwind scheme on the (s, theta) grid.

The reconstruction works on the rest-normalized area ratio A/A_o so that
discrete rest states (A = A_o, Q1 = Q2 = 0) produce zero slopes, interface
values equal to the interface rest areas, and hence exactly vanishing fluxes
and sources.  theta is periodic via index arithmetic; s carries two ghost
cell layers filled by the boundary module.

Hot-path layout: the minus/plus states of each interface family are stacked
along a leading axis of length 2, so every closure, inversion, and eigenvalue
evaluation runs once per family.  Field arrays may carry extra leading batch
dimensions: shape (..., n_s, n_theta).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from . import closures as cls
from . import eigensystem as eig
from .errors import (ClosureSingularityError, ConfigError, GeometryError,
                     HyperbolicityError, NumericError)
from .geometry import VesselGeometry, invert_area_masked

DEGENERATE_SPEED_GAP = 1e-14
MAX_DT_RETRIES = 40

BC_KINDS = ("neumann", "dirichlet_inlet", "zero_flux", "frozen")


@dataclass
class ConservedField:
    """Cell averages of (A, Q1 = psi_so A u, Q2 = A L) plus the clock."""

    a: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    time: float = 0.0

    def copy(self) -> "ConservedField":
        return ConservedField(self.a.copy(), self.q1.copy(), self.q2.copy(), self.time)


@dataclass(frozen=True)
class NumericsConfig:
    """Tunable scheme parameters."""

    phi: float = 1.3                # minmod limiter parameter, in [1, 2]
    cfl_fraction: float = 0.25      # in (0, 1/2]
    positivity: bool = True
    a_th_factor: float = 1e-10      # A_th = a_th_factor * max(A_o)
    dry_band_factor: float = 1e-3   # budget correction active below this * max(A_o)
    dt_max: float = 1e-2
    r_collapse: float = 1e-6
    speed_cap: float = 10.0         # max |u|, |omega| in local pressure-speed units

    def __post_init__(self):
        if not 1.0 <= self.phi <= 2.0:
            raise ConfigError(f"phi must lie in [1, 2], got {self.phi}")
        if not 0.0 < self.cfl_fraction <= 0.5:
            raise ConfigError(f"cfl_fraction must lie in (0, 1/2], got {self.cfl_fraction}")
        if self.a_th_factor <= 0 or self.dt_max <= 0:
            raise ConfigError("a_th_factor and dt_max must be positive")


@dataclass
class Boundaries:
    """Axial boundary treatment; theta is always periodic.

    frozen_* hold ghost-cell (a, q1, q2) arrays of shape (2, n_theta) for the
    'frozen' kind (used to pin analytic states in steady-state studies).
    """

    left: str = "neumann"
    right: str = "neumann"
    inlet_velocity: Callable[[float], float] | None = None
    frozen_left: tuple | None = None
    frozen_right: tuple | None = None

    def __post_init__(self):
        for side, kind in (("left", self.left), ("right", self.right)):
            if kind not in BC_KINDS:
                raise ConfigError(f"unknown boundary kind {kind!r} for {side}")
        if self.right == "dirichlet_inlet":
            raise ConfigError("dirichlet_inlet is only supported on the left boundary")
        if self.left == "dirichlet_inlet" and self.inlet_velocity is None:
            raise ConfigError("dirichlet_inlet requires an inlet waveform")
        self._inlet_cache = None


@dataclass
class PairState:
    """Minus/plus interface states stacked along axis 0, with primitives."""

    a: np.ndarray
    r: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    ll: np.ndarray
    omega: np.ndarray
    closures: cls.ClosureSet
    ap_hat: np.ndarray
    dp_da: np.ndarray


@dataclass
class InterfaceData:
    """Reconstructed states and, once filled, speeds and fluxes."""

    s_pair: PairState
    th_pair: PairState
    a_plus: np.ndarray | None = None
    a_minus: np.ndarray | None = None
    b_plus: np.ndarray | None = None
    b_minus: np.ndarray | None = None
    flux_s: tuple | None = None
    flux_th: tuple | None = None


@dataclass
class RhsResult:
    """Time derivative of the conserved field plus the global wave speeds."""

    da: np.ndarray
    dq1: np.ndarray
    dq2: np.ndarray
    max_speed_s: float
    max_speed_th: float


def minmod3(z1, z2, z3):
    """Generalized minmod: smallest magnitude if all same sign, else zero."""
    z1, z2, z3 = np.asarray(z1), np.asarray(z2), np.asarray(z3)
    pos = (z1 > 0) & (z2 > 0) & (z3 > 0)
    neg = (z1 < 0) & (z2 < 0) & (z3 < 0)
    return np.where(pos, np.minimum(np.minimum(z1, z2), z3),
                    np.where(neg, np.maximum(np.maximum(z1, z2), z3), 0.0))


def _slopes_s(q, phi, ds):
    """Minmod s-slopes for rows 1..n-2 of an extended array."""
    left = (q[..., 1:-1, :] - q[..., :-2, :]) / ds
    right = (q[..., 2:, :] - q[..., 1:-1, :]) / ds
    center = (q[..., 2:, :] - q[..., :-2, :]) / (2.0 * ds)
    return minmod3(phi * left, center, phi * right)


def _slopes_th(q, phi, dth):
    """Minmod theta-slopes (periodic) for every row."""
    qm = np.roll(q, 1, axis=-1)
    qp = np.roll(q, -1, axis=-1)
    return minmod3(phi * (q - qm) / dth, (qp - qm) / (2.0 * dth), phi * (qp - q) / dth)


def _recover(a, q1, q2, k2d, absap2d, a_o, g_o, constants, a_th,
             straight=False, override=None, speed_cap=10.0,
             geom_cache=None) -> PairState:
    """Primitives from conserved interface values, with dry-state guards.

    Recovered velocities are clipped at ``speed_cap`` times the local pressure
    wave speed: the Q2/(A A_theta) recovery amplifies round-off momentum near
    dry fronts without bound, while physical flows sit far below the cap, so
    the clip binds only on noise (and keeps the CFL time step bounded away
    from zero).  ``override = (mask, u, omega)`` replaces the recovered
    velocities where the mask is set, used for positivity-corrected interface
    values whose raw Q reconstructions are meaningless against clamped areas.
    """
    a = np.asarray(a, dtype=float)
    if _kernels.HAVE_NUMBA:
        if straight:
            k2d = np.zeros(a.shape[-2:])
            absap2d = k2d
        flat = lambda x: np.ascontiguousarray(
            np.broadcast_to(np.asarray(x, dtype=float), a.shape)).ravel()
        if geom_cache is not None:
            key = (id(a_o), a.shape)
            cached = geom_cache.get(key)
            if cached is None:
                cached = (flat(k2d), flat(absap2d), flat(a_o), flat(g_o))
                geom_cache[key] = cached
            k_f, ap_f, ao_f, go_f = cached
        else:
            k_f, ap_f, ao_f, go_f = flat(k2d), flat(absap2d), flat(a_o), flat(g_o)
        (r, gamma, u, ll, omega, ap_hat, dp_da, pso, ps1, ps2, pt1, pt2,
         at_r2, status) = _kernels.recover_kernel(
            flat(a), flat(q1), flat(q2), k_f, ap_f,
            ao_f, go_f, constants.gamma_s, constants.gamma_theta,
            constants.beta, constants.rho, a_th, speed_cap)
        if status == 1:
            raise GeometryError("area too large for the curvature bound")
        if status == 2:
            raise ClosureSingularityError("closure denominator vanished")
        shape = a.shape
        r, gamma, u, ll, omega = (x.reshape(shape) for x in (r, gamma, u, ll, omega))
        ap_hat, dp_da = ap_hat.reshape(shape), dp_da.reshape(shape)
        closures = cls.ClosureSet(
            gamma=gamma, psi_so=pso.reshape(shape), psi_s1=ps1.reshape(shape),
            psi_s2=ps2.reshape(shape), psi_th1=pt1.reshape(shape),
            psi_th2=pt2.reshape(shape), a_theta_over_r2=at_r2.reshape(shape),
            d_psi_so=None, d_psi_s1=None, d_psi_s2=None, d_psi_th1=None,
            d_psi_th2=None, d_a_theta_over_r2=None)
        if override is not None:
            mask, u_over, omega_over = override
            u = np.where(mask, u_over, u)
            omega = np.where(mask, omega_over, omega)
            ll = omega * closures.a_theta_over_r2 * r * r
        return PairState(a=a, r=r, gamma=gamma, u=u, ll=ll, omega=omega,
                         closures=closures, ap_hat=ap_hat, dp_da=dp_da)

    if straight:
        r = np.sqrt(2.0 * np.maximum(a, 0.0))
        gamma = np.float64(0.0)
        closures = cls.coriolis_straight(constants.gamma_s, constants.gamma_theta)
        half_term = 0.5
    else:
        k2d = np.asarray(k2d, dtype=float)
        r = invert_area_masked(np.maximum(a, 0.0), k2d, absap2d, k2d != 0.0)
        gamma = r * k2d
        closures = cls.coriolis(gamma, constants.gamma_s, constants.gamma_theta)
        half_term = 0.5 - gamma / 3.0
    ap_hat, _, dp_da = cls.pressure_products(a, a_o, g_o, constants.beta)
    wet = a >= a_th
    a_safe = np.where(wet, a, 1.0)
    u = np.where(wet, q1 / (closures.psi_so * a_safe), 0.0)
    u_cap = speed_cap * np.sqrt(np.maximum(a, 0.0) * dp_da
                                / (constants.rho * closures.psi_so))
    u = np.clip(u, -u_cap, u_cap)
    ll = np.where(wet, q2 / a_safe, 0.0)
    a_theta = closures.a_theta_over_r2 * r * r
    omega = np.where(wet, ll / np.where(wet, a_theta, 1.0), 0.0)
    om_cap = speed_cap * np.sqrt(dp_da * half_term
                                 / (closures.a_theta_over_r2 * constants.rho))
    omega = np.clip(omega, -om_cap, om_cap)
    if override is not None:
        mask, u_over, omega_over = override
        u = np.where(mask, u_over, u)
        omega = np.where(mask, omega_over, omega)
    ll = omega * a_theta
    return PairState(a=a, r=r, gamma=gamma, u=u, ll=ll, omega=omega,
                     closures=closures, ap_hat=ap_hat, dp_da=dp_da)


def _geom_cache(geom):
    cache = getattr(geom, "_flat_cache", None)
    if cache is None:
        cache = {}
        geom._flat_cache = cache
    return cache


def reconstruct(a_ext, q1_ext, q2_ext, geom: VesselGeometry, constants,
                numerics: NumericsConfig, a_th,
                cell_state: PairState | None = None) -> InterfaceData:
    """Piecewise-linear interface states from ghost-filled cell averages.

    A is reconstructed through the ratio A/A_o and rescaled by the interface
    rest areas; Q1, Q2 are reconstructed directly.  With positivity mode on,
    cells whose four interface values dip below A_th, or that overdraw the
    cell budget (sum > 4 Abar) while sitting in the near-dry band, get the
    clamped pair correction: it restores the bounds 0 <= A <= 2 Abar and the
    exact pair sums the positivity proof requires, and rebuilds the interface
    momenta from the cell's desingularized velocities (raw Q reconstructions
    are not meaningful against clamped areas).  Rest states never trigger it,
    and healthy smooth cells are excluded because their O(ds^2) budget noise
    poses no positivity risk while a correction there would cost an order of
    accuracy.

    ``cell_state`` is the recovered state of the active cells (rows 1..n+2 of
    the extended arrays); it is computed on demand when omitted.
    """
    grid = geom.grid
    ds, dth, phi = grid.delta_s, grid.delta_theta, numerics.phi
    act = lambda arr: arr[..., 1:-1, :]

    if _kernels.HAVE_NUMBA:
        batch = a_ext.shape[:-2]
        rows, nk = a_ext.shape[-2:]
        as3 = lambda x: np.ascontiguousarray(x.reshape((-1, rows, nk)))
        out = _kernels.reconstruct_kernel(
            as3(a_ext), as3(q1_ext), as3(q2_ext), geom.a_o_c_ext,
            geom.a_o_sif_ext, geom.a_o_tif_ext, a_th,
            numerics.dry_band_factor * geom.a_o_max, phi, ds, dth,
            numerics.positivity)
        (v_sm, v_sp, v_tm, v_tp, q1_sm, q1_sp, q1_tm, q1_tp,
         q2_sm, q2_sp, q2_tm, q2_tp, trigger) = (
            x.reshape(batch + x.shape[-2:]) for x in out)
    else:
        ratio = a_ext / geom.a_o_c_ext
        sl_ratio = _slopes_s(ratio, phi, ds)         # active cells: rows 1..n_s+2
        sl_q1 = _slopes_s(q1_ext, phi, ds)
        sl_q2 = _slopes_s(q2_ext, phi, ds)
        tl_ratio = act(_slopes_th(ratio, phi, dth))
        tl_q1 = act(_slopes_th(q1_ext, phi, dth))
        tl_q2 = act(_slopes_th(q2_ext, phi, dth))

        ratio_a = act(ratio)
        abar = act(a_ext)
        a_o_sif = geom.a_o_sif_ext[1:-1]             # interfaces bounding active cells
        a_o_tif = geom.a_o_tif_ext[1:-1]
        a_o_tif_up = np.roll(a_o_tif, -1, axis=-1)

        dr_s = 0.5 * ds * sl_ratio
        dr_t = 0.5 * dth * tl_ratio
        raw_sm = (ratio_a + dr_s) * a_o_sif[1:]
        raw_sp = (ratio_a - dr_s) * a_o_sif[:-1]
        raw_tm = (ratio_a + dr_t) * a_o_tif_up
        raw_tp = (ratio_a - dr_t) * a_o_tif

        trigger = None
        if numerics.positivity:
            # The budget comparison must reproduce the geometry 4-point average
            # bit for bit at rest: same pair-sum order as a_o_c_ext.  The
            # budget branch only protects cells that could actually drain, so
            # it stays inert outside the near-dry band (healthy smooth cells
            # carry O(ds^2) budget noise that must not trip it).
            total = (raw_sp + raw_sm) + (raw_tp + raw_tm)
            low = np.minimum(np.minimum(raw_sm, raw_sp), np.minimum(raw_tm, raw_tp))
            dry_level = numerics.dry_band_factor * geom.a_o_max
            trigger = (low < a_th) | ((total > 4.0 * abar) & (abar < dry_level))
            two_abar = 2.0 * abar
            c_sm = np.minimum(np.maximum(raw_sm, a_th), two_abar)
            c_tm = np.minimum(np.maximum(raw_tm, a_th), two_abar)
            v_sm = np.where(trigger, c_sm, raw_sm)
            v_sp = np.where(trigger, two_abar - c_sm, raw_sp)
            v_tm = np.where(trigger, c_tm, raw_tm)
            v_tp = np.where(trigger, two_abar - c_tm, raw_tp)
        else:
            v_sm, v_sp, v_tm, v_tp = raw_sm, raw_sp, raw_tm, raw_tp

        q1_a, q2_a = act(q1_ext), act(q2_ext)
        dq1_s, dq2_s = 0.5 * ds * sl_q1, 0.5 * ds * sl_q2
        dq1_t, dq2_t = 0.5 * dth * tl_q1, 0.5 * dth * tl_q2
        q1_sm, q1_sp = q1_a + dq1_s, q1_a - dq1_s
        q1_tm, q1_tp = q1_a + dq1_t, q1_a - dq1_t
        q2_sm, q2_sp = q2_a + dq2_s, q2_a - dq2_s
        q2_tm, q2_tp = q2_a + dq2_t, q2_a - dq2_t

    override_s = override_t = None
    if numerics.positivity and trigger is not None and trigger.any():
        if cell_state is None:
            cell_state = recover_cells(a_ext, q1_ext, q2_ext, geom, constants,
                                       a_th, speed_cap=numerics.speed_cap)
        rollm_ = lambda arr: np.roll(arr, 1, axis=-1)
        pick = lambda arr: np.broadcast_to(arr, trigger.shape)
        u_c, om_c = pick(cell_state.u), pick(cell_state.omega)
        override_s = (
            np.stack([trigger[..., :-1, :], trigger[..., 1:, :]]),
            np.stack([u_c[..., :-1, :], u_c[..., 1:, :]]),
            np.stack([om_c[..., :-1, :], om_c[..., 1:, :]]))
        inner_ = lambda arr: arr[..., 1:-1, :]
        override_t = (
            np.stack([rollm_(inner_(trigger)), inner_(trigger)]),
            np.stack([rollm_(inner_(u_c)), inner_(u_c)]),
            np.stack([rollm_(inner_(om_c)), inner_(om_c)]))

    # s interfaces f = 0..n_s: minus side from active cell f, plus from f+1
    stack = lambda m, p: np.stack([m, p])
    a_s = stack(v_sm[..., :-1, :], v_sp[..., 1:, :])
    q1_s = stack(q1_sm[..., :-1, :], q1_sp[..., 1:, :])
    q2_s = stack(q2_sm[..., :-1, :], q2_sp[..., 1:, :])
    s_pair = _recover(a_s, q1_s, q2_s, geom.k_sif, geom.absap_sif,
                      geom.a_o_sif, geom.g_o_sif, constants, a_th,
                      straight=geom.is_straight, override=override_s,
                      speed_cap=numerics.speed_cap, geom_cache=_geom_cache(geom))

    # theta interfaces on interior rows: minus side from cell k-1, plus from k
    inner = lambda arr: arr[..., 1:-1, :]
    rollm = lambda arr: np.roll(arr, 1, axis=-1)
    a_t = stack(rollm(inner(v_tm)), inner(v_tp))
    q1_t = stack(rollm(inner(q1_tm)), inner(q1_tp))
    q2_t = stack(rollm(inner(q2_tm)), inner(q2_tp))
    th_pair = _recover(a_t, q1_t, q2_t, geom.k_tif, geom.absap_tif,
                       geom.a_o_tif, geom.g_o_tif, constants, a_th,
                       straight=geom.is_straight, override=override_t,
                       speed_cap=numerics.speed_cap, geom_cache=_geom_cache(geom))

    return InterfaceData(s_pair=s_pair, th_pair=th_pair)


def recover_cells(a_ext, q1_ext, q2_ext, geom: VesselGeometry, constants,
                  a_th, speed_cap=10.0) -> PairState:
    """Recovered primitive state of the active cells (interior + 1 ghost)."""
    act = lambda arr: arr[..., 1:-1, :]
    return _recover(act(a_ext), act(q1_ext), act(q2_ext),
                    geom.k_c_ext[1:-1], geom.absap_c_ext[1:-1],
                    geom.a_o_c_ext[1:-1], geom.g_o_c_ext[1:-1],
                    constants, a_th, straight=geom.is_straight,
                    speed_cap=speed_cap, geom_cache=_geom_cache(geom))


def local_speeds(iface: InterfaceData, constants, rho=None):
    """One-sided speeds from the extreme eigenvalues of both side states.

    The max/min sets include the bare advective velocities and zero, exactly
    the combination the positivity proof relies on.
    """
    rho = constants.rho if rho is None else rho

    def pair_speeds(p: PairState):
        if p.closures.d_psi_so is None:  # kernel-recovered state
            flat = lambda x: np.ascontiguousarray(x).ravel()
            l0s, lps, lms, l0t, lpt, lmt, status = _kernels.speeds_kernel(
                flat(p.a), flat(p.gamma), flat(p.u), flat(p.omega),
                flat(p.dp_da), constants.gamma_s, constants.gamma_theta, rho)
            if status:
                raise HyperbolicityError("negative eigenvalue discriminant")
            shape = p.a.shape
            return eig.WaveSpeeds(
                lambda0_s=l0s.reshape(shape), lambdaP_s=lps.reshape(shape),
                lambdaM_s=lms.reshape(shape), lambda0_th=l0t.reshape(shape),
                lambdaP_th=lpt.reshape(shape), lambdaM_th=lmt.reshape(shape),
                upsilon1=None, upsilon2=None)
        return eig.wave_speeds(p.a, p.u, p.omega, p.ll, p.r, p.gamma,
                               p.closures, p.dp_da, rho)

    w = pair_speeds(iface.s_pair)
    hi = np.maximum(np.maximum(w.lambda0_s, w.lambdaP_s), iface.s_pair.u)
    lo = np.minimum(np.minimum(w.lambda0_s, w.lambdaM_s), iface.s_pair.u)
    iface.a_plus = np.maximum(np.maximum(hi[0], hi[1]), 0.0)
    iface.a_minus = np.minimum(np.minimum(lo[0], lo[1]), 0.0)

    v = pair_speeds(iface.th_pair)
    hi = np.maximum(np.maximum(v.lambda0_th, v.lambdaP_th), iface.th_pair.omega)
    lo = np.minimum(np.minimum(v.lambda0_th, v.lambdaM_th), iface.th_pair.omega)
    iface.b_plus = np.maximum(np.maximum(hi[0], hi[1]), 0.0)
    iface.b_minus = np.minimum(np.minimum(lo[0], lo[1]), 0.0)
    return iface.a_plus, iface.a_minus, iface.b_plus, iface.b_minus


def physical_flux_s(p: PairState, rho):
    """Axial flux F(U) = (A u, psi_s1 A u^2 + A p_hat / rho, psi_th1 A u L)."""
    au = p.a * p.u
    return (au,
            p.closures.psi_s1 * au * p.u + p.ap_hat / rho,
            p.closures.psi_th1 * au * p.ll)


def physical_flux_th(p: PairState, rho):
    """Angular flux G(U) = (A w, psi_s2 A u w, psi_th2 A L w + A p_hat / rho)."""
    aw = p.a * p.omega
    return (aw,
            p.closures.psi_s2 * p.a * p.u * p.omega,
            p.closures.psi_th2 * p.a * p.ll * p.omega + p.ap_hat / rho)


def _conserved(p: PairState):
    return (p.a, p.closures.psi_so * p.a * p.u, p.a * p.ll)


def _central_upwind(flux_stack, cons_stack, sp_plus, sp_minus):
    """Central-upwind flux from stacked [minus, plus] physical fluxes.

    Falls back to the flux average where the speed gap degenerates (which only
    happens when both states are quiescent).
    """
    gap = sp_plus - sp_minus
    degenerate = gap < DEGENERATE_SPEED_GAP
    safe = np.where(degenerate, 1.0, gap)
    prod = sp_plus * sp_minus / safe
    out = []
    for f, u in zip(flux_stack, cons_stack):
        h = (sp_plus * f[0] - sp_minus * f[1]) / safe + prod * (u[1] - u[0])
        out.append(np.where(degenerate, 0.5 * (f[0] + f[1]), h))
    return tuple(out)


def compute_fluxes(iface: InterfaceData, constants):
    """Fill iface.flux_s / flux_th from the reconstructed states and speeds."""
    rho = constants.rho
    if iface.a_plus is None:
        local_speeds(iface, constants)
    if _kernels.HAVE_NUMBA:
        iface.flux_s = _flux_via_kernel(iface.s_pair, iface.a_plus,
                                        iface.a_minus, rho, True)
        iface.flux_th = _flux_via_kernel(iface.th_pair, iface.b_plus,
                                         iface.b_minus, rho, False)
        return iface
    iface.flux_s = _central_upwind(
        physical_flux_s(iface.s_pair, rho), _conserved(iface.s_pair),
        iface.a_plus, iface.a_minus)
    iface.flux_th = _central_upwind(
        physical_flux_th(iface.th_pair, rho), _conserved(iface.th_pair),
        iface.b_plus, iface.b_minus)
    return iface


def _flux_via_kernel(p: PairState, sp, sm, rho, axial):
    shape = p.a.shape[1:]
    n = int(np.prod(shape))
    two = lambda x: np.ascontiguousarray(
        np.broadcast_to(np.asarray(x, dtype=float), p.a.shape)).reshape(2, n)
    cl = p.closures
    h1, h2, h3 = _kernels.flux_kernel(
        two(p.a), two(p.u), two(p.ll), two(p.omega), two(p.ap_hat),
        two(cl.psi_so), two(cl.psi_s1), two(cl.psi_s2), two(cl.psi_th1),
        two(cl.psi_th2), np.ascontiguousarray(sp).ravel(),
        np.ascontiguousarray(sm).ravel(), rho, axial)
    return (h1.reshape(shape), h2.reshape(shape), h3.reshape(shape))


def cell_sources(field: ConservedField, geom: VesselGeometry, constants,
                 numerics: NumericsConfig, a_th, cell_state: PairState | None = None):
    """Midpoint source quadrature from the cell averages."""
    if cell_state is None:
        st = _recover(field.a, field.q1, field.q2, geom.k_c, geom.absap_c,
                      geom.a_o_c, geom.g_o_c, constants, a_th,
                      straight=geom.is_straight)
    else:
        st = cell_state
    ap_hat, ap_bar, _ = cls.pressure_products(field.a, geom.a_o_c, geom.g_o_c,
                                              constants.beta)
    # cell_state covers the active rows (one ghost each side); trim to interior
    pick = lambda x: x if (np.ndim(x) == 0 or x.shape[-2] == field.a.shape[-2]) \
        else x[..., 1:-1, :]
    a_d2, a_d3 = cls.pressure_source_gradients(
        ap_hat, ap_bar, geom.a_o_c, geom.g_o_c,
        geom.dg_o_ds, geom.dg_o_dth, geom.da_o_ds, geom.da_o_dth)
    return cls.source_terms(
        field.a, pick(st.r), pick(st.gamma), pick(st.u), pick(st.ll), a_d2, a_d3,
        geom.sin_alpha_c[:, None], geom.alpha_prime_c[:, None],
        geom.alpha_pp_c[:, None], geom.sin_theta_c, geom.cos_theta_c,
        constants, r_collapse=numerics.r_collapse)


def apply_boundaries(field: ConservedField, geom: VesselGeometry, constants,
                     boundaries: Boundaries, a_th):
    """Extend the field with two ghost cell layers on each s end.

    Neumann copies the normalized state (A/A_o, u, omega) into the ghosts so
    rest states extend exactly even through tapering; dirichlet_inlet imposes
    R = R_o, u = u_in(t), omega = 0; frozen inserts caller-supplied ghosts.
    """
    grid = geom.grid
    ng = grid.ghost_layers
    batch = field.a.shape[:-2]

    def ghost_from_state(edge_idx, rows):
        ratio = field.a[..., edge_idx, :] / geom.a_o_c[edge_idx]
        edge = _recover(field.a[..., edge_idx, :], field.q1[..., edge_idx, :],
                        field.q2[..., edge_idx, :], geom.k_c[edge_idx],
                        geom.absap_c[edge_idx], geom.a_o_c[edge_idx],
                        geom.g_o_c[edge_idx], constants, a_th,
                        straight=geom.is_straight)
        a_g = ratio[..., None, :] * geom.a_o_c_ext[rows]
        g = _recover(a_g, np.zeros_like(a_g), np.zeros_like(a_g),
                     geom.k_c_ext[rows], geom.absap_c_ext[rows],
                     geom.a_o_c_ext[rows], geom.g_o_c_ext[rows], constants,
                     a_th, straight=geom.is_straight)
        a_theta = g.closures.a_theta_over_r2 * g.r * g.r
        q1_g = g.closures.psi_so * a_g * edge.u[..., None, :]
        q2_g = a_g * a_theta * edge.omega[..., None, :]
        return a_g, q1_g, q2_g

    def inlet_ghosts(rows, t):
        cache = boundaries._inlet_cache
        if cache is None or cache[0] != id(geom):
            a_g = geom.a_o_c_ext[rows]
            g = _recover(a_g, np.zeros_like(a_g), np.zeros_like(a_g),
                         geom.k_c_ext[rows], geom.absap_c_ext[rows],
                         geom.a_o_c_ext[rows], geom.g_o_c_ext[rows], constants,
                         a_th, straight=geom.is_straight)
            cache = (id(geom), a_g, np.asarray(g.closures.psi_so * a_g))
            boundaries._inlet_cache = cache
        _, a_g, psi_a = cache
        u_in = float(boundaries.inlet_velocity(t))
        target = batch + (ng, grid.n_theta)
        return (np.broadcast_to(a_g, target),
                np.broadcast_to(psi_a * u_in, target),
                np.zeros(target))

    def frozen_ghosts(data):
        target = batch + (ng, grid.n_theta)
        return tuple(np.broadcast_to(np.asarray(d, dtype=float), target) for d in data)

    def build(side):
        kind = boundaries.left if side == "left" else boundaries.right
        rows = [0, 1] if side == "left" else [grid.n_s + ng, grid.n_s + ng + 1]
        if kind == "dirichlet_inlet":
            return inlet_ghosts(rows, field.time)
        if kind == "frozen":
            data = boundaries.frozen_left if side == "left" else boundaries.frozen_right
            if data is None:
                raise ConfigError(f"frozen boundary on {side} needs ghost data")
            return frozen_ghosts(data)
        edge_idx = 0 if side == "left" else grid.n_s - 1
        return ghost_from_state(edge_idx, rows)

    la, lq1, lq2 = build("left")
    ra, rq1, rq2 = build("right")
    cat = lambda g_l, mid, g_r: np.concatenate(
        [np.broadcast_to(g_l, batch + g_l.shape[-2:]), mid,
         np.broadcast_to(g_r, batch + g_r.shape[-2:])], axis=-2)
    return (cat(la, field.a, ra), cat(lq1, field.q1, rq1), cat(lq2, field.q2, rq2))


def rhs(field: ConservedField, geom: VesselGeometry, constants,
        numerics: NumericsConfig, boundaries: Boundaries,
        check_finite=True) -> RhsResult:
    """Flux divergence plus sources for every interior cell."""
    grid = geom.grid
    a_th = numerics.a_th_factor * geom.a_o_max
    a_ext, q1_ext, q2_ext = apply_boundaries(field, geom, constants, boundaries, a_th)
    cells = recover_cells(a_ext, q1_ext, q2_ext, geom, constants, a_th,
                          speed_cap=numerics.speed_cap)
    iface = reconstruct(a_ext, q1_ext, q2_ext, geom, constants, numerics, a_th,
                        cell_state=cells)
    local_speeds(iface, constants)
    compute_fluxes(iface, constants)

    hf = iface.flux_s
    if boundaries.left == "zero_flux" or boundaries.right == "zero_flux":
        hf = [np.array(h, copy=True) for h in hf]
        for h in hf:
            if boundaries.left == "zero_flux":
                h[..., 0, :] = 0.0
            if boundaries.right == "zero_flux":
                h[..., -1, :] = 0.0

    ds, dth = grid.delta_s, grid.delta_theta
    s2, s3 = cell_sources(field, geom, constants, numerics, a_th, cell_state=cells)

    def div(hs, ht):
        return (-(hs[..., 1:, :] - hs[..., :-1, :]) / ds
                - (np.roll(ht, -1, axis=-1) - ht) / dth)

    da = div(hf[0], iface.flux_th[0])
    dq1 = div(hf[1], iface.flux_th[1]) + s2
    dq2 = div(hf[2], iface.flux_th[2]) + s3

    if check_finite:
        for name, arr in (("dA/dt", da), ("dQ1/dt", dq1), ("dQ2/dt", dq2)):
            if not np.isfinite(arr).all():
                bad = np.argwhere(~np.isfinite(arr))[0]
                j, k = int(bad[-2]), int(bad[-1])
                raise NumericError(f"non-finite {name}", j=j, k=k, t=field.time)

    amax = float(np.max(np.maximum(iface.a_plus, -iface.a_minus)))
    bmax = float(np.max(np.maximum(iface.b_plus, -iface.b_minus)))
    return RhsResult(da=da, dq1=dq1, dq2=dq2, max_speed_s=amax, max_speed_th=bmax)


def cfl_dt(max_speed_s, max_speed_th, grid, numerics: NumericsConfig) -> float:
    """CFL time step: fraction * min(ds/a, dtheta/b), capped by dt_max."""
    dt = numerics.dt_max
    if max_speed_s > 0.0:
        dt = min(dt, numerics.cfl_fraction * grid.delta_s / max_speed_s)
    if max_speed_th > 0.0:
        dt = min(dt, numerics.cfl_fraction * grid.delta_theta / max_speed_th)
    return dt


def euler_update(field: ConservedField, r: RhsResult, dt: float) -> ConservedField:
    return ConservedField(field.a + dt * r.da, field.q1 + dt * r.dq1,
                          field.q2 + dt * r.dq2, field.time + dt)


def rk2_combine(field: ConservedField, stage1: ConservedField,
                r2: RhsResult, dt: float) -> ConservedField:
    a = 0.5 * field.a + 0.5 * (stage1.a + dt * r2.da)
    q1 = 0.5 * field.q1 + 0.5 * (stage1.q1 + dt * r2.dq1)
    q2 = 0.5 * field.q2 + 0.5 * (stage1.q2 + dt * r2.dq2)
    return ConservedField(a, q1, q2, field.time + dt)


def step_ssp_rk2(field: ConservedField, geom: VesselGeometry, constants,
                 numerics: NumericsConfig, boundaries: Boundaries,
                 max_dt=None):
    """One SSP-RK2 step; dt comes from the first-stage CFL bound.

    With positivity mode on, the step is re-taken with half the dt whenever a
    stage would produce a negative average: the positivity proof covers each
    Euler stage only under its own CFL bound, and the second stage of a near-
    dry front can tighten that bound below the stage-1 value.  Smooth runs
    never trigger the retry.

    Returns (new_field, dt, stage-1 RhsResult).
    """
    r1 = rhs(field, geom, constants, numerics, boundaries)
    dt = cfl_dt(r1.max_speed_s, r1.max_speed_th, geom.grid, numerics)
    if max_dt is not None:
        dt = min(dt, max_dt)
    guard = numerics.positivity
    a_th = numerics.a_th_factor * geom.a_o_max
    for _ in range(MAX_DT_RETRIES):
        stage1 = euler_update(field, r1, dt)
        if guard:
            if float(stage1.a.min()) < -a_th:
                dt *= 0.5
                continue
            _settle_dry(stage1, a_th)
        r2 = rhs(stage1, geom, constants, numerics, boundaries)
        out = rk2_combine(field, stage1, r2, dt)
        if guard:
            if float(out.a.min()) < -a_th:
                dt *= 0.5
                continue
            _settle_dry(out, a_th)
        return out, dt, r1
    raise NumericError("positivity guard collapsed the time step", t=field.time)


def _settle_dry(field: ConservedField, a_th):
    """Flush sub-threshold cells to proper dry states.

    Cells below the dry threshold carry no meaningful momentum: their
    velocities are desingularized to zero everywhere they are used, so letting
    round-off momenta accumulate there only feeds the L/A_theta ~ Q2/A^2
    recovery with noise once the reconstruction clamp lifts an interface value
    back to A_th.  Negative A entries at this level are flux round-off.
    """
    flush = field.a < a_th
    if flush.any():
        field.a[flush & (field.a < 0.0)] = 0.0
        field.q1[flush] = 0.0
        field.q2[flush] = 0.0

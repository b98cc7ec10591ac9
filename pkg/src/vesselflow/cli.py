"""Batch entry point: JSON config parsing, run orchestration, verification
subcommands.

Exit codes: 0 success, 1 configuration error, 2 numeric failure (non-finite
values or hyperbolicity loss), with the offending cell coordinates on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import eigensystem as eig
from . import geometry as geo
from . import postprocess as post
from . import scenarios as scn
from . import scheme as sch
from .closures import coriolis, pressure_products
from .errors import ConfigError, HyperbolicityError, NumericError, VesselflowError

THREADS_ENV = "VESSELFLOW_THREADS"

UNIT_FACTORS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "pressure": {"Pa": 1.0, "kPa": 1e3, "mmHg": 133.322387415},
    "time": {"s": 1.0, "ms": 1e-3},
    "velocity": {"m/s": 1.0, "cm/s": 1e-2},
    "viscosity": {"Pa*s": 1.0, "cP": 1e-3},
    "density": {"kg/m^3": 1.0, "g/cm^3": 1e3},
    "acceleration": {"m/s^2": 1.0},
    "inverse_length": {"1/m": 1.0, "1/cm": 1e2},
    "angle": {"rad": 1.0},
    "dimensionless": {"": 1.0},
}

_QUANTITY = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "object",
            "properties": {"value": {"type": "number"}, "unit": {"type": "string"}},
            "required": ["value", "unit"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "scenario": {
            "type": "object",
            "properties": {
                "preset": {"type": "string"},
                "grid": {
                    "type": "object",
                    "properties": {
                        "n_s": {"type": "integer", "minimum": 4},
                        "n_theta": {"type": "integer", "minimum": 4},
                        "s_length": _QUANTITY,
                    },
                    "required": ["n_s", "n_theta"],
                    "additionalProperties": False,
                },
                "constants": {
                    "type": "object",
                    "properties": {
                        "rho": _QUANTITY, "nu": _QUANTITY, "g": _QUANTITY,
                        "beta": {"type": "number"},
                        "gamma_s": {"type": "number"},
                        "gamma_theta": {"type": "number"},
                    },
                    "additionalProperties": False,
                },
                "bc_left": {"enum": list(sch.BC_KINDS)},
                "bc_right": {"enum": list(sch.BC_KINDS)},
                "inlet": {
                    "type": "object",
                    "properties": {
                        "period": _QUANTITY,
                        "cos_coefficients": {"type": "array", "items": {"type": "number"}},
                        "sin_coefficients": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "initial_condition": {"enum": ["rest", "radius_perturbation"]},
                "perturbation": {
                    "type": "object",
                    "properties": {
                        "s_center": _QUANTITY, "theta_center": {"type": "number"},
                        "amplitude": {"type": "number"}, "x_weight": {"type": "number"},
                    },
                    "additionalProperties": False,
                },
                "probes": {
                    "type": "object",
                    "properties": {
                        "s": {"type": "array", "items": _QUANTITY},
                        "theta": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "end_time": _QUANTITY,
                "max_steps": {"type": ["integer", "null"], "minimum": 1},
                "output": {
                    "type": "object",
                    "properties": {
                        "probe_every_steps": {"type": ["integer", "null"], "minimum": 1},
                        "probe_every_seconds": {"type": ["number", "null"]},
                        "snapshot_times": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "geometry": {
                    "type": "object",
                    "properties": {
                        "custom": {
                            "type": "object",
                            "properties": {
                                "s": {"type": "array", "items": _QUANTITY},
                                "alpha": {"type": "array", "items": {"type": "number"}},
                                "r_o": {"type": "array", "items": _QUANTITY},
                                "g_o": {"type": "array", "items": _QUANTITY},
                                "eccentricity": {"type": "number"},
                            },
                            "required": ["s", "alpha", "r_o", "g_o"],
                            "additionalProperties": False,
                        },
                    },
                    "additionalProperties": False,
                },
            },
            "required": ["preset", "grid"],
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "phi": {"type": "number"},
                "cfl_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "positivity_mode": {"type": "boolean"},
                "a_th_factor": {"type": "number"},
                "dt_max": _QUANTITY,
            },
            "additionalProperties": False,
        },
        "threads": {"type": "integer", "minimum": 1},
    },
    "required": ["scenario"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RunConfig:
    scenario: scn.ScenarioConfig
    numerics: sch.NumericsConfig
    threads: int = 1


def _si(value, kind, default=None):
    if value is None:
        return default
    if isinstance(value, dict):
        unit = value["unit"]
        table = UNIT_FACTORS[kind]
        if unit not in table:
            raise ConfigError(f"unknown {kind} unit {unit!r} (supported: {sorted(table)})")
        return float(value["value"]) * table[unit]
    return float(value)


def parse_config(doc: dict) -> RunConfig:
    """Validate a JSON config document and build the run configuration."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation at {list(exc.absolute_path)}: {exc.message}")

    s = doc["scenario"]
    preset = s["preset"]
    known = (*geo.PRESETS, "custom")
    if preset not in known:
        raise ConfigError(f"unknown preset {preset!r} (expected one of {known})")

    g = s["grid"]
    if preset.startswith("aorta"):
        s_length = _si(g.get("s_length"), "length", geo.AORTA_LENGTH)
    elif preset == "horizontal_tapered":
        s_length = _si(g.get("s_length"), "length", 0.5)
    else:
        if "s_length" not in g:
            raise ConfigError("custom geometry requires grid.s_length")
        s_length = _si(g["s_length"], "length")
    grid = geo.GridSpec(g["n_s"], g["n_theta"], s_length)

    c = s.get("constants", {})
    constants = geo.PhysicalConstants(
        rho=_si(c.get("rho"), "density", 1050.0),
        nu=_si(c.get("nu"), "viscosity", 4.0e-3),
        g=_si(c.get("g"), "acceleration", 9.81),
        beta=float(c.get("beta", 2.0)),
        gamma_s=float(c.get("gamma_s", 9.0)),
        gamma_theta=float(c.get("gamma_theta", 2.0)),
    )

    inlet = None
    if "inlet" in s:
        i = s["inlet"]
        inlet = scn.InletWaveform(
            period=_si(i.get("period"), "time", scn.DEFAULT_PULSE_PERIOD),
            cos_coefficients=tuple(i.get("cos_coefficients", scn.DEFAULT_PULSE_COS)),
            sin_coefficients=tuple(i.get("sin_coefficients", scn.DEFAULT_PULSE_SIN)),
        )
    bc_left = s.get("bc_left", "dirichlet_inlet" if preset.startswith("aorta") else "neumann")
    if bc_left == "dirichlet_inlet" and inlet is None:
        inlet = scn.InletWaveform()

    perturbation = None
    if "perturbation" in s:
        p = s["perturbation"]
        perturbation = scn.PerturbationSpec(
            s_center=_si(p["s_center"], "length"),
            theta_center=float(p["theta_center"]),
            amplitude=float(p.get("amplitude", 0.2)),
            x_weight=float(p.get("x_weight", 0.25)),
        )
    ic = s.get("initial_condition", "rest")
    if ic == "radius_perturbation" and perturbation is None:
        perturbation = scn.PerturbationSpec(s_center=0.25, theta_center=np.pi / 4.0)

    probes = s.get("probes", {})
    probe_s = tuple(_si(v, "length") for v in probes.get("s", ()))
    probe_theta = tuple(float(v) for v in probes.get("theta", ()))

    out = s.get("output", {})
    output = scn.OutputPlan(
        probe_every_steps=out.get("probe_every_steps"),
        probe_every_seconds=out.get("probe_every_seconds"),
        snapshot_times=tuple(out.get("snapshot_times", ())),
    )

    custom = None
    if "geometry" in s and "custom" in s["geometry"]:
        tabs = s["geometry"]["custom"]
        custom = {
            "s": [_si(v, "length") for v in tabs["s"]],
            "alpha": [float(v) for v in tabs["alpha"]],
            "r_o": [_si(v, "length") for v in tabs["r_o"]],
            "g_o": [_si(v, "pressure") for v in tabs["g_o"]],
            "eccentricity": float(tabs.get("eccentricity", 0.0)),
        }

    scenario = scn.ScenarioConfig(
        preset=preset, grid=grid, constants=constants,
        bc_left=bc_left, bc_right=s.get("bc_right", "neumann"),
        inlet=inlet, initial_condition=ic, perturbation=perturbation,
        probe_s=probe_s, probe_theta=probe_theta,
        end_time=_si(s.get("end_time"), "time", 0.1),
        max_steps=s.get("max_steps"),
        output=output, custom_geometry=custom,
    )

    n = doc.get("numerics", {})
    numerics = sch.NumericsConfig(
        phi=float(n.get("phi", 1.3)),
        cfl_fraction=float(n.get("cfl_fraction", 0.25)),
        positivity=bool(n.get("positivity_mode", True)),
        a_th_factor=float(n.get("a_th_factor", 1e-10)),
        dt_max=_si(n.get("dt_max"), "time", 1e-2),
    )

    threads = int(doc.get("threads", os.environ.get(THREADS_ENV, 1)))
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    return RunConfig(scenario=scenario, numerics=numerics, threads=threads)


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialize a RunConfig back to a plain-SI JSON document."""
    s = cfg.scenario
    doc = {
        "scenario": {
            "preset": s.preset,
            "grid": {"n_s": s.grid.n_s, "n_theta": s.grid.n_theta,
                     "s_length": s.grid.s_length},
            "constants": {
                "rho": s.constants.rho, "nu": s.constants.nu, "g": s.constants.g,
                "beta": s.constants.beta, "gamma_s": s.constants.gamma_s,
                "gamma_theta": s.constants.gamma_theta,
            },
            "bc_left": s.bc_left,
            "bc_right": s.bc_right,
            "initial_condition": s.initial_condition,
            "probes": {"s": list(s.probe_s), "theta": list(s.probe_theta)},
            "end_time": s.end_time,
            "max_steps": s.max_steps,
            "output": {
                "probe_every_steps": s.output.probe_every_steps,
                "probe_every_seconds": s.output.probe_every_seconds,
                "snapshot_times": list(s.output.snapshot_times),
            },
        },
        "numerics": {
            "phi": cfg.numerics.phi,
            "cfl_fraction": cfg.numerics.cfl_fraction,
            "positivity_mode": cfg.numerics.positivity,
            "a_th_factor": cfg.numerics.a_th_factor,
            "dt_max": cfg.numerics.dt_max,
        },
        "threads": cfg.threads,
    }
    if s.inlet is not None:
        doc["scenario"]["inlet"] = {
            "period": s.inlet.period,
            "cos_coefficients": list(s.inlet.cos_coefficients),
            "sin_coefficients": list(s.inlet.sin_coefficients),
        }
    if s.perturbation is not None:
        doc["scenario"]["perturbation"] = {
            "s_center": s.perturbation.s_center,
            "theta_center": s.perturbation.theta_center,
            "amplitude": s.perturbation.amplitude,
            "x_weight": s.perturbation.x_weight,
        }
    if s.custom_geometry is not None:
        doc["scenario"]["geometry"] = {"custom": dict(s.custom_geometry)}
    return doc


@dataclass
class RunResult:
    field: sch.ConservedField
    steps: int
    wall_seconds: float
    probe_rows: list
    snapshots_written: list


def simulate(cfg: RunConfig, out_dir: Path | None = None, log=None) -> RunResult:
    """Run a configured scenario to its end time.

    Writes snapshots while running when out_dir is given; probe rows are
    collected in memory either way.
    """
    scenario = cfg.scenario
    geom = scn.build_geometry(scenario)
    field = scn.initial_condition(scenario, geom)
    boundaries = sch.Boundaries(left=scenario.bc_left, right=scenario.bc_right,
                                inlet_velocity=scenario.inlet)
    constants, numerics = scenario.constants, cfg.numerics
    log = log if log is not None else (lambda msg: print(msg, file=sys.stderr))

    rows = list(post.probe_rows(field, geom, constants,
                                scenario.probe_s, scenario.probe_theta))
    pending_snaps = sorted(scenario.output.snapshot_times)
    snapshots = []
    next_probe_time = (scenario.output.probe_every_seconds
                       if scenario.output.probe_every_seconds else None)

    t_start = time.perf_counter()
    steps = 0
    while field.time < scenario.end_time - 1e-15:
        if scenario.max_steps is not None and steps >= scenario.max_steps:
            break
        field, dt, r1 = sch.step_ssp_rk2(field, geom, constants, numerics,
                                         boundaries,
                                         max_dt=scenario.end_time - field.time)
        steps += 1
        if steps % 100 == 0:
            log(f"step {steps}: t={field.time:.6e} dt={dt:.3e} "
                f"a_max={r1.max_speed_s:.3e} b_max={r1.max_speed_th:.3e} "
                f"min_A={float(field.a.min()):.3e}")

        due = False
        if scenario.output.probe_every_steps:
            due = steps % scenario.output.probe_every_steps == 0
        if next_probe_time is not None and field.time >= next_probe_time - 1e-15:
            due = True
            next_probe_time += scenario.output.probe_every_seconds
        if due:
            rows.extend(post.probe_rows(field, geom, constants,
                                        scenario.probe_s, scenario.probe_theta))

        while pending_snaps and field.time >= pending_snaps[0] - 1e-15:
            t_snap = pending_snaps.pop(0)
            if out_dir is not None:
                sample = post.surface_velocity_field(field, geom, constants)
                name = f"surface_{t_snap:.6f}.vtk"
                post.write_vtk_snapshot(Path(out_dir) / name, sample)
                snapshots.append(name)

    return RunResult(field=field, steps=steps,
                     wall_seconds=time.perf_counter() - t_start,
                     probe_rows=rows, snapshots_written=snapshots)


def _load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    return parse_config(doc)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.threads is not None:
        cfg = RunConfig(cfg.scenario, cfg.numerics, args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = simulate(cfg, out_dir=out_dir)
    post.write_probe_csv(out_dir / "probes.csv", result.probe_rows)
    doc = json.dumps(config_to_dict(cfg), sort_keys=True)
    manifest = {
        "version": f"vesselflow-{__version__}",
        "config_sha256": hashlib.sha256(doc.encode()).hexdigest(),
        "preset": cfg.scenario.preset,
        "n_s": cfg.scenario.grid.n_s,
        "n_theta": cfg.scenario.grid.n_theta,
        "steps": result.steps,
        "simulated_time": result.field.time,
        "wall_clock_seconds": f"{result.wall_seconds:.3f}",
        "threads": cfg.threads,
        "positivity_mode": cfg.numerics.positivity,
        "snapshots": ",".join(result.snapshots_written),
    }
    post.write_manifest(out_dir / "manifest.txt", manifest)
    (out_dir / "config.json").write_text(doc + "\n")
    print(f"completed {result.steps} steps to t={result.field.time:.6g} s "
          f"in {result.wall_seconds:.2f} s")
    return 0


def _cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    geom = scn.build_geometry(cfg.scenario)
    cl0 = coriolis(0.0, cfg.scenario.constants.gamma_s, cfg.scenario.constants.gamma_theta)
    ok, residuals = eig.hyperbolicity_sufficient(cl0)
    if not ok:
        raise ConfigError(
            f"sufficient hyperbolicity conditions fail for these profiles: {residuals}")
    print(f"config OK: preset={cfg.scenario.preset} grid={geom.grid.n_s}x{geom.grid.n_theta} "
          f"mean_R_o={geom.mean_r_o:.4e} m; hyperbolicity residuals "
          + " ".join(f"{r:.6g}" for r in residuals))
    return 0


def _cmd_hyperbolicity_report(args) -> int:
    constants = geo.PhysicalConstants()
    rho, beta = constants.rho, constants.beta
    gs, gt = constants.gamma_s, constants.gamma_theta
    r_o_ref = args.r_o_ref
    gammas = np.linspace(-0.9, 0.9, 13)
    gammas[np.abs(gammas) < 1e-12] = 0.0       # keep the Cardano slice exact
    us = np.linspace(-2.0, 2.0, 9)
    omegas = np.linspace(-50.0, 50.0, 9)
    omegas[np.abs(omegas) < 1e-12] = 0.0
    a_o = 1e-4
    g_o = 5e4
    lines = [
        f"# vesselflow hyperbolicity sweep; R_o_ref={r_o_ref} m (reference length"
        " weighting the angular direction)",
        "gamma,u,omega,disc_s,disc_theta,cardano",
    ]
    for gamma in gammas:
        cl = coriolis(gamma, gs, gt)
        for u in us:
            for omega in omegas:
                r = np.sqrt(a_o / (0.5 - gamma / 3.0))
                a = a_o
                _, _, dp_da = pressure_products(a, a_o, g_o, beta)
                w = eig.wave_speeds(a, u, omega, 0.0, r, gamma, cl, dp_da, rho,
                                    check=False)
                disc_s = (w.lambdaP_s - w.lambdaM_s) ** 2 / 4.0
                disc_t = (w.lambdaP_th - w.lambdaM_th) ** 2 / 4.0
                if gamma == 0.0 and omega == 0.0:
                    card = eig.cardano_discriminant(
                        a, u, a_o, g_o, rho, beta, gs, gt,
                        np.sqrt(0.5), np.sqrt(0.5), r_o_ref)
                else:
                    card = float("nan")
                lines.append(
                    f"{gamma:.6g},{u:.6g},{omega:.6g},{float(disc_s):.9g},"
                    f"{float(disc_t):.9g},{float(card):.9g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(lines) - 2} rows)")
    return 0


def convergence_study(preset="horizontal_tapered", grids=((50, 32), (100, 64), (200, 128)),
                      end_time=0.01, phi=1.3):
    """Self-convergence on a smooth pulse: returns (errors, observed orders).

    Successive solutions are compared in L1 after restricting the finer grid
    by 2x2 cell averaging.
    """
    fields = []
    for n_s, n_theta in grids:
        cfg = scn.scenario_preset(
            preset, n_s=n_s, n_theta=n_theta,
            initial_condition="rest", perturbation=None,
            bc_left="zero_flux", bc_right="zero_flux",
            end_time=end_time,
            output=scn.OutputPlan(),
        )
        geom = scn.build_geometry(cfg)
        field = scn.initial_condition(cfg, geom)
        s_c = geom.grid.s_centers[:, None]
        th_c = geom.theta_c[None, :]
        bump = np.exp(-0.5 * ((s_c - 0.25) / 0.04) ** 2) * (1.0 + 0.5 * np.cos(th_c))
        field.a = geom.a_o_c * (1.0 + 0.05 * bump)
        boundaries = sch.Boundaries(left=cfg.bc_left, right=cfg.bc_right)
        numerics = sch.NumericsConfig(phi=phi)
        while field.time < end_time - 1e-15:
            field, _, _ = sch.step_ssp_rk2(field, geom, cfg.constants, numerics,
                                           boundaries, max_dt=end_time - field.time)
        fields.append((geom, field))

    def restrict(arr):
        return 0.25 * (arr[0::2, 0::2] + arr[1::2, 0::2]
                       + arr[0::2, 1::2] + arr[1::2, 1::2])

    errors = []
    for (geom_c, f_c), (geom_f, f_f) in zip(fields[:-1], fields[1:]):
        diff = np.abs(restrict(f_f.a) - f_c.a)
        errors.append(float(np.sum(diff) * geom_c.grid.delta_s * geom_c.grid.delta_theta))
    orders = [float(np.log2(errors[i] / errors[i + 1])) for i in range(len(errors) - 1)]
    return errors, orders


def _cmd_convergence(args) -> int:
    grids = ((50, 32), (100, 64), (200, 128))
    errors, orders = convergence_study(preset=args.preset, grids=grids)
    print("grid pair            L1 error      observed order")
    for i, err in enumerate(errors):
        tag = f"{grids[i][0]}x{grids[i][1]} vs {grids[i+1][0]}x{grids[i+1][1]}"
        order = f"{orders[i-1]:.3f}" if i >= 1 else "-"
        print(f"{tag:<20} {err:.6e}  {order}")
    print(f"observed orders: {['%.3f' % o for o in orders]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vesselflow",
        description="2D finite-volume blood-flow solver for compliant vessels")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)

    p_rep = sub.add_parser("hyperbolicity-report",
                           help="CSV sweep of eigenvalue discriminants")
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--r-o-ref", type=float, default=1.2e-2,
                       help="reference length for the mixed-direction discriminant")
    p_rep.set_defaults(func=_cmd_hyperbolicity_report)

    p_conv = sub.add_parser("convergence", help="self-convergence study")
    p_conv.add_argument("--preset", default="horizontal_tapered",
                        choices=["horizontal_tapered"])
    p_conv.set_defaults(func=_cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure at {exc.location()}: {exc}", file=sys.stderr)
        return 2
    except HyperbolicityError as exc:
        print(f"hyperbolicity loss: {exc}", file=sys.stderr)
        return 2
    except VesselflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

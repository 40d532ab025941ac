"""Command-line entry point: one subcommand per toolkit capability.

Angles are degrees at this boundary and radians internally.  All outputs are
deterministic: identical config, fixtures and flags give byte-identical
files.  Exit codes: 0 success, 2 usage, 3 config error, 4 module error,
5 I/O error.
"""

import csv
import io
import json
import math
import sys

import click
import numpy as np

from . import compliance, export as export_mod, kinematics, pneumatics, pressure, vision
from .config import load_config
from .errors import ConfigError, ToolkitError

EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MODULE = 4
EXIT_IO = 5


def _write_text(path, text: str) -> None:
    """Build-then-write so a failure never leaves a partial file."""
    data = text.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (int, float, np.floating)) else v for v in row])
    return buf.getvalue()


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML config file.")
@click.pass_context
def cli(ctx, config_path):
    """Desk-scale toolkit for the 6-DOF soft-rigid hybrid gripper."""
    ctx.obj = load_config(config_path)


@cli.command()
@click.option("--theta1", type=float, required=True, help="Proximal flexion, degrees.")
@click.option("--theta2", type=float, required=True, help="Distal relative angle, degrees.")
@click.option("--phi", type=float, required=True, help="Lateral rotation, degrees.")
@click.pass_obj
def fk(cfg, theta1, theta2, phi):
    """Fingertip position from joint angles."""
    angles = kinematics.JointAngles(*(math.radians(v) for v in (theta1, theta2, phi)))
    tip = kinematics.forward_kinematics(angles, cfg.geometry, cfg.limits)
    click.echo(f"tip_mm: ({tip[0]:.6f}, {tip[1]:.6f}, {tip[2]:.6f})")


@cli.command()
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--z", type=float, required=True)
@click.pass_obj
def ik(cfg, x, y, z):
    """Joint angles (degrees) that reach a tip position (mm)."""
    a = kinematics.inverse_kinematics((x, y, z), cfg.geometry, cfg.limits)
    click.echo(
        "angles_deg: "
        f"theta1={math.degrees(a.theta1):.6f}, "
        f"theta2={math.degrees(a.theta2):.6f}, "
        f"phi={math.degrees(a.phi):.6f}"
    )


@cli.command()
@click.option("--resolution", type=float, default=2.865, show_default=True, help="Grid step, degrees.")
@click.option("--out", type=click.Path(), required=True, help="Output CSV path.")
@click.pass_obj
def workspace(cfg, resolution, out):
    """Sample the fingertip workspace onto a CSV point cloud."""
    pts = kinematics.workspace_sample(cfg.limits, cfg.geometry, math.radians(resolution))
    _write_text(out, _csv_text(("x_mm", "y_mm", "z_mm"), pts))
    click.echo(f"workspace: {len(pts)} points -> {out}")


@cli.command()
@click.option("--samples", type=click.Path(), required=True, help="CSV of pressure_kPa, angle_deg.")
@click.pass_obj
def calibrate(cfg, samples):
    """Fit a linear pressure-to-angle map from calibration samples."""
    rows = []
    with open(samples, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                p, a = float(row[0]), float(row[1])
            except ValueError:
                continue  # header line
            rows.append(pressure.CalibrationSample(pressure=p, angle=math.radians(a)))
    fitted, rmse = pressure.fit_linear_map(rows)
    click.echo(
        f"fit: k={math.degrees(fitted.k):.6f} deg/kPa, "
        f"b={math.degrees(fitted.b):.6f} deg, RMSE={math.degrees(rmse):.3f} deg"
    )


@cli.command("map")
@click.option("--p0", type=float, required=True)
@click.option("--p1", type=float, required=True)
@click.option("--p2", type=float, required=True)
@click.option("--p3", type=float, required=True)
@click.pass_obj
def map_cmd(cfg, p0, p1, p2, p3):
    """Joint angles and tip position from the four channel pressures (kPa)."""
    p = pressure.PressureVector(p0, p1, p2, p3)
    a = pressure.angles_from_pressures(p, cfg.maps, cfg.p_max)
    tip = pressure.fk_from_pressures(p, cfg.maps, cfg.geometry, cfg.p_max, cfg.limits)
    click.echo(
        "angles_deg: "
        f"theta1={math.degrees(a.theta1):.6f}, theta2={math.degrees(a.theta2):.6f}, "
        f"phi={math.degrees(a.phi):.6f}; "
        f"tip_mm: ({tip[0]:.6f}, {tip[1]:.6f}, {tip[2]:.6f})"
    )


@cli.command()
@click.option("--reference", type=float, required=True, help="Step reference, kPa.")
@click.option("--duration", type=float, default=1.0, show_default=True, help="Seconds.")
@click.option("--out", type=click.Path(), required=True, help="Trace CSV path.")
@click.pass_obj
def simulate(cfg, reference, duration, out):
    """Closed-loop step response of chamber 0 under the bang-bang loop."""
    cycle = pneumatics.TrackingCycle(interval=duration, references=(reference,) * 8)
    result = pneumatics.run_tracking_test([cycle], cfg.controller, cfg.plant)
    rows = np.column_stack([result.times, result.references[:, 0], result.measured[:, 0]])
    _write_text(out, _csv_text(("time_s", "reference_kpa", "measured_kpa"), rows))
    reached = "reached" if result.cycle_reached[0] else "NOT reached"
    click.echo(f"simulate: reference {reference} kPa {reached} -> {out}")


@cli.command()
@click.option(
    "--schedule",
    type=click.Choice(["group1", "group2", "group3"]),
    default="group1",
    show_default=True,
    help="Built-in tracking group (shared open/close, same-direction swing, opposite swing).",
)
@click.option("--out", type=click.Path(), required=True, help="Trace CSV path.")
@click.pass_obj
def track(cfg, schedule, out):
    """Run the shrinking-interval tracking benchmark and report per-cycle reach."""
    group = int(schedule[-1])
    cycles = pneumatics.make_group_schedule(
        group,
        high=cfg.tracking.high,
        low=cfg.tracking.low,
        start_interval=cfg.tracking.start_interval,
        decrement=cfg.tracking.decrement,
        floor=cfg.tracking.floor,
    )
    result = pneumatics.run_tracking_test(cycles, cfg.controller, cfg.plant)
    header = ["time_s"] + [f"ref{i}_kpa" for i in range(8)] + [f"meas{i}_kpa" for i in range(8)]
    rows = np.column_stack([result.times, result.references, result.measured])
    _write_text(out, _csv_text(header, rows))
    click.echo(result.reach_report())
    n_ok = sum(result.cycle_reached)
    click.echo(f"track: {n_ok}/{len(result.cycle_reached)} cycles reached -> {out}")


@cli.command()
@click.option("--amplitude", type=float, default=1.0, show_default=True, help="Pulse torque.")
@click.option("--duration", type=float, default=2.0, show_default=True, help="Seconds.")
@click.option("--dt", type=float, default=0.01, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Angle trace CSV path.")
@click.pass_obj
def hold(cfg, amplitude, duration, dt, out):
    """Holding-mode recovery under a rectangular torque pulse."""
    n = int(round(duration / dt))
    torque = np.zeros(n)
    torque[n // 4 : n // 2] = amplitude
    angles = pneumatics.holding_recovery_test(torque, cfg.holding)
    times = dt * np.arange(n)
    _write_text(out, _csv_text(("time_s", "torque", "angle_rad"), np.column_stack([times, torque, angles])))
    click.echo(f"hold: peak deflection {np.max(np.abs(angles)):.6g} rad, final {angles[-1]:.6g} rad -> {out}")


@cli.command("chain-stress")
@click.option(
    "--mode",
    type=click.Choice([m.value for m in compliance.ComplianceEnds]),
    default="both",
    show_default=True,
)
@click.option("--displacement", type=float, default=10.0, show_default=True, help="mm.")
@click.option("--out", type=click.Path(), required=True, help="Curve CSV path.")
@click.pass_obj
def chain_stress(cfg, mode, displacement, out):
    """Closed-chain force-displacement curve for a compliance mode."""
    scenario = compliance.ClosedChainScenario(
        displacement_error=displacement, compliant_ends=compliance.ComplianceEnds(mode)
    )
    curve = compliance.closed_chain_force(scenario, cfg.stiffness)
    _write_text(out, _csv_text(("displacement_mm", "force_n"), curve))
    click.echo(f"chain-stress[{mode}]: peak force {curve[-1, 1]:.3f} N -> {out}")


@cli.command()
@click.option("--lateral/--no-lateral", "enabled", default=True, help="Lateral DOF enabled?")
@click.pass_obj
def payload(cfg, enabled):
    """Modeled peak pull-out force with or without the lateral DOF."""
    force = compliance.payload_envelope(enabled, cfg.stiffness, cfg.payload)
    state = "enabled" if enabled else "disabled"
    click.echo(f"payload[lateral {state}]: {force:.2f} N")


@cli.command()
@click.option("--out", type=click.Path(), required=True, help="Tolerance CSV path.")
@click.pass_obj
def tolerance(cfg, out):
    """Over-press tolerance across the tested approach angles."""
    rows = [
        (a, compliance.poke_tolerance(a, cfg.stiffness, cfg.poke))
        for a in compliance.APPROACH_ANGLE_GRID
    ]
    _write_text(out, _csv_text(("angle_deg", "tolerance_mm"), rows))
    best = max(rows, key=lambda r: r[1])
    click.echo(f"tolerance: max {best[1]:.3f} mm at {best[0]:g} deg -> {out}")


@cli.command()
@click.option("--image", type=click.Path(), required=True, help="PNG or PPM input.")
@click.pass_obj
def detect(cfg, image):
    """Detect the two grasp midpoints and lift them to world coordinates."""
    img = vision.load_image(image)
    p1, p2, rect = vision.detect_grasp_points(img, cfg.hsv, inset=cfg.grasp.inset_px)
    w1 = vision.image_to_world(p1, cfg.camera)
    w2 = vision.image_to_world(p2, cfg.camera)
    click.echo(f"grasp_px: ({p1[0]:.3f}, {p1[1]:.3f}) and ({p2[0]:.3f}, {p2[1]:.3f})")
    click.echo(
        f"grasp_mm: ({w1[0]:.3f}, {w1[1]:.3f}, {w1[2]:.3f}) and "
        f"({w2[0]:.3f}, {w2[1]:.3f}, {w2[2]:.3f})"
    )


@cli.command()
@click.option("--image", type=click.Path(), required=True, help="PNG or PPM input.")
@click.option("--angle", type=float, default=None, help="Approach angle, degrees.")
@click.option("--overpress", type=float, default=None, help="Over-press depth, mm.")
@click.option("--out", type=click.Path(), required=True, help="Plan JSON path.")
@click.pass_obj
def plan(cfg, image, angle, overpress, out):
    """Detect a grasp point and emit the full poke-and-pinch plan."""
    img = vision.load_image(image)
    p1, p2, _ = vision.detect_grasp_points(img, cfg.hsv, inset=cfg.grasp.inset_px)
    world = vision.image_to_world(p1, cfg.camera)
    g = cfg.grasp
    depth = g.overpress if overpress is None else overpress
    # the over-press budget soaks up camera depth error first; only the
    # residual must be absorbed by the lateral compliance
    residual_error = max(0.0, cfg.camera.depth_sigma - depth)
    plan_obj = vision.plan_poke_and_pinch(
        world,
        approach_angle=g.approach_angle if angle is None else angle,
        overpress=depth,
        cam_error_margin=residual_error,
        stiffness=cfg.stiffness,
        poke_params=cfg.poke,
        standoff=g.standoff,
        open_angles=g.open_angles,
        pinch_angles=g.pinch_angles,
    )
    doc = {
        "grasp_point_mm": list(plan_obj.grasp_point),
        "secondary_point_px": [float(p2[0]), float(p2[1])],
        "approach_angle_deg": plan_obj.approach_angle,
        "overpress_mm": plan_obj.overpress_depth,
        "waypoints": [
            {"position_mm": list(w.position), "approach_angle_deg": w.approach_angle}
            for w in plan_obj.waypoints
        ],
        "mode_schedule": [
            {
                "mode": c.mode.value,
                "target_pressure_kpa": c.target_pressure,
                "target_angles_deg": None
                if c.target_angles is None
                else [math.degrees(v) for v in c.target_angles.as_tuple()],
            }
            for c in plan_obj.mode_schedule
        ],
    }
    _write_text(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    click.echo(
        f"plan: grasp at ({world[0]:.1f}, {world[1]:.1f}, {world[2]:.1f}) mm, "
        f"{len(plan_obj.waypoints)} waypoints -> {out}"
    )


@cli.command("export")
@click.option("--theta1", type=float, default=0.0, show_default=True, help="Degrees.")
@click.option("--theta2", type=float, default=0.0, show_default=True, help="Degrees.")
@click.option("--phi", type=float, default=0.0, show_default=True, help="Degrees.")
@click.option("--out", type=click.Path(), required=True, help="URDF output path.")
@click.pass_obj
def export_cmd(cfg, theta1, theta2, phi, out):
    """Export the gripper as a URDF robot description."""
    angles = kinematics.JointAngles(*(math.radians(v) for v in (theta1, theta2, phi)))
    desc = export_mod.build_description(
        geom=cfg.geometry,
        limits=cfg.limits,
        angles_a=angles,
        angles_b=angles,
        sphere_count=cfg.export.sphere_count,
        large_bellows=cfg.export.large_bellows,
        small_bellows=cfg.export.small_bellows,
    )
    _write_text(out, export_mod.write_description(desc))
    n_spheres = sum(len(l.spheres) for l in desc.links)
    click.echo(f"export: {len(desc.links)} links, {len(desc.joints)} joints, {n_spheres} spheres -> {out}")


def main(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(e.exit_code)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except ConfigError as e:
        click.echo(f"error:config: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except ToolkitError as e:
        click.echo(f"error:{e.category}: {e}", err=True)
        sys.exit(EXIT_MODULE)
    except ValueError as e:
        click.echo(f"error:argument: {e}", err=True)
        sys.exit(EXIT_MODULE)
    except OSError as e:
        click.echo(f"error:io: {e}", err=True)
        sys.exit(EXIT_IO)


if __name__ == "__main__":
    main()

"""phaseforge command line: calibrate | compile | simulate | report | demo.

Every failure exits non-zero with a first stderr line ``error: <CODE>: <detail>``.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import compiler, config, density, device, io, simulator
from .errors import FormatError, PhaseforgeError
from .report import render_shift_plot


def cmd_calibrate(config_path, out_lut_path):
    cfg = config.load_config(config_path)
    lut = device.simulate_calibration(cfg.pslm, cfg.sweep())
    io.write_lut(out_lut_path, lut)
    lo, hi = lut.shift_range
    theta = np.arctan(hi / cfg.pslm.ref_plane_distance)
    print(f"knots: {len(lut)}")
    print(f"budget: shift [{lo:.9g}, {hi:.9g}] m at {cfg.pslm.ref_plane_distance:g} m, max deflection {theta:.9g} rad")
    return 0


def cmd_compile(config_path, lut_path, out_pgm, out_plan_csv):
    cfg = config.load_config(config_path)
    lut = io.read_lut(lut_path)
    image, targets, plan = compiler.compile_phase_image(
        cfg.projector, cfg.surface, cfg.pslm, lut, rows=cfg.compile.rows, wrap_mode=cfg.compile.wrap_mode
    )
    io.write_pgm(out_pgm, image)
    io.write_plan(out_plan_csv, targets, plan)
    peak = float(np.abs(targets.deflection).max())
    print(f"phase image: {image.width}x{image.height}, wraps/row {image.wrap_counts[0]}")
    print(f"max deflection: {peak:.9g} rad ({peak / cfg.pslm.nyquist_deflection:.3f} of Nyquist)")
    return 0


def cmd_simulate(config_path, pgm_path, out_csv):
    cfg = config.load_config(config_path)
    image = io.read_pgm(pgm_path)
    if image.levels != cfg.pslm.levels or image.width != cfg.slm_width:
        raise FormatError(
            pgm_path,
            0,
            f"image {image.width}x{image.height} maxval {image.levels - 1} does not match "
            f"config width {cfg.slm_width} maxval {cfg.pslm.max_drive}",
        )
    try:
        result = simulator.forward_simulate(cfg.projector, cfg.surface, cfg.pslm, image)
    except ValueError as exc:
        if isinstance(exc, PhaseforgeError):
            raise
        raise FormatError(pgm_path, 0, str(exc)) from None
    io.write_simulation(out_csv, result)
    summary = result.summary()
    io.write_json(Path(out_csv).with_suffix(".json"), summary)
    print(io.dumps_json(summary), end="")
    return 0


def cmd_report(sim_csv, out_svg):
    sim = io.read_simulation(sim_csv)
    if sim["pixel"].size == 0:
        raise FormatError(sim_csv, 0, "no data rows")
    svg = render_shift_plot(sim["pixel"], sim["target_shift_m"], sim["achieved_shift_m"])
    io.atomic_write(out_svg, svg)
    return 0


def cmd_demo(name, out_dir):
    out = Path(out_dir)
    doc = config.demo_document(name)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    io.write_json(cfg_path, doc)
    cfg = config.parse_config(doc)

    cmd_calibrate(cfg_path, out / "lut.csv")
    cmd_compile(cfg_path, out / "lut.csv", out / "phase.pgm", out / "plan.csv")
    cmd_simulate(cfg_path, out / "phase.pgm", out / "sim.csv")
    cmd_report(out / "sim.csv", out / "report.svg")

    image = io.read_pgm(out / "phase.pgm")
    result = simulator.forward_simulate(cfg.projector, cfg.surface, cfg.pslm, image)
    before = simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, None, cell_px=8)
    after = simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, image, cell_px=8)
    io.write_cells(out / "checker_before.csv", before)
    io.write_cells(out / "checker_after.csv", after)

    lut = io.read_lut(out / "lut.csv")
    targets = density.required_deflections(cfg.projector, cfg.surface, density.uniform_targets(cfg.projector, cfg.surface))
    need = float(np.abs(targets.deflection).max())
    summary = result.summary()
    summary.update(
        {
            "demo": name,
            "checker_cell_px": 8,
            "checker_cv_before": density.uniformity_metrics(before).cv,
            "checker_cv_after": density.uniformity_metrics(after).cv,
            "max_required_deflection_rad": need,
            "nyquist_deflection_rad": cfg.pslm.nyquist_deflection,
            "nyquist_budget_fraction": need / cfg.pslm.nyquist_deflection,
            "lut_shift_range_m": list(lut.shift_range),
            "phase_image": {"width": image.width, "height": image.height, "wrap_counts": list(image.wrap_counts)},
            "scenario": doc,
        }
    )
    io.write_json(out / "summary.json", summary)
    print(f"demo {name}: cv_before {summary['cv_before']:.4f} -> cv_after {summary['cv_after']:.4f}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="phaseforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="emulate the ramp sweep and write the deflection LUT")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="LUT CSV to write")

    p = sub.add_parser("compile", help="compile the phase image for the configured scene")
    p.add_argument("--config", required=True)
    p.add_argument("--lut", required=True)
    p.add_argument("--out", required=True, help="PGM to write (metadata goes to a .json sidecar)")
    p.add_argument("--plan-out", default=None, help="slope plan CSV (default: <out>.plan.csv)")

    p = sub.add_parser("simulate", help="forward-simulate a stored phase image")
    p.add_argument("--config", required=True)
    p.add_argument("--phase", required=True)
    p.add_argument("--out", required=True, help="simulation CSV (summary goes to a .json sidecar)")

    p = sub.add_parser("report", help="plot target vs achieved shift as SVG")
    p.add_argument("--sim", required=True, help="simulation CSV")
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo", help="run a built-in scenario end to end")
    p.add_argument("name", choices=sorted(config.DEMOS))
    p.add_argument("--out-dir", required=True)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "calibrate":
            return cmd_calibrate(args.config, args.out)
        if args.command == "compile":
            plan_out = args.plan_out or str(Path(args.out).with_suffix(".plan.csv"))
            return cmd_compile(args.config, args.lut, args.out, plan_out)
        if args.command == "simulate":
            return cmd_simulate(args.config, args.phase, args.out)
        if args.command == "report":
            return cmd_report(args.sim, args.out)
        return cmd_demo(args.name, args.out_dir)
    except PhaseforgeError as exc:
        print(f"error: {exc.code}: {exc.detail()}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: IO: {exc.filename}: no such file", file=sys.stderr)
        return 5


if __name__ == "__main__":
    raise SystemExit(main())

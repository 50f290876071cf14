"""Acceptance gate: one test per criterion, each reporting PASS/FAIL in the terminal summary."""

import contextlib
import json
import re
import time

import numpy as np
import pytest

from conftest import random_slope_plan
from phaseforge import cli, compiler, config, device, io, simulator
from phaseforge.kernels import BACKEND


@contextlib.contextmanager
def criterion(record, key, name, detail):
    """Record the outcome of the enclosed assertions; ``detail`` is a dict filled in by the body."""
    try:
        yield
    except BaseException:
        record("criterion", (key, name, False, _fmt(detail)))
        raise
    record("criterion", (key, name, True, _fmt(detail)))


def _fmt(detail):
    parts = []
    for k, v in detail.items():
        parts.append(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}")
    return " ".join(parts)


def _run_demo(name, out_dir):
    t0 = time.perf_counter()
    rc = cli.main(["demo", name, "--out-dir", str(out_dir)])
    return rc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def warm(tmp_path_factory):
    # JIT compilation and the calibration cache are excluded from the timings
    _run_demo("flat", tmp_path_factory.mktemp("warmup"))


@pytest.fixture(scope="module")
def bent_demo(tmp_path_factory, warm):
    out = tmp_path_factory.mktemp("bent")
    rc, elapsed = _run_demo("bent-surface", out)
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    return out, summary, elapsed


def test_c1_identity_pipeline(tmp_path, warm, record_property):
    detail = {"backend": BACKEND}
    with criterion(record_property, 1, "identity pipeline", detail):
        rc, elapsed = _run_demo("flat", tmp_path)
        assert rc == 0
        image = io.read_pgm(tmp_path / "phase.pgm")
        sim = io.read_simulation(tmp_path / "sim.csv")
        summary = json.loads((tmp_path / "summary.json").read_text())
        detail.update(
            nonzero_px=int(np.count_nonzero(image.pixels)),
            max_abs_shift=float(np.abs(sim["achieved_shift_m"]).max()),
            cv_before=summary["cv_before"],
            cv_after=summary["cv_after"],
            seconds=elapsed,
        )
        assert not image.pixels.any()
        assert np.all(sim["achieved_shift_m"] == 0.0)
        assert summary["cv_before"] < 1e-9
        assert summary["cv_after"] < 1e-9
        assert elapsed < 1.0


def test_c2_shift_tracks_target(bent_demo, record_property):
    out, summary, elapsed = bent_demo
    detail = {}
    with criterion(record_property, 2, "achieved shift tracks target", detail):
        frac = summary["max_shift_error_fraction"]
        svg = (out / "report.svg").read_text()
        n = summary["n_pixels"]
        curves = {}
        for name in ("target", "achieved"):
            m = re.search(rf'<polyline id="{name}"[^>]* points="([^"]*)"', svg)
            curves[name] = 0 if m is None else len(m.group(1).split())
        detail.update(max_err_frac=frac, target_pts=curves["target"], achieved_pts=curves["achieved"], seconds=elapsed)
        assert frac < 0.05
        assert curves == {"target": n, "achieved": n}
        assert elapsed < 5.0


def test_c3_density_uniformity(bent_demo, record_property):
    out, summary, elapsed = bent_demo
    detail = {}
    with criterion(record_property, 3, "density uniformity", detail):
        cells = io.read_csv(out / "checker_after.csv", io.CELL_HEADER, (int, float))[1]
        cell_cv = float(cells.std() / cells.mean())
        detail.update(
            cv_before=summary["cv_before"], cv_after=summary["cv_after"], checker_cv_after=cell_cv, seconds=elapsed
        )
        assert summary["checker_cell_px"] == 8
        assert summary["cv_before"] > 0.1
        assert summary["cv_after"] < 0.02
        assert cell_cv < 0.02
        assert elapsed < 5.0


@pytest.mark.parametrize("gamma", [1.0, 2.2])
def test_c4_calibration_fidelity(gamma, record_property):
    detail = {"gamma": gamma}
    with criterion(record_property, f"4 (gamma={gamma})", "calibration fidelity", detail):
        m = device.PslmModel(pitch=3.74e-6, wavelength=532e-9, gamma=gamma)
        sweep = device.default_sweep(m)
        lut = device.simulate_calibration(m, sweep)
        # probe between the knots as well, with shifts measured independently of the table
        probe = np.linspace(sweep[0], sweep[-1], 8 * (len(sweep) - 1) + 1)
        measured = np.array([device.calibration_shift(m, dd) for dd in probe])
        back = device.invert_lut(lut, measured)
        worst = float(np.abs(back - probe).max())
        detail["max_roundtrip_levels"] = worst
        assert worst <= 0.5
        if gamma == 1.0:
            g_lut = np.sin(np.arctan(lut.shift / m.ref_plane_distance)) * 2 * np.pi / m.wavelength
            g_closed = m.phase_depth * lut.delta_drive / (m.max_drive * m.pitch)
            bound = m.phase_depth / m.max_drive / m.pitch
            dev = float(np.abs(g_lut - g_closed).max())
            detail["max_grad_dev_over_bound"] = dev / bound
            assert dev <= bound


def test_c5_c1_property(model, record_property):
    rng = np.random.default_rng(5)
    detail = {"plans": 100}
    with criterion(record_property, 5, "C1 phase profile", detail):
        nyq = model.nyquist_gradient
        worst_jump = worst_mean = worst_quant = 0.0
        for _ in range(100):
            plan = random_slope_plan(rng, model)
            prof = compiler.assemble_c1_profile(plan, model)
            x = np.linspace(0.0, plan.edges[-1], 64 * plan.n_blocks + 1)
            jump = np.abs(np.diff(prof.derivative(x))).max() / nyq
            e = plan.edges
            mean = (prof(e[1:]) - prof(e[:-1])) / plan.block_width
            mean_err = np.abs(mean - plan.slopes).max() / nyq
            image = compiler.wrap_and_quantize(prof, model)
            measured = simulator.block_gradients(simulator.unwrap_phase_row(image.pixels[0], model), model)
            quant_err = np.abs(measured - plan.slopes).max() / nyq
            worst_jump = max(worst_jump, jump)
            worst_mean = max(worst_mean, mean_err)
            worst_quant = max(worst_quant, quant_err)
        detail.update(max_jump_nyq=worst_jump, max_mean_err_nyq=worst_mean, max_image_err_nyq=worst_quant)
        assert worst_jump < 1e-3
        assert worst_mean < 0.05
        assert worst_quant < 0.05


def _interior_mean_slope(plan, lo, hi):
    """Exact mean of the piecewise-linear slope field over [lo, hi] (constant beyond the end knots)."""
    knots = plan.centers
    out = np.empty(lo.shape[0])
    for k, (a, b) in enumerate(zip(lo, hi)):
        xs = np.concatenate([[a], knots[(knots > a) & (knots < b)], [b]])
        gs = np.interp(xs, knots, plan.slopes)
        out[k] = np.sum(0.5 * (gs[1:] + gs[:-1]) * np.diff(xs)) / (b - a)
    return out


def test_c6_oracle_equivalence(record_property):
    m = device.PslmModel(pitch=3.74e-6, wavelength=532e-9, levels=65536, gamma=1.0)
    rng = np.random.default_rng(6)
    detail = {"plans": 100, "levels": m.levels}
    with criterion(record_property, 6, "simulator matches grating oracle", detail):
        worst = 0.0
        b = m.block_size
        for _ in range(100):
            plan = random_slope_plan(rng, m)
            image = compiler.wrap_and_quantize(compiler.assemble_c1_profile(plan, m), m)
            theta = simulator.block_deflections(image, m)
            start = np.arange(plan.n_blocks) * b
            lo = (start + 1 + 0.5) * m.pitch
            hi = (start + b - 2 + 0.5) * m.pitch
            expected = np.arcsin(m.wavelength * _interior_mean_slope(plan, lo, hi) / (2 * np.pi))
            worst = max(worst, float(np.abs(theta - expected).max()))
        detail["max_abs_err_rad"] = worst
        assert worst < 1e-6


def test_c7_hand_values(record_property):
    m = device.PslmModel(pitch=8e-6, wavelength=532e-9, ref_plane_distance=1.0)
    detail = {}
    with criterion(record_property, 7, "period-8 ramp hand values", detail):
        dd = m.max_drive / 8.0
        assert np.array_equal(device.ramp_pattern(m, dd, 16)[:8], device.ramp_pattern(m, dd, 16)[8:])
        theta = device.ramp_deflection(m, device.pattern_mean_gradient(m, dd))
        shift = device.calibration_shift(m, dd)
        detail.update(theta_rad=theta, shift_mm=shift * 1e3)
        assert abs(theta - 8.3126e-3) <= 1e-6
        assert abs(shift - 8.313e-3) <= 1e-6


def test_c8_recompile_speed(bent_demo, record_property):
    doc = config.demo_document("bent-surface")
    doc["projector"]["n_cols"] = 1920
    doc["compile"]["rows"] = 1
    cfg = config.parse_config(doc)
    lut = device.simulate_calibration(cfg.pslm, cfg.sweep())
    detail = {"backend": BACKEND, "n_cols": 1920}
    with criterion(record_property, 8, "full recompile latency", detail):

        def run():
            return compiler.compile_phase_image(cfg.projector, cfg.surface, cfg.pslm, lut, rows=1)

        image = run()[0]
        assert image.width == 1920 * 8
        times = []
        for _ in range(100):
            t0 = time.perf_counter()
            run()
            times.append(time.perf_counter() - t0)
        med = float(np.median(times))
        detail["median_ms"] = med * 1e3
        assert med < 5e-3


def test_c9_budget_honesty(tmp_path, capsys, record_property):
    detail = {}
    with criterion(record_property, 9, "deflection budget honesty", detail):
        lut = tmp_path / "lut.csv"
        pgm = tmp_path / "phase.pgm"
        fov = 42.0
        rc = 0
        while rc == 0:
            fov += 2.0
            assert fov < 90.0
            doc = config.demo_document("bent-surface")
            doc["projector"]["h_fov_deg"] = fov
            cfg_path = tmp_path / f"fov{fov:g}.json"
            cfg_path.write_text(json.dumps(doc))
            assert cli.main(["calibrate", "--config", str(cfg_path), "--out", str(lut)]) == 0
            if pgm.exists():
                pgm.unlink()
                pgm.with_suffix(".json").unlink()
                pgm.with_suffix(".plan.csv").unlink()
            capsys.readouterr()
            rc = cli.main(["compile", "--config", str(cfg_path), "--lut", str(lut), "--out", str(pgm)])
        first = capsys.readouterr().err.splitlines()[0]
        detail.update(fov_deg=fov, exit_code=rc)
        m = re.search(r"pixel (\d+)", first)
        detail["pixel"] = None if m is None else int(m.group(1))
        assert rc == 4
        assert first.startswith("error: DEFLECTION_BUDGET_EXCEEDED:")
        assert m is not None
        assert not pgm.exists()
        assert not pgm.with_suffix(".json").exists()
        assert not pgm.with_suffix(".plan.csv").exists()

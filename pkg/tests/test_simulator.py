import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseforge import compiler, config, density, device, geometry, simulator

TWO_PI = 2 * math.pi


def demo(name="bent-surface", **pslm):
    doc = config.demo_document(name)
    doc["pslm"].update(pslm)
    cfg = config.parse_config(doc)
    return cfg, device.simulate_calibration(cfg.pslm, cfg.sweep())


def run(cfg, lut):
    img = compiler.compile_phase_image(cfg.projector, cfg.surface, cfg.pslm, lut)[0]
    return img, simulator.forward_simulate(cfg.projector, cfg.surface, cfg.pslm, img)


def test_unwrap_constant_row(model):
    out = simulator.unwrap_phase_row(np.full(10, 77), model)
    assert np.all(out == out[0])


def test_unwrap_quarter_sawtooth(model):
    out = simulator.unwrap_phase_row(np.tile([0, 64, 128, 192], 4), model)
    steps = np.diff(out)
    assert np.allclose(steps[[0, 1, 2, 4, 5, 6]], 64 / 255 * TWO_PI)
    assert np.allclose(steps[[3, 7]], 63 / 255 * TWO_PI)
    assert np.allclose(steps, math.pi / 2, atol=TWO_PI / 255)
    assert np.all(steps > 0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 200), min_size=2, max_size=40), st.integers(0, 55))
def test_unwrap_offset_invariance(row, offset):
    m = device.PslmModel(pitch=3.74e-6, wavelength=532e-9)
    row = np.array(row)
    a = simulator.unwrap_phase_row(row, m)
    b = simulator.unwrap_phase_row(row + offset, m)
    assert np.allclose(b - a, offset / 255 * TWO_PI, atol=1e-12)


def test_unwrap_rejects_out_of_range(model):
    with pytest.raises(ValueError):
        simulator.unwrap_phase_row(np.array([0, 256]), model)


def test_interior_span():
    assert simulator.interior_span(8) == (1, 6)
    assert simulator.interior_span(4) == (1, 2)
    assert simulator.interior_span(3) == (0, 2)


def test_block_deflections_checks_image(model):
    bad = compiler.PhaseImage(pixels=np.array([[0] * 8, [1] * 8]), levels=256)
    with pytest.raises(ValueError, match="rows differ"):
        simulator.block_deflections(bad, model)
    with pytest.raises(ValueError, match="multiple"):
        simulator.block_deflections(compiler.PhaseImage(pixels=np.zeros((1, 12), int), levels=256), model)
    with pytest.raises(ValueError, match="levels"):
        simulator.block_deflections(compiler.PhaseImage(pixels=np.zeros((1, 8), int), levels=128), model)


def test_zero_image_is_identity():
    cfg, _ = demo()
    img = compiler.PhaseImage(pixels=np.zeros((1, cfg.slm_width), np.uint8), levels=256)
    res = simulator.forward_simulate(cfg.projector, cfg.surface, cfg.pslm, img)
    assert np.array_equal(res.achieved_s, res.nominal_s)
    assert not res.achieved_shift.any()
    assert np.array_equal(res.deflection, np.zeros(cfg.projector.n_cols))


def test_uniform_ramp_hits_hand_shift():
    # every block carries the period-8 ramp; the centre pixel then lands tan(theta) * D_ref off axis
    m = device.PslmModel(pitch=8e-6, wavelength=532e-9, ref_plane_distance=1.0)
    n = 21
    p = geometry.ProjectorModel(origin=(0, 0), axis=(0, 1), h_fov=0.2, n_cols=n)
    surf = geometry.SurfaceProfile([[-1, 1], [1, 1]])
    g = np.full(n, TWO_PI / (8 * m.pitch))
    plan = compiler.SlopePlan(delta_drive=g * m.pitch * 255 / TWO_PI, slopes=g, block_size=8, pitch=m.pitch)
    img = compiler.wrap_and_quantize(compiler.assemble_c1_profile(plan, m), m)
    res = simulator.forward_simulate(p, surf, m, img)
    expected = math.tan(8.3126e-3) * m.ref_plane_distance
    assert abs(res.achieved_shift[n // 2] - expected) < 0.02 * expected


def test_bent_demo_result():
    cfg, lut = demo()
    img, res = run(cfg, lut)
    s = res.summary()
    assert res.order_preserved
    assert s["max_shift_error_fraction"] < 0.05
    assert s["cv_before"] > 0.1 and s["cv_after"] < 0.02
    assert res.after.max_abs_shift_error == s["max_abs_shift_error_m"]
    assert res.target_s.shape == res.achieved_s.shape == (cfg.projector.n_cols,)


def test_simulator_reads_only_the_image():
    # a corrupted image must be reported as is, not corrected from the plan
    cfg, lut = demo()
    img, res = run(cfg, lut)
    px = img.pixels.copy()
    px[:, 800:808] = 0
    res2 = simulator.forward_simulate(cfg.projector, cfg.surface, cfg.pslm, compiler.PhaseImage(px, 256))
    assert res2.deflection[100] == 0.0 and res.deflection[100] != 0.0


def test_more_levels_means_smaller_error():
    errs = {}
    for levels in (64, 128, 256):
        doc = config.demo_document("bent-surface")
        doc["pslm"]["levels"] = levels
        doc["compile"]["sweep_max_delta_drive"] = 102.0 * (levels - 1) / 255
        cfg = config.parse_config(doc)
        _, res = run(cfg, device.simulate_calibration(cfg.pslm, cfg.sweep()))
        errs[levels] = res.summary()["max_shift_error_fraction"]
    assert errs[64] > errs[128] > errs[256]


@pytest.mark.xfail(
    strict=True,
    reason="worst-pixel quantisation error is not linear in the level step; ratio 2.08 on this demo",
)
def test_halving_levels_at_most_doubles_error():
    errs = {}
    for levels in (128, 256):
        doc = config.demo_document("bent-surface")
        doc["pslm"]["levels"] = levels
        doc["compile"]["sweep_max_delta_drive"] = 102.0 * (levels - 1) / 255
        cfg = config.parse_config(doc)
        _, res = run(cfg, device.simulate_calibration(cfg.pslm, cfg.sweep()))
        errs[levels] = res.summary()["max_shift_error_fraction"]
    assert errs[128] <= 2 * errs[256]


def test_checker_cells_flat():
    cfg, _ = demo("flat")
    cells = simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, None, cell_px=8)
    assert cells.shape == (30,)
    assert cells.max() / cells.min() - 1 < 1e-9


def test_checker_cells_bent():
    cfg, lut = demo()
    before = simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, None, cell_px=8)
    kink = np.searchsorted(geometry.nominal_hits(cfg.projector, cfg.surface), cfg.surface.cum_s[1]) // 8
    assert before[: kink - 1].min() > before[kink + 1 :].max()
    img, _ = run(cfg, lut)
    after = simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, img, cell_px=8)
    assert density.uniformity_metrics(after).cv < 0.02
    assert math.isclose(after.sum(), before.sum(), rel_tol=1e-3)
    with pytest.raises(ValueError):
        simulator.checker_cells(cfg.projector, cfg.surface, cfg.pslm, None, cell_px=7)

import numpy as np
import pytest

from phaseforge import compiler, device


def pytest_terminal_summary(terminalreporter):
    rows = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            for name, value in getattr(rep, "user_properties", ()):
                if name == "criterion" and rep.when == "call":
                    rows.append(value)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for key, title, ok, detail in sorted(rows, key=lambda r: str(r[0])):
        terminalreporter.write_line(f"criterion {key} {title}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def model():
    return device.PslmModel(pitch=3.74e-6, wavelength=532e-9)


def random_slope_plan(rng, model, n_blocks=None, step=0.02, limit=0.8):
    """Smooth random slope field: a clipped random walk in units of the Nyquist gradient."""
    if n_blocks is None:
        n_blocks = int(rng.integers(8, 257))
    nyq = model.nyquist_gradient
    g = np.empty(n_blocks)
    g[0] = rng.uniform(-0.5, 0.5)
    for i in range(1, n_blocks):
        g[i] = np.clip(g[i - 1] + rng.uniform(-step, step), -limit, limit)
    g *= nyq
    dd = g * model.max_drive * model.pitch / model.phase_depth
    return compiler.SlopePlan(delta_drive=dd, slopes=g, block_size=model.block_size, pitch=model.pitch)

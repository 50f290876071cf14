"""File formats: binary PGM (P5), RFC-4180 CSV tables, JSON sidecars.

All writers go through ``atomic_write`` (temp file + rename) so a failed run
never leaves a partial artifact behind.
"""

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .compiler import PhaseImage
from .device import DeflectionLut
from .errors import FormatError, NonMonotoneLut

LUT_HEADER = ("delta_drive", "shift_m")
PLAN_HEADER = ("pixel", "deflection_rad", "delta_drive", "slope_rad_per_m")
SIM_HEADER = ("pixel", "nominal_s_m", "target_s_m", "achieved_s_m", "target_shift_m", "achieved_shift_m")
CELL_HEADER = ("cell", "length_m")


def atomic_write(path, data):
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x):
    """Positional decimal, 17 significant digits (round-trips a double)."""
    return np.format_float_positional(float(x), precision=17, unique=False, fractional=False, trim="k")


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps_json(obj))


# --- PGM -----------------------------------------------------------------


def encode_pgm(image):
    maxval = image.levels - 1
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    if maxval < 256:
        body = image.pixels.astype(np.uint8).tobytes()
    else:
        body = image.pixels.astype(">u2").tobytes()
    return header + body


def write_pgm(path, image, metadata=True):
    """Write ``image`` as P5; with ``metadata`` also a ``.json`` sidecar next to it."""
    path = Path(path)
    atomic_write(path, encode_pgm(image))
    if metadata:
        write_json(sidecar_path(path), image.metadata())


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def _header_tokens(data, path, count):
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise FormatError(path, pos, "truncated PGM header")
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append((data[start:pos], start))
    return tokens, pos


def decode_pgm(data, path="<bytes>"):
    if data[:2] != b"P5":
        raise FormatError(path, 0, "not a binary PGM (magic P5 expected)")
    tokens, pos = _header_tokens(data, path, 4)
    values = []
    for tok, off in tokens[1:]:
        if not tok.isdigit():
            raise FormatError(path, off, f"expected a decimal integer, got {tok[:16]!r}")
        values.append(int(tok))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise FormatError(path, tokens[1][1], "width and height must be positive")
    if not 0 < maxval < 65536:
        raise FormatError(path, tokens[3][1], f"maxval {maxval} outside 1..65535")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError(path, pos, "missing whitespace after maxval")
    pos += 1
    nbytes = 1 if maxval < 256 else 2
    need = width * height * nbytes
    body = data[pos:]
    if len(body) < need:
        raise FormatError(path, len(data), f"pixel data truncated: need {need} bytes, have {len(body)}")
    if len(body) > need:
        raise FormatError(path, pos + need, "trailing bytes after pixel data")
    dtype = np.uint8 if nbytes == 1 else np.dtype(">u2")
    pixels = np.frombuffer(body, dtype=dtype).reshape(height, width)
    over = np.flatnonzero(pixels.reshape(-1) > maxval)
    if over.size:
        raise FormatError(path, pos + int(over[0]) * nbytes, f"pixel value exceeds maxval {maxval}")
    pixels = pixels.astype(np.uint8 if nbytes == 1 else np.uint16)
    return pixels, maxval


def read_pgm(path):
    path = Path(path)
    pixels, maxval = decode_pgm(path.read_bytes(), path)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    return PhaseImage(
        pixels=pixels,
        levels=maxval + 1,
        model_hash=meta.get("model_hash", ""),
        wrap_counts=tuple(meta.get("wrap_counts", ())),
        wrap_mode=meta.get("wrap_mode", "wrap"),
    )


# --- CSV -----------------------------------------------------------------


def encode_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write(path, encode_csv(header, rows))


def read_csv(path, header, types):
    """Parse a numeric CSV with exactly ``header``; returns a list of column arrays.

    Errors carry the byte offset of the offending line.
    """
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(path, exc.start, "not UTF-8 text") from None
    lines = text.splitlines(keepends=True)
    if not lines:
        raise FormatError(path, 0, "empty file")
    offsets = np.concatenate([[0], np.cumsum([len(ln.encode("utf-8")) for ln in lines])])
    got = next(csv.reader([lines[0]]))
    if tuple(c.strip() for c in got) != tuple(header):
        raise FormatError(path, 0, f"header {got!r}, expected {list(header)!r}")
    cols = [[] for _ in header]
    for i, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        fields = next(csv.reader([line]))
        if len(fields) != len(header):
            raise FormatError(path, int(offsets[i]), f"line {i + 1}: expected {len(header)} fields, got {len(fields)}")
        for j, (value, typ) in enumerate(zip(fields, types)):
            try:
                cols[j].append(typ(value))
            except ValueError:
                raise FormatError(path, int(offsets[i]), f"line {i + 1}: bad {header[j]} value {value!r}") from None
    return [np.asarray(c) for c in cols]


def write_lut(path, lut):
    write_csv(path, LUT_HEADER, ((fmt(d), fmt(s)) for d, s in zip(lut.delta_drive, lut.shift)))


def read_lut(path):
    dd, sh = read_csv(path, LUT_HEADER, (float, float))
    order = np.argsort(dd, kind="stable")
    if np.any(order != np.arange(dd.size)):
        raise FormatError(path, 0, "LUT rows must be sorted ascending by delta_drive")
    try:
        return DeflectionLut(delta_drive=dd, shift=sh)
    except NonMonotoneLut:
        raise
    except ValueError as exc:
        raise FormatError(path, 0, str(exc)) from None


def write_plan(path, targets, plan):
    rows = (
        (i, fmt(t), fmt(d), fmt(g))
        for i, (t, d, g) in enumerate(zip(targets.deflection, plan.delta_drive, plan.slopes))
    )
    write_csv(path, PLAN_HEADER, rows)


def write_simulation(path, result):
    rows = (
        (i, fmt(n), fmt(t), fmt(a), fmt(ts), fmt(as_))
        for i, (n, t, a, ts, as_) in enumerate(
            zip(result.nominal_s, result.target_s, result.achieved_s, result.target_shift, result.achieved_shift)
        )
    )
    write_csv(path, SIM_HEADER, rows)


def read_simulation(path):
    cols = read_csv(path, SIM_HEADER, (int, float, float, float, float, float))
    return dict(zip(SIM_HEADER, cols))


def write_cells(path, cells):
    write_csv(path, CELL_HEADER, ((i, fmt(c)) for i, c in enumerate(cells)))

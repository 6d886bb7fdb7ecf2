"""ERT1 container format plus CSV and PGM export.

Layout (all little-endian)::

    preamble  16 bytes   b"ERT1", u8 kind, u8 attenuation kind, u16 reserved (0),
                         u32 header length H, u32 payload count P
    header    H bytes    kind block, then attenuation block
    payload   16*P bytes complex values as interleaved f64 (re, im), row-major,
                         harmonic (or angle) index outermost

Kinds: 0 Sinogram, 1 HarmonicSinogram, 2 PolarImage, 3 FourierSinogram.
Attenuation kinds: 0 none, 1 constant, 2 radial.

A grid descriptor is u32 count, f64 first, f64 spacing (20 bytes). A radial
grid that is not reproduced bit for bit by its descriptor stores NaN as the
spacing and is followed by ``count`` explicit f64 nodes.

Kind blocks:
    Sinogram          detector descriptor, angle descriptor            (40 bytes)
    HarmonicSinogram  i32 n_min, i32 n_max, detector descriptor        (28 bytes)
    PolarImage        i32 n_min, i32 n_max, radial descriptor          (28 [+8J] bytes)
    FourierSinogram   i32 n_min, i32 n_max, frequency descriptor       (28 bytes)

Attenuation blocks: none 0 bytes; constant two f64 (16 bytes); radial a
radial descriptor followed by J (re, im) f64 pairs (20 [+8J] + 16J bytes).

So a 512-detector, 360-angle sinogram with constant attenuation occupies
16 + 40 + 16 + 512*360*16 bytes.
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigurationError, ParseError
from .grids import (
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    FourierSinogram,
    FrequencyGrid,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    Sinogram,
)

__all__ = [
    "MAGIC",
    "KINDS",
    "write_ert",
    "read_ert",
    "dumps_ert",
    "loads_ert",
    "ert_file_size",
    "export_csv",
    "read_csv",
    "export_pgm",
]

MAGIC = b"ERT1"
KINDS = {Sinogram: 0, HarmonicSinogram: 1, PolarImage: 2, FourierSinogram: 3}
_PREAMBLE = struct.Struct("<4sBBHII")
_DESC = struct.Struct("<Idd")
_NRANGE = struct.Struct("<ii")

ErtObject = Union[Sinogram, HarmonicSinogram, PolarImage, FourierSinogram]


# --------------------------------------------------------------------------
# encoding
# --------------------------------------------------------------------------


def _radial_desc(grid: RadialGrid) -> bytes:
    count, first, spacing = grid.count, grid.first, grid.spacing
    if count > 1 and RadialGrid.from_descriptor(count, first, spacing) == grid:
        return _DESC.pack(count, first, spacing)
    return _DESC.pack(count, first, math.nan) + np.asarray(grid.nodes, "<f8").tobytes()


def _att_block(att):
    if att is None:
        return 0, b""
    if isinstance(att, ConstantAttenuation):
        return 1, struct.pack("<dd", att.mu.real, att.mu.imag)
    if isinstance(att, RadialAttenuation):
        vals = np.asarray(att.values, dtype=complex)
        pairs = np.empty(2 * vals.size, "<f8")
        pairs[0::2], pairs[1::2] = vals.real, vals.imag
        return 2, _radial_desc(att.grid) + pairs.tobytes()
    raise ConfigurationError(f"cannot serialise attenuation {type(att).__name__}")


def dumps_ert(obj: ErtObject) -> bytes:
    """Serialise an object to ERT1 bytes."""
    kind = KINDS.get(type(obj))
    if kind is None:
        raise ConfigurationError(f"cannot serialise {type(obj).__name__}")
    if kind == 0:
        ang = obj.ang
        block = _DESC.pack(obj.det.count, obj.det.first, obj.det.spacing)
        block += _DESC.pack(ang.count, 0.0, 2.0 * math.pi / ang.count)
        att = obj.att
    elif kind == 1:
        block = _NRANGE.pack(obj.n_min, obj.n_max) + _DESC.pack(obj.det.count, obj.det.first, obj.det.spacing)
        att = obj.att
    elif kind == 2:
        block = _NRANGE.pack(obj.n_min, obj.n_max) + _radial_desc(obj.grid)
        att = None
    else:
        om = obj.omega
        block = _NRANGE.pack(obj.n_min, obj.n_max) + _DESC.pack(om.count, om.first, om.spacing)
        att = obj.att
    att_kind, att_bytes = _att_block(att)
    header = block + att_bytes
    values = np.ascontiguousarray(obj.values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("refusing to write non-finite values")
    payload = np.empty(2 * values.size, "<f8")
    payload[0::2], payload[1::2] = values.real.ravel(), values.imag.ravel()
    pre = _PREAMBLE.pack(MAGIC, kind, att_kind, 0, len(header), values.size)
    return pre + header + payload.tobytes()


def write_ert(path, obj: ErtObject) -> int:
    """Write ``obj`` to ``path``; returns the number of bytes written."""
    data = dumps_ert(obj)
    Path(path).write_bytes(data)
    return len(data)


def ert_file_size(obj: ErtObject) -> int:
    """Exact size in bytes of the ERT1 encoding of ``obj``."""
    kind = KINDS[type(obj)]
    header = 40 if kind == 0 else 28
    if kind == 2:
        header += _radial_extra(obj.grid)
    att = None if kind == 2 else obj.att
    if isinstance(att, ConstantAttenuation):
        header += 16
    elif isinstance(att, RadialAttenuation):
        header += 20 + _radial_extra(att.grid) + 16 * att.grid.count
    return 16 + header + 16 * int(np.asarray(obj.values).size)


def _radial_extra(grid):
    return len(_radial_desc(grid)) - _DESC.size


# --------------------------------------------------------------------------
# decoding
# --------------------------------------------------------------------------


class _Reader:
    def __init__(self, buf: bytes, start: int, end: int):
        self.buf, self.pos, self.end = buf, start, end

    def take(self, n, what):
        if self.pos + n > self.end:
            raise ParseError(f"truncated header while reading {what}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct, what):
        return st.unpack(self.take(st.size, what))

    def f64(self, n, what):
        return np.frombuffer(self.take(8 * n, what), "<f8").astype(float)


def _read_radial(rd: _Reader, what) -> RadialGrid:
    count, first, spacing = rd.unpack(_DESC, what)
    try:
        if math.isnan(spacing):
            return RadialGrid(rd.f64(count, what))
        return RadialGrid.from_descriptor(count, first, spacing)
    except ConfigurationError as exc:
        raise ParseError(f"invalid {what}: {exc}") from exc


def loads_ert(buf: bytes) -> ErtObject:
    """Parse ERT1 bytes."""
    if len(buf) < _PREAMBLE.size:
        raise ParseError(f"file too short for an ERT1 preamble ({len(buf)} bytes)")
    magic, kind, att_kind, _reserved, hlen, count = _PREAMBLE.unpack_from(buf)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if kind > 3:
        raise ParseError(f"unknown object kind {kind}")
    if att_kind > 2:
        raise ParseError(f"unknown attenuation kind {att_kind}")
    h0 = _PREAMBLE.size
    if h0 + hlen > len(buf):
        raise ParseError("truncated header")
    rd = _Reader(buf, h0, h0 + hlen)
    try:
        if kind == 0:
            dc, df, ds = rd.unpack(_DESC, "detector grid")
            ac, _, _ = rd.unpack(_DESC, "angle grid")
            det, ang = DetectorGrid.from_descriptor(dc, df, ds), AngleGrid(ac)
            shape = (ang.count, det.count)
        else:
            n_min, n_max = rd.unpack(_NRANGE, "harmonic range")
            if n_max < n_min:
                raise ParseError("empty harmonic range")
            n = n_max - n_min + 1
            if kind == 1:
                det = DetectorGrid.from_descriptor(*rd.unpack(_DESC, "detector grid"))
                shape = (n, det.count)
            elif kind == 2:
                grid = _read_radial(rd, "radial grid")
                shape = (n, grid.count)
            else:
                fc, _, fs = rd.unpack(_DESC, "frequency grid")
                omega = FrequencyGrid(fc, fs)
                shape = (n, omega.count)
        if att_kind == 0:
            att = None
        elif att_kind == 1:
            re, im = struct.unpack("<dd", rd.take(16, "constant attenuation"))
            att = ConstantAttenuation(complex(re, im))
        else:
            eg = _read_radial(rd, "attenuation grid")
            pairs = rd.f64(2 * eg.count, "attenuation values")
            att = RadialAttenuation(eg, pairs[0::2] + 1j * pairs[1::2])
    except ParseError:
        raise
    except ConfigurationError as exc:
        raise ParseError(f"invalid header: {exc}") from exc
    if rd.pos != rd.end:
        raise ParseError(f"header length mismatch ({rd.end - rd.pos} unread bytes)")
    if count != shape[0] * shape[1]:
        raise ParseError(f"payload count {count} does not match grid shape {shape}")
    p0 = h0 + hlen
    need = 16 * count
    if len(buf) - p0 < need:
        raise ParseError(f"truncated payload: need {need} bytes, found {len(buf) - p0}")
    if len(buf) - p0 > need:
        raise ParseError(f"{len(buf) - p0 - need} trailing bytes after payload")
    flat = np.frombuffer(buf, "<f8", count=2 * count, offset=p0)
    if np.isnan(flat).any():
        raise ParseError("NaN in payload")
    values = (flat[0::2] + 1j * flat[1::2]).reshape(shape)
    if kind == 0:
        return Sinogram(det, ang, att, values)
    if kind == 1:
        return HarmonicSinogram(n_min, n_max, det, att, values)
    if kind == 2:
        return PolarImage(n_min, n_max, grid, values)
    return FourierSinogram(n_min, n_max, omega, att, values)


def read_ert(path) -> ErtObject:
    return loads_ert(Path(path).read_bytes())


# --------------------------------------------------------------------------
# text and image export
# --------------------------------------------------------------------------


def _columns(obj):
    if isinstance(obj, Sinogram):
        labels = [f"theta={t:.17g}" for t in obj.ang.nodes]
        return "s", np.asarray(obj.det.nodes), labels, np.asarray(obj.values)
    if isinstance(obj, HarmonicSinogram):
        axis, name = obj.det.nodes, "s"
    elif isinstance(obj, PolarImage):
        axis, name = obj.grid.nodes, "r"
    elif isinstance(obj, FourierSinogram):
        axis, name = obj.omega.nodes, "omega"
    else:
        raise ConfigurationError(f"cannot export {type(obj).__name__}")
    labels = [f"n={n}" for n in obj.n_values]
    return name, np.asarray(axis), labels, np.asarray(obj.values)


def export_csv(path, obj) -> None:
    """One row per grid node: the axis value, then (re, im) per harmonic or angle."""
    name, axis, labels, values = _columns(obj)
    header = [name]
    for lab in labels:
        header += [f"re({lab})", f"im({lab})"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for j, x in enumerate(axis):
            row = [f"{x:.17g}"]
            for v in values[:, j]:
                row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
            w.writerow(row)


def read_csv(path):
    """Re-import an exported CSV: (axis name, axis, column labels, values (cols, rows))."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty CSV file")
    header, body = rows[0], rows[1:]
    if len(header) < 1 or (len(header) - 1) % 2:
        raise ParseError("CSV header must be an axis column plus re/im pairs")
    data = np.array([[float(x) for x in row] for row in body], dtype=float).reshape(len(body), len(header))
    labels = [h[3:-1] for h in header[1::2]]
    values = (data[:, 1::2] + 1j * data[:, 2::2]).T
    return header[0], data[:, 0], labels, values


def export_pgm(path, field, value_range=None) -> None:
    """Binary 16-bit PGM (P5) of |field|, min-max scaled unless ``value_range`` is given."""
    mag = np.abs(np.asarray(field))
    if mag.ndim != 2:
        raise ConfigurationError("PGM export needs a 2-D field")
    lo, hi = (float(mag.min()), float(mag.max())) if value_range is None else map(float, value_range)
    if hi > lo:
        scaled = np.clip((mag - lo) / (hi - lo), 0.0, 1.0)
    else:
        scaled = np.zeros_like(mag)
    pix = np.rint(scaled * 65535).astype(">u2")
    rows, cols = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())

"""Field files (PHM1), headerless CSV, PGM snapshots and histogram tables.

PHM1 layout, all little-endian::

    0-4   b"PHM1\\0"
    5     dtype code: 0 float32, 1 float64, 2 complex64, 3 complex128
    6     unit code: 0 dimensionless, 1 radians, 2 ppm
    7     ndim, always 2
    8-15  rows, cols as uint32
    16-   row-major payload

Writes go to a temporary file in the target directory that is then renamed
over the destination, so readers never see a partial file.
"""

from __future__ import annotations

import csv
import io as _io
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .core import ComplexImage2D, DimensionError, PhaseBGError, ScalarField2D, Unit

MAGIC = b"PHM1\x00"
HEADER = struct.Struct("<5sBBBII")

DTYPES = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<c8"),
    3: np.dtype("<c16"),
}
DTYPE_CODES = {v.newbyteorder("="): k for k, v in DTYPES.items()}
UNIT_CODES = {Unit.DIMENSIONLESS: 0, Unit.RADIANS: 1, Unit.PPM: 2}
UNITS = {v: k for k, v in UNIT_CODES.items()}


class FieldFormatError(PhaseBGError):
    """Malformed field file."""


class MagicMismatchError(FieldFormatError):
    pass


class DtypeCodeError(FieldFormatError):
    pass


class UnitCodeError(FieldFormatError):
    pass


class NdimError(FieldFormatError):
    pass


class TruncatedPayloadError(FieldFormatError):
    pass


class TrailingDataError(FieldFormatError):
    pass


Field = Union[ScalarField2D, ComplexImage2D]


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` through a temporary sibling file and a rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_field(data, unit=Unit.RADIANS, dtype=None) -> bytes:
    """PHM1 bytes for a 2D array. ``dtype`` defaults to the array's own (float64 for ints)."""
    a = np.asarray(data)
    if a.ndim != 2:
        raise DimensionError(f"PHM1 stores 2D arrays, got shape {a.shape}")
    if dtype is None:
        dtype = a.dtype if a.dtype.newbyteorder("=") in DTYPE_CODES else (
            np.complex128 if np.iscomplexobj(a) else np.float64)
    dt = np.dtype(dtype).newbyteorder("=")
    if dt not in DTYPE_CODES:
        raise DtypeCodeError(f"unsupported dtype {dt}")
    code = DTYPE_CODES[dt]
    if code < 2 and np.iscomplexobj(a):
        raise DtypeCodeError("complex data cannot be stored as a real dtype")
    rows, cols = a.shape
    if rows > 0xFFFFFFFF or cols > 0xFFFFFFFF:
        raise DimensionError("dimensions exceed uint32")
    payload = np.ascontiguousarray(a, dtype=DTYPES[code]).tobytes()
    return HEADER.pack(MAGIC, code, UNIT_CODES[Unit.coerce(unit)], 2, rows, cols) + payload


def decode_field(buf: bytes) -> Tuple[np.ndarray, Unit]:
    """Array (in its stored dtype, native byte order) and unit from PHM1 bytes."""
    if len(buf) < HEADER.size:
        if not buf or not MAGIC.startswith(bytes(buf[:5])):
            raise MagicMismatchError("not a PHM1 file: magic mismatch")
        raise TruncatedPayloadError(f"truncated header: {len(buf)} of {HEADER.size} bytes")
    magic, code, ucode, ndim, rows, cols = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise MagicMismatchError(f"not a PHM1 file: magic {magic!r}")
    if code not in DTYPES:
        raise DtypeCodeError(f"unknown dtype code {code}")
    if ucode not in UNITS:
        raise UnitCodeError(f"unknown unit code {ucode}")
    if ndim != 2:
        raise NdimError(f"ndim must be 2, got {ndim}")
    dt = DTYPES[code]
    need = rows * cols * dt.itemsize
    have = len(buf) - HEADER.size
    if have < need:
        raise TruncatedPayloadError(f"truncated payload: {have} of {need} bytes")
    if have > need:
        raise TrailingDataError(f"{have - need} unexpected bytes after payload")
    a = np.frombuffer(buf, dtype=dt, count=rows * cols, offset=HEADER.size).reshape(rows, cols)
    return a.astype(dt.newbyteorder("=")), UNITS[ucode]


def read_array(path) -> Tuple[np.ndarray, Unit]:
    """Stored array and unit of a PHM1 file, without conversion."""
    return decode_field(Path(path).read_bytes())


def read_field(path) -> Field:
    """ScalarField2D for real dtypes, ComplexImage2D for complex ones.

    Values are widened to 64-bit components; the widening is exact, so writing
    the field back with the stored dtype reproduces the payload bit for bit.
    """
    a, unit = read_array(path)
    if np.iscomplexobj(a):
        return ComplexImage2D(a)
    return ScalarField2D(a, unit)


def write_field(path, field, unit=None, dtype=None) -> None:
    """Write a field, complex image or 2D array as PHM1 (atomically).

    ``unit`` defaults to the field's unit, radians for bare real arrays and
    dimensionless for complex data.
    """
    if isinstance(field, ScalarField2D):
        data, u = field.data, field.unit
    elif isinstance(field, ComplexImage2D):
        data, u = field.data, Unit.DIMENSIONLESS
    else:
        data = np.asarray(field)
        u = Unit.DIMENSIONLESS if np.iscomplexobj(data) else Unit.RADIANS
    atomic_write_bytes(path, encode_field(data, unit if unit is not None else u, dtype))


def read_csv(path, unit=Unit.RADIANS) -> ScalarField2D:
    """Headerless comma-separated real matrix with uniform row lengths."""
    rows: List[List[float]] = []
    with open(path, newline="") as fh:
        for k, rec in enumerate(csv.reader(fh)):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([float(c) for c in rec])
            except ValueError as exc:
                raise FieldFormatError(f"line {k + 1}: {exc}") from None
    if not rows:
        raise FieldFormatError("empty CSV")
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise FieldFormatError(f"row {k + 1} has {len(r)} values, expected {width}")
    return ScalarField2D(np.array(rows), unit)


def write_csv(path, field) -> None:
    """Headerless CSV with shortest round-trip float formatting."""
    a = np.asarray(field, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"CSV stores 2D arrays, got shape {a.shape}")
    text = "\n".join(",".join(repr(float(v)) for v in row) for row in a) + "\n"
    atomic_write_text(path, text)


def load_any(path) -> Field:
    """PHM1 by default, CSV for a ``.csv`` suffix."""
    if str(path).lower().endswith(".csv"):
        return read_csv(path)
    return read_field(path)


@dataclass(frozen=True)
class PgmScaling:
    vmin: float
    vmax: float
    maxval: int

    def step(self) -> float:
        return (self.vmax - self.vmin) / self.maxval if self.vmax > self.vmin else 0.0

    def decode(self, q: np.ndarray) -> np.ndarray:
        return self.vmin + np.asarray(q, dtype=np.float64) * self.step()

    def to_text(self) -> str:
        return f"min {self.vmin!r}\nmax {self.vmax!r}\nmaxval {self.maxval}\n"

    @classmethod
    def from_text(cls, text: str) -> "PgmScaling":
        vals = {}
        for line in text.splitlines():
            if line.strip():
                k, v = line.split(None, 1)
                vals[k] = v.strip()
        try:
            return cls(float(vals["min"]), float(vals["max"]), int(vals["maxval"]))
        except KeyError as exc:
            raise FieldFormatError(f"scaling file lacks {exc}") from None


def sidecar_path(path) -> Path:
    return Path(str(path) + ".scale.txt")


def export_pgm(path, field, bits: int = 8, linear_scale: Optional[Tuple[float, float]] = None) -> PgmScaling:
    """Min-max scaled binary PGM plus a sidecar text file with the scaling.

    ``linear_scale = (a, b)`` maps values to ``a * x + b`` before scaling.
    Decoding with the sidecar recovers every value to within half a
    quantisation step.
    """
    if bits not in (8, 16):
        raise PhaseBGError("bits must be 8 or 16")
    a = np.asarray(field, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"PGM stores 2D arrays, got shape {a.shape}")
    if linear_scale is not None:
        a = linear_scale[0] * a + linear_scale[1]
    maxval = 255 if bits == 8 else 65535
    scaling = PgmScaling(float(a.min()), float(a.max()), maxval)
    step = scaling.step()
    q = np.zeros(a.shape) if step == 0 else np.rint((a - scaling.vmin) / step)
    q = np.clip(q, 0, maxval).astype(">u1" if bits == 8 else ">u2")
    rows, cols = a.shape
    atomic_write_bytes(path, f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii") + q.tobytes())
    atomic_write_text(sidecar_path(path), scaling.to_text())
    return scaling


def read_pgm(path) -> Tuple[np.ndarray, PgmScaling]:
    """Quantised values of a binary PGM written by :func:`export_pgm` and its scaling."""
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FieldFormatError("truncated PGM header")
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise MagicMismatchError("not a binary PGM")
    cols, rows, maxval = (int(v) for v in fields[1:])
    pos += 1
    dt = ">u1" if maxval < 256 else ">u2"
    need = rows * cols * np.dtype(dt).itemsize
    if len(raw) - pos < need:
        raise TruncatedPayloadError("truncated PGM payload")
    q = np.frombuffer(raw, dtype=dt, count=rows * cols, offset=pos).reshape(rows, cols)
    scaling = PgmScaling.from_text(sidecar_path(path).read_text())
    return q.astype(np.int64), scaling


@dataclass(frozen=True)
class Histogram:
    centers: np.ndarray
    counts: np.ndarray
    below: int
    above: int

    @property
    def in_range(self) -> int:
        return int(self.counts.sum())

    def rows(self):
        return [(float(c), int(n)) for c, n in zip(self.centers, self.counts)]

    def to_csv(self) -> str:
        out = _io.StringIO()
        out.write("bin_center,count\n")
        for c, n in self.rows():
            out.write(f"{c!r},{n}\n")
        out.write(f"# below,{self.below}\n# above,{self.above}\n")
        return out.getvalue()


def export_histogram(field, bins: int, range: Optional[Tuple[float, float]] = None,
                     linear_scale: Optional[Tuple[float, float]] = None) -> Histogram:
    """Histogram over ``[lo, hi]`` with ``bins`` equal bins; the last bin includes ``hi``.

    Pixels outside the range are counted in ``below``/``above`` instead.
    Without ``range`` the data extent is used.
    """
    if int(bins) != bins or bins < 1:
        raise PhaseBGError("bins must be a positive integer")
    a = np.asarray(field, dtype=np.float64).ravel()
    if linear_scale is not None:
        a = linear_scale[0] * a + linear_scale[1]
    if range is None:
        lo, hi = float(a.min()), float(a.max())
    else:
        lo, hi = (float(v) for v in range)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise PhaseBGError(f"invalid range ({lo}, {hi})")
    if hi == lo:
        # degenerate range: a single bin holding the values equal to lo
        counts = np.array([int(np.sum(a == lo))] + [0] * (int(bins) - 1))
        centers = np.full(int(bins), lo)
    else:
        counts, edges = np.histogram(a, bins=int(bins), range=(lo, hi))
        centers = 0.5 * (edges[:-1] + edges[1:])
    return Histogram(centers, counts.astype(np.int64), int(np.sum(a < lo)), int(np.sum(a > hi)))


def write_histogram(path, hist: Histogram) -> None:
    atomic_write_text(path, hist.to_csv())


def write_table(path, header: List[str], rows) -> None:
    out = _io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    atomic_write_text(path, out.getvalue())

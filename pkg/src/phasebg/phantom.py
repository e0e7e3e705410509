"""Synthetic phase phantoms with known decomposition, and the two-ROI CNR metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import ComplexImage2D, PhaseBGError, ScalarField2D, Unit
from .ops import wrap_values


@dataclass(frozen=True)
class Shape:
    """A constant-height region. ``kind`` is ``'disc'`` or ``'rect'``.

    For a disc, ``center`` is ``(row, col)`` and ``size`` the radius in pixels.
    For a rectangle, ``center`` is the top-left ``(row, col)`` and ``size`` is
    ``(height, width)``.
    """

    kind: str
    center: Tuple[float, float]
    size: object
    height: float

    def mask(self, rows: int, cols: int) -> np.ndarray:
        i, j = np.mgrid[0:rows, 0:cols]
        if self.kind == "disc":
            ci, cj = self.center
            return (i - ci) ** 2 + (j - cj) ** 2 <= float(self.size) ** 2
        i0, j0 = (int(v) for v in self.center)
        h, w = (int(v) for v in self.size)
        return (i >= i0) & (i < i0 + h) & (j >= j0) & (j < j0 + w)


def disc(row: float, col: float, radius: float, height: float) -> Shape:
    return Shape("disc", (float(row), float(col)), float(radius), float(height))


def rect(row: int, col: int, height: int, width: int, value: float) -> Shape:
    return Shape("rect", (int(row), int(col)), (int(height), int(width)), float(value))


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a synthetic phase map ``truth_h + truth_b (+ noise)``.

    ``background_poly`` holds coefficients ordered by total degree,
    ``(c00, c10, c01, c20, c11, c02, c30, ...)`` for ``sum c_ab x^a y^b``, with
    ``x`` the column and ``y`` the row coordinate, both scaled to [-1, 1].
    ``background_harmonic = (a, b, c, e)`` adds ``a x + b y + c (x^2 - y^2) + e x y``.
    ``wrap_cols``/``wrap_rows`` plant a 2*pi offset on every column/row index
    ``>= K`` of the returned real phase map. The complex image cannot carry
    these offsets.
    """

    rows: int
    cols: int
    shapes: Tuple[Shape, ...] = ()
    background_poly: Tuple[float, ...] = ()
    background_harmonic: Optional[Tuple[float, float, float, float]] = None
    wrap_cols: Tuple[int, ...] = ()
    wrap_rows: Tuple[int, ...] = ()
    noise_sigma: float = 0.0
    noise_domain: str = "phase"
    seed: int = 0
    low_magnitude: Tuple[Tuple[Shape, float], ...] = ()
    unit: Unit = Unit.RADIANS

    def validate(self):
        if self.rows < 1 or self.cols < 1:
            raise PhaseBGError("phantom needs positive dimensions")
        if not self.noise_sigma >= 0:
            raise PhaseBGError("noise_sigma must be >= 0")
        if self.noise_domain not in ("phase", "complex"):
            raise PhaseBGError("noise_domain must be 'phase' or 'complex'")
        for s in tuple(self.shapes) + tuple(s for s, _ in self.low_magnitude):
            _check_shape(s, self.rows, self.cols)
        for k in self.wrap_cols:
            if not 0 < k < self.cols:
                raise PhaseBGError(f"wrap column {k} outside (0, {self.cols})")
        for k in self.wrap_rows:
            if not 0 < k < self.rows:
                raise PhaseBGError(f"wrap row {k} outside (0, {self.rows})")
        if Unit.coerce(self.unit) is not Unit.RADIANS and (self.wrap_cols or self.wrap_rows):
            raise PhaseBGError("wrap lines only make sense for radian maps")
        n = len(self.background_poly)
        if n and _degree_for_count(n) is None:
            raise PhaseBGError(f"{n} polynomial coefficients do not fill a total degree")


def _check_shape(s: Shape, rows: int, cols: int):
    if s.kind == "disc":
        ci, cj = s.center
        r = float(s.size)
        if r <= 0 or ci - r < 0 or cj - r < 0 or ci + r > rows - 1 or cj + r > cols - 1:
            raise PhaseBGError(f"disc {s} does not fit inside {rows}x{cols}")
    elif s.kind == "rect":
        i0, j0 = s.center
        h, w = s.size
        if h <= 0 or w <= 0 or i0 < 0 or j0 < 0 or i0 + h > rows or j0 + w > cols:
            raise PhaseBGError(f"rectangle {s} does not fit inside {rows}x{cols}")
    else:
        raise PhaseBGError(f"unknown shape kind {s.kind!r}")


def _degree_for_count(n: int) -> Optional[int]:
    d = 0
    while (d + 1) * (d + 2) // 2 < n:
        d += 1
    return d if (d + 1) * (d + 2) // 2 == n else None


def normalized_coords(rows: int, cols: int) -> Tuple[np.ndarray, np.ndarray]:
    """Column (x) and row (y) coordinates scaled to [-1, 1]."""
    x = np.linspace(-1.0, 1.0, cols) if cols > 1 else np.zeros(1)
    y = np.linspace(-1.0, 1.0, rows) if rows > 1 else np.zeros(1)
    return np.broadcast_to(x[None, :], (rows, cols)), np.broadcast_to(y[:, None], (rows, cols))


def poly_background(rows: int, cols: int, coeffs: Sequence[float]) -> np.ndarray:
    x, y = normalized_coords(rows, cols)
    out = np.zeros((rows, cols))
    k = 0
    d = 0
    while k < len(coeffs):
        for a in range(d, -1, -1):
            if k >= len(coeffs):
                break
            out += coeffs[k] * x**a * y ** (d - a)
            k += 1
        d += 1
    return out


def harmonic_background(rows: int, cols: int, a: float, b: float, c: float, e: float) -> np.ndarray:
    x, y = normalized_coords(rows, cols)
    return a * x + b * y + c * (x * x - y * y) + e * x * y


@dataclass(frozen=True)
class Phantom:
    image: ComplexImage2D
    phase: ScalarField2D
    truth_h: ScalarField2D
    truth_b: ScalarField2D
    noise: np.ndarray
    wrap_offset: np.ndarray = field(repr=False, default=None)


def make_phantom(spec: PhantomSpec) -> Phantom:
    """Build the complex image, the measured phase map and the ground-truth split.

    With phase-domain noise, ``phase = wrap(truth_h + truth_b + noise) + wrap_offset``
    for radian maps (no wrapping for ppm). The noise realisation is a
    deterministic function of ``seed``.
    """
    spec.validate()
    unit = Unit.coerce(spec.unit)
    R, C = spec.rows, spec.cols
    h = np.zeros((R, C))
    for s in spec.shapes:
        h[s.mask(R, C)] = s.height
    b = np.zeros((R, C))
    if spec.background_poly:
        b += poly_background(R, C, spec.background_poly)
    if spec.background_harmonic is not None:
        b += harmonic_background(R, C, *spec.background_harmonic)
    mag = np.ones((R, C))
    for s, value in spec.low_magnitude:
        mag[s.mask(R, C)] = value

    rng = np.random.default_rng(spec.seed)
    offset = np.zeros((R, C))
    for k in spec.wrap_cols:
        offset[:, k:] += 2.0 * np.pi
    for k in spec.wrap_rows:
        offset[k:, :] += 2.0 * np.pi

    if spec.noise_domain == "phase":
        noise = spec.noise_sigma * rng.standard_normal((R, C)) if spec.noise_sigma > 0 else np.zeros((R, C))
        total = h + b + noise
        image = ComplexImage2D(mag * np.exp(1j * total))
        measured = wrap_values(total) if unit is Unit.RADIANS else total
    else:
        clean = mag * np.exp(1j * (h + b))
        cn = spec.noise_sigma * (rng.standard_normal((R, C)) + 1j * rng.standard_normal((R, C)))
        image = ComplexImage2D(clean + cn)
        measured = image.phase()
        noise = wrap_values(measured - (h + b))
    return Phantom(
        image=image,
        phase=ScalarField2D(measured + offset, unit),
        truth_h=ScalarField2D(h, unit),
        truth_b=ScalarField2D(b, unit),
        noise=noise,
        wrap_offset=offset,
    )


def _roi_values(data: np.ndarray, roi) -> np.ndarray:
    i, j, h, w = (int(v) for v in roi)
    R, C = data.shape
    if h < 1 or w < 1 or i < 0 or j < 0 or i + h > R or j + w > C:
        raise PhaseBGError(f"ROI {roi} outside field {data.shape}")
    return data[i:i + h, j:j + w].ravel()


def _rois_overlap(a, b) -> bool:
    ai, aj, ah, aw = a
    bi, bj, bh, bw = b
    return ai < bi + bh and bi < ai + ah and aj < bj + bw and bj < aj + aw


def cnr(field, roi_w, roi_f, spread: str = "pooled") -> float:
    """Contrast-to-noise ratio ``(mean(R_w) - mean(R_f)) / std`` of two ROIs.

    ROIs are ``(row, col, height, width)``. ``spread='pooled'`` divides by the
    pooled within-ROI population standard deviation
    ``sqrt((sum_w (x - mean_w)^2 + sum_f (x - mean_f)^2) / (n_w + n_f))``.
    ``'union'`` uses the plain standard deviation of all pixels of both ROIs,
    which also absorbs the contrast itself. A zero spread returns a signed
    infinity (NaN when the contrast is 0 as well).
    """
    data = np.asarray(field, dtype=np.float64)
    roi_w = tuple(int(v) for v in roi_w)
    roi_f = tuple(int(v) for v in roi_f)
    a = _roi_values(data, roi_w)
    b = _roi_values(data, roi_f)
    if _rois_overlap(roi_w, roi_f):
        raise PhaseBGError("ROIs must be disjoint")
    ma, mb = _exact_mean(a), _exact_mean(b)
    contrast = ma - mb
    # symmetric in the two ROIs, so swapping them negates the result exactly
    ss = float(np.sum((a - ma) ** 2)) + float(np.sum((b - mb) ** 2))
    n = a.size + b.size
    if spread == "pooled":
        sd = math.sqrt(ss / n)
    elif spread == "union":
        sd = math.sqrt((ss + a.size * b.size / n * contrast * contrast) / n)
    else:
        raise PhaseBGError(f"spread must be 'pooled' or 'union', got {spread!r}")
    if sd == 0.0:
        return math.copysign(math.inf, contrast) if contrast != 0 else math.nan
    return contrast / sd


def _exact_mean(v: np.ndarray) -> float:
    # a constant ROI must have zero spread; the summed mean can be off by an ulp
    return float(v[0]) if v.min() == v.max() else float(v.mean())


def is_degenerate_cnr(value: float) -> bool:
    return not math.isfinite(value)


def poly_spanning(coeffs: Sequence[float], rows: int, cols: int, lo: float, hi: float) -> Tuple[float, ...]:
    """Coefficients of ``a * p + b`` whose values on the grid span exactly ``[lo, hi]``.

    ``p`` is the polynomial with ``coeffs`` in the :func:`poly_background` ordering.
    """
    p = poly_background(rows, cols, coeffs)
    span = float(p.max() - p.min())
    if span == 0.0:
        raise PhaseBGError("polynomial is constant on the grid")
    a = (hi - lo) / span
    out = [a * c for c in coeffs]
    out[0] += lo - a * float(p.min())
    return tuple(out)

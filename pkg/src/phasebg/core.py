"""Domain types shared by every stage of the background-suppression pipeline.

Grid convention: arrays are row-major and indexed ``(row, col)``. The
x-direction runs along increasing column (axis 1), the y-direction along
increasing row (axis 0).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


class PhaseBGError(ValueError):
    """Base class for validation errors raised by this package."""


class DimensionError(PhaseBGError):
    pass


class NonFiniteError(PhaseBGError):
    pass


class OrderUnsupportedError(PhaseBGError):
    pass


class GridTooSmallError(PhaseBGError):
    pass


class Unit(enum.Enum):
    DIMENSIONLESS = "dimensionless"
    RADIANS = "radians"
    PPM = "ppm"

    @classmethod
    def coerce(cls, value) -> "Unit":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalarField2D:
    """Real 2D grid (phase in radians, ppm maps, weights).

    ``data`` is stored as a read-only float64 copy and must be finite.
    """

    data: np.ndarray
    unit: Unit = Unit.RADIANS

    def __post_init__(self):
        a = np.array(self.data, dtype=np.float64, copy=True, order="C")
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"expected a nonempty 2D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("field contains NaN or Inf")
        object.__setattr__(self, "data", _frozen(a))
        object.__setattr__(self, "unit", Unit.coerce(self.unit))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def with_data(self, data) -> "ScalarField2D":
        return ScalarField2D(data, self.unit)


@dataclass(frozen=True)
class ComplexImage2D:
    """Complex MR image; the phase carries the signal, the magnitude the reliability."""

    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=np.complex128, copy=True, order="C")
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"expected a nonempty 2D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("image contains NaN or Inf")
        object.__setattr__(self, "data", _frozen(a))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def phase(self) -> np.ndarray:
        return _principal_angle(self.data)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    @classmethod
    def from_polar(cls, magnitude, phase) -> "ComplexImage2D":
        return cls(np.asarray(magnitude) * np.exp(1j * np.asarray(phase, dtype=np.float64)))


@dataclass(frozen=True)
class JumpField:
    """Per-pixel jump heights across x (``ux``) and across y (``uy``).

    The jump between pixel ``(i, j)`` and ``(i, j+1)`` is stored at ``ux[i, j]``,
    the one between ``(i, j)`` and ``(i+1, j)`` at ``uy[i, j]``.
    """

    ux: np.ndarray
    uy: np.ndarray
    unit: Unit = Unit.RADIANS

    def __post_init__(self):
        ux = np.array(self.ux, dtype=np.float64, copy=True, order="C")
        uy = np.array(self.uy, dtype=np.float64, copy=True, order="C")
        if ux.ndim != 2 or ux.shape != uy.shape:
            raise DimensionError(f"ux and uy must be 2D with equal shapes, got {ux.shape} and {uy.shape}")
        if not (np.all(np.isfinite(ux)) and np.all(np.isfinite(uy))):
            raise NonFiniteError("jump field contains NaN or Inf")
        object.__setattr__(self, "ux", _frozen(ux))
        object.__setattr__(self, "uy", _frozen(uy))
        object.__setattr__(self, "unit", Unit.coerce(self.unit))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ux.shape

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.ux, self.uy)

    def support(self, tau: float = 0.0) -> np.ndarray:
        if tau < 0:
            raise PhaseBGError("support threshold must be >= 0")
        return self.magnitude() > tau

    def group_norm(self) -> float:
        """Sum over pixels of the Euclidean norm of ``(ux, uy)``."""
        return float(np.sum(self.magnitude()))

    @classmethod
    def zeros(cls, shape, unit=Unit.RADIANS) -> "JumpField":
        return cls(np.zeros(shape), np.zeros(shape), unit)


@dataclass(frozen=True)
class EdgeKernel:
    """Polynomial-annihilation stencil of order ``order``.

    ``coeffs[k]`` multiplies the sample at offset ``k - anchor`` from the output
    pixel. ``q`` is the scale that makes the peak unit-jump response equal to 1.
    """

    order: int
    coeffs: np.ndarray
    q: float
    anchor: int

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64, copy=True)
        if c.shape != (self.order + 1,):
            raise PhaseBGError(f"order {self.order} needs {self.order + 1} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.order + 1) - self.anchor


@dataclass(frozen=True)
class SolverConfig:
    """Parameters for both solvers.

    ``penalty_rho=None`` picks the edge-ADMM penalty from ``lam``
    (``10 * lam``, floored at ``1e-12``). ``cg_max_iter=None`` means
    ``100 * sqrt(rows * cols)``.
    """

    lam: float = 1e-6
    epsilon: float = 1e-8
    max_iter: int = 500
    tol: float = 1e-8
    penalty_rho: Optional[float] = None
    adaptive_rho: bool = False
    cg_tol: float = 1e-10
    cg_max_iter: Optional[int] = None
    jacobi: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise PhaseBGError("lam must be finite and >= 0")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise PhaseBGError("epsilon must be > 0")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise PhaseBGError("max_iter must be a positive integer")
        if not self.tol > 0:
            raise PhaseBGError("tol must be > 0")
        if self.penalty_rho is not None and not self.penalty_rho > 0:
            raise PhaseBGError("penalty_rho must be > 0")
        if not self.cg_tol > 0:
            raise PhaseBGError("cg_tol must be > 0")
        if self.cg_max_iter is not None and self.cg_max_iter < 1:
            raise PhaseBGError("cg_max_iter must be a positive integer")

    def rho0(self) -> float:
        if self.penalty_rho is not None:
            return float(self.penalty_rho)
        return max(10.0 * self.lam, 1e-12)


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    flags: Tuple[str, ...] = field(default_factory=tuple)
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = {
            "iterations": int(self.iterations),
            "primal_residual": float(self.primal_residual),
            "dual_residual": float(self.dual_residual),
            "converged": bool(self.converged),
            "flags": list(self.flags),
        }
        d.update(self.extra)
        return d


def _principal_angle(z: np.ndarray) -> np.ndarray:
    ang = np.angle(z)
    # np.angle returns -pi on the negative real axis with a negative-zero imaginary part
    ang[ang <= -np.pi] += 2.0 * np.pi
    ang[np.abs(z) == 0] = 0.0
    return ang


def as_field(x, unit=Unit.RADIANS) -> ScalarField2D:
    if isinstance(x, ScalarField2D):
        return x
    return ScalarField2D(np.asarray(x), unit)


def phase_of(image: ComplexImage2D) -> ScalarField2D:
    """Principal phase in (-pi, pi]; zero-magnitude pixels map to 0."""
    return ScalarField2D(image.phase(), Unit.RADIANS)


def magnitude_weights(image: ComplexImage2D) -> ScalarField2D:
    """|f|^2 scaled by its maximum into [0, 1]. An all-zero image gives all-zero weights."""
    p = np.abs(image.data) ** 2
    top = p.max()
    if top > 0:
        p = p / top
    return ScalarField2D(p, Unit.DIMENSIONLESS)

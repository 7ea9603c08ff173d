"""Uniform 1D grids and normalized density fields."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateDensityError, DimensionError, NumericInputError

MIN_POINTS = 64


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[x_min, x_max]`` with ``n_points`` nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise NumericInputError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise DimensionError("x_min must be < x_max")
        if self.n_points < MIN_POINTS:
            raise DimensionError(f"n_points must be >= {MIN_POINTS}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n_points)
        x.setflags(write=False)
        return x


@dataclass(frozen=True, eq=False)
class DensityField:
    """Nonnegative, trapezoid-normalized function values on a uniform grid.

    ``clamped_mass`` records how much (tiny, negative) mass was clipped to
    zero on construction and ``renorm_drift`` how far the raw values were
    from unit mass before renormalization; both are diagnostics, not state.
    """

    grid: Grid1D
    values: np.ndarray
    clamped_mass: float = 0.0
    renorm_drift: float = 0.0

    def __init__(self, grid: Grid1D, values, clamped_mass=0.0, renorm_drift=0.0):
        v = np.asarray(values, dtype=float)
        if v.shape != (grid.n_points,):
            raise DimensionError(
                f"values shape {v.shape} != grid size ({grid.n_points},)"
            )
        if not np.all(np.isfinite(v)):
            raise NumericInputError("density values must be finite")
        if np.any(v < 0.0):
            raise NumericInputError("density values must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "clamped_mass", float(clamped_mass))
        object.__setattr__(self, "renorm_drift", float(renorm_drift))

    @classmethod
    def from_raw(cls, grid: Grid1D, raw) -> "DensityField":
        """Clamp negatives, renormalize by trapezoid mass, track diagnostics."""
        v = np.asarray(raw, dtype=float)
        if not np.all(np.isfinite(v)):
            raise NumericInputError("density values must be finite")
        neg = np.minimum(v, 0.0)
        clamped = -float(np.trapezoid(neg, dx=grid.spacing))
        v = np.maximum(v, 0.0)
        mass = float(np.trapezoid(v, dx=grid.spacing))
        if mass <= 0.0:
            raise DegenerateDensityError("density underflowed to zero everywhere")
        return cls(grid, v / mass, clamped_mass=clamped, renorm_drift=abs(mass - 1.0))

    def normalization(self) -> float:
        return float(np.trapezoid(self.values, dx=self.grid.spacing))

    def mean(self) -> float:
        return float(np.trapezoid(self.grid.nodes * self.values, dx=self.grid.spacing))

    def variance(self) -> float:
        m = self.mean()
        return float(
            np.trapezoid((self.grid.nodes - m) ** 2 * self.values, dx=self.grid.spacing)
        )

    def boundary_mass(self) -> float:
        h = self.grid.spacing
        return float((self.values[0] + self.values[-1]) * h)

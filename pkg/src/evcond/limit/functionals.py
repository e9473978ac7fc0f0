"""Partial derivatives of the tail copula and the density along the unit lines.

``SmoothedFunctionals`` estimates them from an empirical exponent measure with
box-kernel smoothing (bandwidth ``k^-1/5`` for the partials and ``k^-1/6``
for the density); ``AnalyticFunctionals`` reads closed forms.

Smoothing windows are clamped at 0. For the partials the default
``boundary="renormalize"`` divides by the width of the clamped window, so the
estimate stays a difference quotient next to the axes; ``"clamp"`` keeps the
fixed factor ``k^(1/5)/2`` and underestimates there by up to a half.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..estimators import AtomMeasure, count_rects
from ..models import AnalyticMeasure


def _positive(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise ValueError("arguments must be positive")


BOUNDARY_MODES = ("renormalize", "clamp")


@dataclass(frozen=True)
class SmoothedFunctionals:
    measure: AtomMeasure
    boundary: str = "renormalize"

    def __post_init__(self):
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")

    @property
    def k(self) -> int:
        return self.measure.k

    @property
    def h_partial(self) -> float:
        return self.k ** (-1.0 / 5.0)

    @property
    def h_density(self) -> float:
        return self.k ** (-1.0 / 6.0)

    def _count(self, x_lo, x_hi, y_lo, y_hi):
        return count_rects(self.measure.u, self.measure.v, x_lo, x_hi, y_lo, y_hi)

    def _width(self, centre):
        h = self.h_partial
        if self.boundary == "clamp":
            return 2.0 * h
        return np.minimum(2.0 * h, centre + h)

    def r1(self, x, y):
        _positive(x, y)
        h = self.h_partial
        x, y = np.asarray(x, float), np.asarray(y, float)
        c = self._count(x - h, x + h, 0.0, y)
        return c / self.k / self._width(x)

    def r2(self, x, y):
        _positive(x, y)
        h = self.h_partial
        x, y = np.asarray(x, float), np.asarray(y, float)
        c = self._count(0.0, x, y - h, y + h)
        return c / self.k / self._width(y)

    def density_1y(self, y):
        """Smoothed density at ``(1, y)``."""
        _positive(y)
        h = self.h_density
        y = np.asarray(y, float)
        c = self._count(1.0 - h, 1.0 + h, y - h, y + h)
        return 0.25 * self.k ** (1.0 / 3.0) * c / self.k

    def density_x1(self, x):
        """Smoothed density at ``(x, 1)``."""
        _positive(x)
        h = self.h_density
        x = np.asarray(x, float)
        c = self._count(x - h, x + h, 1.0 - h, 1.0 + h)
        return 0.25 * self.k ** (1.0 / 3.0) * c / self.k

    def _tail(self, along, across, c):
        c = np.asarray(c, float)
        if np.any(c < 0):
            raise ValueError("lower limit must be nonnegative")
        h = self.h_density
        band = np.abs(across - 1.0) <= h
        pos = along[band]
        # an atom at t is inside the smoothing window for t - h <= s <= t + h
        lo = np.maximum(c[..., None], pos - h)
        length = np.clip(pos + h - lo, 0.0, None)
        return 0.25 * self.k ** (1.0 / 3.0) * length.sum(axis=-1) / self.k

    def tail_x(self, c):
        """Exact ``int_c^inf density_x1(s) ds`` of the piecewise-constant
        smoothed density."""
        return self._tail(self.measure.u, self.measure.v, c)

    def tail_y(self, c):
        return self._tail(self.measure.v, self.measure.u, c)


@dataclass(frozen=True)
class AnalyticFunctionals:
    analytic: AnalyticMeasure

    def r1(self, x, y):
        return self.analytic.r1(x, y)

    def r2(self, x, y):
        return self.analytic.r2(x, y)

    def density_1y(self, y):
        return self.analytic.density(np.ones_like(np.asarray(y, float)), y)

    def density_x1(self, x):
        return self.analytic.density(x, np.ones_like(np.asarray(x, float)))

    def tail_x(self, c):
        return self.analytic.tail_x(c)

    def tail_y(self, c):
        return self.analytic.tail_y(c)


def smoothed_partials(
    measure: AtomMeasure, x: float, y: float, boundary: str = "renormalize"
) -> tuple[float, float]:
    f = SmoothedFunctionals(measure, boundary)
    return float(f.r1(x, y)), float(f.r2(x, y))


def smoothed_density(measure: AtomMeasure, point: tuple[float, float]) -> float:
    """Smoothed density at ``(x, 1)`` or ``(1, y)``."""
    x, y = point
    f = SmoothedFunctionals(measure)
    if y == 1.0:
        return float(f.density_x1(x))
    if x == 1.0:
        return float(f.density_1y(y))
    raise ValueError("point must lie on x = 1 or y = 1")


def density_tail_integral(measure: AtomMeasure, c: float, axis: int = 0) -> float:
    f = SmoothedFunctionals(measure)
    return float(f.tail_x(c) if axis == 0 else f.tail_y(c))

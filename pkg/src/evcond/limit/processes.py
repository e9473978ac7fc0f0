"""Pointwise evaluation of the limit processes for one field draw.

These functions are the reference route; the batched engine in
:mod:`evcond.limit.engine` computes the same quantities on whole grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import GaussianFieldDraw, field_box, field_cset, field_marg1, field_marg2, log_integral

QUARTER = math.pi / 4
HALF = math.pi / 2


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform cells on ``[0, pi/2]``; an even count puts ``pi/4`` on an edge."""

    cells: int = 200

    def __post_init__(self):
        if self.cells < 2 or self.cells % 2:
            raise ValueError("theta grid needs a positive even cell count")

    @property
    def width(self) -> float:
        return HALF / self.cells

    @property
    def edges(self) -> np.ndarray:
        e = np.arange(self.cells + 1) * self.width
        e[self.cells // 2] = QUARTER
        e[-1] = HALF
        return e

    @property
    def mids(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.width

    def cell_of(self, theta):
        j = np.floor(np.asarray(theta) / self.width).astype(np.int64)
        return np.clip(j, 0, self.cells - 1)

    def weights(self) -> np.ndarray:
        """Exact integrals of ``1/cos^2`` (cells below pi/4) and ``1/sin^2``
        (cells above) over each cell."""
        e = self.edges
        half = self.cells // 2
        tan_e = np.tan(e[: half + 1])
        tan_e[half] = 1.0
        cot_e = np.cos(e[half:]) / np.sin(e[half:])
        cot_e[0] = 1.0
        cot_e[-1] = 0.0
        return np.concatenate([np.diff(tan_e), -np.diff(cot_e)])

    def lower_cot(self, j):
        """``cot`` of the lower edge of cells ``j >= cells/2``."""
        e = self.edges[np.asarray(j)]
        return np.where(np.asarray(j) == self.cells // 2, 1.0, np.cos(e) / np.sin(e))

    def upper_tan(self, j):
        """``tan`` of the upper edge of cells ``j < cells/2``."""
        e = self.edges[np.asarray(j) + 1]
        return np.where(np.asarray(j) + 1 == self.cells // 2, 1.0, np.tan(e))


def z_process(draw: GaussianFieldDraw, fun, theta: float) -> float:
    """Gaussian correction term of the spectral estimator at angle ``theta``.

    ``fun`` supplies the density along ``x = 1`` / ``y = 1`` and its tail
    integrals (smoothed or closed form).
    """
    if not 0.0 <= theta <= HALF:
        raise ValueError("theta must lie in [0, pi/2]")
    w1 = field_marg1(draw, 1.0)
    w2 = field_marg2(draw, 1.0)
    if theta == HALF:
        return float(-w2 * fun.tail_x(1.0) - w1 * fun.tail_y(1.0))
    t = math.tan(theta)
    if theta <= QUARTER:
        if t == 0.0:
            # tan(theta) * int_0^(1/tan) W1/x vanishes as theta -> 0
            lam = float(fun.density_1y(np.nextafter(0.0, 1.0)))
            return float(-lam * log_integral(draw, 1, 1.0))
        lam = float(fun.density_1y(t))
        return float(
            lam * t * log_integral(draw, 0, 1.0 / t)
            - lam * log_integral(draw, 1, 1.0)
            - w2 * fun.tail_x(1.0 / t)
        )
    lam = float(fun.density_x1(1.0 / t))
    return float(
        lam * log_integral(draw, 0, 1.0)
        - lam / t * log_integral(draw, 1, t)
        - w2 * fun.tail_x(1.0)
        - w1 * (fun.tail_y(1.0) - fun.tail_y(t))
    )


@dataclass(frozen=True)
class ThetaCache:
    """``W(C_theta) + Z(theta)`` at cell midpoints, plus its value at pi/2."""

    grid: ThetaGrid
    f: np.ndarray
    top: float


def theta_cache(draw: GaussianFieldDraw, fun, grid: ThetaGrid = ThetaGrid()) -> ThetaCache:
    f = np.array(
        [field_cset(draw, float(t)) + z_process(draw, fun, float(t)) for t in grid.mids]
    )
    top = field_cset(draw, HALF) + z_process(draw, fun, HALF)
    return ThetaCache(grid, f, top)


def a_process(cache: ThetaCache, x: float, y: float) -> float:
    """Limit of the spectral estimator's error at ``(x, y)``.

    The angular integrand is held constant on each grid cell at its midpoint
    value while ``1/sin^2`` and ``1/cos^2`` are integrated exactly, including
    the partial cell that ends at ``arctan(y/x)``.
    """
    if not (0 < x <= 1 and 0 < y <= 1):
        raise ValueError("(x, y) must lie in (0, 1]^2")
    g = cache.grid
    w = g.weights()
    half = g.cells // 2
    end = math.atan2(y, x)
    j = int(g.cell_of(end))
    if y >= x:
        j = max(j, half)
        acc = math.fsum((cache.f[half:j] * w[half:j]).tolist())
        acc += cache.f[j] * (float(g.lower_cot(j)) - x / y)
        return x * cache.top + y * acc
    j = min(j, half - 1)
    acc = math.fsum((cache.f[j + 1 : half] * w[j + 1 : half]).tolist())
    acc += cache.f[j] * (float(g.upper_tan(j)) - y / x)
    return x * cache.top - x * acc


def b_process(draw: GaussianFieldDraw, fun, x: float, y: float) -> float:
    """Limit of the rank estimator's (negated) error at ``(x, y)``."""
    if not (0 < x <= 1 and 0 < y <= 1):
        raise ValueError("(x, y) must lie in (0, 1]^2")
    return float(
        field_box(draw, x, y)
        - fun.r1(x, y) * field_marg1(draw, x)
        - fun.r2(x, y) * field_marg2(draw, y)
    )

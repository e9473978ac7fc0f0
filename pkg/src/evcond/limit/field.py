"""Atomic control measures and set-indexed Gaussian fields over them.

A field draw assigns an independent standard normal ``xi_i`` to every atom and
sets ``W(C) = sum_{atoms in C} sqrt(mass_i) * xi_i``, which has exactly the
covariance ``Lambda(C & C')`` for the atomic measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..estimators import AtomMeasure, box_index

ESTIMATED = "estimated-from-data"
ANALYTIC = "discretized-analytic"


@dataclass(frozen=True)
class ControlMeasure:
    """Finite atomic measure on ``[0, inf]^2`` minus ``(inf, inf)``.

    Estimated measures keep the integer tail coordinates ``p, q`` and scale
    ``k``; box membership then follows the rank-count rule ``p < k x``.
    Discretized measures place each cell's mass at the cell's upper-right
    corner and count it in a closed box only if the whole cell is inside.
    """

    u: np.ndarray
    v: np.ndarray
    mass: np.ndarray
    provenance: str
    k: int | None = None
    p: np.ndarray | None = None
    q: np.ndarray | None = None

    def __post_init__(self):
        if self.u.size == 0:
            raise ValueError("control measure has no atoms")
        if np.any(np.isinf(self.u) & np.isinf(self.v)):
            raise ValueError("atom at (inf, inf)")
        if np.any(self.mass < 0):
            raise ValueError("negative atom mass")

    @classmethod
    def from_atoms(cls, measure: AtomMeasure) -> "ControlMeasure":
        k = measure.k
        return cls(
            u=measure.p / k,
            v=measure.q / k,
            mass=np.full(measure.n, 1.0 / k),
            provenance=ESTIMATED,
            k=k,
            p=np.asarray(measure.p, np.int64),
            q=np.asarray(measure.q, np.int64),
        )

    @property
    def size(self) -> int:
        return int(self.u.size)

    @property
    def estimated(self) -> bool:
        return self.provenance == ESTIMATED

    @property
    def angle(self) -> np.ndarray:
        if self.estimated:
            return np.arctan(self.q / self.p)
        return np.arctan2(self.v, self.u)

    def total(self) -> float:
        return math.fsum(self.mass.tolist())

    # membership -----------------------------------------------------------

    def _within(self, axis: int, x: float) -> np.ndarray:
        if self.estimated:
            coord = self.p if axis == 0 else self.q
            return coord <= box_index(self.k, x)
        coord = self.u if axis == 0 else self.v
        return coord <= x

    def in_box(self, x: float, y: float) -> np.ndarray:
        return self._within(0, x) & self._within(1, y)

    def in_marg1(self, x: float) -> np.ndarray:
        return self._within(0, x)

    def in_marg2(self, y: float) -> np.ndarray:
        return self._within(1, y)

    def in_strips(self) -> np.ndarray:
        """Atoms with ``min(u, v) <= 1`` (the union of all ``C_theta``)."""
        if self.estimated:
            return np.minimum(self.p, self.q) <= self.k
        return np.minimum(self.u, self.v) <= 1.0

    def in_cset(self, theta: float) -> np.ndarray:
        return self.in_strips() & (self.angle <= theta)

    def node_bins(self, axis: int, nodes: np.ndarray) -> np.ndarray:
        """For each atom, the first node index whose box contains it
        (``len(nodes)`` if none does)."""
        if self.estimated:
            thresholds = box_index(self.k, nodes)
            coord = self.p if axis == 0 else self.q
            return np.searchsorted(thresholds, coord, side="left")
        coord = self.u if axis == 0 else self.v
        return np.searchsorted(nodes, coord, side="left")

    def mass_of(self, mask: np.ndarray) -> float:
        return math.fsum(self.mass[mask].tolist())


@dataclass(frozen=True)
class GaussianFieldDraw:
    measure: ControlMeasure
    xi: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.measure.mass) * self.xi

    def sum_over(self, mask: np.ndarray) -> float:
        return math.fsum(self.omega[mask].tolist())


def draw_field(measure: ControlMeasure, rng: np.random.Generator) -> GaussianFieldDraw:
    """One realisation of the Gaussian field with control ``measure``."""
    if measure.size == 0:
        raise ValueError("empty control measure")
    return GaussianFieldDraw(measure, rng.standard_normal(measure.size))


def _nonneg(*args):
    for a in args:
        if a < 0:
            raise ValueError("arguments must be nonnegative")


def field_box(draw: GaussianFieldDraw, x: float, y: float) -> float:
    _nonneg(x, y)
    return draw.sum_over(draw.measure.in_box(x, y))


def field_marg1(draw: GaussianFieldDraw, x: float) -> float:
    _nonneg(x)
    return draw.sum_over(draw.measure.in_marg1(x))


def field_marg2(draw: GaussianFieldDraw, y: float) -> float:
    _nonneg(y)
    return draw.sum_over(draw.measure.in_marg2(y))


def field_cset(draw: GaussianFieldDraw, theta: float) -> float:
    """``W(C_theta)``, ``C_theta = {min(u, v) <= 1, v <= u tan(theta)}``."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2]")
    return draw.sum_over(draw.measure.in_cset(theta))


def log_integral(draw: GaussianFieldDraw, axis: int, c: float) -> float:
    """``int_0^c W_j(t) / t dt`` for the marginal field ``W_j``.

    The marginal field is a step function, so each atom contributes
    ``omega_i * log(c / coord_i)`` once ``c`` exceeds its coordinate.
    """
    if c <= 0:
        return 0.0
    m = draw.measure
    coord = m.u if axis == 0 else m.v
    live = np.isfinite(coord) & (coord < c)
    terms = draw.omega[live] * np.log(c / coord[live])
    return math.fsum(terms.tolist())

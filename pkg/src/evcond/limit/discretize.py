"""Atomic discretisation of a closed-form exponent measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import AnalyticMeasure
from .field import ANALYTIC, ControlMeasure


@dataclass(frozen=True)
class Mesh:
    """Cell layout for :func:`discretize_analytic`.

    Uniform cells of side ``1/cells_per_unit`` cover ``[0, fine_extent]`` on
    each axis; beyond it cells grow geometrically up to ``horizon`` and one
    last cell runs to infinity. Where both coordinates exceed 1 (a region that
    only feeds the marginal fields) the uniform part is coarsened to
    ``corner_cells_per_unit``.
    """

    cells_per_unit: int = 100
    fine_extent: float = 2.0
    horizon: float = 100.0
    growth_cells: int = 20
    corner_cells_per_unit: int = 10

    def axis_edges(self, per_unit: int, start: float = 0.0) -> np.ndarray:
        n_fine = round((self.fine_extent - start) * per_unit)
        fine = np.linspace(start, self.fine_extent, n_fine + 1)
        geo = np.geomspace(self.fine_extent, self.horizon, self.growth_cells + 1)
        return np.concatenate([fine, geo[1:], [np.inf]])


def _cell_masses(R, ux, vy):
    """Masses of the cells ``[ux[i], ux[i+1]] x [vy[j], vy[j+1]]``."""
    U, V = np.meshgrid(ux, vy, indexing="ij")
    big = np.asarray(R(U, V), float)
    return big[1:, 1:] - big[:-1, 1:] - big[1:, :-1] + big[:-1, :-1]


def _block(R, ux, vy):
    mass = _cell_masses(R, ux, vy)
    U, V = np.meshgrid(ux[1:], vy[1:], indexing="ij")
    return U.ravel(), V.ravel(), mass.ravel()


def discretize_analytic(analytic: AnalyticMeasure, mesh: Mesh = Mesh()) -> ControlMeasure:
    """One atom per mesh cell carrying the cell's measure, placed at the cell's
    upper-right corner.

    Covers everything except the doubly infinite cell
    ``[horizon, inf)^2``, which no query of the limit processes touches.
    """
    if mesh.cells_per_unit < 50:
        raise ValueError("mesh too coarse: need at least 50 cells per unit")
    if mesh.fine_extent < 1.0 or mesh.horizon <= mesh.fine_extent:
        raise ValueError("need 1 <= fine_extent < horizon")
    full = mesh.axis_edges(mesh.cells_per_unit)
    unit = full[full <= 1.0]
    beyond = full[full >= 1.0]
    corner = mesh.axis_edges(mesh.corner_cells_per_unit, start=1.0)

    def R(x, y):
        return analytic.R(x, y)

    blocks = [
        _block(R, unit, full),  # [0, 1] x [0, inf]
        _block(R, beyond, unit),  # [1, inf] x [0, 1]
    ]
    cu, cv, cm = _block(R, corner, corner)
    keep = ~(np.isinf(cu) & np.isinf(cv))
    blocks.append((cu[keep], cv[keep], cm[keep]))
    u = np.concatenate([b[0] for b in blocks])
    v = np.concatenate([b[1] for b in blocks])
    mass = np.concatenate([b[2] for b in blocks])
    if np.any(mass < -1e-15):
        raise ValueError("analytic R is not supermodular on the mesh")
    mass = np.clip(mass, 0.0, None)
    return ControlMeasure(u=u, v=v, mass=mass, provenance=ANALYTIC)

"""Simulation of the limiting law of the test statistic."""

from __future__ import annotations

import io
import json
import math
import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..estimators import AtomMeasure, exponent_measure
from ..models import AnalyticMeasure
from ..sample import ConfigError, RankData
from ..statistic import QuadSpec
from .discretize import Mesh, discretize_analytic
from .engine import SimulationPlan, build_plan, replicate_values, simulate
from .field import (
    ANALYTIC,
    ESTIMATED,
    ControlMeasure,
    GaussianFieldDraw,
    draw_field,
    field_box,
    field_cset,
    field_marg1,
    field_marg2,
    log_integral,
)
from .functionals import (
    AnalyticFunctionals,
    SmoothedFunctionals,
    density_tail_integral,
    smoothed_density,
    smoothed_partials,
)
from .processes import ThetaCache, ThetaGrid, a_process, b_process, theta_cache, z_process

TABLE1_PROBS = (0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99)


def estimated_plan(
    measure: AtomMeasure,
    betas: Sequence[float],
    quad: QuadSpec = QuadSpec(),
    theta_cells: int = 200,
    boundary: str = "renormalize",
) -> SimulationPlan:
    """Plan with the empirical measure and smoothed functionals."""
    return build_plan(
        ControlMeasure.from_atoms(measure),
        SmoothedFunctionals(measure, boundary),
        quad.nodes(),
        betas,
        ThetaGrid(theta_cells),
    )


def analytic_plan(
    analytic: AnalyticMeasure,
    betas: Sequence[float],
    quad: QuadSpec = QuadSpec(),
    theta_cells: int = 200,
    mesh: Mesh = Mesh(),
) -> SimulationPlan:
    """Plan with a discretised closed-form measure."""
    return build_plan(
        discretize_analytic(analytic, mesh),
        AnalyticFunctionals(analytic),
        quad.nodes(),
        betas,
        ThetaGrid(theta_cells),
    )


def limit_replicate(plan: SimulationPlan, rng: np.random.Generator) -> np.ndarray:
    """One draw of the limiting variable for every weight exponent in the plan."""
    xi = rng.standard_normal(plan.measure.size)
    return replicate_values(plan, xi[None, :])[0]


def order_statistic_quantile(sorted_values: np.ndarray, p: float) -> float:
    """Order statistic of rank ``ceil(B p)`` (no interpolation)."""
    B = sorted_values.size
    rank = max(1, math.ceil(B * p - 1e-9))
    return float(sorted_values[rank - 1])


@dataclass
class QuantileTable:
    probs: list[float]
    quantiles: list[float]
    reps: int
    config: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.reps < 100:
            raise ConfigError("at least 100 replicates are required")

    def q(self, p: float) -> float:
        for pp, qq in zip(self.probs, self.quantiles):
            if math.isclose(pp, p):
                return qq
        raise KeyError(p)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("p,q\n")
        for p, q in zip(self.probs, self.quantiles):
            buf.write(f"{p!r},{q!r}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "probs": self.probs,
            "quantiles": self.quantiles,
            "reps": self.reps,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "QuantileTable":
        d = json.loads(text)
        return cls(d["probs"], d["quantiles"], d["reps"], d["config"])


def _check_probs(probs: Sequence[float]) -> list[float]:
    probs = [float(p) for p in probs]
    if not probs or any(not 0.0 < p < 1.0 for p in probs):
        raise ConfigError("probabilities must lie in (0, 1)")
    return probs


def quantiles_from_values(values: np.ndarray, probs: Sequence[float]) -> list[float]:
    s = np.sort(values)
    return [order_statistic_quantile(s, p) for p in probs]


def limit_quantiles(
    plan: SimulationPlan,
    reps: int,
    probs: Sequence[float],
    seed: int,
    workers: int | None = None,
    config: dict | None = None,
) -> list[QuantileTable]:
    """Monte-Carlo quantiles, one table per weight exponent in the plan."""
    if reps < 100:
        raise ConfigError("at least 100 replicates are required")
    probs = _check_probs(probs)
    values = simulate(plan, reps, seed, workers)
    tables = []
    for col, beta in enumerate(plan.betas):
        echo = dict(config or {})
        echo.update(
            beta=beta,
            reps=reps,
            seed=seed,
            grid=plan.m,
            theta_grid=plan.grid.cells,
            mode=plan.measure.provenance,
        )
        tables.append(QuantileTable(probs, quantiles_from_values(values[:, col], probs), reps, echo))
    return tables


def data_quantile(
    ranks: RankData,
    k: int,
    beta: float,
    alpha: float,
    reps: int,
    seed: int,
    quad: QuadSpec = QuadSpec(),
    theta_cells: int = 200,
    workers: int | None = None,
    boundary: str = "renormalize",
) -> float:
    """Simulated ``1 - alpha`` quantile with the measure estimated from data."""
    plan = estimated_plan(exponent_measure(ranks, k), [beta], quad, theta_cells, boundary)
    (table,) = limit_quantiles(plan, reps, [1.0 - alpha], seed, workers)
    return table.quantiles[0]


__all__ = [
    "ANALYTIC",
    "ESTIMATED",
    "ControlMeasure",
    "GaussianFieldDraw",
    "Mesh",
    "QuantileTable",
    "SimulationPlan",
    "SmoothedFunctionals",
    "AnalyticFunctionals",
    "TABLE1_PROBS",
    "ThetaCache",
    "ThetaGrid",
    "a_process",
    "analytic_plan",
    "b_process",
    "data_quantile",
    "density_tail_integral",
    "discretize_analytic",
    "draw_field",
    "estimated_plan",
    "field_box",
    "field_cset",
    "field_marg1",
    "field_marg2",
    "limit_quantiles",
    "limit_replicate",
    "log_integral",
    "simulate",
    "smoothed_density",
    "smoothed_partials",
    "theta_cache",
    "z_process",
]

"""The weighted discrepancy statistic ``k * L_n`` and its scan over ``k``."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .estimators import (
    SpectralCdf,
    box_count_table,
    box_index,
    exponent_measure,
    spectral_cdf,
    stdf_spectral_grid,
)
from .sample import BivariateSample, ConfigError, RankData, check_k, compute_ranks


@dataclass(frozen=True)
class QuadSpec:
    """Composite midpoint rule on ``(0, 1]^2`` with ``m`` cells per axis.

    With ``align=True`` the cell count is raised to the smallest multiple of
    ``k`` that is at least ``m``, so no cell straddles a jump of the rank
    estimator. For ``k > m`` this means ``k`` cells; an unaligned grid there
    puts nodes on the jumps themselves and the error can reach tens of percent.
    """

    m: int = 200
    align: bool = True
    refinement_factor: int = 2

    def __post_init__(self):
        if self.m < 20:
            raise ConfigError("quadrature needs at least 20 cells per axis")

    def cells(self, k: int | None = None) -> int:
        if self.align and k is not None:
            return -(-self.m // k) * k
        return self.m

    def nodes(self, k: int | None = None) -> np.ndarray:
        m = self.cells(k)
        return (np.arange(1, m + 1) - 0.5) / m

    def refined(self) -> "QuadSpec":
        return QuadSpec(self.m * self.refinement_factor, self.align, self.refinement_factor)


def weight_grid(nodes: np.ndarray, beta: float) -> np.ndarray:
    """``(x v y)^(-beta) / m^2`` on the node grid."""
    mx = np.maximum(nodes[:, None], nodes[None, :])
    return np.exp(-beta * np.log(mx)) / nodes.size**2


def _check_beta(beta: float) -> None:
    if not 0.0 <= beta < 3.0:
        raise ConfigError(f"beta must lie in [0, 3), got {beta}")


def rank_stdf_grid(ranks: RankData, k: int, nodes: np.ndarray) -> np.ndarray:
    """Rank estimator on the tensor grid ``nodes x nodes`` (nodes in (0, 1])."""
    measure = exponent_measure(ranks, k)
    idx = box_index(k, nodes)
    top = int(idx.max())
    table = box_count_table(measure, top, top)
    a = np.minimum(idx, ranks.n)
    both = table[idx[:, None], idx[None, :]]
    return (a[:, None] + a[None, :] - both) / k


def spectral_stdf_grid(phi: SpectralCdf, nodes: np.ndarray) -> np.ndarray:
    return stdf_spectral_grid(phi, nodes[:, None], nodes[None, :])


def discrepancy_grid(ranks: RankData, k: int, nodes: np.ndarray) -> np.ndarray:
    phi = spectral_cdf(ranks, k)
    return spectral_stdf_grid(phi, nodes) - rank_stdf_grid(ranks, k, nodes)


def test_statistic(
    ranks: RankData,
    k: int,
    beta: float = 2.0,
    quad: QuadSpec = QuadSpec(),
    evaluators: tuple[Callable, Callable] | None = None,
) -> float:
    """``k`` times the weighted squared distance between the two estimators.

    ``evaluators`` replaces the two grid evaluators ``(spectral, rank)``; each
    is called as ``f(ranks, k, nodes)`` and must return an ``m x m`` array.
    """
    _check_beta(beta)
    check_k(k, ranks.n)
    nodes = quad.nodes(k)
    if evaluators is None:
        diff = discrepancy_grid(ranks, k, nodes)
    else:
        first, second = evaluators
        diff = first(ranks, k, nodes) - second(ranks, k, nodes)
    integrand = (diff * diff * weight_grid(nodes, beta)).ravel()
    return float(k * np.sum(integrand))


test_statistic.__test__ = False


@dataclass
class ScanCurve:
    k: list[int] = field(default_factory=list)
    kln: list[float] = field(default_factory=list)
    q95: list[float | None] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.k)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,kLn,q95\n")
        for k, s, q in zip(self.k, self.kln, self.q95):
            buf.write(f"{k},{s!r},{'' if q is None else repr(q)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScanCurve":
        lines = text.strip().splitlines()
        if lines[0].strip() != "k,kLn,q95":
            raise ValueError("unexpected header")
        curve = cls()
        for line in lines[1:]:
            k, s, q = line.split(",")
            curve.k.append(int(k))
            curve.kln.append(float(s))
            curve.q95.append(float(q) if q else None)
        return curve


def k_scan(
    sample: BivariateSample | RankData,
    k_values: Sequence[int],
    beta: float = 2.0,
    quad: QuadSpec = QuadSpec(),
    quantile_hook: Callable[[RankData, int], float] | None = None,
) -> ScanCurve:
    """Statistic (and optionally a reference quantile) for each ``k``."""
    ranks = sample if isinstance(sample, RankData) else compute_ranks(sample)
    ks = [int(k) for k in k_values]
    if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("k values must be nonempty and strictly increasing")
    curve = ScanCurve()
    for k in ks:
        curve.k.append(k)
        curve.kln.append(test_statistic(ranks, k, beta, quad))
        curve.q95.append(None if quantile_hook is None else float(quantile_hook(ranks, k)))
    return curve

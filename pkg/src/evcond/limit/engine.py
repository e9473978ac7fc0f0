"""Batched Monte-Carlo simulation of the limiting weighted statistic.

Every replicate draws one field, evaluates ``A + B`` on the quadrature grid and
integrates ``(A + B)^2 (x v y)^-beta``. All deterministic structure (node bins,
smoothed functionals, angular weights) is precomputed once in a
:class:`SimulationPlan`; replicates only cost a few passes over arrays of size
``m^2`` and the atom count.

Replicate ``r`` always draws from the counter-based stream ``(seed, r)`` and is
computed row-wise, so its value does not depend on batching or worker count.
"""

from __future__ import annotations

import concurrent.futures as cf
import math
import multiprocessing
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import rng as streams
from .field import ControlMeasure
from .processes import ThetaGrid

CHUNK = 16
THREADS_ENV = "EVCOND_THREADS"


@dataclass
class SimulationPlan:
    measure: ControlMeasure
    nodes: np.ndarray
    betas: tuple[float, ...]
    grid: ThetaGrid
    # field queries on the node grid
    box_atoms: np.ndarray
    box_flat: np.ndarray
    m1_atoms: np.ndarray
    m1_bin: np.ndarray
    m2_atoms: np.ndarray
    m2_bin: np.ndarray
    one1_atoms: np.ndarray
    one2_atoms: np.ndarray
    # W(C_theta) on the theta grid
    cs_atoms: np.ndarray
    cs_bin: np.ndarray
    # log-integrals of the marginal fields
    u_order: np.ndarray
    log_u: np.ndarray
    j1: np.ndarray
    log_c1: np.ndarray
    v_order: np.ndarray
    log_v: np.ndarray
    j2: np.ndarray
    log_c2: np.ndarray
    # Z coefficients
    z_lo: np.ndarray  # (3, half): I1(c_j), I2(1), W2(1)
    z_hi: np.ndarray  # (4, half): I1(1), I2(tau_j), W2(1), W1(1)
    z_top: np.ndarray  # (2,): W2(1), W1(1)
    theta_w: np.ndarray
    # node geometry for A
    node_x: np.ndarray
    node_cell: np.ndarray
    node_part: np.ndarray
    node_coef: np.ndarray
    # B
    r1: np.ndarray
    r2: np.ndarray
    node_i: np.ndarray
    node_j: np.ndarray
    weights: np.ndarray  # (len(betas), m^2)
    sqrt_mass: np.ndarray

    @property
    def m(self) -> int:
        return int(self.nodes.size)


def _log_sorted(coord: np.ndarray):
    finite = np.flatnonzero(np.isfinite(coord))
    order = finite[np.argsort(coord[finite], kind="stable")]
    return order, np.log(coord[order])


def build_plan(
    measure: ControlMeasure,
    fun,
    nodes: np.ndarray,
    betas: Sequence[float],
    grid: ThetaGrid = ThetaGrid(),
) -> SimulationPlan:
    nodes = np.asarray(nodes, float)
    m = nodes.size
    bx = measure.node_bins(0, nodes)
    by = measure.node_bins(1, nodes)
    inside = np.flatnonzero((bx < m) & (by < m))
    m1 = np.flatnonzero(bx < m)
    m2 = np.flatnonzero(by < m)

    strip = np.flatnonzero(measure.in_strips())
    mids = grid.mids
    cs_bin = np.searchsorted(mids, measure.angle[strip], side="left")

    half = grid.cells // 2
    tau = np.tan(mids)
    tau_lo, tau_hi = tau[:half], tau[half:]
    u_order, log_u = _log_sorted(measure.u)
    v_order, log_v = _log_sorted(measure.v)
    c1 = np.concatenate([1.0 / tau_lo, [1.0]])
    c2 = np.concatenate([tau_hi, [1.0]])
    j1 = np.searchsorted(measure.u[u_order], c1, side="left")
    j2 = np.searchsorted(measure.v[v_order], c2, side="left")

    lam_lo = np.asarray(fun.density_1y(tau_lo), float)
    lam_hi = np.asarray(fun.density_x1(1.0 / tau_hi), float)
    tx1 = float(fun.tail_x(1.0))
    ty1 = float(fun.tail_y(1.0))
    z_lo = np.stack([lam_lo * tau_lo, -lam_lo, -np.asarray(fun.tail_x(1.0 / tau_lo), float)])
    z_hi = np.stack(
        [
            lam_hi,
            -lam_hi / tau_hi,
            np.full(tau_hi.size, -tx1),
            -(ty1 - np.asarray(fun.tail_y(tau_hi), float)),
        ]
    )

    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    upper = Y >= X
    cell = grid.cell_of(np.arctan2(Y, X))
    cell = np.where(upper, np.maximum(cell, half), np.minimum(cell, half - 1))
    part = np.where(
        upper,
        grid.lower_cot(np.maximum(cell, half)) - X / Y,
        grid.upper_tan(np.minimum(cell, half - 1)) - Y / X,
    )
    coef = np.where(upper, Y, -X)

    fx = np.asarray(fun.r1(X, Y), float)
    fy = np.asarray(fun.r2(X, Y), float)
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    mx = np.maximum(X, Y)
    weights = np.stack([np.exp(-b * np.log(mx)) / m**2 for b in betas])

    return SimulationPlan(
        measure=measure,
        nodes=nodes,
        betas=tuple(float(b) for b in betas),
        grid=grid,
        box_atoms=inside,
        box_flat=bx[inside] * m + by[inside],
        m1_atoms=m1,
        m1_bin=bx[m1],
        m2_atoms=m2,
        m2_bin=by[m2],
        one1_atoms=np.flatnonzero(measure.in_marg1(1.0)),
        one2_atoms=np.flatnonzero(measure.in_marg2(1.0)),
        cs_atoms=strip,
        cs_bin=cs_bin,
        u_order=u_order,
        log_u=log_u,
        j1=j1,
        log_c1=np.log(c1),
        v_order=v_order,
        log_v=log_v,
        j2=j2,
        log_c2=np.log(c2),
        z_lo=z_lo,
        z_hi=z_hi,
        z_top=np.array([-tx1, -ty1]),
        theta_w=grid.weights(),
        node_x=X,
        node_cell=cell,
        node_part=part,
        node_coef=coef,
        r1=fx,
        r2=fy,
        node_i=ii.ravel(),
        node_j=jj.ravel(),
        weights=weights,
        sqrt_mass=np.sqrt(measure.mass),
    )


def _binned_cumsum(omega: np.ndarray, atoms: np.ndarray, bins: np.ndarray, size: int):
    b = omega.shape[0]
    idx = (np.arange(b)[:, None] * size + bins[None, :]).ravel()
    out = np.bincount(idx, weights=omega[:, atoms].ravel(), minlength=b * size)
    return out.reshape(b, size)


def _log_integrals(omega, order, log_coord, j, log_c):
    w = omega[:, order]
    s = np.zeros((w.shape[0], w.shape[1] + 1))
    s[:, 1:] = np.cumsum(w, axis=1)
    lw = np.zeros_like(s)
    lw[:, 1:] = np.cumsum(w * log_coord, axis=1)
    return log_c * s[:, j] - lw[:, j]


def processes_on_grid(plan: SimulationPlan, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``A`` and ``B`` on the flattened node grid, one row per draw."""
    xi = np.atleast_2d(xi)
    b = xi.shape[0]
    m = plan.m
    T = plan.grid.cells
    half = T // 2
    omega = xi * plan.sqrt_mass

    wr = _binned_cumsum(omega, plan.box_atoms, plan.box_flat, m * m).reshape(b, m, m)
    wr = wr.cumsum(axis=1).cumsum(axis=2).reshape(b, m * m)
    w1x = _binned_cumsum(omega, plan.m1_atoms, plan.m1_bin, m).cumsum(axis=1)
    w2y = _binned_cumsum(omega, plan.m2_atoms, plan.m2_bin, m).cumsum(axis=1)
    B = wr - plan.r1 * w1x[:, plan.node_i] - plan.r2 * w2y[:, plan.node_j]

    keep = plan.cs_bin < T
    wc = _binned_cumsum(omega, plan.cs_atoms[keep], plan.cs_bin[keep], T).cumsum(axis=1)
    wc_top = omega[:, plan.cs_atoms].sum(axis=1)
    w1_one = omega[:, plan.one1_atoms].sum(axis=1)
    w2_one = omega[:, plan.one2_atoms].sum(axis=1)

    i1 = _log_integrals(omega, plan.u_order, plan.log_u, plan.j1, plan.log_c1)
    i2 = _log_integrals(omega, plan.v_order, plan.log_v, plan.j2, plan.log_c2)
    z = np.empty((b, T))
    zl, zh = plan.z_lo, plan.z_hi
    z[:, :half] = zl[0] * i1[:, :half] + zl[1] * i2[:, -1:] + zl[2] * w2_one[:, None]
    z[:, half:] = (
        zh[0] * i1[:, -1:]
        + zh[1] * i2[:, :-1]
        + zh[2] * w2_one[:, None]
        + zh[3] * w1_one[:, None]
    )
    top = wc_top + plan.z_top[0] * w2_one + plan.z_top[1] * w1_one

    f = wc + z
    g = f * plan.theta_w
    prefix = np.zeros((b, T))
    # cells above pi/4: sum over [half, j); below: sum over (j, half)
    prefix[:, half + 1 :] = np.cumsum(g[:, half:-1], axis=1)
    lower = g[:, 1:half][:, ::-1]
    prefix[:, : half - 1] = np.cumsum(lower, axis=1)[:, ::-1]
    cell = plan.node_cell
    A = plan.node_x * top[:, None] + plan.node_coef * (
        prefix[:, cell] + f[:, cell] * plan.node_part
    )
    return A, B


def replicate_values(plan: SimulationPlan, xi: np.ndarray) -> np.ndarray:
    """Weighted integrals, shape ``(draws, len(betas))``."""
    A, B = processes_on_grid(plan, xi)
    sq = (A + B) ** 2
    return np.stack([np.sum(sq * w, axis=1) for w in plan.weights], axis=1)


def draw_normals(plan: SimulationPlan, seed: int, reps: range) -> np.ndarray:
    n = plan.measure.size
    out = np.empty((len(reps), n))
    for row, r in enumerate(reps):
        out[row] = streams.stream(seed, streams.LIMIT, r).standard_normal(n)
    return out


def simulate_range(plan: SimulationPlan, seed: int, start: int, stop: int) -> np.ndarray:
    values = []
    for lo in range(start, stop, CHUNK):
        reps = range(lo, min(lo + CHUNK, stop))
        values.append(replicate_values(plan, draw_normals(plan, seed, reps)))
    return np.concatenate(values) if values else np.empty((0, len(plan.betas)))


_WORKER_PLAN: SimulationPlan | None = None


def _init_worker(plan):
    global _WORKER_PLAN
    _WORKER_PLAN = plan


def _work(args):
    seed, start, stop = args
    return start, simulate_range(_WORKER_PLAN, seed, start, stop)


def worker_count(requested: int | None = None) -> int:
    """Requested workers (CPU count by default), capped by ``$EVCOND_THREADS``."""
    env = os.environ.get(THREADS_ENV)
    cap = int(env) if env else None
    if requested is None:
        requested = cap if cap is not None else (os.cpu_count() or 1)
    elif cap is not None:
        requested = min(int(requested), cap)
    return max(1, int(requested))


def simulate(plan: SimulationPlan, reps: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Values of replicates ``0 .. reps-1``, shape ``(reps, len(betas))``."""
    workers = worker_count(workers)
    if workers == 1 or reps <= CHUNK:
        return simulate_range(plan, seed, 0, reps)
    block = max(CHUNK, math.ceil(reps / (4 * workers) / CHUNK) * CHUNK)
    jobs = [(seed, lo, min(lo + block, reps)) for lo in range(0, reps, block)]
    out = np.empty((reps, len(plan.betas)))
    ctx = multiprocessing.get_context("fork")
    with cf.ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init_worker, initargs=(plan,)) as pool:
        for start, vals in pool.map(_work, jobs):
            out[start : start + len(vals)] = vals
    return out

"""Rank-based estimators of the spectral measure, the stable tail dependence
function and the exponent measure.

Everything here works on the tail coordinates ``p = n + 1 - rx`` and
``q = n + 1 - ry`` (1 is the largest observation). Counts are exact integers;
values are returned in units of ``1/k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sample import RankData, check_k


@dataclass(frozen=True)
class SpectralCdf:
    """Step-function estimate of the spectral measure.

    One atom of mass ``1/k`` sits at angle ``arctan(q/p)`` for every
    observation with ``min(p, q) <= k``. Atoms are sorted by angle.
    """

    p: np.ndarray
    q: np.ndarray
    angles: np.ndarray
    k: int
    n: int

    @property
    def natoms(self) -> int:
        return int(self.angles.size)

    def __call__(self, theta):
        """Evaluate the c.d.f.; right-continuous, ``theta`` scalar or array."""
        counts = np.searchsorted(self.angles, theta, side="right")
        if np.ndim(counts) == 0:
            return int(counts) / self.k
        return counts / self.k

    @property
    def total(self) -> float:
        return self.natoms / self.k

    def _prefix(self):
        # tan(theta_i) = q/p; sorted angles give sorted slopes
        slopes = self.q / self.p
        lo_part = np.minimum(1.0, slopes)  # 1 ^ tan
        hi_part = np.minimum(1.0, self.p / self.q)  # 1 ^ cot
        # suffix sums of lo_part, prefix sums of hi_part
        suf = np.concatenate([np.cumsum(lo_part[::-1])[::-1], [0.0]])
        pre = np.concatenate([[0.0], np.cumsum(hi_part)])
        return slopes, suf, pre


def _tail_coords(ranks: RankData) -> tuple[np.ndarray, np.ndarray]:
    n = ranks.n
    return n + 1 - np.asarray(ranks.rx), n + 1 - np.asarray(ranks.ry)


def spectral_cdf(ranks: RankData, k: int) -> SpectralCdf:
    check_k(k, ranks.n)
    p, q = _tail_coords(ranks)
    sel = np.minimum(p, q) <= k
    p, q = p[sel], q[sel]
    slopes = q / p  # correctly rounded, hence monotone in the exact ratio
    order = np.lexsort((p, slopes))
    p, q = p[order], q[order]
    angles = np.maximum.accumulate(np.arctan(slopes[order]))
    return SpectralCdf(p, q, angles, int(k), ranks.n)


def stdf_spectral(phi: SpectralCdf, x: float, y: float) -> float:
    """Spectral estimate of the tail dependence function at ``(x, y)``.

    The integral against the step function reduces to a sum over atoms of
    ``max(x * min(1, tan t), y * min(1, cot t))``; it is accumulated with
    ``math.fsum`` so the result is positively homogeneous to a few ulp.
    """
    if x < 0 or y < 0:
        raise ValueError("x and y must be nonnegative")
    tan_part = np.minimum(1.0, phi.q / phi.p)
    cot_part = np.minimum(1.0, phi.p / phi.q)
    terms = np.maximum(x * tan_part, y * cot_part)
    return math.fsum(terms.tolist()) / phi.k


def stdf_spectral_grid(phi: SpectralCdf, x, y) -> np.ndarray:
    """Vectorised spectral estimate for ``x > 0`` (broadcasting ``x``, ``y``).

    Uses ``l(x, y) = x * g(y / x)`` where ``g`` is convex piecewise linear with
    kinks at the atom slopes.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    slopes, suf, pre = phi._prefix()
    t = y / x
    j = np.searchsorted(slopes, t, side="left")  # atoms with slope < t
    g = suf[j] + t * pre[j]
    return x * g / phi.k


def stdf_rank(ranks: RankData, k: int, x: float, y: float) -> float:
    """Empirical tail dependence function: share of points beyond either
    marginal threshold, in units of ``1/k``."""
    check_k(k, ranks.n)
    if x <= 0 or y <= 0:
        raise ValueError("x and y must be positive")
    p, q = _tail_coords(ranks)
    a = box_index(k, x)
    b = box_index(k, y)
    return int(np.count_nonzero((p <= a) | (q <= b))) / k


@dataclass(frozen=True)
class AtomMeasure:
    """Empirical exponent measure: atoms at ``(p/k, q/k)`` of mass ``1/k``."""

    p: np.ndarray
    q: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return int(self.p.size)

    @property
    def mass(self) -> float:
        return 1.0 / self.k

    @property
    def u(self) -> np.ndarray:
        return self.p / self.k

    @property
    def v(self) -> np.ndarray:
        return self.q / self.k

    def total_mass(self) -> float:
        return self.n / self.k

    def dumps(self) -> str:
        rows = [f"# k={self.k} mass={1.0 / self.k:.17g}"]
        rows.extend(f"{a} {b}" for a, b in zip(self.p, self.q))
        return "\n".join(rows) + "\n"


def exponent_measure(ranks: RankData, k: int) -> AtomMeasure:
    check_k(k, ranks.n)
    p, q = _tail_coords(ranks)
    return AtomMeasure(p.astype(np.int64), q.astype(np.int64), int(k))


_SNAP = 8 * np.finfo(float).eps


def box_index(k: int, x) -> np.ndarray | int:
    """Largest tail coordinate counted in ``[0, x]``: ``ceil(k x) - 1``.

    A product ``k x`` within a few ulps of an integer is taken to be that
    integer, so that decimal inputs such as ``x = 0.56`` with ``k = 25`` land
    on the grid point they denote rather than one rounding error above it.
    """
    t = k * np.asarray(x, float)
    r = np.rint(t)
    t = np.where(np.abs(t - r) <= _SNAP * np.maximum(1.0, np.abs(t)), r, t)
    out = np.ceil(t).astype(np.int64) - 1
    return int(out) if out.ndim == 0 else out


def box_mass(measure: AtomMeasure, x: float, y: float) -> float:
    """Mass of ``[0, x] x [0, y]`` with the strict rank-count convention
    (an atom counts iff ``p < kx`` and ``q < ky``)."""
    if x <= 0 or y <= 0:
        raise ValueError("x and y must be positive")
    a = box_index(measure.k, x)
    b = box_index(measure.k, y)
    return int(np.count_nonzero((measure.p <= a) & (measure.q <= b))) / measure.k


def box_count_table(measure: AtomMeasure, amax: int, bmax: int) -> np.ndarray:
    """``H[a, b] = #{p <= a, q <= b}`` for ``0 <= a <= amax``, ``0 <= b <= bmax``."""
    keep = (measure.p <= amax) & (measure.q <= bmax)
    hist = np.zeros((amax + 1, bmax + 1), dtype=np.int64)
    np.add.at(hist, (measure.p[keep], measure.q[keep]), 1)
    return hist.cumsum(axis=0).cumsum(axis=1)


def strip_mass(
    measure: AtomMeasure, x_lo: float, x_hi: float, y_lo: float, y_hi: float
) -> float:
    """Mass of the closed rectangle ``[x_lo, x_hi] x [y_lo, y_hi]``.

    Negative lower bounds are clamped to zero.
    """
    if x_lo > x_hi or y_lo > y_hi:
        raise ValueError("inverted rectangle bounds")
    u, v = measure.u, measure.v
    inside = (u >= max(x_lo, 0.0)) & (u <= x_hi) & (v >= max(y_lo, 0.0)) & (v <= y_hi)
    return int(np.count_nonzero(inside)) / measure.k


def count_rects(u, v, x_lo, x_hi, y_lo, y_hi) -> np.ndarray:
    """Number of points ``(u, v)`` in each closed rectangle.

    Bounds broadcast against each other. Queries sharing an x-range are
    answered together from one sorted slice, so a grid of queries with few
    distinct x-ranges is cheap.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    xl, xh, yl, yh = np.broadcast_arrays(
        np.maximum(np.asarray(x_lo, float), 0.0),
        np.asarray(x_hi, float),
        np.maximum(np.asarray(y_lo, float), 0.0),
        np.asarray(y_hi, float),
    )
    shape = xl.shape
    xl, xh, yl, yh = (a.ravel() for a in (xl, xh, yl, yh))
    order = np.argsort(u, kind="stable")
    us, vs = u[order], v[order]
    start = np.searchsorted(us, xl, side="left")
    stop = np.searchsorted(us, xh, side="right")
    out = np.zeros(xl.size, dtype=np.int64)
    keys = np.stack([start, stop], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    groups = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[groups], np.arange(len(uniq) + 1))
    for g, (s0, s1) in enumerate(uniq):
        idx = groups[bounds[g] : bounds[g + 1]]
        if s1 <= s0:
            continue
        col = np.sort(vs[s0:s1])
        hi = np.searchsorted(col, yh[idx], side="right")
        lo = np.searchsorted(col, yl[idx], side="left")
        out[idx] = np.maximum(hi - lo, 0)
    return out.reshape(shape)

"""Reference distributions: samplers and the closed-form Cauchy tail measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sample import BivariateSample

# geometric index cap; the truncated tail has mass 4**-53 < 1e-30
MAX_INDEX = 52


def sample_cauchy(n: int, rng: np.random.Generator) -> BivariateSample:
    """Bivariate Cauchy folded onto the first quadrant.

    ``(|N1/N3|, |N2/N3|)`` for independent standard normals has density
    ``4 * (1/2pi) (1 + x^2 + y^2)^(-3/2)`` on ``x, y > 0``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    z = rng.standard_normal((n, 3))
    return BivariateSample(np.abs(z[:, 0] / z[:, 2]), np.abs(z[:, 1] / z[:, 2]))


def positive_stable(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Positive stable variates with Laplace transform ``exp(-t**alpha)``.

    Kanter's form of the Chambers-Mallows-Stuck construction.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    if alpha == 1.0:
        return np.ones(size)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    return a * b


def gumbel_copula_pairs(
    n: int, theta: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draws ``(U, V)`` from the Gumbel copula via positive-stable mixing."""
    if theta < 1:
        raise ValueError("theta must be >= 1")
    s = positive_stable(1.0 / theta, n, rng)
    e = rng.standard_exponential((n, 2))
    uv = np.exp(-((e / s[:, None]) ** (1.0 / theta)))
    return uv[:, 0], uv[:, 1]


def sample_gumbel(n: int, theta: float, rng: np.random.Generator) -> BivariateSample:
    """Pairs ``(U, 1 - V)`` with ``(U, V)`` Gumbel-copula distributed."""
    if n < 1:
        raise ValueError("n must be positive")
    u, v = gumbel_copula_pairs(n, theta, rng)
    return BivariateSample(u, 1.0 - v)


def gumbel_copula_cdf(u: float, v: float, theta: float) -> float:
    return math.exp(-(((-math.log(u)) ** theta + (-math.log(v)) ** theta) ** (1.0 / theta)))


def _dyadic_index(size, rng: np.random.Generator) -> np.ndarray:
    # P(j) = (3/4) 4^-j, j = 0, 1, ...
    return np.minimum(rng.geometric(0.75, size) - 1, MAX_INDEX)


def sample_alternative(n: int, rng: np.random.Generator) -> BivariateSample:
    """Copula outside the bivariate domain of attraction.

    Mass 2/3 is spread with density 3/2 over the rectangles
    ``[2^-(2m+1), 2^-2m] x [2^-(2r+1), 2^-2r]``; mass 1/3 sits uniformly on the
    diagonal segments ``s in [2^-(2m+2), 2^-(2m+1)]``, segment ``m`` carrying
    ``2^-(2m+2)``. Both index laws reduce to ``P(j) = (3/4) 4^-j``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    on_rect = rng.uniform(size=n) < 2.0 / 3.0
    m = _dyadic_index(n, rng)
    r = _dyadic_index(n, rng)
    w1 = rng.uniform(size=n)
    w2 = rng.uniform(size=n)
    lo_m = np.ldexp(1.0, -(2 * m + 1))
    lo_r = np.ldexp(1.0, -(2 * r + 1))
    x_rect = lo_m * (1.0 + w1)
    y_rect = lo_r * (1.0 + w2)
    seg_lo = np.ldexp(1.0, -(2 * m + 2))
    s = seg_lo * (1.0 + w1)
    x = np.where(on_rect, x_rect, s)
    y = np.where(on_rect, y_rect, s)
    return BivariateSample(x, y)


@dataclass(frozen=True)
class AnalyticMeasure:
    """Closed-form exponent measure ``Lambda`` with density and partials.

    Subclasses supply ``R`` (mass of ``[0, x] x [0, y]``), ``density``,
    ``r1``/``r2`` and the tail integrals of the density along ``y = 1`` and
    ``x = 1``. ``R`` must accept ``inf`` in either argument.
    """

    name: str = "analytic"

    def R(self, x, y):
        raise NotImplementedError

    def stdf(self, x, y):
        return np.asarray(x) + np.asarray(y) - self.R(x, y)

    def density(self, x, y):
        raise NotImplementedError

    def r1(self, x, y):
        raise NotImplementedError

    def r2(self, x, y):
        raise NotImplementedError

    def tail_x(self, c):
        """``int_c^inf density(x, 1) dx``."""
        raise NotImplementedError

    def tail_y(self, c):
        """``int_c^inf density(1, y) dy``."""
        raise NotImplementedError


@dataclass(frozen=True)
class CauchyMeasure(AnalyticMeasure):
    """Tail measure of the first-quadrant bivariate Cauchy law:
    ``R(x, y) = x + y - sqrt(x^2 + y^2)``."""

    name: str = "cauchy"

    def R(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        with np.errstate(invalid="ignore"):
            # 2xy / (x + y + |(x, y)|) avoids cancellation for lopsided cells
            out = 2.0 * x * y / (x + y + np.hypot(x, y))
        out = np.where(np.isinf(x), y, out)
        out = np.where(np.isinf(y), x, out)
        out = np.where((x == 0) | (y == 0), 0.0, out)
        return out if out.ndim else float(out)

    def stdf(self, x, y):
        r = np.hypot(x, y)
        return r if np.ndim(r) else float(r)

    def density(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if np.any((x == 0) & (y == 0)):
            raise ValueError("density is undefined at the origin")
        out = x * y / np.hypot(x, y) ** 3
        return out if out.ndim else float(out)

    def r1(self, x, y):
        out = 1.0 - np.asarray(x, float) / np.hypot(x, y)
        return out if out.ndim else float(out)

    def r2(self, x, y):
        out = 1.0 - np.asarray(y, float) / np.hypot(x, y)
        return out if out.ndim else float(out)

    def tail_x(self, c):
        c = np.asarray(c, float)
        with np.errstate(divide="ignore"):
            out = np.where(np.isinf(c), 0.0, 1.0 / np.sqrt(c * c + 1.0))
        return out if out.ndim else float(out)

    tail_y = tail_x


def cauchy_analytic() -> CauchyMeasure:
    return CauchyMeasure()


SAMPLERS = {
    "cauchy": lambda n, rng, **kw: sample_cauchy(n, rng),
    "gumbel": lambda n, rng, theta=10.0, **kw: sample_gumbel(n, theta, rng),
    "alternative": lambda n, rng, **kw: sample_alternative(n, rng),
}

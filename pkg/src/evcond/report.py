"""Test verdicts, reference tables and static plots."""

from __future__ import annotations

import dataclasses
import io
import json
import time
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import rng as streams
from .limit import (
    TABLE1_PROBS,
    Mesh,
    analytic_plan,
    data_quantile,
    limit_quantiles,
    order_statistic_quantile,
)
from .models import cauchy_analytic, sample_cauchy
from .sample import BivariateSample, ConfigError, TestConfig, check_k, compute_ranks
from .statistic import QuadSpec, ScanCurve, k_scan, test_statistic

SCHEMA_VERSION = 1


@dataclass
class TestReport:
    """Outcome of one test run.

    ``reject`` holds exactly when the statistic is not smaller than the
    simulated quantile. ``timing`` (seconds) is only filled on request so that
    default reports are reproducible byte for byte.
    """

    n: int
    k: int
    beta: float
    alpha: float
    kln: float
    quantile: float
    reject: bool
    reps: int
    seed: int
    quad_cells: int
    theta_cells: int
    ties: int = 0
    boundary: str = "renormalize"
    timing: float | None = None
    schema_version: int = SCHEMA_VERSION

    __test__ = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TestReport":
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        return cls(**d)

    def to_csv(self) -> str:
        d = self.to_dict()
        keys = sorted(d)
        values = ["" if d[k] is None else d[k] if isinstance(d[k], str) else repr(d[k]) for k in keys]
        return ",".join(keys) + "\n" + ",".join(values) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "TestReport":
        head, row = text.strip().splitlines()
        d: dict = {}
        for key, raw in zip(head.split(","), row.split(",")):
            if raw == "":
                d[key] = None
            elif key == "boundary":
                d[key] = raw
            elif key == "reject":
                d[key] = raw == "True"
            elif key in ("n", "k", "reps", "seed", "quad_cells", "theta_cells", "ties", "schema_version"):
                d[key] = int(raw)
            else:
                d[key] = float(raw)
        return cls(**d)


def run_test(
    sample: BivariateSample,
    config: TestConfig,
    workers: int | None = None,
    timed: bool = False,
    boundary: str = "renormalize",
) -> TestReport:
    """Statistic, simulated critical value and verdict for one sample."""
    config.validate(sample.n)
    start = time.perf_counter()
    ranks = compute_ranks(sample)
    quad = QuadSpec(config.quad_cells)
    kln = test_statistic(ranks, config.k, config.beta, quad)
    q = data_quantile(
        ranks,
        config.k,
        config.beta,
        config.alpha,
        config.reps,
        config.seed,
        quad,
        config.theta_cells,
        workers,
        boundary,
    )
    return TestReport(
        n=sample.n,
        k=config.k,
        beta=config.beta,
        alpha=config.alpha,
        kln=kln,
        quantile=q,
        reject=bool(kln >= q),
        reps=config.reps,
        seed=config.seed,
        quad_cells=config.quad_cells,
        theta_cells=config.theta_cells,
        ties=ranks.ties,
        boundary=boundary,
        timing=time.perf_counter() - start if timed else None,
    )


def default_k_list(n: int) -> list[int]:
    """``50, 100, ..., 500`` restricted to ``k < n/2``."""
    return [k for k in range(50, 501, 50) if 2 * k < n]


def scan(
    sample: BivariateSample,
    k_values: Sequence[int],
    config: TestConfig,
    with_quantiles: bool = True,
    workers: int | None = None,
    boundary: str = "renormalize",
) -> ScanCurve:
    for k in k_values:
        dataclasses.replace(config, k=k).validate(sample.n)
    quad = QuadSpec(config.quad_cells)
    hook = None
    if with_quantiles:

        def hook(ranks, k):
            return data_quantile(
                ranks, k, config.beta, config.alpha, config.reps, config.seed,
                quad, config.theta_cells, workers, boundary,
            )

    return k_scan(sample, k_values, config.beta, quad, hook)


def scan_svg(curve: ScanCurve, width: int = 640, height: int = 400) -> str:
    """Statistic (solid) and quantile (dashed) against ``k`` as static SVG."""
    pad = 50
    ks = np.asarray(curve.k, float)
    series = [np.asarray(curve.kln, float)]
    if all(q is not None for q in curve.q95):
        series.append(np.asarray(curve.q95, float))
    top = max(float(s.max()) for s in series) or 1.0
    kmin, kmax = float(ks.min()), float(ks.max())
    span = (kmax - kmin) or 1.0

    def px(k):
        return pad + (k - kmin) / span * (width - 2 * pad)

    def py(v):
        return height - pad - v / (1.05 * top) * (height - 2 * pad)

    out = io.StringIO()
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    out.write(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n')
    x0, y0 = pad, height - pad
    out.write(f'<line x1="{x0}" y1="{y0}" x2="{width - pad}" y2="{y0}" stroke="black"/>\n')
    out.write(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{pad}" stroke="black"/>\n')
    for k in curve.k:
        out.write(
            f'<text x="{px(k):.2f}" y="{y0 + 18}" font-size="11" text-anchor="middle">{k}</text>\n'
        )
    for frac in (0.0, 0.5, 1.0):
        v = frac * top
        out.write(
            f'<text x="{x0 - 6}" y="{py(v) + 4:.2f}" font-size="11" text-anchor="end">{v:.3g}</text>\n'
        )
    out.write(f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12" text-anchor="middle">k</text>\n')
    styles = [("statistic", "black", ""), ("quantile", "red", ' stroke-dasharray="6 4"')]
    for values, (name, colour, dash) in zip(series, styles):
        pts = " ".join(f"{px(k):.2f},{py(v):.2f}" for k, v in zip(ks, values))
        out.write(
            f'<polyline id="{escape(name)}" fill="none" stroke="{colour}" '
            f'stroke-width="1.5"{dash} points="{pts}"/>\n'
        )
    out.write("</svg>\n")
    return out.getvalue()


def table1(
    betas: Sequence[float] = (0.0, 1.0, 2.0),
    reps: int = 20_000,
    seed: int = 0,
    quad: QuadSpec = QuadSpec(),
    theta_cells: int = 200,
    mesh: Mesh = Mesh(),
    probs: Sequence[float] = TABLE1_PROBS,
    workers: int | None = None,
):
    """Quantiles of the limit for the Cauchy model, one table per ``beta``.

    All exponents share the same replicates.
    """
    plan = analytic_plan(cauchy_analytic(), betas, quad, theta_cells, mesh)
    return limit_quantiles(plan, reps, probs, seed, workers, {"model": "cauchy"})


def table1_csv(tables) -> str:
    probs = tables[0].probs
    buf = io.StringIO()
    buf.write("beta," + ",".join(repr(p) for p in probs) + "\n")
    for t in tables:
        buf.write(repr(t.config["beta"]) + "," + ",".join(repr(q) for q in t.quantiles) + "\n")
    return buf.getvalue()


@dataclass
class Table2Row:
    k: int
    alpha_hat: float
    q95: float
    q50: float


def table2(
    n: int,
    k_values: Sequence[int],
    beta: float,
    samples: int,
    seed: int,
    critical: float,
    quad: QuadSpec = QuadSpec(),
) -> tuple[list[Table2Row], np.ndarray]:
    """Type-I error and statistic quantiles over simulated Cauchy samples.

    Returns the rows and the ``(samples, len(k_values))`` statistic matrix.
    Sample ``i`` is drawn from its own stream, so rows for different ``k``
    share samples.
    """
    if samples < 1:
        raise ConfigError("the number of simulated samples must be positive")
    for k in k_values:
        check_k(k, n)
    stats = np.empty((samples, len(k_values)))
    for i in range(samples):
        ranks = compute_ranks(sample_cauchy(n, streams.stream(seed, streams.TABLE2, i)))
        for j, k in enumerate(k_values):
            stats[i, j] = test_statistic(ranks, k, beta, quad)
    rows = []
    for j, k in enumerate(k_values):
        s = np.sort(stats[:, j])
        rows.append(
            Table2Row(
                k=int(k),
                alpha_hat=float(np.mean(s >= critical)),
                q95=order_statistic_quantile(s, 0.95),
                q50=order_statistic_quantile(s, 0.50),
            )
        )
    return rows, stats


def table2_csv(rows: Sequence[Table2Row]) -> str:
    buf = io.StringIO()
    buf.write("k,alpha_hat,q95,q50\n")
    for r in rows:
        buf.write(f"{r.k},{r.alpha_hat!r},{r.q95!r},{r.q50!r}\n")
    return buf.getvalue()

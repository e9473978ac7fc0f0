"""Acceptance criteria 1-9, one verdict line each.

Samples come from seed 0 with one stream index per criterion, fixed before
any result was inspected.
"""

import math
import time

import numpy as np
import pytest

from evcond import (
    QuadSpec,
    box_mass,
    compute_ranks,
    exponent_measure,
    spectral_cdf,
    stdf_rank,
    stdf_spectral,
    test_statistic,
)
from evcond import rng as streams
from evcond.cli import main
from evcond.limit import (
    ControlMeasure,
    SmoothedFunctionals,
    ThetaGrid,
    a_process,
    data_quantile,
    draw_field,
    theta_cache,
    z_process,
)
from evcond.limit.processes import QUARTER
from evcond.models import cauchy_analytic, sample_alternative, sample_cauchy, sample_gumbel
from evcond.report import table1

from conftest import ACCEPTANCE_LINES, ranks_from

SEED = 0
REFERENCE_QUANTILES = {0.0: (0.038, 0.142), 1.0: (0.062, 0.222), 2.0: (0.144, 0.447)}


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def sample_for(criterion: int, sampler, n: int, **kw):
    return sampler(n, streams.stream(SEED, streams.SAMPLE, 100 + criterion), **kw)


@pytest.fixture(scope="module")
def table1_result():
    start = time.perf_counter()
    tables = table1([0.0, 1.0, 2.0], reps=20_000, seed=SEED, probs=[0.50, 0.95])
    return {t.config["beta"]: t for t in tables}, time.perf_counter() - start


@pytest.fixture(scope="module")
def datasets():
    c3 = compute_ranks(sample_for(3, sample_cauchy, 5000))
    c4 = compute_ranks(sample_for(4, sample_alternative, 2000))
    c5 = compute_ranks(sample_for(5, lambda n, rng: sample_gumbel(n, 10.0, rng), 2000))
    return {"c3": (c3, [500]), "c4": (c4, [150, 200, 250, 300, 350, 400]), "c5": (c5, [100])}


def test_criterion_1_table1(table1_result):
    tables, elapsed = table1_result
    parts, ok = [], True
    for beta, (med, q95) in REFERENCE_QUANTILES.items():
        t = tables[beta]
        got_med, got_95 = t.q(0.50), t.q(0.95)
        ok &= abs(got_med - med) <= 0.01 and abs(got_95 - q95) <= 0.04
        parts.append(f"b={beta:g}: Q50 {got_med:.3f} (target {med}) Q95 {got_95:.3f} (target {q95})")
    verdict(1, ok, "; ".join(parts) + f"; {elapsed:.0f}s")
    assert ok


def test_criterion_2_type_one_error(table1_result):
    tables, _ = table1_result
    critical = tables[2.0].q(0.95)
    stats = np.array(
        [
            test_statistic(compute_ranks(sample_cauchy(1000, streams.stream(SEED, streams.TABLE2, i))), 100, 2.0)
            for i in range(300)
        ]
    )
    rate = float(np.mean(stats >= critical))
    median = float(np.sort(stats)[149])
    ok = 0.015 <= rate <= 0.09 and 0.10 <= median <= 0.20
    verdict(2, ok, f"rejection rate {rate:.3f} in [0.015, 0.09], median {median:.3f} in [0.10, 0.20], critical {critical:.3f}")
    assert ok


def test_criterion_3_estimated_quantile(datasets):
    ranks, _ = datasets["c3"]
    q = data_quantile(ranks, 500, 2.0, 0.05, 10_000, SEED)
    ok = abs(q - 0.447) <= 0.10
    verdict(3, ok, f"Q_n(0.95) = {q:.3f}, target 0.447 +- 0.10")
    assert ok


def test_criterion_4_power(datasets):
    ranks, ks = datasets["c4"]
    rejected = []
    for k in ks:
        stat = test_statistic(ranks, k, 2.0)
        q = data_quantile(ranks, k, 2.0, 0.05, 2_000, SEED)
        rejected.append((k, stat, q, stat > q))
    hits = sum(r[3] for r in rejected)
    ok = hits >= len(ks) / 2
    detail = ", ".join(f"k={k}: {s:.2f}/{q:.2f}" for k, s, q, _ in rejected)
    verdict(4, ok, f"rejected at {hits}/{len(ks)} k (statistic/quantile: {detail})")
    assert ok


def test_criterion_5_null_side(datasets):
    ranks, _ = datasets["c5"]
    stat = test_statistic(ranks, 100, 2.0)
    ok = stat < 0.447
    verdict(5, ok, f"Gumbel kLn = {stat:.4f} < 0.447")
    assert ok


def test_criterion_6_identities():
    rng = np.random.default_rng(SEED)
    failures = []
    for case in range(200):
        n = int(rng.integers(4, 201))
        rx = rng.permutation(n) + 1
        mode = case % 3
        ry = rx.copy() if mode == 0 else (n + 1 - rx if mode == 1 else rng.permutation(n) + 1)
        ranks = ranks_from(rx, ry)
        for k in sorted({2, max(2, n // 4), n - 1}):
            m = exponent_measure(ranks, k)
            phi = spectral_cdf(ranks, k)
            p, q = n + 1 - rx, n + 1 - ry
            # (c) total spectral mass
            if not 1 <= phi(math.pi / 2) <= 2:
                failures.append(("c", n, k))
            for i in range(2, k + 1, max(1, k // 6)):
                for j in range(2, k + 1, max(1, k // 6)):
                    x, y = (i - 0.5) / k, (j - 0.5) / k
                    a, b = math.ceil(k * x) - 1, math.ceil(k * y) - 1
                    kl2 = round(k * stdf_rank(ranks, k, x, y))
                    kbox = round(k * box_mass(m, x, y))
                    # (a) counting identity
                    if kl2 + kbox != math.ceil(k * x) + math.ceil(k * y) - 2:
                        failures.append(("a", n, k, x, y))
                    # (d) brute-force counts
                    if kl2 != int(np.sum((p <= a) | (q <= b))) or kbox != int(np.sum((p <= a) & (q <= b))):
                        failures.append(("d", n, k, x, y))
                    # (b) homogeneity
                    for s in (0.25, 3.0):
                        base = stdf_spectral(phi, x, y)
                        if abs(stdf_spectral(phi, s * x, s * y) - s * base) > 8 * math.ulp(s * base):
                            failures.append(("b", n, k, x, y, s))
            sel = np.minimum(p, q) <= k
            for pp, qq, theta in zip(phi.p, phi.q, phi.angles):
                brute = int(np.sum(sel & (q * pp <= qq * p)))
                if round(k * phi(theta)) != brute:
                    failures.append(("d-phi", n, k))
    ok = not failures
    verdict(6, ok, f"200 rank configurations, {len(failures)} violations")
    assert ok, failures[:5]


def test_criterion_7_field_law(cauchy_500):
    measure = ControlMeasure.from_atoms(exponent_measure(cauchy_500, 50))
    panel = [measure.in_box(x, y) for x, y in ((0.5, 0.5), (1, 1), (2, 0.7), (0.3, 3), (1.5, 1.5))]
    panel += [measure.in_cset(t) for t in (0.2, 0.6, QUARTER, 1.1, math.pi / 2)]
    M = np.array(panel, float)
    draws = 50_000
    rng = np.random.default_rng(SEED)
    W = np.concatenate([(rng.standard_normal((5_000, measure.size)) * np.sqrt(measure.mass)) @ M.T for _ in range(draws // 5_000)])
    cov = W.T @ W / draws
    target = (M * measure.mass) @ M.T
    good = 0
    for i in range(10):
        j = (i + 1) % 10
        se_v = target[i, i] * math.sqrt(2 / draws)
        se_c = math.sqrt((target[i, i] * target[j, j] + target[i, j] ** 2) / draws)
        good += abs(cov[i, i] - target[i, i]) <= 3 * se_v and abs(cov[i, j] - target[i, j]) <= 3 * se_c
    ok = good >= 9
    verdict(7, ok, f"{good}/10 panel entries within 3 SE (variance and covariance with the next set)")
    assert ok


def test_criterion_8_self_consistency(datasets):
    worst = 0.0
    checked = 0
    corpus = list(datasets.values())
    corpus += [(compute_ranks(sample_cauchy(1000, streams.stream(SEED, streams.TABLE2, i))), [100]) for i in range(10)]
    for ranks, ks in corpus:
        for k in ks:
            a = test_statistic(ranks, k, 2.0, QuadSpec(200))
            b = test_statistic(ranks, k, 2.0, QuadSpec(400))
            worst = max(worst, abs(a - b) / max(b, 1e-12))
            checked += 1
    ok_a = worst <= 0.02

    ranks, _ = datasets["c3"]
    atoms = exponent_measure(ranks, 500)
    cm, fun = ControlMeasure.from_atoms(atoms), SmoothedFunctionals(atoms)
    seam = 0.0
    for r in range(3):
        d = draw_field(cm, streams.stream(SEED, streams.LIMIT, r))
        z_mid = z_process(d, fun, QUARTER)
        z_gap = abs(z_process(d, fun, QUARTER + 1e-9) - z_process(d, fun, QUARTER - 1e-9))
        cache = theta_cache(d, fun, ThetaGrid())
        scale = max(1.0, abs(z_mid), abs(cache.top))
        for x in (0.1, 0.5, 0.9):
            a_gap = abs(a_process(cache, x, x * (1 + 1e-9)) - a_process(cache, x, x * (1 - 1e-9)))
            seam = max(seam, a_gap / scale, z_gap / scale)
    ok_b = seam <= 1e-6

    cm_an = cauchy_analytic()
    h = 2e-4
    g = np.linspace(0.1, 2.0, 25)
    X, Y = np.meshgrid(g, g, indexing="ij")
    R = cm_an.R
    fd = [
        ((R(X + h, Y) - R(X - h, Y)) / (2 * h), cm_an.r1(X, Y)),
        ((R(X, Y + h) - R(X, Y - h)) / (2 * h), cm_an.r2(X, Y)),
        ((R(X + h, Y + h) - R(X + h, Y - h) - R(X - h, Y + h) + R(X - h, Y - h)) / (4 * h * h), cm_an.density(X, Y)),
    ]
    fd_err = max(float(np.max(np.abs(a - b))) for a, b in fd)
    ok_c = fd_err <= 1e-5
    ok = ok_a and ok_b and ok_c
    verdict(
        8,
        ok,
        f"(a) worst m=200/400 gap {worst:.4f} over {checked} cases; (b) seam gap {seam:.1e} x scale; (c) finite differences {fd_err:.1e}",
    )
    assert ok


def test_criterion_9_determinism(tmp_path, capsys):
    path = tmp_path / "sample.txt"
    main(["gen", "cauchy", "1000", "--seed", str(SEED), "-o", str(path)])
    capsys.readouterr()
    commands = {
        "run": ["run", str(path), "--k", "100", "--reps", "400"],
        "scan": ["scan", str(path), "--k-list", "50,100,150", "--reps", "200"],
        "table1": ["table1", "--reps", "200"],
    }
    same = {}
    for name, argv in commands.items():
        outs = []
        for w in ("1", "2", "8"):
            main(argv + ["--workers", w])
            outs.append(capsys.readouterr().out.encode())
        same[name] = outs[0] == outs[1] == outs[2] and len(outs[0]) > 0
    ok = all(same.values())
    verdict(9, ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()) + " across 1/2/8 workers")
    assert ok

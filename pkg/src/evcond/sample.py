"""Bivariate samples, marginal ranks and run configuration."""

from __future__ import annotations

import io
import math
import os
import re
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

MIN_SAMPLE_SIZE = 4

_SPLIT = re.compile(r"[,\s;]+")


class SampleFormatError(ValueError):
    """Raised when a sample file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """Raised for an invalid run configuration."""


@dataclass(frozen=True)
class BivariateSample:
    """Raw pairs ``(x_i, y_i)`` in file order."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "BivariateSample":
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class RankData:
    """Marginal ranks in ``1..n``; ties are broken by original index."""

    rx: np.ndarray
    ry: np.ndarray
    ties: int = 0

    @property
    def n(self) -> int:
        return int(self.rx.size)


@dataclass(frozen=True)
class TestConfig:
    k: int
    beta: float = 2.0
    alpha: float = 0.05
    reps: int = 10_000
    quad_cells: int = 200
    theta_cells: int = 200
    seed: int = 0

    __test__ = False  # keep pytest from collecting this class

    def validate(self, n: int | None = None) -> "TestConfig":
        if not 0.0 <= self.beta < 3.0:
            raise ConfigError(f"beta must lie in [0, 3), got {self.beta}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.reps < 100:
            raise ConfigError(f"reps must be at least 100, got {self.reps}")
        if self.quad_cells < 20:
            raise ConfigError("quad_cells must be at least 20")
        if self.theta_cells < 2 or self.theta_cells % 2:
            raise ConfigError("theta_cells must be a positive even integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if n is not None:
            check_k(self.k, n)
        return self


def check_k(k: int, n: int) -> None:
    if int(k) != k or not 2 <= k < n:
        raise ConfigError(f"k must be an integer with 2 <= k < n={n}, got {k}")


def _parse_lines(lines: Iterable[str], skip_header: bool) -> BivariateSample:
    xs: list[float] = []
    ys: list[float] = []
    header_pending = skip_header
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header_pending:
            header_pending = False
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) != 2:
            raise SampleFormatError(
                f"expected 2 columns, found {len(fields)}", line=lineno
            )
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            raise SampleFormatError(f"cannot parse {line!r}", line=lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise SampleFormatError("non-finite value", line=lineno)
        xs.append(x)
        ys.append(y)
    if len(xs) < MIN_SAMPLE_SIZE:
        raise SampleFormatError(
            f"need at least {MIN_SAMPLE_SIZE} rows, found {len(xs)}"
        )
    return BivariateSample(np.array(xs), np.array(ys))


def load_sample(
    source: str | os.PathLike | bytes | IO[str] | IO[bytes], skip_header: bool = False
) -> BivariateSample:
    """Parse a two-column text sample.

    Columns are separated by whitespace, commas or semicolons. Everything after
    ``#`` on a line is ignored. ``source`` may be a path, raw bytes, or an open
    text/binary stream.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
        return _parse_lines(io.StringIO(text), skip_header)
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return _parse_lines(fh, skip_header)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return _parse_lines(io.StringIO(data), skip_header)


def dumps_sample(sample: BivariateSample, header: Iterable[str] = ()) -> str:
    # 17 significant digits round-trip every double
    out = [f"# {h}" for h in header]
    out.extend(f"{x:.17g} {y:.17g}" for x, y in zip(sample.x, sample.y))
    return "\n".join(out) + "\n"


def dump_sample(sample: BivariateSample, path: str, header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_sample(sample, header))


def _ranks(values: np.ndarray) -> tuple[np.ndarray, int]:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    sorted_vals = values[order]
    ties = int(np.count_nonzero(sorted_vals[1:] == sorted_vals[:-1]))
    return ranks, ties


def compute_ranks(sample: BivariateSample) -> RankData:
    """Ranks of each margin among ``1..n``.

    ``rx[i]`` counts the ``j`` with ``x[j] < x[i]``, plus the ``j <= i`` with
    ``x[j] == x[i]``. ``ties`` is the number of adjacent equal values after
    sorting, summed over both margins.
    """
    rx, tx = _ranks(sample.x)
    ry, ty = _ranks(sample.y)
    return RankData(rx, ry, tx + ty)

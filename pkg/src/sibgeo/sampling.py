"""Deterministic sample sets over a chart's sampling box."""

from __future__ import annotations

import math

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def radical_inverse(i: int, base: int) -> float:
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def halton(count: int, dim: int, skip: int = 1) -> np.ndarray:
    """First ``count`` Halton points in [0, 1)^dim (bases 2, 3, 5, ...).

    ``skip`` drops the leading points; the default drops the origin.
    """
    if dim > len(_PRIMES):
        raise ValueError(f"Halton sampling supports at most {len(_PRIMES)} dimensions")
    return np.array(
        [[radical_inverse(i, _PRIMES[d]) for d in range(dim)] for i in range(skip, skip + count)]
    ).reshape(count, dim)


def grid(count: int, dim: int) -> np.ndarray:
    """Cell-centred tensor grid with ``ceil(count ** (1/dim))`` points per axis."""
    k = max(1, math.ceil(count ** (1.0 / dim) - 1e-9))
    axis = (np.arange(k) + 0.5) / k
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def to_box(unit: np.ndarray, lower, upper) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    return lower + unit * (upper - lower)


def sample_chart(chart, count: int = 100, strategy: str = "halton") -> np.ndarray:
    """Sample points in ``chart``'s box; deterministic, no seed."""
    if count < 1:
        raise ValueError("sample count must be >= 1")
    if strategy == "halton":
        unit = halton(count, chart.dim)
    elif strategy == "grid":
        unit = grid(count, chart.dim)
    else:
        raise ValueError(f"unknown sampling strategy {strategy!r}")
    return to_box(unit, chart.lower, chart.upper)

"""Empirical distributions, equal-mass partitions and heavy-atom detection.

A *sampler* is any callable ``sampler(rng, size) -> ndarray`` drawing
``size`` i.i.d. values using the :class:`numpy.random.Generator` ``rng``.
All randomness flows through explicitly passed generators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import EmptySample, ExcludedMassTooLarge, IntervalOutOfRange, InvalidParams

Sampler = Callable[[np.random.Generator, int], np.ndarray]

MAX_CONSECUTIVE_REJECTIONS = 10_000


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so that nearby seeds give independent streams."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if s.size == 0:
            raise EmptySample("an empirical distribution needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.size

    def count(self, a, b):
        """Number of samples in ``[a, b)`` (vectorized over ``a`` and ``b``)."""
        s = self.samples
        return np.searchsorted(s, b, side="left") - np.searchsorted(s, a, side="left")

    def mass(self, a, b):
        return self.count(a, b) / self.m

    def masses(self, breakpoints) -> np.ndarray:
        """Masses of the consecutive half-open cells of ``breakpoints``."""
        idx = np.searchsorted(self.samples, np.asarray(breakpoints, dtype=float), side="left")
        return np.diff(idx) / self.m

    def restrict(self, a: float, b: float) -> "EmpiricalDistribution":
        lo, hi = np.searchsorted(self.samples, [a, b], side="left")
        return EmpiricalDistribution(self.samples[lo:hi])

    def to_text(self) -> str:
        return "".join(f"{v!r}\n" for v in self.samples.tolist())

    @classmethod
    def from_text(cls, text: str) -> "EmpiricalDistribution":
        return empirical_from_samples([float(tok) for tok in text.split()])


def empirical_from_samples(samples) -> EmpiricalDistribution:
    """Sorted, count-preserving empirical distribution.

    Raises
    ------
    EmptySample
        If ``samples`` is empty.
    """
    return EmpiricalDistribution(np.asarray(samples, dtype=float))


@dataclass(frozen=True, eq=False)
class IntervalPartition:
    """Half-open intervals ``[breakpoints[j], breakpoints[j+1])``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).copy()
        if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
            raise IntervalOutOfRange("partition breakpoints must be strictly increasing")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)

    @property
    def num_intervals(self) -> int:
        return self.breakpoints.size - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def coarsen(self, group: int) -> "IntervalPartition":
        """Keep every ``group``-th breakpoint (plus the right end)."""
        keep = self.breakpoints[::group]
        if keep[-1] != self.breakpoints[-1]:
            keep = np.append(keep, self.breakpoints[-1])
        return IntervalPartition(keep)

    def to_json(self) -> str:
        return json.dumps([float(b) for b in self.breakpoints])

    @classmethod
    def from_json(cls, text: str) -> "IntervalPartition":
        return cls(np.asarray(json.loads(text), dtype=float))


def _num_intervals(kappa: float) -> int:
    n = math.ceil(1.0 / kappa)
    # 1/0.1 is 10.000000000000002 in floating point
    if n > 1 and abs(1.0 / kappa - (n - 1)) < 1e-9:
        n -= 1
    return n


def partition_sample_size(n: int) -> int:
    """``ceil(8 n ln(200 n))`` rounded up to a multiple of ``n``."""
    m = math.ceil(8 * n * math.log(200 * n))
    return n * math.ceil(m / n)


def approximately_equal_partition(
    sampler: Sampler,
    kappa: float,
    rng: np.random.Generator,
    domain: tuple[float, float] = (-1.0, 1.0),
    num_intervals: int | None = None,
) -> IntervalPartition:
    """Partition ``domain`` into at most ``ceil(1/kappa)`` cells of roughly equal mass.

    Breakpoints are the order statistics ``U_(j m / n)`` of ``m`` fresh
    samples. Repeated order statistics are merged, so heavy atoms yield fewer
    cells; everything above the top breakpoint joins the last cell.
    """
    if not 0.0 < kappa < 1.0:
        raise InvalidParams(f"kappa must lie in (0, 1), got {kappa}")
    n = _num_intervals(kappa) if num_intervals is None else int(num_intervals)
    lo, hi = domain
    if n <= 1:
        return IntervalPartition(np.array([lo, hi]))
    m = partition_sample_size(n)
    u = np.sort(np.asarray(sampler(rng, m), dtype=float))
    step = m // n
    cuts = u[step * np.arange(1, n) - 1]
    cuts = np.unique(cuts[(cuts > lo) & (cuts < hi)])
    return IntervalPartition(np.concatenate([[lo], cuts, [hi]]))


def heavy_sample_size(gamma: float) -> int:
    return math.ceil(64.0 * math.log(100.0 / gamma) / gamma)


def find_heavy(sampler: Sampler, gamma: float, rng: np.random.Generator) -> set[float]:
    """Values whose empirical frequency in a fresh sample is at least ``gamma``."""
    if not 0.0 < gamma < 1.0:
        raise InvalidParams(f"gamma must lie in (0, 1), got {gamma}")
    m = heavy_sample_size(gamma)
    values, counts = np.unique(np.asarray(sampler(rng, m), dtype=float), return_counts=True)
    return {float(v) for v in values[counts >= gamma * m]}


def conditional_sampler(sampler: Sampler, excluded: Iterable[float]) -> Sampler:
    """Rejection sampler drawing from ``sampler`` conditioned to avoid ``excluded``.

    The returned sampler raises :class:`ExcludedMassTooLarge` once
    ``10**4`` consecutive draws all land in the excluded set.
    """
    bad = np.array(sorted(set(float(x) for x in excluded)))
    if bad.size == 0:
        return sampler

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty(0)
        streak = 0
        while out.size < size:
            need = size - out.size
            batch = np.asarray(sampler(rng, max(need, 16)), dtype=float)
            keep = ~np.isin(batch, bad)
            if not keep.any():
                streak += batch.size
                if streak >= MAX_CONSECUTIVE_REJECTIONS:
                    raise ExcludedMassTooLarge(
                        f"{streak} consecutive draws fell in the excluded set"
                    )
                continue
            first = int(np.argmax(keep))
            last_good = batch.size - 1 - int(np.argmax(keep[::-1]))
            if streak + first >= MAX_CONSECUTIVE_REJECTIONS:
                raise ExcludedMassTooLarge(
                    f"{streak + first} consecutive draws fell in the excluded set"
                )
            streak = batch.size - 1 - last_good
            out = np.concatenate([out, batch[keep][:need]])
        return out

    return draw


def samples_to_text(samples) -> str:
    return "".join(f"{float(v)!r}\n" for v in np.asarray(samples).ravel())


def samples_from_text(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split()])

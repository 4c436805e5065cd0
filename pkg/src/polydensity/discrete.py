"""Distributions on the grid ``D = {-N/N, ..., (N-1)/N}`` and the reduction to densities.

Index ``j`` in ``0..2N-1`` stands for the grid value ``(j - N) / N``. A pmf
``p`` is *continuized* by spreading each mass uniformly over its cell
``[(j - N)/N, (j - N + 1)/N)``; a density is *discretized* by integrating it
over those cells. The two maps are inverse to each other on pmfs and
preserve total variation distance, so a density learner learns pmfs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .empirical import Sampler
from .errors import InvalidParams, ValidationFailed
from .learner import learn_piecewise_poly
from .poly import PiecewisePolynomial
from .zoo import TargetDistribution, piecewise_poly_target


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    N: int
    masses: np.ndarray

    def __post_init__(self):
        N = int(self.N)
        m = np.asarray(self.masses, dtype=float).copy()
        if N < 1 or m.shape != (2 * N,):
            raise InvalidParams(f"need 2N = {2 * N} masses, got shape {m.shape}")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-12:
            raise InvalidParams("masses must be nonnegative and sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "masses", m)

    @property
    def grid(self) -> np.ndarray:
        return (np.arange(2 * self.N) - self.N) / self.N

    def sampler(self) -> Sampler:
        """Sampler emitting grid values."""
        probs = self.masses
        grid = self.grid

        def draw(rng, size):
            return grid[rng.choice(probs.size, size=size, p=probs)]

        return draw

    def to_json(self) -> str:
        return json.dumps({"N": self.N, "masses": [float(v) for v in self.masses]})

    @classmethod
    def from_json(cls, text: str) -> "DiscretePmf":
        data = json.loads(text)
        return cls(int(data["N"]), np.asarray(data["masses"], dtype=float))


def tv_distance_pmf(p: DiscretePmf, q: DiscretePmf) -> float:
    if p.N != q.N:
        raise InvalidParams("pmfs live on different grids")
    return 0.5 * float(np.abs(p.masses - q.masses).sum())


def grid_breakpoints(N: int) -> np.ndarray:
    return np.arange(-N, N + 1) / N


def continuize(p: DiscretePmf) -> TargetDistribution:
    """Piecewise constant density equal to ``N * masses[j]`` on cell ``j``."""
    bp = grid_breakpoints(p.N)
    coeffs = [[0.5 * mj] for mj in p.masses]  # cell width 1/N times height N mj, halved
    pp = PiecewisePolynomial.from_coefficients(bp, coeffs, True, True)
    return piecewise_poly_target(pp, "continuized")


def continuize_sampler(sampler: Sampler, N: int) -> Sampler:
    """Turn a sampler of grid values into a sampler of the continuized density."""
    top = np.nextafter(1.0, -np.inf)

    def draw(rng, size):
        x = np.asarray(sampler(rng, size), dtype=float)
        j = np.rint(x * N)
        return np.minimum((j + rng.random(size)) / N, top)

    return draw


def discretize(h: PiecewisePolynomial, N: int) -> DiscretePmf:
    """Masses of ``h`` on the ``2N`` grid cells of ``[-1, 1)``."""
    bp = grid_breakpoints(N)
    masses = np.array([h.integral(a, b) for a, b in zip(bp[:-1], bp[1:])])
    masses = np.clip(masses, 0.0, None)
    return DiscretePmf(N, masses / masses.sum())


def learn_discrete(
    sampler: Sampler, k: int, t: int, epsilon: float, rng: np.random.Generator, N: int, **kwargs
) -> DiscretePmf:
    """Learn a pmf on ``D`` by learning its continuization with ``d = 0``.

    ``sampler`` must emit grid values ``(j - N) / N``. Keyword arguments
    go to :func:`polydensity.learner.learn_piecewise_poly`.
    """
    cont = continuize_sampler(sampler, N)
    h = learn_piecewise_poly(cont, k * t, 0, epsilon, rng, domain=(-1.0, 1.0), **kwargs)
    return discretize(h, N)


# ----------------------------------------------------------------------------
# Class validators
# ----------------------------------------------------------------------------


def count_modes(masses) -> int:
    """Number of local maxima after merging runs of equal values."""
    v = np.asarray(masses, dtype=float)
    keep = np.concatenate([[True], v[1:] != v[:-1]])
    v = v[keep]
    padded = np.concatenate([[-np.inf], v, [-np.inf]])
    return int(np.sum((padded[1:-1] > padded[:-2]) & (padded[1:-1] > padded[2:])))


def is_t_modal(masses, t: int) -> bool:
    return count_modes(masses) <= t


def hazards(masses) -> np.ndarray:
    """``H(i) = p(i) / sum_{j >= i} p(j)`` on the support up to the last nonzero mass."""
    p = np.asarray(masses, dtype=float)
    last = np.flatnonzero(p > 0)
    if last.size == 0:
        return np.empty(0)
    p = p[: last[-1] + 1]
    tail = np.cumsum(p[::-1])[::-1]
    return p / tail


def is_mhr(masses, tol: float = 1e-12) -> bool:
    h = hazards(masses)
    return bool(np.all(np.diff(h) >= -tol))


def is_log_concave(masses, tol: float = 1e-15) -> bool:
    """Contiguous support and ``p(k)^2 >= p(k-1) p(k+1)``."""
    p = np.asarray(masses, dtype=float)
    nz = np.flatnonzero(p > 0)
    if nz.size == 0:
        return False
    if np.any(p[nz[0] : nz[-1] + 1] <= 0):
        return False
    return bool(np.all(p[1:-1] ** 2 >= p[:-2] * p[2:] - tol))


# ----------------------------------------------------------------------------
# Constructors
# ----------------------------------------------------------------------------


def pbd_pmf(ps) -> np.ndarray:
    """Law of a sum of independent Bernoulli(p_i) variables, by convolution."""
    out = np.array([1.0])
    for p in ps:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise InvalidParams(f"Bernoulli parameter {p} outside [0, 1]")
        out = np.convolve(out, [1.0 - p, p])
    return out


def _place(values, N: int, offset: int) -> np.ndarray:
    masses = np.zeros(2 * N)
    if offset < 0 or offset + len(values) > 2 * N:
        raise InvalidParams(f"support of size {len(values)} at index {offset} does not fit 2N = {2 * N}")
    masses[offset : offset + len(values)] = values
    return masses


def _tmodal(params, N, rng) -> np.ndarray:
    t = int(params.get("t", 2))
    if t < 1 or 2 * N < 2 * t:
        raise InvalidParams("need 1 <= t and 2N >= 2t")
    for _ in range(1000):
        cuts = np.sort(rng.choice(np.arange(1, 2 * N), size=t - 1, replace=False)) if t > 1 else []
        edges = np.concatenate([[0], cuts, [2 * N]]).astype(int)
        pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            n = b - a
            peak = rng.integers(0, n)
            up = np.sort(rng.random(peak + 1))
            down = np.sort(rng.random(n - peak - 1))[::-1] * up[-1]
            pieces.append(np.concatenate([up, down]) * rng.uniform(0.5, 2.0))
        masses = np.concatenate(pieces)
        if count_modes(masses) == t:
            return masses / masses.sum()
    raise ValidationFailed(f"could not draw a pmf with exactly {t} modes")


def _mhr(params, N, rng) -> np.ndarray:
    h0 = float(params.get("h0", 0.02))
    slope = float(params.get("slope", 0.002))
    if not 0 < h0 <= 1 or slope < 0:
        raise InvalidParams("need 0 < h0 <= 1 and slope >= 0")
    h = np.minimum(h0 + slope * np.arange(2 * N), 1.0)
    h[-1] = 1.0
    survive = np.concatenate([[1.0], np.cumprod(1.0 - h[:-1])])
    return h * survive


def _log_concave(params, N, rng) -> np.ndarray:
    if "masses" in params:
        return _place(np.asarray(params["masses"], dtype=float), N, int(params.get("offset", N)))
    mu = float(params.get("mu", 0.0))
    sigma = float(params.get("sigma", 0.3))
    x = (np.arange(2 * N) - N) / N
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2)


def _pbd(params, N, rng) -> np.ndarray:
    vals = pbd_pmf(params["ps"])
    return _place(vals, N, int(params.get("offset", N)))


_VALIDATORS = {
    "tmodal_synthetic": lambda m, params: count_modes(m) == int(params.get("t", 2)),
    "mhr_geometric_like": lambda m, params: is_mhr(m),
    "discrete_log_concave": lambda m, params: is_log_concave(m),
    "pbd": lambda m, params: is_log_concave(m),
}
_MAKERS = {
    "tmodal_synthetic": _tmodal,
    "mhr_geometric_like": _mhr,
    "discrete_log_concave": _log_concave,
    "pbd": _pbd,
}
DISCRETE_KINDS = tuple(_MAKERS)


def make_discrete_target(kind: str, params: dict | None, N: int, rng: np.random.Generator | None = None) -> DiscretePmf:
    """Build a pmf of a structured class on the ``2N``-point grid.

    Supports on ``{0, 1, ..., n}`` (PBDs, explicit log-concave masses) are
    placed at the grid values ``0, 1/N, ..., n/N`` unless ``offset`` says
    otherwise.

    Raises
    ------
    ValidationFailed
        If the pmf does not have its class property.
    """
    params = dict(params or {})
    if kind not in _MAKERS:
        raise InvalidParams(f"unknown discrete kind {kind!r}")
    if rng is None:
        rng = np.random.default_rng(int(params.get("seed", 0)))
    raw = np.asarray(_MAKERS[kind](params, int(N), rng), dtype=float)
    total = raw.sum()
    if not total > 0:
        raise ValidationFailed(f"{kind}: no mass")
    masses = _place(raw, N, 0) if raw.size < 2 * N else raw
    masses = masses / masses.sum()
    if not _VALIDATORS[kind](masses, params):
        raise ValidationFailed(f"{kind} pmf violates its class property")
    return DiscretePmf(int(N), masses)


def flat_pieces(kind: str, N: int, epsilon: float, t: int = 1) -> int:
    """Number of flat pieces that suffices to approximate a class member to ``eps``."""
    if kind == "tmodal_synthetic":
        return math.ceil(t * math.log(2 * N) / epsilon)
    if kind == "mhr_geometric_like":
        return math.ceil(4 * math.log(2 * N / epsilon) / epsilon)
    if kind in ("discrete_log_concave", "pbd"):
        return math.ceil(4 * math.log(1 / epsilon) / epsilon)
    raise InvalidParams(f"unknown discrete kind {kind!r}")


def indices_to_text(indices) -> str:
    return "".join(f"{int(j)}\n" for j in np.asarray(indices).ravel())


def indices_from_text(text: str) -> np.ndarray:
    return np.array([int(tok) for tok in text.split()], dtype=int)

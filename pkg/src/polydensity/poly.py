"""Chebyshev-basis piecewise polynomials.

Every piece lives on a half-open interval ``[lo, hi)`` and stores Chebyshev
coefficients in the coordinate ``u = -1 + 2 (y - lo) / (hi - lo)``. A piece
flagged ``mapped_scaling`` represents the density

    f(y) = 2 / (hi - lo) * sum_i c_i T_i(u(y)),

so that the integral of ``f`` over the piece equals the integral of
``sum_i c_i T_i`` over ``[-1, 1]``. Pieces without the flag (cumulative
distribution functions, plain functions) are evaluated without the factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.fft import dct

from .errors import (
    DomainMismatch,
    IntervalOutOfRange,
    NotADistribution,
    WeightsInvalid,
)
from .quadrature import adaptive_integrate

_EDGE_TOL = 1e-12


# ----------------------------------------------------------------------------
# Chebyshev primitives
# ----------------------------------------------------------------------------


def cheb_eval(coeffs, x):
    """Evaluate ``sum_i coeffs[i] * T_i(x)`` by the Clenshaw recurrence.

    ``x`` may be a scalar or an array. Points outside ``[-1, 1]`` are clamped,
    so callers can pass values that overshoot by rounding error.
    """
    c = np.asarray(coeffs, dtype=float)
    scalar = np.ndim(x) == 0
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    if c.size == 0:
        out = np.zeros_like(x)
    elif c.size == 1:
        out = np.full_like(x, c[0])
    else:
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        two_x = 2.0 * x
        for ck in c[:0:-1]:
            b1, b2 = ck + two_x * b1 - b2, b1
        out = c[0] + x * b1 - b2
    return float(out) if scalar else out


def cheb_antiderivative(coeffs) -> np.ndarray:
    """Chebyshev coefficients of the antiderivative vanishing at ``-1``."""
    c = np.asarray(coeffs, dtype=float)
    n = c.size
    if n == 0:
        return np.zeros(1)
    ext = np.concatenate([c, [0.0, 0.0]])
    b = np.zeros(n + 1)
    b[1] = ext[0] - 0.5 * ext[2]
    for k in range(2, n + 1):
        b[k] = (ext[k - 1] - ext[k + 1]) / (2.0 * k)
    signs = np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)
    b[0] = -np.dot(b[1:], signs)
    return b


def cheb_derivative(coeffs) -> np.ndarray:
    """Chebyshev coefficients of the derivative."""
    c = np.asarray(coeffs, dtype=float)
    n = c.size - 1
    if n <= 0:
        return np.zeros(1)
    d = np.zeros(n + 1)
    for k in range(n, 0, -1):
        d[k - 1] = d[k + 1] + 2.0 * k * c[k] if k + 1 <= n else 2.0 * k * c[k]
    d[0] *= 0.5
    return d[:n]


def cheb_nodes(n: int) -> np.ndarray:
    """First-kind Chebyshev nodes, in the order matching :func:`cheb_interpolate`."""
    j = np.arange(n)
    return np.cos(np.pi * (j + 0.5) / n)


def cheb_interpolate(values) -> np.ndarray:
    """Coefficients of the degree ``n-1`` interpolant through ``cheb_nodes(n)``."""
    v = np.asarray(values, dtype=float)
    n = v.size
    c = dct(v, type=2) / n
    c[0] *= 0.5
    return c


def domain_map(interval, y):
    """Affine map of ``interval = (a, b)`` onto ``[-1, 1]``."""
    a, b = interval
    return -1.0 + 2.0 * (np.asarray(y, dtype=float) - a) / (b - a)


def inverse_domain_map(interval, x):
    """Inverse of :func:`domain_map`."""
    a, b = interval
    return a + (np.asarray(x, dtype=float) + 1.0) * 0.5 * (b - a)


# ----------------------------------------------------------------------------
# Pieces
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChebPoly:
    """A polynomial on ``interval`` in the mapped Chebyshev basis."""

    interval: tuple[float, float]
    coeffs: np.ndarray
    mapped_scaling: bool = True

    def __post_init__(self):
        lo, hi = float(self.interval[0]), float(self.interval[1])
        if not lo < hi:
            raise IntervalOutOfRange(f"empty interval [{lo}, {hi})")
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def lo(self) -> float:
        return self.interval[0]

    @property
    def hi(self) -> float:
        return self.interval[1]

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def scale(self) -> float:
        return 2.0 / self.width if self.mapped_scaling else 1.0

    def __call__(self, y):
        return self.scale * cheb_eval(self.coeffs, domain_map(self.interval, y))

    def integral(self, a: float | None = None, b: float | None = None) -> float:
        return piece_integral(self, self.lo if a is None else a, self.hi if b is None else b)

    def restrict(self, a: float, b: float, mapped_scaling: bool = True) -> "ChebPoly":
        """Re-expand this polynomial on the subinterval ``[a, b)``."""
        n = self.degree + 1
        v = cheb_nodes(n)
        vals = self(inverse_domain_map((a, b), v))
        if mapped_scaling:
            vals = vals * 0.5 * (b - a)
        return ChebPoly((a, b), cheb_interpolate(vals), mapped_scaling)


def piece_integral(p: ChebPoly, a: float, b: float) -> float:
    """Exact integral of the piece ``p`` over ``[a, b]``."""
    tol = _EDGE_TOL * max(1.0, abs(p.lo), abs(p.hi))
    if a < p.lo - tol or b > p.hi + tol or a > b + tol:
        raise IntervalOutOfRange(f"[{a}, {b}] not inside [{p.lo}, {p.hi})")
    anti = cheb_antiderivative(p.coeffs)
    ua, ub = domain_map(p.interval, [a, b])
    val = cheb_eval(anti, ub) - cheb_eval(anti, ua)
    if not p.mapped_scaling:
        val *= 0.5 * p.width
    return float(val)


# ----------------------------------------------------------------------------
# Piecewise polynomials
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Piecewise polynomial on ``[breakpoints[0], breakpoints[-1])``."""

    breakpoints: np.ndarray
    pieces: tuple[ChebPoly, ...]
    is_distribution: bool = False

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).copy()
        pieces = tuple(self.pieces)
        if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
            raise IntervalOutOfRange("breakpoints must be strictly increasing, length >= 2")
        if len(pieces) != bp.size - 1:
            raise IntervalOutOfRange("need exactly one piece per interval")
        for j, piece in enumerate(pieces):
            if piece.interval != (bp[j], bp[j + 1]):
                raise IntervalOutOfRange(
                    f"piece {j} lives on {piece.interval}, expected {(bp[j], bp[j + 1])}"
                )
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", pieces)
        if self.is_distribution:
            check_distribution(self)

    # construction helpers ---------------------------------------------------

    @classmethod
    def from_coefficients(cls, breakpoints, coeffs, mapped_scaling=True, is_distribution=False):
        bp = np.asarray(breakpoints, dtype=float)
        pieces = tuple(
            ChebPoly((bp[j], bp[j + 1]), c, mapped_scaling) for j, c in enumerate(coeffs)
        )
        return cls(bp, pieces, is_distribution)

    @classmethod
    def constant(cls, lo: float, hi: float, value: float | None = None, is_distribution=None):
        """Constant density on ``[lo, hi)``; defaults to the uniform distribution."""
        if value is None:
            value = 1.0 / (hi - lo)
        if is_distribution is None:
            is_distribution = abs(value * (hi - lo) - 1.0) <= 1e-12
        return cls.from_coefficients([lo, hi], [[value * (hi - lo) / 2.0]], True, is_distribution)

    @classmethod
    def from_function(cls, func, breakpoints, degree: int, is_distribution=False):
        """Interpolate ``func`` on each interval at ``degree + 1`` Chebyshev nodes."""
        bp = np.asarray(breakpoints, dtype=float)
        v = cheb_nodes(degree + 1)
        coeffs = []
        for a, b in zip(bp[:-1], bp[1:]):
            vals = np.asarray(func(inverse_domain_map((a, b), v)), dtype=float)
            coeffs.append(cheb_interpolate(vals * 0.5 * (b - a)))
        return cls.from_coefficients(bp, coeffs, True, is_distribution)

    # basic queries ----------------------------------------------------------

    @property
    def lo(self) -> float:
        return float(self.breakpoints[0])

    @property
    def hi(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def num_pieces(self) -> int:
        return len(self.pieces)

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.pieces)

    def __call__(self, y):
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros_like(y)
        idx = np.searchsorted(self.breakpoints, y, side="right") - 1
        inside = (y >= self.lo) & (y < self.hi)
        for j in np.unique(idx[inside]):
            mask = inside & (idx == j)
            out[mask] = self.pieces[j](y[mask])
        return float(out[0]) if scalar else out

    def piece_masses(self) -> np.ndarray:
        return np.array([p.integral() for p in self.pieces])

    def total_mass(self) -> float:
        return float(self.piece_masses().sum())

    def integral(self, a: float, b: float) -> float:
        """Integral over ``[a, b)``; the function is zero outside its span."""
        a, b = max(a, self.lo), min(b, self.hi)
        if a >= b:
            return 0.0
        total = 0.0
        j0 = max(int(np.searchsorted(self.breakpoints, a, side="right")) - 1, 0)
        for j in range(j0, self.num_pieces):
            p = self.pieces[j]
            if p.lo >= b:
                break
            total += p.integral(max(a, p.lo), min(b, p.hi))
        return total

    def cdf(self, x):
        """Integral from the left end up to ``x`` (vectorized)."""
        x = np.asarray(x, dtype=float)
        masses = self.piece_masses()
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        flat = np.atleast_1d(x)
        out = np.empty(flat.shape)
        for i, xi in enumerate(flat):
            if xi <= self.lo:
                out[i] = 0.0
            elif xi >= self.hi:
                out[i] = cum[-1]
            else:
                j = int(np.searchsorted(self.breakpoints, xi, side="right")) - 1
                out[i] = cum[j] + self.pieces[j].integral(self.pieces[j].lo, xi)
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def scaled(self, factor: float, is_distribution: bool = False) -> "PiecewisePolynomial":
        pieces = tuple(
            ChebPoly(p.interval, p.coeffs * factor, p.mapped_scaling) for p in self.pieces
        )
        return PiecewisePolynomial(self.breakpoints, pieces, is_distribution)

    def normalized(self) -> "PiecewisePolynomial":
        """Rescale to total mass one and flag as a distribution."""
        mass = self.total_mass()
        if not mass > 0:
            raise NotADistribution("cannot normalize a function with nonpositive mass")
        return self.scaled(1.0 / mass, is_distribution=True)

    def padded(self, lo: float, hi: float) -> "PiecewisePolynomial":
        """Extend with zero pieces so the span becomes ``[lo, hi)``."""
        if lo > self.lo or hi < self.hi:
            raise IntervalOutOfRange("padding cannot shrink the span")
        bp = list(self.breakpoints)
        pieces = list(self.pieces)
        if lo < self.lo:
            bp.insert(0, lo)
            pieces.insert(0, ChebPoly((lo, self.lo), [0.0]))
        if hi > self.hi:
            bp.append(hi)
            pieces.append(ChebPoly((self.hi, hi), [0.0]))
        return PiecewisePolynomial(np.array(bp), tuple(pieces), self.is_distribution)

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "pieces": [
                {"coeffs": [float(c) for c in p.coeffs], "mapped_scaling": bool(p.mapped_scaling)}
                for p in self.pieces
            ],
            "is_distribution": bool(self.is_distribution),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewisePolynomial":
        bp = np.asarray(data["breakpoints"], dtype=float)
        pieces = tuple(
            ChebPoly((bp[j], bp[j + 1]), p["coeffs"], bool(p.get("mapped_scaling", True)))
            for j, p in enumerate(data["pieces"])
        )
        return cls(bp, pieces, bool(data.get("is_distribution", False)))

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePolynomial":
        return cls.from_dict(json.loads(text))


def check_distribution(p: PiecewisePolynomial, mass_tol: float = 1e-9, neg_tol: float = 1e-9):
    """Raise :class:`NotADistribution` unless ``p`` integrates to one and is nonnegative."""
    mass = p.total_mass()
    if abs(mass - 1.0) > mass_tol:
        raise NotADistribution(f"total mass {mass!r} differs from 1")
    lowest = min_value(p)
    if lowest < -neg_tol:
        raise NotADistribution(f"density reaches {lowest!r} < 0")


def min_value(p: PiecewisePolynomial, points_per_piece: int = 1000) -> float:
    """Minimum over a grid of ``points_per_piece`` points in every piece."""
    grid = np.linspace(-1.0, 1.0, points_per_piece)
    return float(min(np.min(piece.scale * cheb_eval(piece.coeffs, grid)) for piece in p.pieces))


# ----------------------------------------------------------------------------
# Refinements and linear combinations
# ----------------------------------------------------------------------------


def common_breakpoints(*pps: PiecewisePolynomial) -> np.ndarray:
    """Breakpoints of the common refinement, spanning the union of the spans."""
    return np.unique(np.concatenate([p.breakpoints for p in pps]))


def _cell_coeffs(pp: PiecewisePolynomial, a: float, b: float, degree: int) -> np.ndarray:
    """Mapped coefficients of ``pp`` on the cell ``[a, b)`` (zero off its span)."""
    out = np.zeros(degree + 1)
    if a < pp.lo or b > pp.hi:
        return out
    j = int(np.searchsorted(pp.breakpoints, 0.5 * (a + b), side="right")) - 1
    piece = pp.pieces[j]
    if piece.lo == a and piece.hi == b and piece.mapped_scaling:
        c = piece.coeffs
    else:
        c = piece.restrict(a, b).coeffs
    out[: c.size] = c
    return out


def linear_combination(components: Sequence[tuple[float, PiecewisePolynomial]]) -> PiecewisePolynomial:
    """``sum_i w_i p_i`` over the common refinement, with arbitrary real weights."""
    if not components:
        raise WeightsInvalid("no components")
    pps = [p for _, p in components]
    bp = common_breakpoints(*pps)
    degree = max(p.degree for p in pps)
    coeffs = []
    for a, b in zip(bp[:-1], bp[1:]):
        c = np.zeros(degree + 1)
        for w, p in components:
            if w != 0.0:
                c += w * _cell_coeffs(p, a, b, degree)
        coeffs.append(c)
    return PiecewisePolynomial.from_coefficients(bp, coeffs, True, False)


def mixture_flatten(components: Sequence[tuple[float, PiecewisePolynomial]]) -> PiecewisePolynomial:
    """Flatten a finite mixture of piecewise polynomial distributions.

    Raises
    ------
    WeightsInvalid
        If a weight is negative or the weights do not sum to one.
    """
    weights = np.array([w for w, _ in components], dtype=float)
    if weights.size == 0 or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise WeightsInvalid(f"mixture weights {weights.tolist()} must be >= 0 and sum to 1")
    flat = linear_combination(components)
    all_dist = all(p.is_distribution for _, p in components)
    if all_dist:
        return PiecewisePolynomial(flat.breakpoints, flat.pieces, is_distribution=True)
    return flat


# ----------------------------------------------------------------------------
# Root isolation and exact L1 distances
# ----------------------------------------------------------------------------


def sign_change_points(coeffs, tol: float = 1e-10) -> np.ndarray:
    """Points of ``[-1, 1]`` where ``sum c_i T_i`` changes sign.

    Sign changes are detected on a grid of ``64 * (degree + 1)`` Chebyshev
    extrema and each bracket is bisected to width ``tol``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size <= 1 or not np.any(c[1:]):
        return np.empty(0)
    m = 64 * c.size
    grid = np.cos(np.pi * np.arange(m - 1, -1, -1) / (m - 1))
    vals = cheb_eval(c, grid)
    s = np.sign(vals)
    roots = list(grid[1:-1][s[1:-1] == 0])
    nz = np.nonzero(s)[0]
    if nz.size >= 2:
        flips = nz[:-1][s[nz[:-1]] != s[nz[1:]]]
        nxt = nz[1:][s[nz[:-1]] != s[nz[1:]]]
        # an exact zero already sits between the two grid points
        adjacent = nxt == flips + 1
        lo = grid[flips[adjacent]]
        hi = grid[nxt[adjacent]]
        slo = s[flips[adjacent]]
        while lo.size and np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            sm = np.sign(cheb_eval(c, mid))
            left = sm == slo
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
        roots.extend(0.5 * (lo + hi))
    return np.unique(np.asarray(roots, dtype=float))


def abs_integral(coeffs) -> float:
    """``int_{-1}^{1} |sum c_i T_i(u)| du``, exact up to root isolation."""
    c = np.asarray(coeffs, dtype=float)
    if c.size == 1:
        return 2.0 * abs(c[0])
    pts = np.concatenate([[-1.0], sign_change_points(c), [1.0]])
    anti = cheb_antiderivative(c)
    vals = cheb_eval(anti, pts)
    return float(np.abs(np.diff(vals)).sum())


def l1_distance_pp(p: PiecewisePolynomial, q: PiecewisePolynomial) -> float:
    diff = linear_combination([(1.0, p), (-1.0, q)])
    return sum(abs_integral(piece.coeffs) for piece in diff.pieces)


def tv_distance_pp(p: PiecewisePolynomial, q: PiecewisePolynomial) -> float:
    """Total variation distance between two piecewise polynomial densities.

    Raises
    ------
    DomainMismatch
        If the two functions are defined over different ambient intervals.
    """
    if p.lo != q.lo or p.hi != q.hi:
        raise DomainMismatch(f"[{p.lo}, {p.hi}) vs [{q.lo}, {q.hi})")
    return 0.5 * l1_distance_pp(p, q)


def tv_distance_density(p: PiecewisePolynomial, f, rel_tol: float = 1e-6) -> float:
    """TV distance between ``p`` and a target distribution by adaptive quadrature.

    ``f`` needs ``density``, ``domain``, ``atoms`` and ``nonsmooth_points``
    attributes (see :class:`polydensity.zoo.TargetDistribution`). Atoms of the
    target contribute half their mass because ``p`` has none. For targets on
    an infinite domain the mass outside ``p``'s span is taken from ``f.cdf``.
    """
    f_lo, f_hi = f.domain
    lo = p.lo if not np.isfinite(f_lo) else min(p.lo, f_lo)
    hi = p.hi if not np.isfinite(f_hi) else max(p.hi, f_hi)
    pts = [lo, hi, *p.breakpoints]
    pts += [x for x in (f_lo, f_hi) if np.isfinite(x)]
    pts += [x for x in f.nonsmooth_points if lo < x < hi]
    pts = sorted(x for x in set(map(float, pts)) if lo <= x <= hi)

    def integrand(y):
        return np.abs(p(y) - f.density(y))

    l1 = adaptive_integrate(integrand, pts, rel_tol=rel_tol)
    outside = 0.0
    if not np.isfinite(f_lo):
        outside += float(f.cdf(lo))
    if not np.isfinite(f_hi):
        outside += 1.0 - float(f.cdf(hi)) - sum(m for _, m in f.atoms)
    atom_mass = sum(m for _, m in f.atoms)
    return 0.5 * (l1 + outside + atom_mass)


# ----------------------------------------------------------------------------
# A_k distance
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SignedMeasureDiff:
    """A signed measure: polynomial density plus atoms plus a signed empirical part."""

    poly_part: PiecewisePolynomial | None = None
    atoms: tuple[tuple[float, float], ...] = ()
    empirical_part: object | None = None
    empirical_sign: float = 1.0

    def __post_init__(self):
        atoms = tuple(sorted((float(x), float(m)) for x, m in self.atoms))
        locs = [x for x, _ in atoms]
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct")
        object.__setattr__(self, "atoms", atoms)

    def _points(self) -> list[np.ndarray]:
        pts = []
        if self.poly_part is not None:
            pts.append(self.poly_part.breakpoints)
        if self.atoms:
            pts.append(np.array([x for x, _ in self.atoms]))
        if self.empirical_part is not None:
            pts.append(np.asarray(self.empirical_part.samples))
        return pts

    def measure_below(self, x: np.ndarray) -> np.ndarray:
        """``mu((-inf, x))`` for each grid point."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.poly_part is not None:
            out += self.poly_part.cdf(x)
        if self.atoms:
            locs = np.array([a for a, _ in self.atoms])
            cum = np.concatenate([[0.0], np.cumsum([m for _, m in self.atoms])])
            out += cum[np.searchsorted(locs, x, side="left")]
        if self.empirical_part is not None:
            s = np.asarray(self.empirical_part.samples)
            out += self.empirical_sign * np.searchsorted(s, x, side="left") / s.size
        return out

    def total(self) -> float:
        t = sum(m for _, m in self.atoms)
        if self.poly_part is not None:
            t += self.poly_part.total_mass()
        if self.empirical_part is not None:
            t += self.empirical_sign
        return t


def _max_k_segments(cells: np.ndarray, k: int) -> float:
    """Largest total of at most ``k`` disjoint runs of consecutive cells."""
    prefix = np.concatenate([[0.0], np.cumsum(cells)])
    best = np.zeros_like(prefix)
    for _ in range(k):
        h = prefix + np.maximum.accumulate(best - prefix)
        best = np.maximum.accumulate(np.maximum(h, best))
    return float(best[-1])


def ak_distance(mu: SignedMeasureDiff, k: int, grid_size: int) -> float:
    """Grid approximation of ``sup |mu(A)|`` over unions ``A`` of at most ``k`` intervals.

    The grid merges a uniform grid of ``grid_size`` points with every atom,
    every empirical sample, every breakpoint and every sign change of the
    polynomial part, so the result is a lower bound that is exact whenever
    the optimal endpoints lie on the grid.
    """
    if k < 1 or grid_size < 10 * k:
        raise ValueError("need k >= 1 and grid_size >= 10 k")
    pts = mu._points()
    if not pts:
        return 0.0
    allpts = np.concatenate(pts)
    lo, hi = float(allpts.min()), float(allpts.max())
    grid = [np.linspace(lo, hi, grid_size), allpts]
    if mu.poly_part is not None:
        for piece in mu.poly_part.pieces:
            r = sign_change_points(piece.coeffs)
            if r.size:
                grid.append(inverse_domain_map(piece.interval, r))
    grid = np.unique(np.concatenate(grid))
    below = mu.measure_below(grid)
    cells = np.diff(np.concatenate([below, [mu.total()]]))
    return max(_max_k_segments(cells, k), _max_k_segments(-cells, k))


# ----------------------------------------------------------------------------
# Sampling
# ----------------------------------------------------------------------------


def sample_pp(p: PiecewisePolynomial, rng: np.random.Generator, size: int | None = None):
    """Inverse-CDF sampling from a piecewise polynomial distribution.

    A piece is selected with probability proportional to its mass; the point
    inside the piece is found by bisection on the piece CDF to ``1e-12`` in
    the mapped coordinate.
    """
    if not p.is_distribution:
        raise NotADistribution("sample_pp needs a PiecewisePolynomial flagged is_distribution")
    n = 1 if size is None else int(size)
    masses = np.clip(p.piece_masses(), 0.0, None)
    cum = np.cumsum(masses)
    cum /= cum[-1]
    u_piece = rng.random(n)
    u_inner = rng.random(n)
    which = np.minimum(np.searchsorted(cum, u_piece, side="right"), p.num_pieces - 1)
    out = np.empty(n)
    for j in np.unique(which):
        sel = which == j
        piece = p.pieces[j]
        anti = cheb_antiderivative(piece.coeffs)
        total = cheb_eval(anti, 1.0)
        target = u_inner[sel] * total
        lo = np.full(target.size, -1.0)
        hi = np.full(target.size, 1.0)
        while np.max(hi - lo) > 1e-12:
            mid = 0.5 * (lo + hi)
            below = cheb_eval(anti, mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = inverse_domain_map(piece.interval, 0.5 * (lo + hi))
        out[sel] = np.clip(x, piece.lo, np.nextafter(piece.hi, -np.inf))
    return float(out[0]) if size is None else out

"""LP-based polynomial fitting and DP-based piecewise fitting.

The pipeline for a ``t``-piece degree-``d`` hypothesis:

1. partition the domain into ``z`` cells of roughly equal mass;
2. group every ``d + 1`` cells into one of ``s`` super-intervals;
3. draw ``m`` samples once;
4. for each block of consecutive super-intervals solve an LP whose optimum
   ``tau`` measures how far the empirical masses are from any degree-``d``
   density on that block;
5. find the segmentation into at most ``2t - 1`` blocks minimizing the sum
   of block ``tau`` values by dynamic programming;
6. glue the per-block fits together and renormalize.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy import sparse

from .empirical import (
    EmpiricalDistribution,
    IntervalPartition,
    Sampler,
    approximately_equal_partition,
    conditional_sampler,
    empirical_from_samples,
    find_heavy,
)
from .errors import (
    ExcludedMassTooLarge,
    InvalidParams,
    LpInfeasible,
    LpIterationLimit,
    PreconditionViolated,
    TargetDegenerate,
    TooLargeForOracle,
)
from .lp import LinearProgram, LpStatus, solve
from .poly import ChebPoly, PiecewisePolynomial, domain_map

# taus below this are LP round-off and are snapped to an exact zero
TAU_ZERO = 1e-10


def _ceil(x: float) -> int:
    """Ceiling that ignores representation error, e.g. ``4 / 0.1``."""
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class LpOptions:
    """Grid caps and solver choice for the block LPs.

    Attributes
    ----------
    j_cap, k_cap:
        Caps on the number of points where ``0 <= F <= 1`` and ``F' >= 0``
        are imposed.
    thin_threshold:
        Above this many cells the pairwise constraints are restricted to
        dyadic gaps plus all pairs touching either end.
    solver:
        ``"highs"`` or ``"simplex"`` (the in-house solver, small blocks only).
    """

    j_cap: int = 2000
    k_cap: int = 5000
    thin_threshold: int = 300
    solver: str = "highs"


@dataclass(frozen=True, eq=False)
class SinglePolyFit:
    tau: float
    q: ChebPoly
    f_raw: ChebPoly
    mass: float = 0.0


# ----------------------------------------------------------------------------
# Single-polynomial LP
# ----------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _pairs(z: int, thin_threshold: int) -> tuple[np.ndarray, np.ndarray]:
    if z <= thin_threshold:
        j, k = np.triu_indices(z + 1, k=1)
        return j, k
    pairs = set()
    gap = 1
    while gap <= z:
        for j in range(0, z + 1 - gap):
            pairs.add((j, j + gap))
        gap *= 2
    pairs.update((0, k) for k in range(1, z + 1))
    pairs.update((j, z) for j in range(z))
    arr = np.array(sorted(pairs))
    return arr[:, 0], arr[:, 1]


@functools.lru_cache(maxsize=64)
def _shape_rows(d: int, epsilon: float, j_cap: int, k_cap: int):
    nc = d + 2
    n_j = min(10 * (d + 1) ** 2, j_cap)
    n_k = min(_ceil(10 * (d + 1) ** 2 / epsilon), k_cap)
    VJ = npcheb.chebvander(np.linspace(-1.0, 1.0, n_j), d + 1)
    # derivative of each basis polynomial T_0..T_{d+1}
    der = np.zeros((d + 1, nc))
    for i in range(nc):
        basis = np.zeros(nc)
        basis[i] = 1.0
        dc = npcheb.chebder(basis)
        der[: dc.size, i] = dc
    VK = npcheb.chebvander(np.linspace(-1.0, 1.0, n_k), d) @ der
    return VJ, VK


def build_block_lp(u, e, d: int, epsilon: float, eta: float, options: LpOptions = LpOptions()):
    """Assemble the fitting LP for cells with mapped edges ``u`` and masses ``e``.

    Variables, in order: ``c_0..c_{d+1}`` (Chebyshev coefficients of the CDF
    ``F`` in mapped coordinates), ``w`` and ``y`` (one per cell), ``tau``,
    and ``G_0..G_z`` where ``G_k = sum_{l<k} w_l - (F(u_k) - F(u_0))``. The
    auxiliary ``G`` turns every pairwise constraint into a two-term row.
    """
    u = np.asarray(u, dtype=float)
    e = np.asarray(e, dtype=float)
    z = e.size
    nc = d + 2
    iw, iy, it, ig = nc, nc + z, nc + 2 * z, nc + 2 * z + 1
    n = ig + z + 1
    V = npcheb.chebvander(u, d + 1)
    ph = float(e.sum())
    prefix = np.concatenate([[0.0], np.cumsum(e)])

    blocks_r, blocks_c, blocks_v, lo, hi = [], [], [], [], []
    nrow = 0

    def dense(mat, col0, rlo, rhi):
        nonlocal nrow
        r, c = mat.shape
        blocks_r.append(np.repeat(np.arange(nrow, nrow + r), c))
        blocks_c.append(np.tile(np.arange(col0, col0 + c), r))
        blocks_v.append(mat.ravel())
        lo.append(np.broadcast_to(rlo, (r,)))
        hi.append(np.broadcast_to(rhi, (r,)))
        nrow += r

    def triplets(rows, cols, vals, rlo, rhi, count):
        nonlocal nrow
        blocks_r.append(nrow + rows)
        blocks_c.append(cols)
        blocks_v.append(vals)
        lo.append(np.broadcast_to(rlo, (count,)))
        hi.append(np.broadcast_to(rhi, (count,)))
        nrow += count

    # F(-1) = 0, F(1) = phat(I)
    dense(V[[0, -1]], 0, np.array([0.0, ph]), np.array([0.0, ph]))
    # link rows: G_k - G_{k-1} - w_{k-1} + (V_k - V_{k-1}) c = 0
    kk = np.arange(z)
    triplets(
        np.concatenate([kk, kk, kk, np.repeat(kk, nc)]),
        np.concatenate([ig + kk + 1, ig + kk, iw + kk, np.tile(np.arange(nc), z)]),
        np.concatenate([np.ones(z), -np.ones(z), -np.ones(z), np.diff(V, axis=0).ravel()]),
        0.0, 0.0, z,
    )
    # pairwise deviation rows
    pj, pk = _pairs(z, options.thin_threshold)
    npair = pj.size
    tol = np.sqrt(epsilon * (pk - pj)) * eta
    dp = prefix[pk] - prefix[pj]
    rr = np.arange(npair)
    triplets(
        np.concatenate([rr, rr]),
        np.concatenate([ig + pk, ig + pj]),
        np.concatenate([np.ones(npair), -np.ones(npair)]),
        -tol - dp, tol - dp, npair,
    )
    # sum w = 0
    triplets(np.zeros(z, dtype=int), iw + kk, np.ones(z), 0.0, 0.0, 1)
    # w - y <= 0 and w + y >= 0
    triplets(
        np.concatenate([kk, kk]), np.concatenate([iw + kk, iy + kk]),
        np.concatenate([np.ones(z), -np.ones(z)]), -np.inf, 0.0, z,
    )
    triplets(
        np.concatenate([kk, kk]), np.concatenate([iw + kk, iy + kk]),
        np.ones(2 * z), 0.0, np.inf, z,
    )
    # sum y <= 2 tau (1 + eps)
    triplets(
        np.zeros(z + 1, dtype=int), np.concatenate([iy + kk, [it]]),
        np.concatenate([np.ones(z), [-2.0 * (1.0 + epsilon)]]), -np.inf, 0.0, 1,
    )
    VJ, VK = _shape_rows(d, epsilon, options.j_cap, options.k_cap)
    dense(VJ, 0, 0.0, 1.0)
    dense(VK, 0, 0.0, np.inf)

    A = sparse.csr_matrix(
        (np.concatenate(blocks_v), (np.concatenate(blocks_r), np.concatenate(blocks_c))),
        shape=(nrow, n),
    )
    cost = np.zeros(n)
    cost[it] = 1.0
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    bound = math.sqrt(2.0) * (1.0 + epsilon)
    lb[:nc], ub[:nc] = -bound, bound
    lb[iy:it + 1] = 0.0
    lb[ig] = ub[ig] = 0.0
    return LinearProgram(cost, A, np.concatenate(lo), np.concatenate(hi), lb, ub)


def constant_tau_lower_bound(u, e, epsilon: float, eta: float, thin_threshold: int = 300) -> float:
    """Lower bound on the block LP optimum when ``d = 0``.

    With ``d = 0`` the fitted CDF is the straight line from 0 to
    ``phat(I)``. Writing ``D`` for the gap between the empirical and fitted
    CDFs, a pairwise row forces ``W_k - W_j >= D_k - D_j - tol``. Along any
    increasing chain of indices the path ``W`` (which starts and ends at 0)
    must climb at least the summed excesses of its rising pairs and come
    back down, so ``sum |w|`` is at least twice the best such chain; the
    same holds for falling pairs. The best chain is a longest-path DP. A
    zero bound means ``w = 0`` is feasible, so the optimum is exactly zero.
    """
    u = np.asarray(u, dtype=float)
    e = np.asarray(e, dtype=float)
    z = e.size
    prefix = np.concatenate([[0.0], np.cumsum(e)])
    gap = prefix - prefix[-1] * (u - u[0]) / (u[-1] - u[0])
    pj, pk = _pairs(z, thin_threshold)
    diff = gap[pk] - gap[pj]
    tol = np.sqrt(epsilon * (pk - pj)) * eta
    if not np.any(np.abs(diff) > tol):
        return 0.0
    # _pairs lists pairs sorted by (j, k); regroup them by right end k
    order = np.argsort(pk, kind="stable")
    starts = np.searchsorted(pk[order], np.arange(z + 2))
    best = 0.0
    for sign in (1.0, -1.0):
        exc = np.maximum(sign * diff - tol, 0.0)[order]
        left = pj[order]
        chain = np.zeros(z + 1)
        for k in range(1, z + 1):
            lo, hi = starts[k], starts[k + 1]
            chain[k] = max(chain[k - 1], float(np.max(chain[left[lo:hi]] + exc[lo:hi], initial=0.0)))
        best = max(best, chain[z])
    return best / (1.0 + epsilon)


def _check_precondition(z: int, epsilon: float, eta: float):
    if math.sqrt(epsilon * z) * eta > 0.5 * epsilon * (1.0 + 1e-12):
        raise PreconditionViolated(
            f"sqrt(eps*z)*eta = {math.sqrt(epsilon * z) * eta:.4g} exceeds eps/2 = {epsilon / 2:.4g}"
        )


def _finish(interval, f: np.ndarray, tau: float, ph: float, epsilon: float) -> SinglePolyFit:
    q = (1.0 - epsilon) * f
    q[0] += 0.5 * epsilon * ph
    return SinglePolyFit(tau, ChebPoly(interval, q), ChebPoly(interval, f), ph)


def _fit_cells(interval, u, e, d, epsilon, eta, options: LpOptions) -> SinglePolyFit:
    z = e.size
    _check_precondition(z, epsilon, eta)
    ph = float(np.sum(e))
    if ph == 0.0:
        zero = ChebPoly(interval, np.zeros(d + 1))
        return SinglePolyFit(0.0, zero, zero, 0.0)
    if d == 0 and constant_tau_lower_bound(u, e, epsilon, eta, options.thin_threshold) == 0.0:
        return _finish(interval, np.array([0.5 * ph]), 0.0, ph, epsilon)
    lp = build_block_lp(u, e, d, epsilon, eta, options)
    sol = solve(lp, method=options.solver)
    if sol.status is LpStatus.Infeasible:
        raise LpInfeasible(f"block LP on {interval} is infeasible")
    if sol.status is LpStatus.IterationLimit:
        raise LpIterationLimit(f"block LP on {interval} hit the iteration limit")
    if sol.status is not LpStatus.Optimal:
        raise LpInfeasible(f"block LP on {interval} ended with status {sol.status.value}")
    nc = d + 2
    c = sol.x[:nc]
    tau = float(sol.x[nc + 2 * z])
    tau = 0.0 if tau < TAU_ZERO else tau
    if d == 0:
        # the endpoint constraints pin a constant density exactly
        return _finish(interval, np.array([0.5 * ph]), tau, ph, epsilon)
    f = npcheb.chebder(c)
    f = np.pad(f, (0, d + 1 - f.size))
    # the endpoint constraints hold only to solver tolerance; pin the mass exactly
    total = 2.0 * f[0]
    if total != 0.0:
        f = f * (ph / total)
    return _finish(interval, f, tau, ph, epsilon)


def find_single_polynomial(
    d: int,
    epsilon: float,
    eta: float,
    partition: IntervalPartition,
    phat: EmpiricalDistribution,
    options: LpOptions = LpOptions(),
) -> SinglePolyFit:
    """Fit one degree-``d`` subdistribution to the empirical masses on ``partition``.

    Parameters
    ----------
    d : int
        Degree of the output density.
    epsilon : float
        Accuracy parameter in ``(0, 1/2)``.
    eta : float
        Cell-mass scale entering the pairwise tolerances.
    partition : IntervalPartition
        Cells of the interval ``I`` being fitted.
    phat : EmpiricalDistribution
        Samples; only those inside ``I`` matter.

    Returns
    -------
    SinglePolyFit
        ``tau`` is the LP optimum, ``f_raw`` the derivative of the fitted
        CDF and ``q = eps * phat(I) / |I| + (1 - eps) * f_raw``.

    Raises
    ------
    PreconditionViolated
        If ``sqrt(eps * z) * eta > eps / 2``.
    LpInfeasible, LpIterationLimit
        Solver failures are surfaced, never swallowed.
    """
    _check_eps(epsilon)
    bp = partition.breakpoints
    interval = partition.domain
    return _fit_cells(interval, domain_map(interval, bp), phat.masses(bp), d, epsilon, eta, options)


# ----------------------------------------------------------------------------
# Dynamic program over block segmentations
# ----------------------------------------------------------------------------


@dataclass(eq=False)
class DpTable:
    """``T[i, j]``: best total over ``i`` blocks covering super-intervals ``0..j-1``.

    Entries never needed by the lazy evaluation stay ``nan``; ``H[i, j]`` is
    the start ``l`` of the last block (``-1`` if unset).
    """

    T: np.ndarray
    H: np.ndarray
    tau_evaluations: int = 0
    taus: dict = field(default_factory=dict)

    def summary(self) -> dict:
        vals = np.array([v for v in self.taus.values()], dtype=float)
        finite = vals[np.isfinite(vals)]
        return {
            "blocks_evaluated": int(vals.size),
            "tau_evaluations": int(self.tau_evaluations),
            "infeasible_blocks": int(np.sum(~np.isfinite(vals))),
            "tau_min": float(finite.min()) if finite.size else None,
            "tau_median": float(np.median(finite)) if finite.size else None,
            "tau_max": float(finite.max()) if finite.size else None,
            "final_column": [None if np.isnan(v) else float(v) for v in self.T[1:, -1]],
        }


@dataclass(frozen=True, eq=False)
class DpResult:
    value: float
    num_pieces: int
    blocks: tuple[tuple[int, int], ...]
    table: DpTable


def dp_segment(
    tau: Callable[[int, int], float] | np.ndarray,
    s: int,
    max_pieces: int,
    cache: bool = True,
    lazy: bool = True,
    lower_bound: Callable[[int, int], float] | None = None,
) -> DpResult:
    """Minimize the summed block cost over segmentations of ``0..s`` into at most ``max_pieces`` blocks.

    ``tau(l, j)`` is the cost of the block of super-intervals ``l..j-1``; it
    must be nonnegative (``inf`` marks an impossible block). Ties go to the
    smallest ``l`` and then to the fewest pieces, so the output does not
    depend on ``lazy`` or ``cache``. The lazy mode skips candidates that
    cannot beat the incumbent and stops once a zero-cost segmentation is
    found, which saves most block evaluations when costs are often zero.
    An optional ``lower_bound(l, j) <= tau(l, j)`` lets it skip more
    candidates without changing the result.
    """
    if s < 1 or max_pieces < 1:
        raise InvalidParams("need s >= 1 and max_pieces >= 1")
    if not callable(tau):
        mat = np.asarray(tau, dtype=float)
        tau = lambda l, j: float(mat[l, j])  # noqa: E731
    T = np.full((max_pieces + 1, s + 1), np.nan)
    H = np.full((max_pieces + 1, s + 1), -1, dtype=int)
    T[0, :] = np.inf
    T[0, 0] = 0.0
    table = DpTable(T, H)

    def cost(l: int, j: int) -> float:
        key = (l, j)
        if cache and key in table.taus:
            return table.taus[key]
        val = float(tau(l, j))
        table.tau_evaluations += 1
        if val < 0.0:
            val = 0.0
        table.taus[key] = val
        return val

    def entry(i: int, j: int) -> float:
        if not np.isnan(T[i, j]):
            return T[i, j]
        best, arg = np.inf, -1
        # the i-1 earlier blocks need at least i-1 super-intervals
        if lazy and lower_bound is not None:
            # visit candidates by optimistic total so a tight incumbent appears early
            keyed = []
            for l in range(i - 1, j):
                prev = entry(i - 1, l)
                if np.isfinite(prev):
                    keyed.append((prev + lower_bound(l, j), l, prev))
            keyed.sort()
            for optimistic, l, prev in keyed:
                if optimistic > best:
                    break
                if optimistic == best and l > arg:
                    continue
                cand = prev + cost(l, j)
                if cand < best or (cand == best and l < arg):
                    best, arg = cand, l
        else:
            for l in range(i - 1, j):
                prev = entry(i - 1, l)
                if lazy and prev >= best:
                    continue
                if not np.isfinite(prev):
                    continue
                cand = prev + cost(l, j)
                if cand < best:
                    best, arg = cand, l
        T[i, j] = best
        H[i, j] = arg
        return best

    if not lazy:
        for i in range(1, max_pieces + 1):
            for j in range(s + 1):
                entry(i, j)

    best, best_i = np.inf, -1
    for i in range(1, min(max_pieces, s) + 1):
        val = entry(i, s)
        if val < best:
            best, best_i = val, i
        if lazy and best == 0.0:
            break
    blocks = []
    if best_i > 0:
        j = s
        for i in range(best_i, 0, -1):
            l = int(H[i, j])
            blocks.append((l, j))
            j = l
    return DpResult(best, best_i, tuple(reversed(blocks)), table)


def dp_bruteforce_oracle(block_taus: np.ndarray, num_pieces_max: int) -> float:
    """Exhaustive minimum over all segmentations; for testing :func:`dp_segment`.

    ``block_taus[l, j]`` is the cost of block ``l..j-1``. Sums are
    accumulated left to right, matching the DP's evaluation order.

    Raises
    ------
    TooLargeForOracle
        If ``s > 14``.
    """
    taus = np.asarray(block_taus, dtype=float)
    s = taus.shape[0] - 1
    if s > 14:
        raise TooLargeForOracle(f"s = {s} > 14")
    best = np.inf
    for pieces in range(1, min(num_pieces_max, s) + 1):
        for cuts in combinations(range(1, s), pieces - 1):
            edges = (0, *cuts, s)
            total = 0.0
            for l, j in zip(edges[:-1], edges[1:]):
                total = total + taus[l, j]
            best = min(best, total)
    return float(best)


# ----------------------------------------------------------------------------
# Learners
# ----------------------------------------------------------------------------


def _check_eps(epsilon: float):
    if not 0.0 < epsilon < 0.5:
        raise InvalidParams(f"epsilon must lie in (0, 0.5), got {epsilon}")


def _check_td(t: int, d: int):
    if int(t) != t or t < 1:
        raise InvalidParams(f"t must be a positive integer, got {t}")
    if int(d) != d or d < 0:
        raise InvalidParams(f"d must be a nonnegative integer, got {d}")


def num_cells(t: int, d: int, epsilon: float) -> int:
    """``ceil(4 t (d+1) / eps)`` rounded up to a multiple of ``d + 1``."""
    n = _ceil(4.0 * t * (d + 1) / epsilon)
    return (d + 1) * _ceil(n / (d + 1))


def sample_size(t: int, d: int, epsilon: float) -> int:
    """``ceil(32 t (d+1) ln(4 t (d+1) / eps) / eps^2)``."""
    k = t * (d + 1)
    return _ceil(32.0 * k * math.log(4.0 * k / epsilon) / epsilon**2)


@dataclass(frozen=True, eq=False)
class PiecewiseFit:
    """A learned hypothesis with the bookkeeping needed for run reports."""

    hypothesis: PiecewisePolynomial
    tau: float
    m: int
    z: int
    s: int
    blocks: tuple[tuple[float, float], ...]
    table: DpTable
    excluded: tuple[float, ...] = ()

    def report(self) -> dict:
        return {
            "m": self.m,
            "z": self.z,
            "s": self.s,
            "tau": self.tau,
            "pieces": self.hypothesis.num_pieces,
            "excluded_atoms": list(self.excluded),
            "tau_table_summary": self.table.summary(),
        }


def learn_wb_piecewise_poly(
    sampler: Sampler,
    t: int,
    d: int,
    epsilon: float,
    rng: np.random.Generator,
    *,
    domain: tuple[float, float] = (-1.0, 1.0),
    m: int | None = None,
    options: LpOptions = LpOptions(),
    cache: bool = True,
    lazy: bool = True,
    full_output: bool = False,
):
    """Learn a ``(2t-1)``-piece degree-``d`` hypothesis for an atom-free target.

    Parameters
    ----------
    sampler : callable
        ``sampler(rng, size)`` draws i.i.d. points of ``domain``.
    t, d : int
        Number of pieces and degree of the target class.
    epsilon : float
        Accuracy parameter in ``(0, 1/2)``.
    rng : numpy.random.Generator
        Source of all randomness.
    domain : tuple of float
        Half-open support ``[lo, hi)``.
    m : int, optional
        Override of the number of samples used for the fit.
    options : LpOptions
        Grid caps and solver.
    cache, lazy : bool
        Memoize block LPs; skip DP candidates that cannot win. Neither
        changes the output.
    full_output : bool
        Return a :class:`PiecewiseFit` instead of the bare hypothesis.
    """
    _check_td(t, d)
    _check_eps(epsilon)
    n = num_cells(t, d, epsilon)
    partition = approximately_equal_partition(sampler, 1.0 / n, rng, domain, num_intervals=n)
    if m is None:
        m = sample_size(t, d, epsilon)
    phat = empirical_from_samples(sampler(rng, int(m)))
    fine = partition.breakpoints
    e_all = phat.masses(fine)
    z = e_all.size
    edges = np.arange(0, z + 1, d + 1)
    if edges[-1] != z:
        edges = np.append(edges, z)
    s = edges.size - 1
    eta = float(e_all.sum()) / z
    fits: dict[tuple[int, int], SinglePolyFit] = {}

    def fit_block(l: int, j: int) -> SinglePolyFit:
        if cache and (l, j) in fits:
            return fits[(l, j)]
        a, b = edges[l], edges[j]
        interval = (float(fine[a]), float(fine[b]))
        u = domain_map(interval, fine[a : b + 1])
        fit = _fit_cells(interval, u, e_all[a:b], d, epsilon, eta, options)
        if cache:
            fits[(l, j)] = fit
        return fit

    def block_tau(l: int, j: int) -> float:
        try:
            return fit_block(l, j).tau
        except LpInfeasible:
            return np.inf

    bound = None
    if d == 0:
        @functools.lru_cache(maxsize=None)
        def bound(l: int, j: int) -> float:
            a, b = edges[l], edges[j]
            _check_precondition(b - a, epsilon, eta)
            return constant_tau_lower_bound(fine[a : b + 1], e_all[a:b], epsilon, eta, options.thin_threshold)

    res = dp_segment(block_tau, s, 2 * t - 1, cache=cache, lazy=lazy, lower_bound=bound)
    if not np.isfinite(res.value):
        raise LpInfeasible("every segmentation contains an infeasible block")
    pieces = [fit_block(l, j).q for l, j in res.blocks]
    bp = np.array([pieces[0].lo] + [p.hi for p in pieces])
    raw = PiecewisePolynomial(bp, tuple(pieces))
    hypothesis = raw.normalized()
    if not full_output:
        return hypothesis
    return PiecewiseFit(
        hypothesis=hypothesis,
        tau=float(res.value),
        m=int(m),
        z=int(z),
        s=int(s),
        blocks=tuple((p.lo, p.hi) for p in pieces),
        table=res.table,
    )


def learn_wb_single_poly(sampler: Sampler, d: int, epsilon: float, rng: np.random.Generator, **kwargs):
    """One degree-``d`` piece; the ``t = 1`` case of :func:`learn_wb_piecewise_poly`."""
    return learn_wb_piecewise_poly(sampler, 1, d, epsilon, rng, **kwargs)


def learn_piecewise_poly(
    sampler: Sampler,
    t: int,
    d: int,
    epsilon: float,
    rng: np.random.Generator,
    **kwargs,
):
    """Learn a piecewise polynomial hypothesis for an arbitrary target.

    Heavy atoms (mass of order ``eps / (t (d+1))``) are detected first on an
    independent child stream and removed by rejection; the remaining
    distribution is learned with :func:`learn_wb_piecewise_poly`. Keyword
    arguments are forwarded.

    Raises
    ------
    TargetDegenerate
        If the detected atoms carry essentially all of the mass.
    """
    _check_td(t, d)
    _check_eps(epsilon)
    gamma = epsilon / (8.0 * t * (d + 1))
    (child,) = rng.spawn(1)
    heavy = find_heavy(sampler, gamma, child)
    cond = conditional_sampler(sampler, heavy)
    try:
        out = learn_wb_piecewise_poly(cond, t, d, epsilon, rng, **kwargs)
    except ExcludedMassTooLarge as exc:
        raise TargetDegenerate(f"atoms {sorted(heavy)} carry almost all mass") from exc
    if kwargs.get("full_output"):
        out = PiecewiseFit(
            out.hypothesis, out.tau, out.m, out.z, out.s, out.blocks, out.table,
            tuple(sorted(heavy)),
        )
    return out


def learn_mixture(sampler: Sampler, k: int, t: int, d: int, epsilon: float, rng, **kwargs):
    """Learn a ``k``-mixture of ``t``-piece distributions as one ``k t``-piece target."""
    if int(k) != k or k < 1:
        raise InvalidParams(f"k must be a positive integer, got {k}")
    return learn_piecewise_poly(sampler, k * t, d, epsilon, rng, **kwargs)

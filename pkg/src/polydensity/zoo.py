"""Synthetic target distributions and constructive structural approximations.

Every target bundles a vectorized density, an exact CDF, an exact sampler
``sampler(rng, size)``, its atoms and the points where the density is not
smooth (used to split quadrature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InvalidParams, NotLogConcaveDetected
from .poly import ChebPoly, PiecewisePolynomial, cheb_interpolate, cheb_nodes, inverse_domain_map, sample_pp
from .quadrature import adaptive_integrate


@dataclass(frozen=True, eq=False)
class TargetDistribution:
    name: str
    density: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray] | None
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    atoms: tuple[tuple[float, float], ...] = ()
    nonsmooth_points: tuple[float, ...] = ()
    domain: tuple[float, float] = (-1.0, 1.0)
    pp: PiecewisePolynomial | None = None
    # finite window used for checks when the domain is unbounded
    core: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((float(x), float(m)) for x, m in self.atoms))
        object.__setattr__(self, "nonsmooth_points", tuple(float(x) for x in self.nonsmooth_points))
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        if self.cdf is None:
            object.__setattr__(self, "cdf", self._quadrature_cdf)
        mass = self.continuous_mass() + sum(m for _, m in self.atoms)
        if abs(mass - 1.0) > 1e-8:
            raise InvalidParams(f"target {self.name!r} has total mass {mass!r}")

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.sampler(rng, size)

    def _window(self) -> tuple[float, float]:
        lo, hi = self.domain
        if self.core is not None:
            lo = self.core[0] if not np.isfinite(lo) else lo
            hi = self.core[1] if not np.isfinite(hi) else hi
        return lo, hi

    def _split_points(self, lo: float, hi: float) -> list[float]:
        pts = [lo, hi] + [x for x in self.nonsmooth_points if lo < x < hi]
        return sorted(set(pts))

    def continuous_mass(self) -> float:
        lo, hi = self._window()
        mass = adaptive_integrate(self.density, self._split_points(lo, hi), rel_tol=1e-11, abs_tol=1e-14)
        if self.core is not None and self.cdf is not self._quadrature_cdf:
            # tails beyond the finite window, taken from the exact CDF
            if not np.isfinite(self.domain[0]):
                mass += float(self.cdf(lo))
            if not np.isfinite(self.domain[1]):
                mass += 1.0 - float(self.cdf(hi)) - sum(m for _, m in self.atoms)
        return mass

    def _quadrature_cdf(self, x):
        lo, _ = self._window()
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x)
        out = np.empty(flat.shape)
        for i, xi in enumerate(flat):
            upper = min(xi, self._window()[1])
            val = 0.0
            if upper > lo:
                val = adaptive_integrate(self.density, self._split_points(lo, upper), rel_tol=1e-10)
            val += sum(m for a, m in self.atoms if a <= xi)
            out[i] = val
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


# ----------------------------------------------------------------------------
# Truncation helper
# ----------------------------------------------------------------------------


def _truncated(name, pdf, cdf, ppf, lo, hi, nonsmooth=(), core=None) -> TargetDistribution:
    """Restrict a distribution given by ``pdf``/``cdf``/``ppf`` to ``[lo, hi)``."""
    c_lo = float(cdf(lo)) if np.isfinite(lo) else 0.0
    c_hi = float(cdf(hi)) if np.isfinite(hi) else 1.0
    z = c_hi - c_lo
    if not z > 0:
        raise InvalidParams(f"{name}: truncation [{lo}, {hi}) carries no mass")

    def density(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= lo) & (x < hi)
        return np.where(inside, pdf(np.where(inside, x, 0.5 * (lo + hi) if np.isfinite(lo + hi) else 0.0)) / z, 0.0)

    def tcdf(x):
        x = np.asarray(x, dtype=float)
        return np.clip((cdf(np.clip(x, lo, hi)) - c_lo) / z, 0.0, 1.0)

    def sampler(rng, size):
        u = c_lo + rng.random(size) * z
        x = ppf(u)
        return np.clip(x, lo, np.nextafter(hi, -np.inf)) if np.isfinite(hi) else np.maximum(x, lo)

    return TargetDistribution(
        name, density, tcdf, sampler, (), tuple(nonsmooth), (lo, hi), core=core
    )


def _gaussian_parts(mu: float, sigma: float):
    pdf = lambda x: np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))  # noqa: E731
    cdf = lambda x: ndtr((np.asarray(x, dtype=float) - mu) / sigma)  # noqa: E731
    ppf = lambda u: mu + sigma * ndtri(u)  # noqa: E731
    return pdf, cdf, ppf


def _laplace_parts(mu: float, b: float):
    def pdf(x):
        return np.exp(-np.abs(x - mu) / b) / (2 * b)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < mu, 0.5 * np.exp((x - mu) / b), 1 - 0.5 * np.exp(-(x - mu) / b))

    def ppf(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < 0.5, mu + b * np.log(2 * u), mu - b * np.log(2 * (1 - u)))

    return pdf, cdf, ppf


def _exponential_parts(rate: float):
    pdf = lambda x: rate * np.exp(-rate * np.maximum(x, 0.0))  # noqa: E731
    cdf = lambda x: -np.expm1(-rate * np.maximum(np.asarray(x, dtype=float), 0.0))  # noqa: E731
    ppf = lambda u: -np.log1p(-np.asarray(u, dtype=float)) / rate  # noqa: E731
    return pdf, cdf, ppf


def _power_parts(a: float, c: float):
    """Unnormalized ``(x + c)^(-a)`` for ``x >= 0``."""
    if a == 1.0:
        cdf = lambda x: np.log((np.maximum(x, 0.0) + c) / c)  # noqa: E731
        ppf = lambda v: c * np.exp(v) - c  # noqa: E731
    else:
        cdf = lambda x: (c ** (1 - a) - (np.maximum(x, 0.0) + c) ** (1 - a)) / (a - 1)  # noqa: E731
        ppf = lambda v: (c ** (1 - a) - (a - 1) * v) ** (1 / (1 - a)) - c  # noqa: E731
    pdf = lambda x: (x + c) ** (-a)  # noqa: E731
    return pdf, cdf, ppf


# ----------------------------------------------------------------------------
# Piecewise polynomial targets
# ----------------------------------------------------------------------------


def piecewise_poly_target(p: PiecewisePolynomial, name: str = "piecewise_poly") -> TargetDistribution:
    """Target whose density is a piecewise polynomial distribution."""
    if not p.is_distribution:
        p = p.normalized()
    if p.degree == 0:
        masses = np.clip(p.piece_masses(), 0.0, None)
        probs = masses / masses.sum()
        lows, widths = p.breakpoints[:-1], np.diff(p.breakpoints)

        def sampler(rng, size):
            cell = rng.choice(probs.size, size=size, p=probs)
            x = lows[cell] + rng.random(size) * widths[cell]
            return np.minimum(x, np.nextafter(p.breakpoints[cell + 1], -np.inf))
    else:
        def sampler(rng, size):
            return sample_pp(p, rng, size)

    return TargetDistribution(
        name, p, p.cdf, sampler, (), tuple(p.breakpoints[1:-1]), (p.lo, p.hi), pp=p
    )


def histogram_pp(breakpoints, heights) -> PiecewisePolynomial:
    bp = np.asarray(breakpoints, dtype=float)
    h = np.asarray(heights, dtype=float)
    coeffs = [[0.5 * hj * w] for hj, w in zip(h, np.diff(bp))]
    return PiecewisePolynomial.from_coefficients(bp, coeffs).normalized()


def piecewise_linear_pp(breakpoints, knots) -> PiecewisePolynomial:
    """Continuous piecewise linear density through ``knots`` at ``breakpoints``."""
    bp = np.asarray(breakpoints, dtype=float)
    v = np.asarray(knots, dtype=float)
    if v.size != bp.size:
        raise InvalidParams("need one knot value per breakpoint")
    coeffs = [_secant_coeffs(v[j], v[j + 1], bp[j + 1] - bp[j]) for j in range(bp.size - 1)]
    return PiecewisePolynomial.from_coefficients(bp, coeffs).normalized()


def _secant_coeffs(v0: float, v1: float, width: float) -> list[float]:
    """Mapped coefficients of the line from ``v0`` to ``v1`` across ``width``."""
    return [0.25 * width * (v0 + v1), 0.25 * width * (v1 - v0)]


# ----------------------------------------------------------------------------
# Factory
# ----------------------------------------------------------------------------

_UNBOUNDED_OK = {"truncated_gaussian", "gaussian_mixture", "truncated_laplace", "truncated_exponential"}


def make_target(kind: str, params: dict | None = None, truncation="default") -> TargetDistribution:
    """Build a target distribution.

    Parameters
    ----------
    kind : str
        One of ``uniform``, ``triangle``, ``truncated_gaussian``,
        ``gaussian_mixture``, ``truncated_laplace``, ``half_circle``,
        ``truncated_exponential``, ``convex_decreasing``,
        ``k_monotone_power``, ``atom_mixture``, ``piecewise_poly``,
        ``histogram``, ``piecewise_linear`` or ``hard_instance``.
    params : dict
        Kind-specific parameters.
    truncation : pair of float or None
        Support ``[lo, hi)``. ``None``, or ``None`` for one end, leaves
        Gaussian, Laplace and exponential targets unbounded. Omitted means ``[-1, 1)`` (``[0, 1)`` for the one-sided
        families).

    Raises
    ------
    InvalidParams
        On unknown kinds or invalid parameters.
    """
    params = dict(params or {})
    one_sided = kind in ("truncated_exponential", "convex_decreasing", "k_monotone_power")
    if isinstance(truncation, str) and truncation == "default":
        truncation = (0.0, 1.0) if one_sided else (-1.0, 1.0)
    if truncation is None:
        if kind not in _UNBOUNDED_OK:
            raise InvalidParams(f"{kind} needs a finite truncation")
        lo, hi = -np.inf, np.inf
    else:
        lo = -np.inf if truncation[0] is None else float(truncation[0])
        hi = np.inf if truncation[1] is None else float(truncation[1])
        if not (np.isfinite(lo) and np.isfinite(hi)) and kind not in _UNBOUNDED_OK:
            raise InvalidParams(f"{kind} needs a finite truncation")
        if not lo < hi:
            raise InvalidParams(f"truncation [{lo}, {hi}) is empty")
    try:
        return _BUILDERS[kind](params, lo, hi)
    except KeyError as exc:
        if kind not in _BUILDERS:
            raise InvalidParams(f"unknown target kind {kind!r}") from exc
        raise InvalidParams(f"{kind}: missing parameter {exc}") from exc


def _positive(params, key, default=None):
    val = params.get(key, default)
    if val is None:
        raise KeyError(key)
    val = float(val)
    if not val > 0:
        raise InvalidParams(f"{key} must be positive, got {val}")
    return val


def _build_uniform(params, lo, hi):
    return piecewise_poly_target(PiecewisePolynomial.constant(lo, hi), "uniform")


def _build_triangle(params, lo, hi):
    return piecewise_poly_target(piecewise_linear_pp([lo, hi], [0.0, 2.0 / (hi - lo)]), "triangle")


def _build_gaussian(params, lo, hi):
    mu = float(params.get("mu", 0.0))
    sigma = _positive(params, "sigma", 1.0)
    pdf, cdf, ppf = _gaussian_parts(mu, sigma)
    core = (mu - 40 * sigma, mu + 40 * sigma)
    return _truncated("truncated_gaussian", pdf, cdf, ppf, lo, hi, core=core)


def _build_gaussian_mixture(params, lo, hi):
    comps = [(float(w), float(m), float(s)) for w, m, s in params["components"]]
    w = np.array([c[0] for c in comps])
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-9 or any(c[2] <= 0 for c in comps):
        raise InvalidParams("components need weights >= 0 summing to 1 and sigma > 0")
    parts = [_gaussian_parts(m, s) for _, m, s in comps]
    inside = np.array([
        (float(cdf(hi)) if np.isfinite(hi) else 1.0) - (float(cdf(lo)) if np.isfinite(lo) else 0.0)
        for _, cdf, _ in parts
    ])
    z = float(w @ inside)
    if not z > 0:
        raise InvalidParams("gaussian_mixture: truncation carries no mass")

    def density(x):
        x = np.asarray(x, dtype=float)
        val = sum(wi * pdf(x) for wi, (pdf, _, _) in zip(w, parts)) / z
        return np.where((x >= lo) & (x < hi), val, 0.0)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        val = sum(
            wi * (c(x) - (float(c(lo)) if np.isfinite(lo) else 0.0)) for wi, (_, c, _) in zip(w, parts)
        )
        return np.clip(val / z, 0.0, 1.0)

    probs = w * inside / z
    singles = [_truncated("component", p, c, q, lo, hi) for p, c, q in parts]

    def sampler(rng, size):
        which = rng.choice(len(comps), size=size, p=probs)
        out = np.empty(size)
        for i in range(len(comps)):
            sel = which == i
            out[sel] = singles[i].sampler(rng, int(sel.sum()))
        return out

    mus = [m for _, m, _ in comps]
    sig = max(s for _, _, s in comps)
    core = (min(mus) - 40 * sig, max(mus) + 40 * sig)
    return TargetDistribution("gaussian_mixture", density, cdf, sampler, (), (), (lo, hi), core=core)


def _build_laplace(params, lo, hi):
    mu = float(params.get("mu", 0.0))
    b = _positive(params, "b", 1.0)
    pdf, cdf, ppf = _laplace_parts(mu, b)
    kink = (mu,) if lo < mu < hi else ()
    return _truncated("truncated_laplace", pdf, cdf, ppf, lo, hi, kink, core=(mu - 60 * b, mu + 60 * b))


def _build_exponential(params, lo, hi):
    rate = _positive(params, "rate", 1.0)
    if lo < 0:
        raise InvalidParams("truncated_exponential lives on [0, inf)")
    pdf, cdf, ppf = _exponential_parts(rate)
    return _truncated("truncated_exponential", pdf, cdf, ppf, lo, hi, core=(0.0, 60.0 / rate))


def _build_half_circle(params, lo, hi):
    half = 0.5 * (hi - lo)

    def density(x):
        x = np.asarray(x, dtype=float)
        v = (x - lo) / half - 1.0
        inside = (x >= lo) & (x < hi)
        return np.where(inside, (2 / math.pi) * np.sqrt(np.clip(1 - v * v, 0.0, None)) / half, 0.0)

    def cdf(x):
        v = np.clip((np.asarray(x, dtype=float) - lo) / half - 1.0, -1.0, 1.0)
        return (v * np.sqrt(1 - v * v) + np.arcsin(v)) / math.pi + 0.5

    def sampler(rng, size):
        r = np.sqrt(rng.random(size))
        v = r * np.cos(2 * math.pi * rng.random(size))
        return np.minimum(lo + (v + 1.0) * half, np.nextafter(hi, -np.inf))

    return TargetDistribution("half_circle", density, cdf, sampler, (), (), (lo, hi))


def _build_convex_decreasing(params, lo, hi):
    a = _positive(params, "a", 2.0)
    c = _positive(params, "c", 0.1)
    if lo < 0:
        raise InvalidParams("convex_decreasing lives on [0, inf)")
    pdf, cdf, ppf = _power_parts(a, c)
    return _truncated("convex_decreasing", pdf, cdf, ppf, lo, hi)


def _build_k_monotone(params, lo, hi):
    k = int(params.get("k", 2))
    if k < 1:
        raise InvalidParams("k must be >= 1")
    width = hi - lo
    pdf = lambda x: (1 - (x - lo) / width) ** k  # noqa: E731
    cdf = lambda x: (1 - (1 - (np.asarray(x, dtype=float) - lo) / width) ** (k + 1)) * width / (k + 1)  # noqa: E731
    ppf = lambda v: lo + width * (1 - (1 - v * (k + 1) / width) ** (1 / (k + 1)))  # noqa: E731
    return _truncated("k_monotone_power", pdf, cdf, ppf, lo, hi)


def _build_atom_mixture(params, lo, hi):
    base_spec = params["base"]
    base = target_from_spec(base_spec)
    atoms = tuple((float(x), float(m)) for x, m in params["atoms"])
    total = sum(m for _, m in atoms)
    if any(m <= 0 for _, m in atoms) or total >= 1:
        raise InvalidParams("atom masses must be positive and sum below 1")
    locs = np.array([x for x, _ in atoms])
    masses = np.array([m for _, m in atoms])
    scale = 1.0 - total

    def density(x):
        return scale * base.density(x)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        jumps = np.sum(masses * (locs <= x[..., None]), axis=-1)
        return scale * base.cdf(x) + jumps

    probs = np.concatenate([masses, [scale]])

    def sampler(rng, size):
        which = rng.choice(probs.size, size=size, p=probs)
        out = locs[np.minimum(which, locs.size - 1)].astype(float)
        sel = which == locs.size
        out[sel] = base.sampler(rng, int(sel.sum()))
        return out

    return TargetDistribution(
        "atom_mixture", density, cdf, sampler, atoms, base.nonsmooth_points, base.domain, core=base.core
    )


def _build_piecewise_poly(params, lo, hi):
    return piecewise_poly_target(PiecewisePolynomial.from_dict(params["pp"]))


def _build_histogram(params, lo, hi):
    return piecewise_poly_target(histogram_pp(params["breakpoints"], params["heights"]), "histogram")


def _build_piecewise_linear(params, lo, hi):
    return piecewise_poly_target(
        piecewise_linear_pp(params["breakpoints"], params["knots"]), "piecewise_linear"
    )


def _build_hard(params, lo, hi):
    return make_hard_instance(int(params["k"]), float(params["epsilon"]), params["b"])


_BUILDERS = {
    "uniform": _build_uniform,
    "triangle": _build_triangle,
    "truncated_gaussian": _build_gaussian,
    "gaussian_mixture": _build_gaussian_mixture,
    "truncated_laplace": _build_laplace,
    "half_circle": _build_half_circle,
    "truncated_exponential": _build_exponential,
    "convex_decreasing": _build_convex_decreasing,
    "k_monotone_power": _build_k_monotone,
    "atom_mixture": _build_atom_mixture,
    "piecewise_poly": _build_piecewise_poly,
    "histogram": _build_histogram,
    "piecewise_linear": _build_piecewise_linear,
    "hard_instance": _build_hard,
}
TARGET_KINDS = tuple(_BUILDERS)


def target_from_spec(spec: dict) -> TargetDistribution:
    """Parse ``{"kind": ..., "params": {...}, "truncation": [lo, hi] | null}``."""
    if "kind" not in spec:
        raise InvalidParams("target spec needs a 'kind'")
    truncation = spec["truncation"] if "truncation" in spec else "default"
    return make_target(spec["kind"], spec.get("params"), truncation)


# ----------------------------------------------------------------------------
# Hard instances
# ----------------------------------------------------------------------------


def hard_instance_pp(k: int, epsilon: float, b: Sequence[int]) -> PiecewisePolynomial:
    b = np.asarray(b)
    if k < 1 or b.shape != (k,) or not np.all(np.isin(b, (-1, 1))):
        raise InvalidParams("b must be a +-1 vector of length k")
    if not 0 < epsilon < 0.5:
        raise InvalidParams("epsilon must lie in (0, 1/2)")
    base = 0.1 / (2 * k)
    heights = np.empty(2 * k)
    heights[0::2] = base + 0.9 * (1 + b * epsilon) / (2 * k)
    heights[1::2] = base + 0.9 * (1 - b * epsilon) / (2 * k)
    bp = np.arange(2 * k + 1, dtype=float)
    # unit-width cells: mapped coefficient is half the height
    return PiecewisePolynomial.from_coefficients(bp, [[0.5 * h] for h in heights], True, True)


def make_hard_instance(k: int, epsilon: float, b: Sequence[int]) -> TargetDistribution:
    """Piecewise constant ``S_b``: 10% uniform on ``[0, 2k)`` plus 90% ``R_b``.

    ``R_b`` puts density ``(1 + b_i eps) / (2k)`` on the first half of
    ``[2i, 2i + 2)`` and ``(1 - b_i eps) / (2k)`` on the second half.
    """
    return piecewise_poly_target(hard_instance_pp(k, epsilon, b), "hard_instance")


# ----------------------------------------------------------------------------
# Log-concave decomposition
# ----------------------------------------------------------------------------


def _core_interval(f: TargetDistribution, epsilon: float) -> tuple[float, float]:
    lo, hi = f.domain
    wlo, whi = f.core if f.core is not None else (lo, hi)

    def quantile(q):
        a, b = wlo, whi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if f.cdf(mid) < q:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    if not np.isfinite(lo):
        lo = quantile(epsilon / 2)
    if not np.isfinite(hi):
        hi = quantile(1 - epsilon / 2)
    return lo, hi


def find_mode(density, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Ternary search for the maximizer of a unimodal density on ``[lo, hi]``."""
    a, b = lo, hi
    while b - a > tol:
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if density(m1) < density(m2):
            a = m1
        else:
            b = m2
    x = 0.5 * (a + b)
    # ternary search cannot see a maximum sitting exactly on an edge
    cands = [lo, x, np.nextafter(hi, -np.inf)]
    vals = [float(density(c)) for c in cands]
    return cands[int(np.argmax(vals))]


def _check_log_concave(density, lo: float, hi: float, mode: float, n: int = 4001):
    x = np.linspace(lo, np.nextafter(hi, -np.inf), n)
    fx = np.asarray(density(x), dtype=float)
    scale = max(fx.max(), 1e-300)
    tol = 1e-9 * scale
    left, right = x <= mode, x >= mode
    if np.any(np.diff(fx[left]) < -tol) or np.any(np.diff(fx[right]) > tol):
        raise NotLogConcaveDetected("density is not unimodal around the located mode")
    pos = fx > 1e-12 * scale
    # log-concavity: second differences of log f on the positive part
    runs = np.flatnonzero(np.diff(pos.astype(int)) != 0)
    if runs.size > 2:
        raise NotLogConcaveDetected("support is not an interval")
    lf = np.log(fx[pos])
    if lf.size >= 3:
        h = x[1] - x[0]
        second = (lf[2:] - 2 * lf[1:-1] + lf[:-2]) / h**2
        curv = np.abs(second).max() if second.size else 0.0
        if np.any(second > 1e-6 * max(1.0, curv)):
            raise NotLogConcaveDetected("log-density has positive curvature")


def _levels_one_side(density, start: float, end: float, epsilon: float) -> tuple[list[float], list[float]]:
    """Points ``x_0 = start, x_1, ...`` moving toward ``end`` with geometric density levels."""
    f0 = float(density(start))
    f_end = float(density(end))
    r = math.ceil(math.log(epsilon / 2) / math.log(1 - epsilon))
    xs, fs = [start], [f0]
    for i in range(1, r + 1):
        level = max(f0 * (1 - epsilon) ** i, f_end)
        if level <= f_end * (1 + 1e-12):
            xs.append(end)
            fs.append(f_end)
            break
        a, b = xs[-1], end
        if float(density(a)) < level:
            raise NotLogConcaveDetected("density rose above a level it had already crossed")
        while abs(b - a) > 1e-12 * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if float(density(mid)) >= level:
                a = mid
            else:
                b = mid
        x = 0.5 * (a + b)
        xs.append(x)
        fs.append(level)
    return xs, fs


def _group_one_side(xs: list[float], fs: list[float], epsilon: float) -> list[int]:
    """Greedy grouping of consecutive level intervals; returns group end indices."""
    root = math.sqrt(epsilon)
    ratio = (1 - epsilon) ** (1 / root)
    lengths = np.abs(np.diff(xs))
    ends = []
    i = 0
    last = len(xs) - 1
    while i < last:
        j = i + 1  # always admit the first interval
        while j + 1 <= last:
            nxt = j + 1
            if fs[nxt] < fs[i] * ratio * (1 - 1e-12):
                break
            if lengths[nxt - 1] < (1 - root) * lengths[i]:
                break
            j = nxt
        ends.append(j)
        i = j
    return ends


@dataclass(frozen=True, eq=False)
class LogConcaveDecomposition:
    hypothesis: PiecewisePolynomial
    mode: float
    level_points_right: tuple[float, ...]
    level_points_left: tuple[float, ...]


def decompose_log_concave(f: TargetDistribution, epsilon: float, full_output: bool = False):
    """Piecewise linear approximation of a log-concave density.

    On each side of the mode the density is sliced at geometrically
    decreasing levels ``f(x_0)(1-eps)^i``; consecutive slices are then merged
    while the density drops by at most a factor ``(1-eps)^(1/sqrt(eps))`` and
    the slice lengths stay within a factor ``1 - sqrt(eps)`` of the first.
    Each group becomes the secant line through its end values; the region
    past the last level is set to zero. The result is renormalized.

    Raises
    ------
    NotLogConcaveDetected
        If monotonicity on either side of the mode or concavity of the log
        density fails on a fine grid.
    """
    if not 0 < epsilon < 1:
        raise InvalidParams("epsilon must lie in (0, 1)")
    lo, hi = _core_interval(f, epsilon)
    top = np.nextafter(hi, -np.inf)
    mode = find_mode(f.density, lo, top)
    _check_log_concave(f.density, lo, hi, mode)

    def density(x):
        return f.density(min(max(x, lo), top))

    pieces: list[tuple[float, float, float, float]] = []  # (a, b, f(a), f(b))
    right_x, right_f = _levels_one_side(density, mode, top, epsilon)
    right_x[-1] = max(right_x[-1], hi) if right_x[-1] >= top else right_x[-1]
    left_x, left_f = ([mode], [density(mode)]) if mode <= lo else _levels_one_side(density, mode, lo, epsilon)

    for xs, fs, sign in ((right_x, right_f, 1), (left_x, left_f, -1)):
        if len(xs) < 2:
            continue
        start = 0
        for end in _group_one_side(xs, fs, epsilon):
            a, b = xs[start], xs[end]
            fa, fb = fs[start], fs[end]
            if sign < 0:
                a, b, fa, fb = b, a, fb, fa
            if b > a:
                pieces.append((a, b, fa, fb))
            start = end
        tail = xs[-1]
        if sign > 0 and tail < hi:
            pieces.append((tail, hi, 0.0, 0.0))
        if sign < 0 and tail > lo:
            pieces.append((lo, tail, 0.0, 0.0))
    pieces.sort()
    pieces = _merge_collinear(pieces)
    bp = np.array([p[0] for p in pieces] + [pieces[-1][1]])
    coeffs = [_secant_coeffs(fa, fb, b - a) for a, b, fa, fb in pieces]
    h = PiecewisePolynomial.from_coefficients(bp, coeffs).normalized()
    if not full_output:
        return h
    return LogConcaveDecomposition(h, mode, tuple(right_x), tuple(left_x))


def _merge_collinear(pieces):
    out = [pieces[0]]
    for a, b, fa, fb in pieces[1:]:
        pa, pb, pfa, pfb = out[-1]
        slope_prev = (pfb - pfa) / (pb - pa)
        slope = (fb - fa) / (b - a)
        scale = max(abs(pfa), abs(pfb), abs(fa), abs(fb), 1e-300)
        if abs(pfb - fa) <= 1e-12 * scale and abs(slope - slope_prev) * (b - pa) <= 1e-12 * scale:
            out[-1] = (pa, b, pfa, fb)
        else:
            out.append((a, b, fa, fb))
    return out


# ----------------------------------------------------------------------------
# Gaussian approximation
# ----------------------------------------------------------------------------


def gaussian_degree(epsilon: float) -> int:
    """Taylor degree used by default: ``4 * ceil(3 ln(1/eps))``."""
    return 4 * math.ceil(3 * math.log(1 / epsilon) - 1e-9)


def approximate_gaussian(
    mu: float, sigma: float, epsilon: float, degree: int | None = None, width_const: float = 2.0
) -> PiecewisePolynomial:
    """Three-piece approximation of ``N(mu, sigma^2)``.

    The middle piece on ``mu +- C sigma sqrt(ln(1/eps))`` is the Taylor
    polynomial of the density about ``mu`` in the variable
    ``v = (x - mu)^2 / (2 sigma^2)``; the two outer pieces of the same width
    are zero. The degree must be a multiple of 4: even-order partial sums of
    ``exp(-v)`` are positive for every ``v``, so the result is a density.
    """
    if not sigma > 0:
        raise InvalidParams("sigma must be positive")
    if not 0 < epsilon < 0.3:
        raise InvalidParams("epsilon must lie in (0, 0.3)")
    if degree is None:
        degree = gaussian_degree(epsilon)
    if degree < 0 or degree % 4:
        raise InvalidParams("degree must be a nonnegative multiple of 4")
    half = width_const * sigma * math.sqrt(math.log(1 / epsilon))
    a, b = mu - half, mu + half
    nodes = inverse_domain_map((a, b), cheb_nodes(degree + 1))
    v = 0.5 * ((nodes - mu) / sigma) ** 2
    n_terms = degree // 2
    # Horner evaluation of sum_n (-v)^n / n!
    acc = np.ones_like(v)
    for n in range(n_terms, 0, -1):
        acc = 1.0 - v * acc / n
    vals = acc / (sigma * math.sqrt(2 * math.pi))
    middle = ChebPoly((a, b), cheb_interpolate(vals * 0.5 * (b - a)))
    bp = np.array([a - half, a, b, b + half])
    pieces = (
        ChebPoly((bp[0], a), np.zeros(degree + 1)),
        middle,
        ChebPoly((b, bp[3]), np.zeros(degree + 1)),
    )
    return PiecewisePolynomial(bp, pieces).normalized()

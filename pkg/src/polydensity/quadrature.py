"""Vectorized adaptive Gauss-Legendre quadrature."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNonConvergence

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gl(func, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return half * (vals @ _WEIGHTS), x.size


def adaptive_integrate(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-12,
    max_evals: int = 1_000_000,
) -> float:
    """Integrate ``func`` over ``[breakpoints[0], breakpoints[-1]]``.

    The integrand is assumed smooth between consecutive breakpoints. Each
    panel is compared against its two halves; panels whose discrepancy
    exceeds their share of the tolerance are split until the summed
    estimate is within ``max(rel_tol * |I|, abs_tol)``.

    Raises
    ------
    QuadratureNonConvergence
        If more than ``max_evals`` integrand evaluations are needed.
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if pts.size < 2:
        return 0.0
    a, b = pts[:-1], pts[1:]
    total_len = pts[-1] - pts[0]
    accepted = 0.0
    evals = 0
    whole, n = _gl(func, a, b)
    evals += n
    while a.size:
        mid = 0.5 * (a + b)
        left, n1 = _gl(func, a, mid)
        right, n2 = _gl(func, mid, b)
        evals += n1 + n2
        refined = left + right
        err = np.abs(refined - whole)
        estimate = accepted + refined.sum()
        tol = max(rel_tol * abs(estimate), abs_tol)
        share = tol * (b - a) / total_len
        done = (err <= share) | ((b - a) <= 1e-14 * max(1.0, total_len))
        accepted += refined[done].sum()
        keep = ~done
        if not keep.any():
            break
        if evals > max_evals:
            raise QuadratureNonConvergence(
                f"adaptive quadrature exceeded {max_evals} evaluations"
            )
        ka, kb, km = a[keep], b[keep], mid[keep]
        a = np.concatenate([ka, km])
        b = np.concatenate([km, kb])
        whole = np.concatenate([left[keep], right[keep]])
    return float(accepted)

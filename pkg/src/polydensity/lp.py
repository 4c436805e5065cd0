"""Linear programs in general form and two solvers for them.

An LP here is

    minimize    c @ x
    subject to  row_lo <= A @ x <= row_hi
                lb <= x <= ub

with ``row_lo == row_hi`` encoding an equality. ``solve`` defaults to a
deterministic two-phase revised simplex using Bland's rule; ``method="highs"``
hands the same instance to HiGHS through :func:`scipy.optimize.milp`, which
is much faster on the large sparse instances produced by the learner.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

_FEAS_TOL = 1e-9
_REPORT_TOL = 1e-7


class LpStatus(enum.Enum):
    Optimal = "Optimal"
    Infeasible = "Infeasible"
    Unbounded = "Unbounded"
    IterationLimit = "IterationLimit"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """General-form LP; ``A`` may be dense or any scipy sparse matrix."""

    c: np.ndarray
    A: object
    row_lo: np.ndarray
    row_hi: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        n = c.size
        A = self.A
        if A is None:
            A = sparse.csr_matrix((0, n))
        elif not sparse.issparse(A):
            A = np.atleast_2d(np.asarray(A, dtype=float))
            if A.size == 0:
                A = A.reshape(0, n)
        if A.shape[1] != n:
            raise ValueError(f"A has {A.shape[1]} columns, objective has {n}")
        m = A.shape[0]
        row_lo = np.broadcast_to(np.asarray(self.row_lo, dtype=float), (m,)).copy()
        row_hi = np.broadcast_to(np.asarray(self.row_hi, dtype=float), (m,)).copy()
        lb = np.broadcast_to(np.asarray(self.lb, dtype=float), (n,)).copy()
        ub = np.broadcast_to(np.asarray(self.ub, dtype=float), (n,)).copy()
        for name, val in (("c", c), ("A", A.data if sparse.issparse(A) else A)):
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{name} contains non-finite entries")
        if np.any(np.isnan(row_lo)) or np.any(np.isnan(row_hi)):
            raise ValueError("row bounds contain NaN")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "row_lo", row_lo)
        object.__setattr__(self, "row_hi", row_hi)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def dense_A(self) -> np.ndarray:
        return self.A.toarray() if sparse.issparse(self.A) else np.asarray(self.A)

    @classmethod
    def from_constraints(
        cls,
        objective: Sequence[float],
        constraints: Iterable[tuple[Sequence[float], str, float]],
        bounds: Sequence[tuple[float | None, float | None]] | None = None,
    ) -> "LinearProgram":
        """Build from ``(row, relation, rhs)`` triples, relation in ``<=``, ``=``, ``>=``."""
        c = np.asarray(objective, dtype=float)
        rows, lo, hi = [], [], []
        for row, rel, rhs in constraints:
            row = np.asarray(row, dtype=float)
            if row.size != c.size:
                raise ValueError("constraint row length differs from objective length")
            if not np.isfinite(rhs):
                raise ValueError("right-hand sides must be finite")
            rows.append(row)
            if rel in ("<=", "≤"):
                lo.append(-np.inf)
                hi.append(rhs)
            elif rel in (">=", "≥"):
                lo.append(rhs)
                hi.append(np.inf)
            elif rel in ("=", "=="):
                lo.append(rhs)
                hi.append(rhs)
            else:
                raise ValueError(f"unknown relation {rel!r}")
        A = np.array(rows).reshape(len(rows), c.size)
        if bounds is None:
            lb = np.zeros(c.size)
            ub = np.full(c.size, np.inf)
        else:
            lb = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
            ub = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
        return cls(c, A, np.array(lo), np.array(hi), lb, ub)

    def max_violation(self, x: np.ndarray) -> float:
        ax = self.A @ x
        viol = [
            np.max(self.row_lo - ax, initial=0.0),
            np.max(ax - self.row_hi, initial=0.0),
            np.max(self.lb - x, initial=0.0),
            np.max(x - self.ub, initial=0.0),
        ]
        return float(max(viol))

    def dump(self) -> str:
        """Plain-text dump, one constraint per line."""
        out = io.StringIO()
        out.write(f"vars {self.num_vars} rows {self.num_rows}\n")
        out.write("min " + " ".join(repr(float(v)) for v in self.c) + "\n")
        csr = sparse.csr_matrix(self.A)
        for i in range(self.num_rows):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            terms = " ".join(f"{j}:{v!r}" for j, v in zip(csr.indices[lo:hi], csr.data[lo:hi]))
            out.write(f"row {float(self.row_lo[i])!r} {float(self.row_hi[i])!r} {terms}\n")
        for j in range(self.num_vars):
            out.write(f"bound {j} {float(self.lb[j])!r} {float(self.ub[j])!r}\n")
        return out.getvalue()


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float

    @property
    def ok(self) -> bool:
        return self.status is LpStatus.Optimal


def solve(lp: LinearProgram, max_iters: int | None = None, method: str = "simplex") -> LpSolution:
    """Solve ``lp``; the result carries a status code and never raises on degeneracy."""
    if method == "simplex":
        return _solve_simplex(lp, max_iters)
    if method == "highs":
        return _solve_highs(lp, max_iters)
    raise ValueError(f"unknown LP method {method!r}")


# ----------------------------------------------------------------------------
# HiGHS backend
# ----------------------------------------------------------------------------

_MILP_STATUS = {
    0: LpStatus.Optimal,
    1: LpStatus.IterationLimit,
    2: LpStatus.Infeasible,
    3: LpStatus.Unbounded,
}


def _solve_highs(lp: LinearProgram, max_iters: int | None) -> LpSolution:
    n = lp.num_vars
    cons = []
    if lp.num_rows:
        cons.append(LinearConstraint(sparse.csr_matrix(lp.A), lp.row_lo, lp.row_hi))
    # infeasible variable bounds make HiGHS reject the model outright
    if np.any(lp.lb > lp.ub):
        return LpSolution(LpStatus.Infeasible, np.full(n, np.nan), np.nan)
    res = milp(lp.c, constraints=cons, bounds=Bounds(lp.lb, lp.ub))
    status = _MILP_STATUS.get(res.status, LpStatus.Infeasible)
    if status is LpStatus.Optimal:
        x = np.asarray(res.x, dtype=float)
        return LpSolution(status, x, float(lp.c @ x))
    if status is LpStatus.Infeasible and "unbounded" in str(res.message).lower():
        status = LpStatus.Unbounded
    return LpSolution(status, np.full(n, np.nan), np.nan)


# ----------------------------------------------------------------------------
# In-house revised simplex
# ----------------------------------------------------------------------------


@dataclass
class _StandardForm:
    """``min c@z  s.t.  A@z = b, z >= 0`` plus the affine map back to ``x``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    # x = shift + T @ z
    shift: np.ndarray
    T: np.ndarray


def _to_standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.num_vars
    A0 = lp.dense_A()
    cols = []  # (original var index, sign) for each structural z column
    shift = np.zeros(n)
    extra_rows = []  # upper-bound rows for doubly bounded vars: (z col, width)
    for j in range(n):
        lo, hi = lp.lb[j], lp.ub[j]
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    T = np.zeros((n, nz))
    for k, (j, sgn) in enumerate(cols):
        T[j, k] = sgn
    Az = A0 @ T
    base = A0 @ shift

    rows, rhs, slack_sign = [], [], []
    for i in range(lp.num_rows):
        lo, hi = lp.row_lo[i] - base[i], lp.row_hi[i] - base[i]
        if lo == hi:
            rows.append(Az[i])
            rhs.append(lo)
            slack_sign.append(0.0)
            continue
        if np.isfinite(lo):
            rows.append(Az[i])
            rhs.append(lo)
            slack_sign.append(-1.0)
        if np.isfinite(hi):
            rows.append(Az[i])
            rhs.append(hi)
            slack_sign.append(1.0)
    for k, width in extra_rows:
        r = np.zeros(nz)
        r[k] = 1.0
        rows.append(r)
        rhs.append(width)
        slack_sign.append(1.0)

    m = len(rows)
    n_slack = sum(1 for s in slack_sign if s != 0.0)
    A = np.zeros((m, nz + n_slack))
    if m:
        A[:, :nz] = np.array(rows)
    col = nz
    for i, s in enumerate(slack_sign):
        if s != 0.0:
            A[i, col] = s
            col += 1
    b = np.array(rhs, dtype=float)
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    c = np.concatenate([lp.c @ T, np.zeros(n_slack)])
    T_full = np.hstack([T, np.zeros((n, n_slack))])
    return _StandardForm(A, b, c, shift, T_full)


class _Simplex:
    """Revised simplex on ``A z = b, z >= 0`` with an explicit basis inverse."""

    def __init__(self, A: np.ndarray, b: np.ndarray, max_iters: int):
        self.m, self.n = A.shape
        # artificial columns occupy indices n..n+m-1
        self.A = np.hstack([A, np.eye(self.m)])
        self.b = b
        self.basis = np.arange(self.n, self.n + self.m)
        self.Binv = np.eye(self.m)
        self.x_B = b.copy()
        self.iters = 0
        self.max_iters = max_iters

    def _refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self.x_B = self.Binv @ self.b

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> str:
        """Pivot until optimal; returns 'optimal', 'unbounded' or 'limit'."""
        while True:
            if self.iters >= self.max_iters:
                return "limit"
            y = cost[self.basis] @ self.Binv
            reduced = cost - y @ self.A
            reduced[self.basis] = 0.0
            cand = np.nonzero(allowed & (reduced < -_FEAS_TOL))[0]
            if cand.size == 0:
                return "optimal"
            q = int(cand[0])  # Bland: lowest eligible index enters
            d = self.Binv @ self.A[:, q]
            pos = d > _FEAS_TOL
            if not pos.any():
                return "unbounded"
            ratios = np.full(self.m, np.inf)
            ratios[pos] = np.maximum(self.x_B[pos], 0.0) / d[pos]
            best = ratios.min()
            ties = np.nonzero(ratios <= best + 1e-12)[0]
            r = int(ties[np.argmin(self.basis[ties])])  # Bland: lowest basic index leaves
            self._pivot(r, q, d)

    def _pivot(self, r: int, q: int, d: np.ndarray):
        piv = d[r]
        row = self.Binv[r] / piv
        self.Binv -= np.outer(d, row)
        self.Binv[r] = row
        theta = self.x_B[r] / piv
        self.x_B -= theta * d
        self.x_B[r] = theta
        self.basis[r] = q
        self.iters += 1
        if self.iters % 50 == 0:
            self._refactor()

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where possible."""
        for r in range(self.m):
            if self.basis[r] < self.n:
                continue
            row = self.Binv[r] @ self.A[:, : self.n]
            nonbasic = np.ones(self.n, dtype=bool)
            nonbasic[self.basis[self.basis < self.n]] = False
            cand = np.nonzero(nonbasic & (np.abs(row) > 1e-7))[0]
            if cand.size:
                q = int(cand[0])
                self._pivot(r, q, self.Binv @ self.A[:, q])
        self._refactor()


def _solve_simplex(lp: LinearProgram, max_iters: int | None) -> LpSolution:
    n = lp.num_vars
    if max_iters is None:
        max_iters = 50 * (n + lp.num_rows)
    if np.any(lp.lb > lp.ub) or np.any(lp.row_lo > lp.row_hi):
        return LpSolution(LpStatus.Infeasible, np.full(n, np.nan), np.nan)
    sf = _to_standard_form(lp)
    m, nz = sf.A.shape
    if m == 0:
        # only sign constraints remain: optimum at z = 0 unless a cost is negative
        if np.any(sf.c < 0):
            return LpSolution(LpStatus.Unbounded, np.full(n, np.nan), np.nan)
        x = sf.shift.copy()
        return LpSolution(LpStatus.Optimal, x, float(lp.c @ x))

    spx = _Simplex(sf.A, sf.b, max_iters)
    phase1_cost = np.concatenate([np.zeros(nz), np.ones(m)])
    allowed = np.ones(nz + m, dtype=bool)
    state = spx.run(phase1_cost, allowed)
    if state == "limit":
        return LpSolution(LpStatus.IterationLimit, np.full(n, np.nan), np.nan)
    spx._refactor()
    infeas = float(phase1_cost[spx.basis] @ spx.x_B)
    if infeas > _FEAS_TOL * max(1.0, np.abs(sf.b).max()):
        return LpSolution(LpStatus.Infeasible, np.full(n, np.nan), np.nan)

    spx.drive_out_artificials()
    cost = np.concatenate([sf.c, np.zeros(m)])
    allowed[nz:] = False
    state = spx.run(cost, allowed)
    if state == "limit":
        return LpSolution(LpStatus.IterationLimit, np.full(n, np.nan), np.nan)
    if state == "unbounded":
        return LpSolution(LpStatus.Unbounded, np.full(n, np.nan), np.nan)
    spx._refactor()
    z = np.zeros(nz + m)
    z[spx.basis] = np.maximum(spx.x_B, 0.0)
    x = sf.shift + sf.T @ z[:nz]
    x = np.clip(x, lp.lb, lp.ub)
    return LpSolution(LpStatus.Optimal, x, float(lp.c @ x))

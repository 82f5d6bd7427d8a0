"""Bounded-variable primal simplex for the LP relaxations solved during branch-and-bound.

Revised form with an explicit dense basis inverse and a sparse constraint
matrix. Pricing is Dantzig's largest reduced cost; after a run of degenerate
pivots it switches to Bland's smallest-index rule until the objective moves
again, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .milp import EQ, GE, LE, MilpModel

FEAS_TOL = 1e-7
BOUND_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
DEGENERATE_STREAK = 25

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpSolution:
    status: str
    values: np.ndarray
    objective: float
    iterations: int = 0


class SimplexError(RuntimeError):
    pass


DENSE_LIMIT = 200_000


class Workspace:
    """Standard-form data shared by every relaxation of one model: [A | slacks]."""

    def __init__(self, A: sp.spmatrix, senses, rhs):
        for s in senses:
            if s not in (LE, GE, EQ):
                raise ValueError(f"unknown constraint relation {s!r}")
        A = sp.csc_matrix(A, dtype=float)
        m, n = A.shape
        self.m, self.n = m, n
        self.rhs = np.asarray(rhs, dtype=float)
        self.slack_rows = np.array([r for r, s in enumerate(senses) if s != EQ], dtype=np.int64)
        self.slack_sign = np.array([1.0 if senses[r] == LE else -1.0 for r in self.slack_rows])
        k = len(self.slack_rows)
        S = sp.csc_matrix((self.slack_sign, (self.slack_rows, np.arange(k))), shape=(m, k))
        self.base = sp.hstack([A, S], format="csc")
        self.dense = m * (n + k + m) <= DENSE_LIMIT
        if self.dense:
            self.base = self.base.toarray()


class _Tableau:
    """Working state of one simplex solve over columns [structural | slack | artificial]."""

    def __init__(self, ws: Workspace, lower, upper):
        m, n = ws.m, ws.n
        self.m, self.n = m, n
        self.rhs = ws.rhs
        self.dense = ws.dense
        n_slack = len(ws.slack_rows)
        lo = np.concatenate([lower, np.zeros(n_slack)]).astype(float)
        hi = np.concatenate([upper, np.full(n_slack, np.inf)]).astype(float)

        # nonbasic start: at a finite bound, free columns at zero
        x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        x[n:] = 0.0
        resid = self.rhs - ws.base @ x

        head = np.full(m, -1, dtype=np.int64)
        diag = np.ones(m)
        ok = resid[ws.slack_rows] * ws.slack_sign >= 0
        rows = ws.slack_rows[ok]
        head[rows] = n + np.flatnonzero(ok)
        diag[rows] = ws.slack_sign[ok]
        x[n + np.flatnonzero(ok)] = resid[rows] * ws.slack_sign[ok]
        art_rows = np.flatnonzero(head < 0)
        art_sign = np.where(resid[art_rows] >= 0, 1.0, -1.0)
        n_base = n + n_slack
        head[art_rows] = n_base + np.arange(len(art_rows))
        diag[art_rows] = art_sign

        if self.dense:
            R = np.zeros((m, len(art_rows)))
            R[art_rows, np.arange(len(art_rows))] = art_sign
            self.M = np.hstack([ws.base, R])
            self.MT = self.M.T
        else:
            R = sp.csc_matrix((art_sign, (art_rows, np.arange(len(art_rows)))), shape=(m, len(art_rows)))
            self.M = sp.hstack([ws.base, R], format="csc")
            self.MT = self.M.T.tocsr()
        self.lo = np.concatenate([lo, np.zeros(len(art_rows))])
        self.hi = np.concatenate([hi, np.full(len(art_rows), np.inf)])
        self.x = np.concatenate([x, np.abs(resid[art_rows])])
        self.art_start = n_base
        self.head = head
        self.is_basic = np.zeros(self.M.shape[1], dtype=bool)
        self.is_basic[head] = True
        self.Binv = np.diag(1.0 / diag)
        self.iterations = 0
        self.since_refactor = 0

    # --- linear algebra ------------------------------------------------

    def refactor(self) -> None:
        B = self.M[:, self.head]
        if not self.dense:
            B = B.toarray()
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis") from exc
        nb = ~self.is_basic
        resid = self.rhs - self.M[:, nb] @ self.x[nb]
        self.x[self.head] = self.Binv @ resid
        self.since_refactor = 0

    def column(self, j: int) -> np.ndarray:
        if self.dense:
            return self.Binv @ self.M[:, j]
        lo, hi = self.M.indptr[j], self.M.indptr[j + 1]
        return self.Binv[:, self.M.indices[lo:hi]] @ self.M.data[lo:hi]

    # --- one phase ------------------------------------------------------

    def run(self, cost: np.ndarray, max_iter: int) -> str:
        fixed = self.lo == self.hi
        streak = 0
        y = cost[self.head] @ self.Binv
        while True:
            if self.iterations >= max_iter:
                raise SimplexError(f"iteration limit {max_iter} reached")
            if self.since_refactor == 0:
                y = cost[self.head] @ self.Binv
            d = cost - self.MT @ y
            at_lo = self.x <= self.lo + BOUND_TOL
            at_hi = self.x >= self.hi - BOUND_TOL
            can_up = (~self.is_basic) & (~fixed) & (~at_hi) & (d < -DUAL_TOL)
            can_down = (~self.is_basic) & (~fixed) & (~at_lo) & (d > DUAL_TOL)
            eligible = can_up | can_down
            if not eligible.any():
                return OPTIMAL
            bland = streak >= DEGENERATE_STREAK
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if can_up[q] else -1.0

            alpha = self.column(q)
            delta = -direction * alpha  # change of basic values per unit step
            xb = self.x[self.head]
            lob, hib = self.lo[self.head], self.hi[self.head]
            ratio = np.full(self.m, np.inf)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            ratio[dec] = (xb[dec] - lob[dec]) / -delta[dec]
            ratio[inc] = (hib[inc] - xb[inc]) / delta[inc]
            np.maximum(ratio, 0.0, out=ratio)
            flip = self.hi[q] - self.lo[q]
            theta = float(ratio.min()) if self.m else np.inf
            if flip <= theta:
                step, leave = flip, -1
            elif np.isinf(theta):
                return UNBOUNDED
            else:
                ties = np.flatnonzero(ratio <= theta + 1e-12)
                if bland:
                    leave = int(ties[np.argmin(self.head[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(delta[ties]))])
                step = theta
            if np.isinf(step):
                return UNBOUNDED

            self.iterations += 1
            streak = streak + 1 if step <= 1e-12 else 0
            self.x[self.head] = xb + step * delta
            self.x[q] += direction * step
            if leave < 0:
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                continue
            out = self.head[leave]
            self.x[out] = lob[leave] if delta[leave] < 0 else hib[leave]
            piv = alpha[leave]
            row = self.Binv[leave] / piv
            y += d[q] * row
            nz = np.flatnonzero(alpha)
            self.Binv[nz] -= np.outer(alpha[nz], row)
            self.Binv[leave] = row
            self.head[leave] = q
            self.is_basic[out] = False
            self.is_basic[q] = True
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()


def solve_lp(
    model: MilpModel,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    max_iter: int | None = None,
    workspace: Workspace | None = None,
) -> LpSolution:
    """Optimize the continuous relaxation of ``model``; integrality flags are ignored.

    ``lower``/``upper`` override the model's column bounds (branching).
    """
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    ws = workspace or Workspace(model.A, model.senses, model.rhs)
    return _solve(ws, model.objective, lower, upper, max_iter)


def solve_lp_arrays(c, A, senses, rhs, lower, upper, max_iter=None) -> LpSolution:
    return _solve(Workspace(A, senses, rhs), c, lower, upper, max_iter)


def _solve(ws: Workspace, c, lower, upper, max_iter) -> LpSolution:
    c = np.asarray(c, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = len(c)
    if np.any(lower > upper + BOUND_TOL):
        return LpSolution(INFEASIBLE, np.full(n, np.nan), np.inf)
    tab = _Tableau(ws, lower, upper)
    limit = max_iter if max_iter is not None else 50 * (tab.m + tab.M.shape[1]) + 1000

    if tab.art_start < tab.M.shape[1]:
        phase1 = np.zeros(tab.M.shape[1])
        phase1[tab.art_start:] = 1.0
        tab.run(phase1, limit)
        tab.refactor()
        if tab.x[tab.art_start:].sum() > FEAS_TOL:
            return LpSolution(INFEASIBLE, np.full(n, np.nan), np.inf, tab.iterations)
        tab.hi[tab.art_start:] = 0.0

    cost = np.zeros(tab.M.shape[1])
    cost[:n] = c
    status = tab.run(cost, limit)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, tab.x[:n].copy(), -np.inf, tab.iterations)
    tab.refactor()
    x = tab.x[:n].copy()
    # snap onto bounds the iterate sits on up to round-off
    x = np.where(np.abs(x - lower) <= BOUND_TOL, lower, x)
    x = np.where(np.abs(x - upper) <= BOUND_TOL, upper, x)
    return LpSolution(OPTIMAL, x, float(c @ x), tab.iterations)

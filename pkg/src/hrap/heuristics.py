"""Primal heuristics for assignment models: LP rounding and vectorized local search.

The search works on the task x employee view of a model built by
``milp.build_balance_model`` / ``milp.build_cost_model``: every employee owns
one over-target row (``<=``) and one under-target row (``>=``), each
assignment column adds its load to both rows of its employee, and the
deviation columns price the largest excess above and shortfall below target.
"""

from __future__ import annotations

import time

import numpy as np

from .milp import DEV_MAX, DEV_MINUS, DEV_PLUS, LE, MilpModel

OBJ_TOL = 1e-9


class AssignmentSearch:
    def __init__(self, model: MilpModel, seed: int = 0):
        self.model = model
        self.n_emp = sum(1 for s in model.senses if s == LE)
        self.target = float(model.rhs[0]) if self.n_emp else 0.0
        self.blocks = [np.asarray(idx, dtype=np.int64) for _, idx in model.task_blocks]
        K, N = len(self.blocks), self.n_emp
        self.K, self.N = K, N

        csc = model.A.tocsc()
        self.col_emp = np.full(model.n_cols, -1, dtype=np.int64)
        self.col_load = np.zeros(model.n_cols)
        for j in model.assign_columns():
            rows = csc.indices[csc.indptr[j]:csc.indptr[j + 1]]
            vals = csc.data[csc.indptr[j]:csc.indptr[j + 1]]
            over = rows < N
            self.col_emp[j] = rows[over][0]
            self.col_load[j] = vals[over][0]

        self.load = np.full((K, N), np.nan)
        self.cost = np.full((K, N), np.nan)
        self.col = np.full((K, N), -1, dtype=np.int64)
        for k, idx in enumerate(self.blocks):
            e = self.col_emp[idx]
            self.load[k, e] = self.col_load[idx]
            self.cost[k, e] = model.objective[idx]
            self.col[k, e] = idx
        self.ok = self.col >= 0

        self.minmax = DEV_MAX in model.columns
        obj = dict(zip(model.columns, model.objective))
        if self.minmax:
            self.w_plus = self.w_minus = float(obj[DEV_MAX])
        else:
            self.w_plus = float(obj.get(DEV_PLUS, 0.0))
            self.w_minus = float(obj.get(DEV_MINUS, 0.0))
        self.rng = np.random.default_rng(seed)

    # --- evaluation -----------------------------------------------------

    def _dev_cost(self, hi, lo):
        above = np.maximum(0.0, hi - self.target)
        below = np.maximum(0.0, self.target - lo)
        if self.minmax:
            return self.w_plus * np.maximum(above, below)
        return self.w_plus * above + self.w_minus * below

    def loads(self, emp_of: np.ndarray) -> np.ndarray:
        k = np.arange(self.K)
        return np.bincount(emp_of, weights=self.load[k, emp_of], minlength=self.N)

    def value(self, emp_of: np.ndarray) -> tuple[float, float]:
        if self.N == 0:
            return 0.0, 0.0
        k = np.arange(self.K)
        L = self.loads(emp_of)
        lin = float(self.cost[k, emp_of].sum()) if self.K else 0.0
        dev = float(self._dev_cost(L.max(), L.min()))
        return lin + dev, float(((L - self.target) ** 2).sum())

    def to_columns(self, emp_of: np.ndarray) -> list[int]:
        return [int(self.col[k, e]) for k, e in enumerate(emp_of)]

    def from_columns(self, choice) -> np.ndarray:
        return np.asarray([self.col_emp[j] for j in choice], dtype=np.int64)

    # --- neighbourhoods -------------------------------------------------

    def _extremes(self, L):
        order = np.argsort(L, kind="stable")
        pad = 3 - len(order)
        top = order[::-1][:3]
        bot = order[:3]
        top_v, bot_v = L[top], L[bot]
        if pad > 0:
            top = np.concatenate([top, np.full(pad, -1)])
            bot = np.concatenate([bot, np.full(pad, -1)])
            top_v = np.concatenate([top_v, np.full(pad, -np.inf)])
            bot_v = np.concatenate([bot_v, np.full(pad, np.inf)])
        return top, top_v, bot, bot_v

    @staticmethod
    def _excluding(idx, vals, a, b):
        """Per candidate, the first of the 3 extreme values whose owner is neither a nor b."""
        out = np.where((idx[0] != a) & (idx[0] != b), vals[0], np.where((idx[1] != a) & (idx[1] != b), vals[1], vals[2]))
        return out

    def _score(self, L, lin, a, b, la, lb, dlin):
        top, top_v, bot, bot_v = self._extremes(L)
        hi = np.maximum(self._excluding(top, top_v, a, b), np.maximum(la, lb))
        lo = np.minimum(self._excluding(bot, bot_v, a, b), np.minimum(la, lb))
        val = lin + dlin + self._dev_cost(hi, lo)
        T = self.target
        dspread = (la - T) ** 2 + (lb - T) ** 2 - (L[a] - T) ** 2 - (L[b] - T) ** 2
        return val, dspread

    def _best_move(self, emp_of, L, lin):
        k_idx, e_idx = np.nonzero(self.ok)
        a = emp_of[k_idx]
        keep = e_idx != a
        k_idx, e_idx, a = k_idx[keep], e_idx[keep], a[keep]
        if len(k_idx) == 0:
            return None
        la = L[a] - self.load[k_idx, a]
        lb = L[e_idx] + self.load[k_idx, e_idx]
        dlin = self.cost[k_idx, e_idx] - self.cost[k_idx, a]
        val, dspr = self._score(L, lin, a, e_idx, la, lb, dlin)
        return val, dspr, [(k_idx, e_idx)]

    def _best_swap(self, emp_of, L, lin):
        K = self.K
        if K < 2:
            return None
        k1, k2 = np.triu_indices(K, 1)
        a, b = emp_of[k1], emp_of[k2]
        valid = (a != b) & self.ok[k1, b] & self.ok[k2, a]
        k1, k2, a, b = k1[valid], k2[valid], a[valid], b[valid]
        if len(k1) == 0:
            return None
        la = L[a] - self.load[k1, a] + self.load[k2, a]
        lb = L[b] - self.load[k2, b] + self.load[k1, b]
        dlin = self.cost[k1, b] + self.cost[k2, a] - self.cost[k1, a] - self.cost[k2, b]
        val, dspr = self._score(L, lin, a, b, la, lb, dlin)
        return val, dspr, [(k1, b), (k2, a)]

    def descend(self, emp_of: np.ndarray, deadline: float) -> np.ndarray:
        """Best-improvement descent; ties on the objective are broken by load spread."""
        emp_of = emp_of.copy()
        if self.N == 0 or self.K == 0:
            return emp_of
        while time.perf_counter() < deadline:
            L = self.loads(emp_of)
            cur, _ = self.value(emp_of)
            lin = float(self.cost[np.arange(self.K), emp_of].sum())
            step = None
            for hood in (self._best_move, self._best_swap):
                found = hood(emp_of, L, lin)
                if found is None:
                    continue
                val, dspr, changes = found
                strict = val < cur - OBJ_TOL
                flat = (val <= cur + OBJ_TOL) & (dspr < -OBJ_TOL)
                if strict.any():
                    pick = np.flatnonzero(strict)
                    pick = pick[np.lexsort((dspr[pick], val[pick]))[0]]
                elif flat.any():
                    pick = np.flatnonzero(flat)
                    pick = pick[np.argmin(dspr[pick])]
                else:
                    continue
                step = [(int(ks[pick]), int(es[pick])) for ks, es in changes]
                break
            if step is None:
                break
            for k, e in step:
                emp_of[k] = e
        return emp_of

    def perturb(self, emp_of: np.ndarray, moves: int) -> np.ndarray:
        emp_of = emp_of.copy()
        for _ in range(moves):
            k = int(self.rng.integers(self.K))
            options = np.flatnonzero(self.ok[k])
            emp_of[k] = int(options[self.rng.integers(len(options))])
        return emp_of

    def improve(self, choice, deadline: float, kicks: int = 0) -> list[int]:
        """Descend from ``choice``, then iterate random kicks and re-descents."""
        best = self.descend(self.from_columns(choice), deadline)
        best_val = self.value(best)
        for _ in range(kicks):
            if time.perf_counter() >= deadline or self.K == 0:
                break
            trial = self.descend(self.perturb(best, int(self.rng.integers(2, 6))), deadline)
            val = self.value(trial)
            if val[0] < best_val[0] - OBJ_TOL:
                best, best_val = trial, val
        return self.to_columns(best)

    def round(self, values: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> list[int] | None:
        """Each task goes to its highest-valued column allowed by the bounds."""
        choice = []
        for idx in self.blocks:
            ok = idx[upper[idx] > 0.5]
            if len(ok) == 0:
                return None
            forced = ok[lower[ok] > 0.5]
            if len(forced):
                choice.append(int(forced[0]))
                continue
            choice.append(int(ok[np.argmax(values[ok])]))
        return choice

"""
Simplex Service
Dense two-phase simplex (Bland's rule) and a row-exchange driver for
feasibility problems with few variables and many sampled constraints
"""
from typing import List, NamedTuple, Optional

import numpy as np

from app.core.config import FEASIBILITY_TOL, LP_BATCH, LP_MAX_PIVOTS
from app.core.logging import logger

PIVOT_EPS = 1e-10


class LPResult(NamedTuple):
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: Optional[np.ndarray]
    objective: Optional[float]
    pivots: int


class TwoPhaseSimplex:
    """
    min c^T x  s.t.  A x (<=|>=|=) b,  x >= 0

    Phase I maximizes minus the sum of artificials; Phase II restores the
    objective. Both phases enter the lowest-index improving column and leave
    on the minimum ratio, ties broken by lowest basic index.
    """

    def __init__(self, max_pivots: int = LP_MAX_PIVOTS):
        self.max_pivots = max_pivots
        self.pivots = 0

    @staticmethod
    def _pivot(T: np.ndarray, row: int, col: int) -> None:
        T[row, :] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])

    @staticmethod
    def _enter(z_row: np.ndarray) -> int:
        idxs = np.flatnonzero(z_row[:-1] < -PIVOT_EPS)
        return int(idxs[0]) if idxs.size else -1

    @staticmethod
    def _leave(T: np.ndarray, col: int, basis: List[int]) -> int:
        column = T[:-1, col]
        rows = np.flatnonzero(column > PIVOT_EPS)
        if rows.size == 0:
            return -1
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_EPS * max(1.0, abs(best))]
        return int(min(ties, key=lambda r: basis[r]))

    def _run(self, T: np.ndarray, basis: List[int]) -> str:
        while self.pivots < self.max_pivots:
            j = self._enter(T[-1, :])
            if j == -1:
                return "optimal"
            i = self._leave(T, j, basis)
            if i == -1:
                return "unbounded"
            self._pivot(T, i, j)
            basis[i] = j
            self.pivots += 1
        return "iteration_limit"

    def solve(self, c: np.ndarray, A: np.ndarray, signs: List[str], b: np.ndarray) -> LPResult:
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        signs = list(signs)
        m, n = A.shape
        self.pivots = 0

        # b >= 0
        for i in range(m):
            if b[i] < 0:
                A[i, :] *= -1.0
                b[i] *= -1.0
                signs[i] = {"<=": ">=", ">=": "<=", "=": "="}[signs[i]]

        n_slack = sum(1 for s in signs if s in ("<=", ">="))
        n_art = sum(1 for s in signs if s in (">=", "="))
        art_start = n + n_slack
        total = art_start + n_art

        T = np.zeros((m + 1, total + 1))
        T[:m, :n] = A
        T[:m, -1] = b
        basis: List[int] = []
        si, ai = n, art_start
        for i, sign in enumerate(signs):
            if sign == "<=":
                T[i, si] = 1.0
                basis.append(si)
                si += 1
            elif sign == ">=":
                T[i, si] = -1.0
                T[i, ai] = 1.0
                basis.append(ai)
                si += 1
                ai += 1
            else:
                T[i, ai] = 1.0
                basis.append(ai)
                ai += 1

        # Phase I: max -sum(artificials)
        T[-1, art_start:total] = 1.0
        for r, bc in enumerate(basis):
            if bc >= art_start:
                T[-1, :] -= T[r, :]
        status = self._run(T, basis)
        if status != "optimal":
            return LPResult(status, None, None, self.pivots)
        if T[-1, -1] < -FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(b), initial=0.0))):
            return LPResult("infeasible", None, None, self.pivots)

        # drive artificials out of the basis; rows where that fails are redundant
        keep_rows = []
        for r in range(m):
            if basis[r] >= art_start:
                nz = np.flatnonzero(np.abs(T[r, :art_start]) > PIVOT_EPS)
                if nz.size == 0:
                    continue
                self._pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
            keep_rows.append(r)
        rows = keep_rows + [m]
        T = np.hstack([T[rows, :art_start], T[rows, -1:]])
        basis = [basis[r] for r in keep_rows]

        # Phase II: max -c^T x
        cost = np.zeros(art_start)
        cost[:n] = np.asarray(c, dtype=float)
        T[-1, :] = 0.0
        T[-1, :art_start] = cost
        for r, bc in enumerate(basis):
            if cost[bc] != 0.0:
                T[-1, :] -= cost[bc] * T[r, :]
        if np.any(cost):
            status = self._run(T, basis)
            if status != "optimal":
                return LPResult(status, None, None, self.pivots)

        x_all = np.zeros(art_start)
        for r, bc in enumerate(basis):
            x_all[bc] = T[r, -1]
        x = np.where(x_all[:n] < 0, 0.0, x_all[:n])
        return LPResult("optimal", x, float(cost[:n] @ x), self.pivots)


class FeasiblePoint(NamedTuple):
    x: np.ndarray
    rounds: int
    active_rows: int
    max_violation: float


def _normalized(G: np.ndarray, h: np.ndarray):
    norms = np.linalg.norm(G, axis=1)
    live = norms > 0
    return G[live] / norms[live, None], h[live] / norms[live], h[~live]


def _dedupe(G: np.ndarray, h: np.ndarray):
    """Keep the most restrictive right-hand side per direction"""
    if len(G) == 0:
        return G, h
    key = np.round(G, 10) + 0.0
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    best = np.full(len(uniq), -np.inf)
    np.maximum.at(best, inverse, h)
    rep = np.zeros(len(uniq), dtype=int)
    rep[inverse] = np.arange(len(G))
    return G[rep], best


def solve_feasibility(
    G: np.ndarray,
    h: np.ndarray,
    G_fixed: Optional[np.ndarray] = None,
    h_fixed: Optional[np.ndarray] = None,
    shift: float = 0.0,
    batch: int = LP_BATCH,
    tol: float = FEASIBILITY_TOL,
    max_rounds: int = 200,
) -> Optional[FeasiblePoint]:
    """
    Find free x with G x >= h + shift and G_fixed x >= h_fixed, or None.

    Rows are normalized to unit norm and deduplicated. The LP starts from the
    fixed rows plus the `batch` largest right-hand sides and adds the `batch`
    most violated rows per round until the whole sampled system holds.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    dim = G.shape[1]
    G_fixed = np.zeros((0, dim)) if G_fixed is None else np.asarray(G_fixed, dtype=float)
    h_fixed = np.zeros(0) if h_fixed is None else np.asarray(h_fixed, dtype=float)

    G_n, h_n, h_zero = _normalized(G, h)
    if h_zero.size and np.max(h_zero - tol * (1.0 + np.abs(h_zero))) > 0:
        logger.debug(f"[Simplex] zero row with right-hand side {np.max(h_zero):.3e}")
        return None
    G_n, h_n = _dedupe(G_n, h_n)
    h_shifted = h_n + shift
    Gf_n, hf_n, hf_zero = _normalized(G_fixed, h_fixed)
    if hf_zero.size and np.max(hf_zero) > tol:
        return None

    order = np.argsort(-h_shifted, kind="stable")
    active = set(order[:batch].tolist())
    solver = TwoPhaseSimplex()

    for rounds in range(1, max_rounds + 1):
        rows = sorted(active)
        A_act = np.vstack([Gf_n, G_n[rows]])
        b_act = np.concatenate([hf_n, h_shifted[rows]])
        # x = p - q with p, q >= 0
        A_split = np.hstack([A_act, -A_act])
        result = solver.solve(np.zeros(2 * dim), A_split, [">="] * len(b_act), b_act)
        if result.status != "optimal":
            logger.debug(f"[Simplex] round {rounds}: {result.status} on {len(rows)} rows")
            return None
        x = result.x[:dim] - result.x[dim:]

        # per-row relative violation
        violation = (h_shifted - G_n @ x) / (1.0 + np.abs(h_n))
        worst = float(np.max(violation, initial=-np.inf))
        if worst <= tol:
            logger.debug(
                f"[Simplex] feasible after {rounds} rounds, {len(rows)} active rows, {solver.pivots} pivots"
            )
            return FeasiblePoint(x=x, rounds=rounds, active_rows=len(rows), max_violation=max(worst, 0.0))
        candidates = np.argsort(-violation, kind="stable")
        added = 0
        for idx in candidates:
            if violation[idx] <= tol or added >= batch:
                break
            if idx not in active:
                active.add(int(idx))
                added += 1
        if added == 0:
            # violated rows already active: numerical trouble in the LP
            logger.warning(f"[Simplex] exchange stalled with violation {worst:.3e}")
            return None

    logger.warning(f"[Simplex] exchange did not converge in {max_rounds} rounds")
    return None

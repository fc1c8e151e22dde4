"""Dense two-phase simplex for small equality-form LPs.

Solves ``min c.x  s.t.  A x = b, x >= 0``. Problems in this package have at
most ~100 rows and a few thousand columns, so a full tableau is fine.

Pricing is Dantzig's (most negative reduced cost); after a run of degenerate
pivots it falls back to Bland's rule, which cannot cycle. Row duals are
recomputed from the final basis by a direct solve rather than read off the
tableau, which keeps certificates accurate after many pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_ITER = 100_000
DEGENERATE_RUN = 50


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    duals: np.ndarray  # row duals y; Farkas vector when infeasible
    infeasibility: float  # phase-1 optimum (sum of artificials)
    residual: float  # max |A x - b| for the returned x
    iterations: int
    basis: np.ndarray

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _run(T, basis, allowed, max_iter, it0=0):
    """Simplex iterations on tableau ``T`` (last row = reduced costs, last column = rhs)."""
    rows = T.shape[0] - 1
    it = it0
    degenerate = 0
    while True:
        d = T[-1, :-1]
        cand = np.flatnonzero((d < -PIVOT_TOL) & allowed)
        if cand.size == 0:
            return "optimal", it
        if degenerate >= DEGENERATE_RUN:
            j = int(cand[0])  # Bland
        else:
            j = int(cand[np.argmin(d[cand])])
        col = T[:rows, j]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / col[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + 1e-14 * max(1.0, abs(rmin))]
        i = int(ties[np.argmin(basis[ties])])
        degenerate = degenerate + 1 if T[i, -1] <= PIVOT_TOL else 0
        T[i] /= T[i, j]
        f = T[:, j].copy()
        f[i] = 0.0
        T -= np.outer(f, T[i])
        basis[i] = j
        it += 1
        if it > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} iterations")


def _dual_from_basis(A, basis, c_basis):
    B = A[:, basis]
    try:
        return np.linalg.solve(B.T, c_basis)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(B.T, c_basis, rcond=None)[0]


def solve_lp(A, b, c=None, tol=FEAS_TOL, max_iter=MAX_ITER) -> LPResult:
    """Two-phase simplex. ``c=None`` runs phase 1 only (pure feasibility).

    When infeasible, ``duals`` is a Farkas vector ``y`` with ``y.b > 0`` and
    ``y.A_j <= 0`` (up to round-off) for every column.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    rows, ncols = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    As = A * sign[:, None]
    bs = b * sign

    # phase 1: artificial identity basis
    T = np.zeros((rows + 1, ncols + rows + 1))
    T[:rows, :ncols] = As
    T[:rows, ncols : ncols + rows] = np.eye(rows)
    T[:rows, -1] = bs
    T[-1, :ncols] = -As.sum(axis=0)
    T[-1, -1] = -bs.sum()
    basis = np.arange(ncols, ncols + rows)
    allowed = np.ones(ncols + rows, dtype=bool)
    status, it = _run(T, basis, allowed, max_iter)
    if status != "optimal":
        raise SolverError("phase 1 reported unbounded; should be impossible")

    full = np.hstack([As, np.eye(rows)])
    c1 = np.r_[np.zeros(ncols), np.ones(rows)]
    infeas = -T[-1, -1]
    if infeas > tol:
        y = _dual_from_basis(full, basis, c1[basis])
        return LPResult("infeasible", None, None, y * sign, float(infeas), np.inf, it, basis)

    # drive remaining artificials out of the basis; drop redundant rows
    keep_t = np.ones(rows, dtype=bool)  # tableau rows
    keep = np.ones(rows, dtype=bool)  # original constraint rows
    for i in range(rows):
        if basis[i] >= ncols:
            row = np.abs(T[i, :ncols])
            j = int(np.argmax(row)) if ncols else 0
            if ncols and row[j] > 1e-9:
                # largest pivot: a tiny one would blow up round-off in the other rows
                T[i] /= T[i, j]
                f = T[:, j].copy()
                f[i] = 0.0
                T -= np.outer(f, T[i])
                basis[i] = j
            else:
                # tableau row i is a zero combination of the constraints in which the
                # artificial of row basis[i] - ncols has coefficient 1: that row is redundant
                keep_t[i] = False
                keep[basis[i] - ncols] = False

    T = np.delete(T, np.s_[ncols : ncols + rows], axis=1)
    T = np.vstack([T[:rows][keep_t], T[-1:]])
    basis = basis[keep_t]
    Ak, bk = As[keep], bs[keep]

    if c is None:
        cvec = np.zeros(ncols)
        status = "optimal"
    else:
        cvec = np.asarray(c, dtype=float)
        T[-1, :-1] = cvec - cvec[basis] @ T[:-1, :-1]
        T[-1, -1] = -cvec[basis] @ T[:-1, -1]
        status, it = _run(T, basis, np.ones(ncols, dtype=bool), max_iter, it)
        if status == "unbounded":
            return LPResult("unbounded", None, None, np.zeros(rows), float(infeas), np.nan, it, basis)

    x = np.zeros(ncols)
    B = Ak[:, basis]
    try:
        xb = np.linalg.solve(B, bk)
    except np.linalg.LinAlgError:
        xb = T[:-1, -1].copy()
    x[basis] = np.where(xb > 1e-15, xb, 0.0)  # drop round-off noise and tiny negatives
    resid = float(np.max(np.abs(A @ x - b))) if rows else 0.0
    y = np.zeros(rows)
    y[keep] = _dual_from_basis(Ak, basis, cvec[basis])
    return LPResult(status, x, float(cvec @ x), y * sign, float(infeas), resid, it, basis)

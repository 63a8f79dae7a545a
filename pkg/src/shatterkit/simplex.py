"""Small dense two-phase simplex for standard-form LPs.

    minimize c @ x  subject to  A @ x = b,  x >= 0

Bland's rule (lowest index enters, lowest basic index leaves on ratio ties)
rules out cycling. Problems here are tiny, so a full tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericFailure

TOL = 1e-9
MAX_PIVOTS = 50_000


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    x: Optional[np.ndarray] = None
    value: Optional[float] = None


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T, basis, ncols, tol):
    """Optimize the tableau whose last row holds reduced costs; columns >= ncols are frozen."""
    for _ in range(MAX_PIVOTS):
        cost = T[-1, :ncols]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            return "optimal"
        col = int(entering[0])
        colv = T[:-1, col]
        rows = np.flatnonzero(colv > tol)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    raise NumericFailure("simplex exceeded the pivot limit")


def linprog_std(c, A, b, tol: float = TOL) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).ravel()
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    # phase 1: artificial basis, minimize the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status = _run(T, basis, n + m, tol)
    if status != "optimal" or -T[-1, -1] > tol * max(1.0, np.abs(b).max(initial=0.0)):
        return LPResult("infeasible")
    # drive remaining artificials out; drop rows that are redundant
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cols = np.flatnonzero(np.abs(T[r, :n]) > tol)
            if cols.size:
                _pivot(T, basis, r, int(cols[0]))
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [T.shape[1] - 1]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]
    # phase 2 reduced costs
    T[-1, :n] = c
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        if T[-1, j] != 0:
            T[-1] -= T[-1, j] * T[r]
    status = _run(T, basis, n, tol)
    if status == "unbounded":
        return LPResult("unbounded")
    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    return LPResult("optimal", x, float(c @ x))

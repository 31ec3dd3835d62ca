"""Small dense two-phase tableau simplex.

Used only as an independent cross-check of the moment-problem solver, so it
is deliberately textbook: full tableau, Dantzig pricing with a switch to
Bland's rule after a run of degenerate pivots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    value: float | None
    basis: tuple[int, ...] = ()
    iterations: int = 0


def _pivot(T, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _run(T, basis, obj, n_allowed, tol, max_iter):
    """Maximize ``obj @ x`` from the current basic feasible tableau."""
    degenerate = 0
    for it in range(max_iter):
        cb = obj[basis]
        rc = obj[:n_allowed] - cb @ T[:, :n_allowed]
        rc[list(b for b in basis if b < n_allowed)] = 0.0
        candidates = np.flatnonzero(rc > tol)
        if candidates.size == 0:
            return OPTIMAL, it
        col = candidates[0] if degenerate > 50 else candidates[np.argmax(rc[candidates])]
        column = T[:, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = min(ties, key=lambda r: basis[r])
        degenerate = degenerate + 1 if T[row, -1] <= tol else 0
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def linprog_max(c, A_eq, b_eq, tol: float = 1e-11, max_iter: int = 100_000) -> SimplexResult:
    """Maximize ``c @ x`` subject to ``A_eq @ x = b_eq`` and ``x >= 0``."""
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    c = np.asarray(c, dtype=float)
    r, n = A.shape
    scale = np.abs(A).max(axis=1)
    scale[scale == 0] = 1.0
    A /= scale[:, None]
    b = b / scale
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    T = np.zeros((r, n + r + 1))
    T[:, :n] = A
    T[:, n:n + r] = np.eye(r)
    T[:, -1] = b
    basis = list(range(n, n + r))

    phase1 = np.zeros(n + r)
    phase1[n:] = -1.0
    status, it1 = _run(T, basis, phase1, n + r, tol, max_iter)
    if T[:, -1] @ phase1[basis] < -1e-9:
        return SimplexResult(INFEASIBLE, None, None, iterations=it1)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for i in range(r):
        if basis[i] >= n:
            nz = np.flatnonzero(np.abs(T[i, :n]) > tol)
            if nz.size == 0:
                continue
            _pivot(T, i, nz[0])
            basis[i] = nz[0]
        keep.append(i)
    T = T[keep]
    basis = [basis[i] for i in keep]

    obj = np.zeros(n + r)
    obj[:n] = c
    status, it2 = _run(T, basis, obj, n, tol, max_iter)
    if status != OPTIMAL:
        return SimplexResult(status, None, None, tuple(basis), it1 + it2)

    # recompute the basic solution from the original system to shed pivot error
    x = np.zeros(n)
    B = np.asarray(A_eq, dtype=float)[:, basis]
    sol, *_ = np.linalg.lstsq(B, np.asarray(b_eq, dtype=float), rcond=None)
    x[basis] = sol
    return SimplexResult(OPTIMAL, x, float(c @ x), tuple(int(j) for j in basis), it1 + it2)

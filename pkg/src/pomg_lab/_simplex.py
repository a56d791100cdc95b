"""Dense two-phase simplex with Bland's rule.

Maximizes c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0. Small
tableaus run in exact rational arithmetic (every pivot is a Fraction
operation, so ties and degeneracy resolve deterministically); larger ones
fall back to floating point with a 1e-9 pivot tolerance. Bland's rule picks
the lowest-index entering column and breaks leaving-row ties by lowest
basis index, which rules out cycling in the exact path.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .errors import SolverError

PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
EXACT_CELL_BUDGET = 900


@dataclass(frozen=True, eq=False)
class LpResult:
    """Optimal point, objective value, and duals of the <= constraints."""

    x: np.ndarray
    objective: float
    duals_ub: np.ndarray


def _pivot(tableau: np.ndarray, rhs: np.ndarray, basis: List[int], row: int, col: int) -> None:
    piv = tableau[row, col]
    tableau[row] = tableau[row] / piv
    rhs[row] = rhs[row] / piv
    factors = tableau[:, col].copy()
    factors[row] = 0
    tableau -= np.outer(factors, tableau[row])
    rhs -= factors * rhs[row]
    basis[row] = col


def _run_simplex(
    tableau: np.ndarray,
    rhs: np.ndarray,
    basis: List[int],
    cost: np.ndarray,
    banned: np.ndarray,
    tol,
) -> np.ndarray:
    """Minimize cost over the tableau in place; returns final reduced costs."""
    reduced = cost.copy()
    for i, bv in enumerate(basis):
        if cost[bv] != 0:
            reduced = reduced - cost[bv] * tableau[i]
    while True:
        entering = -1
        for j in np.flatnonzero(reduced < -tol):
            if not banned[j]:
                entering = int(j)
                break
        if entering < 0:
            return reduced
        column = tableau[:, entering]
        best_row = -1
        best_ratio = None
        for i in range(tableau.shape[0]):
            if column[i] > tol:
                ratio = rhs[i] / column[i]
                if (
                    best_row < 0
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[best_row])
                ):
                    best_row = i
                    best_ratio = ratio
        if best_row < 0:
            raise SolverError("linear program is unbounded")
        _pivot(tableau, rhs, basis, best_row, entering)
        reduced = reduced - reduced[entering] * tableau[best_row]


def solve_lp(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    exact: Optional[bool] = None,
) -> LpResult:
    """Maximize c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0.

    exact=None picks rational arithmetic when the tableau is small enough
    and floating point otherwise. Raises SolverError on infeasible or
    unbounded programs.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    for arr in (c, a_ub, b_ub, a_eq, b_eq):
        if not np.isfinite(arr).all():
            raise SolverError("linear program has non-finite coefficients")
    m_ub, m_eq = b_ub.size, b_eq.size
    rows = m_ub + m_eq
    if exact is None:
        exact = (rows + 1) * (n + rows + 1) <= EXACT_CELL_BUDGET

    if exact:
        tol = Fraction(0)
        feas_tol = Fraction(0)

        def lift(arr: np.ndarray) -> np.ndarray:
            out = np.empty(arr.shape, dtype=object)
            flat_in, flat_out = arr.ravel(), out.ravel()
            for idx in range(flat_in.size):
                flat_out[idx] = Fraction(float(flat_in[idx]))
            return out

    else:
        tol = PIVOT_TOL
        feas_tol = FEASIBILITY_TOL

        def lift(arr: np.ndarray) -> np.ndarray:
            return arr.astype(float)

    dtype = object if exact else float
    slack_start = n
    art_candidates = rows  # at most one artificial per row
    width = n + m_ub + art_candidates
    tableau = np.zeros((rows, width), dtype=dtype)
    if exact:
        tableau[:] = Fraction(0)
    rhs = np.empty(rows, dtype=dtype)
    basis: List[int] = [0] * rows
    flipped = [False] * m_ub
    art_start = n + m_ub
    n_art = 0

    lifted_ub, lifted_bub = lift(a_ub), lift(b_ub)
    lifted_eq, lifted_beq = lift(a_eq), lift(b_eq)
    for i in range(m_ub):
        row, b = lifted_ub[i], lifted_bub[i]
        if b < 0:
            row, b = -row, -b
            flipped[i] = True
        tableau[i, :n] = row
        tableau[i, slack_start + i] = -1 if flipped[i] else 1
        rhs[i] = b
        if flipped[i]:
            tableau[i, art_start + n_art] = 1
            basis[i] = art_start + n_art
            n_art += 1
        else:
            basis[i] = slack_start + i
    for j in range(m_eq):
        row, b = lifted_eq[j], lifted_beq[j]
        if b < 0:
            row, b = -row, -b
        i = m_ub + j
        tableau[i, :n] = row
        rhs[i] = b
        tableau[i, art_start + n_art] = 1
        basis[i] = art_start + n_art
        n_art += 1
    width = art_start + n_art
    tableau = tableau[:, :width]

    banned = np.zeros(width, dtype=bool)
    if n_art:
        cost1 = np.zeros(width, dtype=dtype)
        if exact:
            cost1[:] = Fraction(0)
        cost1[art_start:] = 1 if not exact else Fraction(1)
        _run_simplex(tableau, rhs, basis, cost1, banned, tol)
        infeasibility = sum(rhs[i] for i in range(len(basis)) if basis[i] >= art_start)
        if infeasibility > feas_tol:
            raise SolverError(
                f"linear program is infeasible (artificial residual {float(infeasibility):.3e})"
            )
        # Drive leftover zero-valued artificials out of the basis; rows that
        # offer no pivot are linearly dependent and get dropped.
        drop = []
        for i in range(len(basis)):
            if basis[i] >= art_start:
                pivot_col = -1
                for j in range(art_start):
                    if abs(tableau[i, j]) > tol:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(tableau, rhs, basis, i, pivot_col)
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(len(basis)) if i not in drop]
            tableau = tableau[keep, :]
            rhs = rhs[keep]
            basis = [basis[i] for i in keep]
        banned[art_start:] = True

    cost2 = np.zeros(width, dtype=dtype)
    if exact:
        cost2[:] = Fraction(0)
    cost2[:n] = -lift(c)
    reduced = _run_simplex(tableau, rhs, basis, cost2, banned, tol)

    x = np.zeros(n)
    for i, bv in enumerate(basis):
        if bv < n:
            x[bv] = float(rhs[i])
    duals = np.zeros(m_ub)
    for i in range(m_ub):
        value = float(reduced[slack_start + i])
        duals[i] = -value if flipped[i] else value
    return LpResult(x=x, objective=float(c @ x), duals_ub=duals)

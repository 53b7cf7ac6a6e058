# netnl/services/simplex.py
"""
Dense Phase-1 Simplex Module.

Decides feasibility of {λ ≥ 0 : Aλ = b} by minimizing the sum of artificial
variables on a dense tableau. Bland's rule (smallest eligible index enters,
ties in the ratio test go to the smallest basic index) prevents cycling on
the highly degenerate local-polytope problems this package solves.

At the phase-1 optimum the simplex multipliers y satisfy yᵀA ≤ 0 and
yᵀb = objective, so a positive objective comes with a Farkas certificate.
An alternative backend solves the same phase-1 problem with
`scipy.optimize.linprog` (HiGHS) and reads y from the equality marginals.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ..core.constants import LP_MAX_ITERATIONS, LP_PIVOT_TOL, LpBackend
from ..core.exceptions import SolverError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PhaseOneResult:
    """Optimal phase-1 solution: primal x, multipliers y and the artificial sum."""
    x: np.ndarray
    y: np.ndarray
    objective: float
    iterations: int
    backend: str


def _condition_number(matrix: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(matrix))
    except np.linalg.LinAlgError:
        return float('inf')


def _normalize_rows(a: np.ndarray, b: np.ndarray):
    signs = np.where(b < 0, -1.0, 1.0)
    return a * signs[:, None], b * signs, signs


def solve_phase_one_simplex(
    a: np.ndarray,
    b: np.ndarray,
    pivot_tol: float = LP_PIVOT_TOL,
    max_iterations: int = LP_MAX_ITERATIONS,
) -> PhaseOneResult:
    """
    Phase-1 simplex on the tableau [A | I | b].

    Raises:
        SolverError: when the iteration limit is reached or the tableau
            becomes non-finite; carries the basis condition number.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    a, b, signs = _normalize_rows(a, b)

    tableau = np.hstack([a, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    # Reduced costs for c = (0, 1): r = c - 1ᵀT on the initial identity basis.
    reduced = np.concatenate([-a.sum(axis=0), np.zeros(m)])

    iterations = 0
    while True:
        candidates = np.nonzero(reduced[:n] < -pivot_tol)[0]
        if candidates.size == 0:
            break
        if iterations >= max_iterations:
            full = np.hstack([a, np.eye(m)])
            raise SolverError(
                "Simplex iteration limit reached.", iterations=iterations,
                condition_number=_condition_number(full[:, basis]), backend=LpBackend.SIMPLEX,
            )
        entering = int(candidates[0])
        column = tableau[:, entering]
        rows = np.nonzero(column > pivot_tol)[0]
        if rows.size == 0:
            full = np.hstack([a, np.eye(m)])
            raise SolverError(
                "Phase-1 problem reported unbounded.", iterations=iterations,
                condition_number=_condition_number(full[:, basis]), backend=LpBackend.SIMPLEX,
            )
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + pivot_tol * max(1.0, abs(best))]
        leaving = int(min(tied, key=lambda i: basis[i]))

        tableau[leaving] /= tableau[leaving, entering]
        factors = tableau[:, entering].copy()
        factors[leaving] = 0.0
        tableau -= np.outer(factors, tableau[leaving])
        reduced = reduced - reduced[entering] * tableau[leaving, :-1]
        basis[leaving] = entering
        iterations += 1

        if not np.all(np.isfinite(tableau)):
            full = np.hstack([a, np.eye(m)])
            raise SolverError(
                "Simplex tableau became non-finite.", iterations=iterations,
                condition_number=_condition_number(full[:, basis]), backend=LpBackend.SIMPLEX,
            )

    x = np.zeros(n)
    for row, var in enumerate(basis):
        if var < n:
            x[var] = max(tableau[row, -1], 0.0)
    artificial_sum = float(sum(tableau[row, -1] for row, var in enumerate(basis) if var >= n))
    # Artificial reduced costs are 1 - y_i.
    y = (1.0 - reduced[n:]) * signs
    logger.debug(f"Phase-1 simplex finished after {iterations} pivots, objective {artificial_sum:.3e}.")
    return PhaseOneResult(x=x, y=y, objective=max(artificial_sum, 0.0),
                          iterations=iterations, backend=LpBackend.SIMPLEX)


def solve_phase_one_highs(a: np.ndarray, b: np.ndarray) -> PhaseOneResult:
    """Same phase-1 problem solved by HiGHS through scipy."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    a, b, signs = _normalize_rows(a, b)
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    result = linprog(cost, A_eq=np.hstack([a, np.eye(m)]), b_eq=b, bounds=(0, None), method='highs')
    if result.status != 0:
        raise SolverError(f"HiGHS failed: {result.message}", iterations=getattr(result, 'nit', None),
                          condition_number=_condition_number(a @ a.T), backend=LpBackend.HIGHS)
    y = np.asarray(result.eqlin.marginals, dtype=float) * signs
    return PhaseOneResult(x=np.clip(result.x[:n], 0.0, None), y=y, objective=max(float(result.fun), 0.0),
                          iterations=int(getattr(result, 'nit', 0)), backend=LpBackend.HIGHS)


def solve_phase_one(a: np.ndarray, b: np.ndarray, backend: Optional[str] = None) -> PhaseOneResult:
    backend = backend or LpBackend.SIMPLEX
    if backend == LpBackend.SIMPLEX:
        return solve_phase_one_simplex(a, b)
    if backend == LpBackend.HIGHS:
        return solve_phase_one_highs(a, b)
    raise SolverError(f"Unknown LP backend '{backend}'.", backend=backend)

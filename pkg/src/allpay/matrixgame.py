"""Finite two-player zero-sum matrix games: value and optimal mixed strategies.

The reference path is a self-contained simplex over exact rationals with
Bland's rule, so results are deterministic and the duality certificate is
exactly zero.  A fixed-precision path backed by scipy's HiGHS solver is
available for bulk workloads; it must (and does) satisfy the same
certificate contract, falling back to the exact path when it cannot.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class MatrixGame:
    """Payoff matrix for the row player (maximizer); rows x cols, finite."""

    pay: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "MatrixGame":
        if not rows or not rows[0]:
            raise ValueError("matrix game needs at least one row and one column")
        width = len(rows[0])
        conv = []
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged payoff matrix")
            conv.append(tuple(Fraction(x) for x in r))
        return MatrixGame(pay=tuple(conv))

    @property
    def rows(self) -> int:
        return len(self.pay)

    @property
    def cols(self) -> int:
        return len(self.pay[0])


@dataclass(frozen=True)
class MatrixSolution:
    """Maximin value with mixed strategies for both players.

    `certificate_gap` bounds how far each strategy may fall short of the
    reported value against the opponent's pure responses; it is exactly 0 on
    the exact path.
    """

    value: Fraction | float
    row_strategy: tuple
    col_strategy: tuple
    certificate_gap: Fraction | float


class _Unbounded(ArithmeticError):
    pass


def _simplex_max(c: list[Fraction], a: list[list[Fraction]], b: list[Fraction]):
    """Maximize c.x s.t. a x <= b, x >= 0 with b >= 0, by tableau simplex.

    Bland's rule (lowest eligible index enters, lowest-index basic variable
    among minimal ratios leaves) guarantees termination and determinism.
    Returns (x, duals).
    """
    m, n = len(a), len(c)
    # Tableau: columns = n structural + m slacks + rhs; last row = objective.
    tab = [row[:] + [Fraction(0)] * m + [b[i]] for i, row in enumerate(a)]
    for i in range(m):
        tab[i][n + i] = Fraction(1)
    obj = [-ci for ci in c] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]
    total = n + m
    while True:
        enter = next((j for j in range(total) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            coef = tab[i][enter]
            if coef > 0:
                ratio = tab[i][-1] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise _Unbounded("unbounded linear program")
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [x - f * y for x, y in zip(obj, tab[leave])]
        basis[leave] = enter
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = tab[i][-1]
    duals = obj[n : n + m]
    return x, duals


def _solve_exact(pay) -> MatrixSolution:
    rows, cols = len(pay), len(pay[0])
    lo = min(min(r) for r in pay)
    shift = 1 - lo  # make every payoff >= 1 so the game value is positive
    m = [[pay[i][j] + shift for j in range(cols)] for i in range(rows)]
    # Column player's LP: max sum(w) s.t. M w <= 1, w >= 0.
    w, duals = _simplex_max(
        c=[Fraction(1)] * cols,
        a=m,
        b=[Fraction(1)] * rows,
    )
    total = sum(w)
    assert total > 0, "shifted game must have positive value"
    shifted_value = 1 / total
    col = [wi * shifted_value for wi in w]
    dual_total = sum(duals)
    assert dual_total == total, "strong duality must hold exactly"
    row = [ui * shifted_value for ui in duals]
    value = shifted_value - shift
    row_secure = min(
        sum(row[i] * pay[i][j] for i in range(rows)) for j in range(cols)
    )
    col_secure = max(
        sum(pay[i][j] * col[j] for j in range(cols)) for i in range(rows)
    )
    gap = max(value - row_secure, col_secure - value, Fraction(0))
    return MatrixSolution(
        value=value,
        row_strategy=tuple(row),
        col_strategy=tuple(col),
        certificate_gap=gap,
    )


def _solve_fast(pay: np.ndarray) -> MatrixSolution | None:
    """HiGHS-backed solve; returns None when the result fails its certificate."""
    from scipy.optimize import linprog

    rows, cols = pay.shape
    # Variables: x (row mixture), v.  Maximize v s.t. pay^T x >= v, sum x = 1.
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-pay.T, np.ones((cols, 1))])
    b_ub = np.zeros(cols)
    a_eq = np.zeros((1, rows + 1))
    a_eq[0, :rows] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * rows + [(None, None)],
        method="highs",
    )
    if not res.success:
        return None
    x = np.maximum(res.x[:rows], 0.0)
    x /= x.sum()
    y = np.maximum(-res.ineqlin.marginals, 0.0)
    if y.sum() <= 0:
        return None
    y /= y.sum()
    value = float(res.x[-1])
    row_secure = float((x @ pay).min())
    col_secure = float((pay @ y).max())
    gap = max(value - row_secure, col_secure - value, 0.0)
    return MatrixSolution(
        value=value,
        row_strategy=tuple(float(v) for v in x),
        col_strategy=tuple(float(v) for v in y),
        certificate_gap=gap,
    )


DEFAULT_TOL = Fraction(1, 10**9)


def solve_matrix_game(
    game: MatrixGame | Sequence[Sequence],
    tol: Fraction | float = DEFAULT_TOL,
    method: str = "exact",
) -> MatrixSolution:
    """Solve a zero-sum matrix game for the row player's maximin value.

    `method="exact"` runs the rational simplex (certificate gap 0);
    `method="fast"` runs HiGHS in floating point and falls back to the exact
    path if the duality certificate exceeds `tol`.
    """
    if tol is not None and tol < 0:
        raise ValueError("tol must be nonnegative")
    if method == "fast":
        if isinstance(game, np.ndarray):
            arr = game.astype(float, copy=False)
        else:
            pay = game.pay if isinstance(game, MatrixGame) else game
            arr = np.array([[float(x) for x in row] for row in pay], dtype=float)
        sol = _solve_fast(arr)
        if sol is not None and sol.certificate_gap <= float(tol):
            return sol
        method = "exact"
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if isinstance(game, np.ndarray):
        game = MatrixGame.from_rows(game.tolist())
    elif not isinstance(game, MatrixGame):
        game = MatrixGame.from_rows(game)
    sol = _solve_exact(game.pay)
    assert sol.certificate_gap == 0
    return sol

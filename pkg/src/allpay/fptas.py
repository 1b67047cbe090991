"""Grid-value approximation for DAG games: lower/upper brackets per budget.

Bottom-up over the DAG, for every vertex and every grid budget up to the
vertex's surely-winning threshold, a finite bid-vs-bid matrix game is solved
whose cells renormalize Player 1's budget and read the successor tables.
Two tables are kept: the pessimistic one rounds the renormalized budget down
and gives ties to Player 2 (every approximation hurts Player 1, so it
lower-bounds the value); the optimistic one rounds up and gives ties to
Player 1, and together with the depth-scaled budget shift it upper-bounds
the value.  Budgets, bids and grid indices are exact integers; only the
matrix-game values are floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import GameGraph, MixedBidStrategy, QualitativeView, longest_path_to_leaf, topological_order
from .matrixgame import solve_matrix_game
from .surewin import thresholds_dag

LOWER = "lower"
UPPER = "upper"


@dataclass
class ValueTable:
    """Per-vertex value arrays over the budget grid B1 = k * epsilon.

    Arrays run from index 0 to the vertex's cap index; at and above the cap
    index the value equals the best leaf weight reachable from the vertex.
    `strategies` stores, for every pessimistic-table cell, the LP row mixture
    and the committed successor per supported bid.
    """

    game: GameGraph
    epsilon: Fraction
    grid: int  # K with epsilon = 1/K
    depth: int
    lower: dict[str, np.ndarray]
    upper: dict[str, np.ndarray]
    cap_value: dict[str, Fraction]
    sthr: dict[str, Fraction]
    lower_cap: dict[str, int]
    upper_cap: dict[str, int]
    strategies: dict[tuple[str, int], tuple[tuple[int, ...], tuple[float, ...], tuple[str, ...]]]

    def read(self, kind: str, vertex: str, index: int) -> float:
        arr = self.lower[vertex] if kind == LOWER else self.upper[vertex]
        cap = self.lower_cap[vertex] if kind == LOWER else self.upper_cap[vertex]
        return float(arr[min(max(index, 0), cap)])


def _successor_lookup(table: ValueTable, kind: str, succ: list[str]):
    """Win/lose value arrays over B' indices 0..M plus the argmax successor."""
    caps = [table.lower_cap[u] if kind == LOWER else table.upper_cap[u] for u in succ]
    arrays = [table.lower[u] if kind == LOWER else table.upper[u] for u in succ]
    m = max(caps)
    idx = np.arange(m + 1)
    stacked = np.stack([arr[np.minimum(idx, cap)] for arr, cap in zip(arrays, caps)])
    win = stacked.max(axis=0)
    lose = stacked.min(axis=0)
    argwin = stacked.argmax(axis=0)
    return win, lose, argwin, m


def _cell_matrix(
    table: ValueTable,
    vertex: str,
    p: int,
    kind: str,
) -> np.ndarray:
    """Payoff matrix of the bid-vs-bid game at grid budget index p.

    Rows are Player 1's grid bids (pruned above the least bid that beats
    every opponent bid, which is weakly dominant); columns are Player 2's
    grid bids 0..K.  The b2 = 1 column renormalizes onto a broke opponent:
    any positive remainder for the round winner plays out at the cap.
    """
    k = table.grid
    succ = list(table.game.neighbors[vertex])
    win, lose, _, m = _successor_lookup(table, kind, succ)
    strict = kind == LOWER
    top_row = min(p, k + 1 if strict else k)
    i = np.arange(top_row + 1)[:, None]
    j = np.arange(k)[None, :]  # b2 = 1 handled separately
    rem = (p - i) * k
    den = k - j
    floor_idx = rem // den
    if strict:
        bprime = np.minimum(floor_idx, m)
        winmask = i > j
    else:
        bprime = np.minimum(-((-rem) // den), m)
        winmask = i >= j
    pay = np.where(winmask, win[bprime], lose[bprime])
    # Singular column: Player 2 bids his whole budget.
    col = np.empty((top_row + 1, 1))
    for ii in range(top_row + 1):
        p1_wins = (ii > k) if strict else (ii >= k)
        remaining = p - ii
        if p1_wins:
            col[ii, 0] = win[m] if remaining > 0 else win[0]
        else:
            col[ii, 0] = lose[m] if remaining > 0 else lose[0]
    return np.hstack([pay, col])


def approx_values(g: GameGraph, epsilon, method: str = "fast") -> ValueTable:
    """Run the bottom-up grid approximation on a DAG game.

    `epsilon` must be 1/K for an integer K >= 2 so that Player 2's budget of
    1 lies on the grid.  Returns the filled :class:`ValueTable`.
    """
    epsilon = Fraction(epsilon)
    if epsilon.numerator != 1 or epsilon.denominator < 2:
        raise ValueError("epsilon must be 1/K for an integer K >= 2")
    if not g.is_dag:
        raise ValueError("grid approximation requires a DAG")
    k = epsilon.denominator
    topo = topological_order(g)
    depth = max(longest_path_to_leaf(g).values())

    cap_value: dict[str, Fraction] = {}
    for v in reversed(topo):
        if v in g.weights:
            cap_value[v] = g.weights[v]
        else:
            cap_value[v] = max(cap_value[u] for u in g.neighbors[v])

    sthr: dict[str, Fraction] = {leaf: Fraction(0) for leaf in g.weights}
    for cut in sorted(set(cap_value[v] for v in g.vertices if v not in g.weights)):
        thr = thresholds_dag(QualitativeView.from_cut(g, cut))
        for v in g.vertices:
            if v not in g.weights and cap_value[v] == cut:
                sthr[v] = thr.values[v]

    table = ValueTable(
        game=g,
        epsilon=epsilon,
        grid=k,
        depth=depth,
        lower={},
        upper={},
        cap_value=cap_value,
        sthr=sthr,
        lower_cap={},
        upper_cap={},
        strategies={},
    )
    for leaf in g.weights:
        w = float(g.weights[leaf])
        table.lower[leaf] = np.array([w])
        table.upper[leaf] = np.array([w])
        table.lower_cap[leaf] = 0
        table.upper_cap[leaf] = 0

    for v in reversed(topo):
        if v in g.weights:
            continue
        t = sthr[v]
        lo_cap = (t.numerator * k) // t.denominator + 1
        up_cap = -((-t.numerator * k) // t.denominator)
        table.lower_cap[v] = lo_cap
        table.upper_cap[v] = up_cap
        cap = float(cap_value[v])
        lower = np.full(lo_cap + 1, cap)
        upper = np.full(up_cap + 1, cap)
        succ = list(g.neighbors[v])
        w_lo = float(min(g.weights.values()))
        w_hi = float(max(g.weights.values()))
        _, _, argwin_low, m_low = _successor_lookup(table, LOWER, succ)
        for p in range(lo_cap):
            pay = _cell_matrix(table, v, p, LOWER)
            sol = solve_matrix_game(pay, method=method, tol=1e-6)
            lower[p] = min(max(sol.value, w_lo), w_hi)
            bids, probs, succs = [], [], []
            for i, prob in enumerate(sol.row_strategy):
                if prob <= 1e-12:
                    continue
                # Successor committed at the tightest winning renormalization.
                if i == 0:
                    u = succ[0]  # bid 0 never wins the pessimistic cell
                elif i - 1 >= k:
                    widx = m_low if p - i > 0 else 0
                    u = succ[int(argwin_low[widx])]
                else:
                    widx = min(((p - i) * k) // (k - (i - 1)), m_low)
                    u = succ[int(argwin_low[widx])]
                bids.append(i)
                probs.append(float(prob))
                succs.append(u)
            table.strategies[(v, p)] = (tuple(bids), tuple(probs), tuple(succs))
        for p in range(up_cap):
            pay = _cell_matrix(table, v, p, UPPER)
            sol = solve_matrix_game(pay, method=method, tol=1e-6)
            upper[p] = min(max(sol.value, w_lo), w_hi)
        table.lower[v] = lower
        table.upper[v] = upper
    return table


def value_bracket(table: ValueTable, vertex: str, budget) -> tuple[float, float]:
    """Sound (lower, upper) bounds for the value at the given real budget.

    The lower bound reads the pessimistic table at the grid point below the
    budget; the upper bound reads the optimistic table at the grid point
    above the budget shifted up by depth * epsilon, clamped at the cap.
    """
    if vertex not in table.game.vertices:
        raise KeyError(f"unknown vertex {vertex!r}")
    b = Fraction(budget)
    if b < 0:
        raise ValueError("budget must be nonnegative")
    k = table.grid
    lo_idx = (b.numerator * k) // b.denominator
    up_idx = -((-b.numerator * k) // b.denominator) + table.depth
    return table.read(LOWER, vertex, lo_idx), table.read(UPPER, vertex, up_idx)


def strategy_at(table: ValueTable, vertex: str, budget) -> MixedBidStrategy:
    """The stored pessimistic-table bid mixture at an on-grid budget.

    Only defined up to the vertex's surely-winning threshold; above it,
    deterministic surely-winning play takes over and no mixture is stored.
    """
    if vertex not in table.game.vertices:
        raise KeyError(f"unknown vertex {vertex!r}")
    b = Fraction(budget)
    scaled = b * table.grid
    if scaled.denominator != 1:
        raise ValueError(f"budget {budget} is not a multiple of epsilon")
    if b > table.sthr[vertex]:
        raise ValueError(
            f"budget {budget} exceeds the surely-winning threshold of {vertex!r}"
        )
    idx = int(scaled)
    bids, probs, succs = table.strategies[(vertex, idx)]
    total = sum(Fraction(pr) for pr in probs)
    return MixedBidStrategy(
        bids=tuple(Fraction(i, table.grid) for i in bids),
        successors=succs,
        probabilities=tuple(Fraction(pr) / total for pr in probs),
    )

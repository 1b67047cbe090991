"""Surely-winning threshold ratios and the strategies that realize them.

A threshold function T assigns 0 to Player 1's target leaves, infinity to
Player 2's, and satisfies T(v) = T(v-) + 1 - T(v-)/T(v+) elsewhere, where
v-/v+ are the neighbors minimizing/maximizing T.  Above T(v) Player 1 wins
surely; below it Player 2 wins with positive probability.  On DAGs the
function is computed exactly by backward induction; on cyclic graphs it is
bracketed by iterating the round-limited truncations, whose per-vertex
values decrease monotonically toward the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .graph import GameGraph, QualitativeView, distances_to, leaves_reachable, topological_order
from .rational import INF, Ratio, is_inf


@dataclass(frozen=True)
class ThresholdResult:
    """Per-vertex threshold values; exact iff computed by DAG induction."""

    values: Mapping[str, Ratio]
    exact: bool
    iterations: int = 0
    residual: Ratio = Fraction(0)
    converged: bool = True


def _step(tmin: Ratio, tmax: Ratio) -> Ratio:
    """One application of the threshold recurrence for given neighbor extremes."""
    if is_inf(tmin):
        return INF
    if tmax == 0:
        # All neighbors already guaranteed for Player 1.
        return Fraction(0)
    if is_inf(tmax):
        return tmin + 1
    return tmin + 1 - tmin / tmax


def thresholds_dag(view: QualitativeView) -> ThresholdResult:
    """Exact threshold function by backward induction over a DAG."""
    g = view.base
    if not g.is_dag:
        raise ValueError(
            "graph has a directed cycle; use thresholds_iterative for cyclic games"
        )
    values: dict[str, Ratio] = {}
    for v in reversed(topological_order(g)):
        if v in view.target1:
            values[v] = Fraction(0)
        elif v in view.target2:
            values[v] = INF
        else:
            ts = [values[u] for u in g.neighbors[v]]
            values[v] = _step(min(ts), max(ts))
    return ThresholdResult(values=values, exact=True)


def thresholds_iterative(
    view: QualitativeView,
    max_rounds: int | None = None,
    tol: Fraction = Fraction(1, 10**9),
) -> ThresholdResult:
    """Bracket thresholds on an arbitrary graph by round-limited truncation.

    Iterate T_n, the threshold function of the game where Player 1 must reach
    his target within n rounds; the sequence is pointwise nonincreasing and
    converges to the threshold function.  Stops at the first n with maximal
    per-vertex change below `tol` (tol = 0 demands a fully stable sweep).
    Non-convergence within `max_rounds` is reported via the result flags,
    not raised.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    g = view.base
    if max_rounds is None:
        max_rounds = 10 * len(g.vertices) ** 2
    internal = sorted(g.vertices - g.leaves)
    values: dict[str, Ratio] = {v: INF for v in internal}
    for t in view.target1:
        values[t] = Fraction(0)
    for t in view.target2:
        values[t] = INF
    iterations = 0
    residual: Ratio = INF
    converged = False
    for iterations in range(1, max_rounds + 1):
        new = dict(values)
        residual = Fraction(0)
        for v in internal:
            ts = [values[u] for u in g.neighbors[v]]
            nv = _step(min(ts), max(ts))
            old = values[v]
            assert nv <= old, f"truncation values increased at {v!r}"
            if is_inf(old):
                if not is_inf(nv):
                    residual = INF
            elif not is_inf(residual):
                residual = max(residual, old - nv)
            new[v] = nv
        values = new
        if not is_inf(residual) and residual <= tol:
            converged = True
            break
    return ThresholdResult(
        values=values,
        exact=False,
        iterations=iterations,
        residual=residual,
        converged=converged,
    )


def _min_t_move(
    g: GameGraph, t: Mapping[str, Ratio], dist_t1: Mapping[str, int]
) -> dict[str, str]:
    """Winning move per vertex: minimize T, then distance to target, then id."""
    move = {}
    for v in g.vertices - g.leaves:
        if is_inf(t[v]):
            continue

        def key(u: str):
            d = dist_t1[u]
            return (t[u], d if d >= 0 else len(g.vertices) + 1, u)

        move[v] = min(g.neighbors[v], key=key)
    return move


@dataclass(frozen=True)
class SureWinStrategy:
    """Player 1's constructive surely-winning play.

    In round i of a phase of length `phase_len`, at vertex v the bid is
    ``1 - T(v-)/T(v+)`` plus the vanishing supplement ``delta**(phase_len+1-i)``
    with ``delta = epsilon**2``; on winning the token moves to the recorded
    min-threshold neighbor.  All bids are legal whenever the initial ratio
    exceeds ``T(root) + epsilon``.
    """

    view: QualitativeView
    thresholds: Mapping[str, Ratio]
    epsilon: Fraction
    delta: Fraction
    phase_len: int
    base_bid: Mapping[str, Fraction]
    move: Mapping[str, str]


@dataclass(frozen=True)
class SpoilerStrategy:
    """Player 2's positive-probability winning play below the threshold.

    At each vertex Player 2 bids 0 with probability 1/2 and otherwise
    uniformly in (0, beta].  On vertices where the neighbor thresholds
    straddle T(v) ("contested", beta = 1 - T(v-)/T(v+)) he moves toward his
    target; on vertices where they all agree ("flat", beta scaled down by
    (2n)^-d with d the distance to a contested vertex) he moves toward the
    contested region.  The constants are recorded for reproducibility.
    """

    view: QualitativeView
    thresholds: Mapping[str, Ratio]
    epsilon: Fraction
    p: Fraction
    n: int
    beta: Mapping[str, Fraction]
    move: Mapping[str, str]
    flat_depth: Mapping[str, int]


def extract_sure_win_strategy(
    view: QualitativeView, result: ThresholdResult, epsilon: Fraction
) -> SureWinStrategy:
    """Build the Player-1 strategy that surely wins above T(root) + epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    g = view.base
    t = result.values
    root = g.root
    if root is not None and is_inf(t[root]):
        raise ValueError(f"no surely-winning strategy exists at {root!r} (T is infinite)")
    dist_t1 = distances_to(g, view.target1)
    base_bid: dict[str, Fraction] = {}
    for v in g.vertices - g.leaves:
        if is_inf(t[v]):
            continue
        ts = [t[u] for u in g.neighbors[v]]
        tmin, tmax = min(ts), max(ts)
        if tmax == 0:
            base_bid[v] = Fraction(0)
        else:
            base_bid[v] = 1 - tmin / tmax  # tmin/INF == 0
    return SureWinStrategy(
        view=view,
        thresholds=t,
        epsilon=Fraction(epsilon),
        delta=Fraction(epsilon) ** 2,
        phase_len=len(g.vertices),
        base_bid=base_bid,
        move=_min_t_move(g, t, dist_t1),
    )


def extract_spoiler_strategy(
    view: QualitativeView,
    result: ThresholdResult,
    epsilon: Fraction,
    p: Fraction | None = None,
) -> SpoilerStrategy:
    """Build the Player-2 strategy that wins with positive probability below T."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    g = view.base
    t = result.values
    n = len(g.vertices)
    if p is None:
        p = Fraction(1, 4 * n)
    if p <= 0:
        raise ValueError("p must be positive")
    internal = g.vertices - g.leaves
    contested = set()
    for v in internal:
        ts = [t[u] for u in g.neighbors[v]]
        tmin, tmax = min(ts), max(ts)
        if not (tmin == t[v] and tmax == t[v]):
            contested.add(v)
    dist_contested = distances_to(g, contested | view.target2)
    dist_t2 = distances_to(g, view.target2)
    beta: dict[str, Fraction] = {}
    move: dict[str, str] = {}
    flat_depth: dict[str, int] = {}
    for v in internal:
        ts = [t[u] for u in g.neighbors[v]]
        tmin, tmax = min(ts), max(ts)
        if v in contested:
            flat_depth[v] = 0
            if is_inf(tmax) or tmax == 0:
                beta[v] = Fraction(1) if tmax != 0 else p * epsilon
            else:
                beta[v] = 1 - tmin / tmax
            if beta[v] <= 0:
                beta[v] = p * epsilon
            # Move to a maximal-threshold neighbor, nearest Player 2's target.
            cands = [u for u in g.neighbors[v] if t[u] == tmax]
        else:
            d = dist_contested[v]
            flat_depth[v] = d if d >= 0 else n
            beta[v] = p * epsilon * Fraction(1, (2 * n) ** flat_depth[v])
            best = min(
                (dist_contested[u] if dist_contested[u] >= 0 else n + 1)
                for u in g.neighbors[v]
            )
            cands = [
                u
                for u in g.neighbors[v]
                if (dist_contested[u] if dist_contested[u] >= 0 else n + 1) == best
            ]
        move[v] = min(
            cands, key=lambda u: (dist_t2[u] if dist_t2[u] >= 0 else n + 1, u)
        )
    return SpoilerStrategy(
        view=view,
        thresholds=t,
        epsilon=Fraction(epsilon),
        p=p,
        n=n,
        beta=beta,
        move=move,
        flat_depth=flat_depth,
    )

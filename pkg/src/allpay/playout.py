"""Seeded Monte-Carlo playout of strategy pairs with exact budget bookkeeping.

Each round both strategies submit a sealed (bid, successor-on-win) pair; the
tie rule picks the bidding winner, both bids are paid to the bank, budgets
are renormalized so Player 2 holds exactly 1 (skipped only when Player 2 is
broke), and the winner's successor is taken.  All budget arithmetic is in
exact rationals.  Trials draw from per-trial deterministic RNG streams, so a
report is a pure function of its inputs and seed.

RNG: Python's Mersenne Twister, one generator per (trial, player), seeded
with ``seed * 2**20 + trial * 2 + player_index`` -- parallel schedules would
reproduce the sequential report exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .analytic import wnr2_strategies
from .fptas import ValueTable, strategy_at
from .graph import GameGraph, MixedBidStrategy, QualitativeView, distances_to
from .rational import is_inf
from .surewin import SpoilerStrategy, SureWinStrategy

PLAYER1_WINS = "player-1-wins"
PLAYER2_WINS = "player-2-wins"

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class PlayoutConfig:
    trials: int = 10_000
    seed: int = 0
    max_rounds: int | None = None  # defaults to 10 * |V| at simulate time
    tie_rule: str = PLAYER1_WINS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.tie_rule not in (PLAYER1_WINS, PLAYER2_WINS):
            raise ValueError(f"unknown tie rule {self.tie_rule!r}")


@dataclass
class PlayoutReport:
    trials: int
    mean: float
    wilson_low: float
    wilson_high: float
    leaf_hits: dict[str, int] = field(default_factory=dict)
    illegal_bids: int = 0
    truncations: int = 0

    def completed(self) -> int:
        return sum(self.leaf_hits.values()) + self.truncations


class PlayStrategy:
    """Playable strategy: fresh state per trial, sealed action per round."""

    def begin_trial(self, rng: random.Random) -> None:
        self.rng = rng

    def act(self, vertex: str, budget1: Fraction, budget2: Fraction):
        """Return (bid, successor-on-win); the bid must be legal."""
        raise NotImplementedError


def _wilson(successes: float, n: int, lo: float, hi: float) -> tuple[float, float]:
    """Wilson 95% interval for the mean of payoffs affinely scaled to [0,1]."""
    if n == 0:
        return (0.0, 0.0)
    span = hi - lo
    p = (successes / n - lo) / span if span else 0.0
    z2 = _Z95 * _Z95
    denom = 1 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(max(p * (1 - p), 0.0) / n + z2 / (4 * n * n)) / denom
    return (lo + span * max(center - half, 0.0), lo + span * min(center + half, 1.0))


def simulate(
    g: GameGraph,
    root: str,
    budget1,
    strategy1: PlayStrategy,
    strategy2: PlayStrategy,
    cfg: PlayoutConfig,
) -> PlayoutReport:
    """Run seeded trials of a strategy pair from `root` at ratio `budget1` : 1."""
    if root not in g.vertices:
        raise KeyError(f"unknown root {root!r}")
    b1_init = Fraction(budget1)
    if b1_init < 0:
        raise ValueError("initial budget must be nonnegative")
    max_rounds = cfg.max_rounds if cfg.max_rounds is not None else 10 * len(g.vertices)
    p1_ties = cfg.tie_rule == PLAYER1_WINS
    weights = g.weights
    floor_weight = min(weights.values())
    leaf_hits = {leaf: 0 for leaf in weights}
    illegal = 0
    truncations = 0
    payoff_total = 0.0
    for trial in range(cfg.trials):
        strategy1.begin_trial(random.Random(cfg.seed * 2**20 + 2 * trial))
        strategy2.begin_trial(random.Random(cfg.seed * 2**20 + 2 * trial + 1))
        v = root
        b1, b2 = b1_init, Fraction(1)
        outcome = None
        for _ in range(max_rounds):
            if v in weights:
                break
            bid1, succ1 = strategy1.act(v, b1, b2)
            bid2, succ2 = strategy2.act(v, b1, b2)
            if not (0 <= bid1 <= b1 and succ1 in g.neighbors[v]):
                outcome = "illegal"
                break
            if not (0 <= bid2 <= b2 and succ2 in g.neighbors[v]):
                outcome = "illegal"
                break
            p1_won = bid1 >= bid2 if p1_ties else bid1 > bid2
            b1 -= bid1
            b2 -= bid2
            if b2 > 0:
                b1 = b1 / b2
                b2 = Fraction(1)
            v = succ1 if p1_won else succ2
        if outcome == "illegal":
            illegal += 1
            continue
        if v in weights:
            leaf_hits[v] += 1
            payoff_total += float(weights[v])
        else:
            truncations += 1
            payoff_total += float(floor_weight)
    counted = cfg.trials - illegal
    mean = payoff_total / counted if counted else 0.0
    lo, hi = _wilson(
        payoff_total,
        counted,
        float(floor_weight),
        float(max(weights.values())),
    )
    return PlayoutReport(
        trials=cfg.trials,
        mean=mean,
        wilson_low=lo,
        wilson_high=hi,
        leaf_hits=leaf_hits,
        illegal_bids=illegal,
        truncations=truncations,
    )


# ---------------------------------------------------------------------------
# Built-in strategies
# ---------------------------------------------------------------------------


def _unit_fraction(rng: random.Random) -> Fraction:
    """Exact uniform rational in [0, 1) at 53-bit resolution."""
    return Fraction(rng.getrandbits(53), 2**53)


def _toward(g: GameGraph, leaf: str) -> dict[str, str]:
    dist = distances_to(g, [leaf])
    big = len(g.vertices) + 1
    move = {}
    for v in g.vertices - g.leaves:
        move[v] = min(
            g.neighbors[v], key=lambda u: (dist[u] if dist[u] >= 0 else big, u)
        )
    return move


def _target_leaf(g: GameGraph, player: int) -> str:
    pick = max if player == 1 else min
    return pick(g.weights, key=lambda l: (g.weights[l], l))


class ZeroBid(PlayStrategy):
    """Always bids 0 and heads for the player's favourite leaf."""

    def __init__(self, g: GameGraph, player: int):
        self.move = _toward(g, _target_leaf(g, player))

    def act(self, vertex, budget1, budget2):
        return Fraction(0), self.move[vertex]


class AllIn(PlayStrategy):
    """Bids the entire remaining budget every round."""

    def __init__(self, g: GameGraph, player: int):
        self.player = player
        self.move = _toward(g, _target_leaf(g, player))

    def act(self, vertex, budget1, budget2):
        return (budget1 if self.player == 1 else budget2), self.move[vertex]


class UniformBid(PlayStrategy):
    """Bids an exactly-sampled uniform share of the remaining budget."""

    def __init__(self, g: GameGraph, player: int):
        self.player = player
        self.move = _toward(g, _target_leaf(g, player))

    def act(self, vertex, budget1, budget2):
        own = budget1 if self.player == 1 else budget2
        return own * _unit_fraction(self.rng), self.move[vertex]


class MixedFirstBid(PlayStrategy):
    """Plays a finite mixed strategy at the start vertex, then a follow-up."""

    def __init__(self, mixed: MixedBidStrategy, follow: PlayStrategy, start: str):
        self.mixed = mixed
        self.follow = follow
        self.start = start

    def begin_trial(self, rng):
        super().begin_trial(rng)
        self.follow.begin_trial(rng)

    def act(self, vertex, budget1, budget2):
        if vertex == self.start:
            u = _unit_fraction(self.rng)
            acc = Fraction(0)
            for bid, succ, prob in zip(
                self.mixed.bids, self.mixed.successors, self.mixed.probabilities
            ):
                acc += prob
                if u < acc:
                    return bid * budget2, succ
            return self.mixed.bids[-1] * budget2, self.mixed.successors[-1]
        return self.follow.act(vertex, budget1, budget2)


class _Wnr2Finish(PlayStrategy):
    """Second-round play in the two-wins race: commit the whole budget."""

    def __init__(self, player: int):
        self.player = player

    def act(self, vertex, budget1, budget2):
        if self.player == 1:
            return min(budget1, budget2), "t1"
        return budget2, "t2"


def wnr2_p1(g: GameGraph, budget1) -> PlayStrategy:
    p1, _ = wnr2_strategies(budget1)
    return MixedFirstBid(p1, _Wnr2Finish(1), g.root or "v2_1")


def wnr2_p2(g: GameGraph, budget1) -> PlayStrategy:
    _, p2 = wnr2_strategies(budget1)
    return MixedFirstBid(p2, _Wnr2Finish(2), g.root or "v2_1")


class SureWinPlay(PlayStrategy):
    """Executes the constructive surely-winning strategy for Player 1."""

    def __init__(self, strategy: SureWinStrategy):
        self.s = strategy

    def begin_trial(self, rng):
        super().begin_trial(rng)
        self.round_in_phase = 0

    def act(self, vertex, budget1, budget2):
        s = self.s
        self.round_in_phase = self.round_in_phase % s.phase_len + 1
        if budget2 == 0:
            # Opponent is broke; any positive bid wins under either tie rule.
            return budget1 / 2, s.move[vertex]
        t = s.thresholds[vertex]
        if not is_inf(t) and t == 0:
            return Fraction(0), s.move[vertex]
        supplement = s.delta ** (s.phase_len + 1 - self.round_in_phase)
        return (s.base_bid[vertex] + supplement) * budget2, s.move[vertex]


class SpoilerPlay(PlayStrategy):
    """Executes Player 2's positive-probability spoiling strategy."""

    def __init__(self, strategy: SpoilerStrategy):
        self.s = strategy

    def act(self, vertex, budget1, budget2):
        move = self.s.move[vertex]
        if self.rng.getrandbits(1):
            return Fraction(0), move
        # Uniform on (0, beta], exactly sampled.
        bid = self.s.beta[vertex] * (1 - _unit_fraction(self.rng)) * budget2
        return bid, move


class FptasPlay(PlayStrategy):
    """Plays the pessimistic-table mixtures; above threshold, holds the ratio.

    Below the vertex threshold the budget snaps down to the grid and the
    stored cell mixture is sampled.  At or above it the play keeps the ratio
    with the bid 1 - T(v-)/T(v+) and the min-threshold move, which on a DAG
    reaches Player 1's target without ever submitting an illegal bid.
    """

    def __init__(self, table: ValueTable):
        self.table = table
        from .surewin import thresholds_dag

        view = QualitativeView.top(table.game)
        result = thresholds_dag(view)
        self.t = result.values
        g = table.game
        dist = distances_to(g, view.target1)
        big = len(g.vertices) + 1
        self.hold_bid = {}
        self.hold_move = {}
        for v in g.vertices - g.leaves:
            if is_inf(self.t[v]):
                continue
            ts = [self.t[u] for u in g.neighbors[v]]
            tmin, tmax = min(ts), max(ts)
            self.hold_bid[v] = (
                Fraction(0) if tmax == 0 else 1 - tmin / tmax
            )
            self.hold_move[v] = min(
                g.neighbors[v],
                key=lambda u: (self.t[u], dist[u] if dist[u] >= 0 else big, u),
            )

    def act(self, vertex, budget1, budget2):
        if budget2 == 0:
            return budget1 / 2, self.hold_move[vertex]
        ratio = budget1 / budget2
        if ratio >= self.table.sthr[vertex]:
            return self.hold_bid[vertex] * budget2, self.hold_move[vertex]
        k = self.table.grid
        idx = (ratio.numerator * k) // ratio.denominator
        bids, probs, succs = self.table.strategies[(vertex, idx)]
        u = self.rng.random() * sum(probs)
        acc = 0.0
        for bid_idx, prob, succ in zip(bids, probs, succs):
            acc += prob
            if u < acc:
                return Fraction(bid_idx, k) * budget2, succ
        return Fraction(bids[-1], k) * budget2, succs[-1]


def builtin_strategy(
    name: str,
    g: GameGraph,
    player: int,
    budget1,
    args: dict | None = None,
) -> PlayStrategy:
    """Instantiate a named built-in strategy for the given player and game."""
    args = dict(args or {})
    if name == "zero":
        return ZeroBid(g, player)
    if name == "allin":
        return AllIn(g, player)
    if name == "uniform":
        return UniformBid(g, player)
    if name == "wnr2-p1":
        if player != 1:
            raise ValueError("wnr2-p1 plays Player 1")
        return wnr2_p1(g, budget1)
    if name == "wnr2-p2":
        if player != 2:
            raise ValueError("wnr2-p2 plays Player 2")
        return wnr2_p2(g, budget1)
    if name == "surewin":
        if player != 1:
            raise ValueError("surewin plays Player 1")
        from .surewin import extract_sure_win_strategy, thresholds_dag

        eps = Fraction(args.pop("eps", Fraction(1, 20)))
        view = QualitativeView.top(g)
        result = thresholds_dag(view)
        return SureWinPlay(extract_sure_win_strategy(view, result, eps))
    if name == "spoiler":
        if player != 2:
            raise ValueError("spoiler plays Player 2")
        from .surewin import extract_spoiler_strategy, thresholds_dag

        eps = Fraction(args.pop("eps", Fraction(1, 20)))
        p = args.pop("p", None)
        view = QualitativeView.top(g)
        result = thresholds_dag(view)
        return SpoilerPlay(
            extract_spoiler_strategy(view, result, eps, Fraction(p) if p else None)
        )
    if name == "fptas":
        if player != 1:
            raise ValueError("fptas plays Player 1 (no column strategies are stored)")
        from .fptas import approx_values

        eps = Fraction(args.pop("eps", Fraction(1, 20)))
        return FptasPlay(approx_values(g, eps))
    raise ValueError(f"unknown strategy {name!r}")

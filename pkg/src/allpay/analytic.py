"""Closed-form "win n in a row" analysis.

Covers the exact value staircase of the two-wins game, the constructive
optimal strategies behind it, the sweeping decision procedure for longer
races built on a continuation-value oracle, and the finite-support
non-optimality witness showing that three-wins play needs infinite support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence, runtime_checkable

from .graph import MixedBidStrategy
from .rational import INF, Ratio, is_inf

PLAYER1_WINS = "player-1-wins"
PLAYER2_WINS = "player-2-wins"


@dataclass(frozen=True)
class StaircaseValue:
    """Value of the two-wins game at one budget, with its plateau interval."""

    budget: Fraction
    value: Fraction
    left: Fraction
    right: Ratio
    left_closed: bool
    right_closed: bool
    tie_rule: str
    plateau: int | None  # n for plateaus of height 1/(n+1); None for 0 and 1


def wnr2_value(budget, tie_rule: str = PLAYER1_WINS) -> StaircaseValue:
    """Exact value of "win twice in a row" at the given Player-1 budget.

    The value is 0 below budget 1, rises through plateaus of height 1/(n+1)
    on the intervals between 1 + 1/(n+1) and 1 + 1/n, and is 1 above 2.  The
    tie-breaking rule only moves the interval endpoints: Player-1 ties make
    the plateaus closed on the right, Player-2 ties closed on the left.
    """
    b = Fraction(budget)
    if b < 0:
        raise ValueError("budget must be nonnegative")
    if tie_rule not in (PLAYER1_WINS, PLAYER2_WINS):
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    p1_ties = tie_rule == PLAYER1_WINS
    if b <= 1:
        return StaircaseValue(b, Fraction(0), Fraction(0), Fraction(1),
                              True, True, tie_rule, None)
    if (b > 2) if p1_ties else (b >= 2):
        return StaircaseValue(b, Fraction(1), Fraction(2), INF,
                              not p1_ties, False, tie_rule, None)
    x = b - 1
    inv = 1 / x
    if p1_ties:
        n = inv.numerator // inv.denominator  # floor: 1/(n+1) < x <= 1/n
    else:
        n = -((-inv.numerator) // inv.denominator) - 1  # ceil - 1: 1/(n+1) <= x < 1/n
    return StaircaseValue(
        budget=b,
        value=Fraction(1, n + 1),
        left=1 + Fraction(1, n + 1),
        right=1 + Fraction(1, n),
        left_closed=not p1_ties,
        right_closed=p1_ties,
        tie_rule=tie_rule,
        plateau=n,
    )


def wnr2_strategies(budget) -> tuple[MixedBidStrategy, MixedBidStrategy]:
    """Optimal first-bid strategies for both players in the two-wins game.

    For budget 1 + x with x in [1/n, 1/(n-1)), Player 1 bids uniformly on
    {x, 1} when n = 2 and on {k/n : 1 <= k <= n} otherwise, guaranteeing
    winning probability 1/n; Player 2 bids uniformly on the n points
    k*(1/n + eps') for 0 <= k < n, capping Player 1 at 1/n.  eps' is the
    midpoint of its valid range (e, 1/(n(n-1))) and both guarantees assume
    ties go to Player 1.
    """
    b = Fraction(budget)
    if not (1 < b <= 2):
        raise ValueError("wnr2 strategies are defined for budgets in (1, 2]")
    x = b - 1
    inv = 1 / x
    n = -((-inv.numerator) // inv.denominator)  # ceil: x in [1/n, 1/(n-1))
    if n == 2:
        p1_bids = (x, Fraction(1))
    else:
        p1_bids = tuple(Fraction(k, n) for k in range(1, n + 1))
    p1 = MixedBidStrategy(
        bids=p1_bids,
        successors=("v1_1",) * len(p1_bids),
        probabilities=(Fraction(1, len(p1_bids)),) * len(p1_bids),
    )
    e = x - Fraction(1, n)
    if n >= 2:
        eps2 = (e + min(Fraction(1, n * (n - 1)), 1 - (n - 1) * e)) / 2
    else:
        eps2 = Fraction(0)
    p2_bids = tuple(k * (Fraction(1, n) + eps2) for k in range(n))
    p2 = MixedBidStrategy(
        bids=p2_bids,
        successors=("t2",) * len(p2_bids),
        probabilities=(Fraction(1, n),) * len(p2_bids),
    )
    return p1, p2


# ---------------------------------------------------------------------------
# Continuation-value oracles
# ---------------------------------------------------------------------------


@runtime_checkable
class ValueOracle(Protocol):
    """Nondecreasing value-vs-budget function for a continuation game."""

    def value(self, budget: Ratio) -> Fraction: ...

    def left_value(self, budget: Ratio) -> Fraction:
        """Limit of `value` from below (differs only at left discontinuities)."""
        ...

    def next_disc_below(self, budget: Ratio) -> Fraction | None:
        """Largest discontinuity point strictly below `budget`, if any."""
        ...


@dataclass(frozen=True)
class StepOracle:
    """Right-closed step function: value jumps up *at* each threshold."""

    base: Fraction
    steps: tuple[tuple[Fraction, Fraction], ...]  # ascending (threshold, value)

    def value(self, budget: Ratio) -> Fraction:
        if is_inf(budget):
            return self.steps[-1][1] if self.steps else self.base
        out = self.base
        for threshold, val in self.steps:
            if budget >= threshold:
                out = val
        return out

    def left_value(self, budget: Ratio) -> Fraction:
        if is_inf(budget):
            return self.value(budget)
        out = self.base
        for threshold, val in self.steps:
            if budget > threshold:
                out = val
        return out

    def next_disc_below(self, budget: Ratio) -> Fraction | None:
        best = None
        for threshold, _ in self.steps:
            if is_inf(budget) or threshold < budget:
                best = threshold
        return best


def wnr1_oracle() -> StepOracle:
    """Value of "win once": 1 when the ratio reaches 1, else 0 (ties to P1)."""
    return StepOracle(base=Fraction(0), steps=((Fraction(1), Fraction(1)),))


class Wnr2Oracle:
    """The printed two-wins staircase as a sweep oracle (ties to Player 1).

    Discontinuities sit at 1 + 1/n for n >= 1 and accumulate at 1; they are
    enumerated analytically rather than stored.
    """

    def value(self, budget: Ratio) -> Fraction:
        if is_inf(budget):
            return Fraction(1)
        return wnr2_value(budget, PLAYER1_WINS).value

    def left_value(self, budget: Ratio) -> Fraction:
        # The printed staircase is left-continuous (plateaus closed above).
        return self.value(budget)

    def next_disc_below(self, budget: Ratio) -> Fraction | None:
        if is_inf(budget) or budget > 2:
            return Fraction(2)
        if budget <= 1:
            return None
        x = budget - 1  # largest 1 + 1/n < budget
        inv = 1 / x
        n = inv.numerator // inv.denominator + 1
        return 1 + Fraction(1, n)


def _as_oracle(oracle) -> ValueOracle:
    if isinstance(oracle, ValueOracle):
        return oracle
    if callable(oracle):
        return _BisectingOracle(oracle)
    raise TypeError("oracle must provide value() or be callable")


class _BisectingOracle:
    """Wrap a bare budget->value callable; locates drops by bisection.

    Used when the oracle exposes no breakpoint structure; discontinuities are
    resolved to a fixed resolution of 2**-40.
    """

    RESOLUTION = Fraction(1, 2**40)

    def __init__(self, fn):
        self._fn = fn
        self._hi = Fraction(10**6)

    def value(self, budget: Ratio) -> Fraction:
        if is_inf(budget):
            return Fraction(self._fn(self._hi))
        return Fraction(self._fn(budget))

    def left_value(self, budget: Ratio) -> Fraction:
        if is_inf(budget):
            return self.value(budget)
        return Fraction(self._fn(budget - self.RESOLUTION))

    def next_disc_below(self, budget: Ratio) -> Fraction | None:
        hi = self._hi if is_inf(budget) else budget
        lo = Fraction(0)
        v_hi = self.value(hi - self.RESOLUTION)
        if Fraction(self._fn(lo)) == v_hi:
            return None
        while hi - lo > self.RESOLUTION:
            mid = (lo + hi) / 2
            if Fraction(self._fn(mid)) < v_hi:
                lo = mid
            else:
                hi = mid
        return hi


# ---------------------------------------------------------------------------
# The sweeping decision procedure
# ---------------------------------------------------------------------------

RUNNING = "running"
SUCCESS = "success"
FAILURE = "failure"
CAP_EXCEEDED = "support-cap-exceeded"


@dataclass
class SweepState:
    """First-bid strategy under construction by the sweep.

    `bids` is strictly descending starting at 1; `masses` are the
    probabilities on those bids; `zero_mass` is what remains on bid 0.
    """

    target: Fraction
    budget: Fraction
    bids: list[Fraction] = field(default_factory=list)
    masses: list[Fraction] = field(default_factory=list)
    zero_mass: Fraction = Fraction(1)
    status: str = RUNNING
    events: int = 0
    note: str = ""

    def support(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.bids, self.masses))


def _ratio_after(budget: Fraction, b1: Fraction, b2: Fraction) -> Ratio:
    """Player 1's renormalized budget after winning the bid b1 against b2."""
    if b2 == 1:
        return INF  # Player 2 is broke; ties then go to Player 1 throughout
    return (budget - b1) / (1 - b2)


def _stretch_ratio(budget: Fraction, b1: Fraction, b: Fraction) -> Ratio:
    """Continuation ratio of the bid b1 on the stretch just below bid b."""
    if b == 1:
        return INF if budget > b1 else Fraction(0)
    return (budget - b1) / (1 - b)


def first_bid_outcome(
    bids: Sequence[Fraction],
    masses: Sequence[Fraction],
    zero_mass: Fraction,
    budget: Fraction,
    oracle,
    b2: Fraction,
) -> Fraction:
    """Exact winning probability of the mixed first bid against a pure b2.

    A supported bid wins on ties (Player 1's advantage), after which the
    continuation is worth oracle(renormalized budget).
    """
    oracle = _as_oracle(oracle)
    out = Fraction(0)
    for bid, mass in zip(bids, masses):
        if bid >= b2 and mass > 0:
            out += mass * oracle.value(_ratio_after(budget, bid, b2))
    if b2 == 0 and zero_mass > 0:
        out += zero_mass * oracle.value(_ratio_after(budget, Fraction(0), Fraction(0)))
    return out


def sweep(
    n: int,
    budget,
    target,
    oracle,
    support_cap: int = 1000,
) -> SweepState:
    """Decide whether Player 1 can guarantee winning WnR(n) with probability v.

    Starting from the strategy that bids 1 with mass v and 0 otherwise, the
    procedure sweeps Player 2's bid downward.  Whenever the guaranteed
    outcome on the stretch just below the next oracle-induced drop falls
    under v, a new support point is placed exactly at that bid with just
    enough mass to restore v there.  It stops with `success` when no further
    positive bid can push the outcome below v, `failure` when the needed
    mass is infeasible (or the all-in seed itself is illegal), and
    `support-cap-exceeded` when more than `support_cap` support points were
    needed -- evidence, not proof, of an infinite-support requirement.
    """
    if n < 2:
        raise ValueError("sweep needs n >= 2 (the oracle covers n-1 wins)")
    budget = Fraction(budget)
    target = Fraction(target)
    if not 0 < target <= 1:
        raise ValueError("target probability must be in (0, 1]")
    if support_cap < 2:
        raise ValueError("support_cap must be at least 2")
    oracle = _as_oracle(oracle)
    state = SweepState(target=target, budget=budget)
    if budget < 1:
        state.status = FAILURE
        state.note = "cannot place the all-in seed bid: budget below 1"
        return state
    state.bids = [Fraction(1)]
    state.masses = [target]
    state.zero_mass = 1 - target
    max_events = max(64 * support_cap, 4096)
    cursor = Fraction(1)

    def stretch_below(b: Fraction) -> Fraction:
        """Outcome on the open stretch of Player-2 bids just below b."""
        out = Fraction(0)
        for bid, mass in zip(state.bids, state.masses):
            if bid >= b:
                out += mass * oracle.left_value(_stretch_ratio(budget, bid, b))
        return out

    if stretch_below(cursor) < target:
        # No finite support can fix a shortfall adjacent to the all-in bid.
        state.status = FAILURE
        state.note = "outcome falls below the target immediately under the top bid"
        return state

    while True:
        state.events += 1
        if state.events > max_events:
            state.status = CAP_EXCEEDED
            state.note = f"event budget exhausted after {state.events - 1} events"
            return state
        # Next bid below the cursor where some support point's value drops.
        candidate = None
        for bid in state.bids:
            disc = oracle.next_disc_below(_stretch_ratio(budget, bid, cursor))
            if disc is None or disc <= 0:
                continue
            crossing = 1 - (budget - bid) / disc
            if crossing <= 0 or crossing >= cursor:
                continue
            if candidate is None or crossing > candidate:
                candidate = crossing
        if candidate is None:
            state.status = SUCCESS
            state.note = f"guarantee holds on (0, 1]; residual check {stretch_below(cursor)}"
            return state
        out_below = stretch_below(candidate)
        if out_below >= target:
            cursor = candidate
            continue
        new_ratio = _ratio_after(budget, candidate, candidate)
        gain = oracle.left_value(new_ratio)
        deficit = target - out_below
        if gain <= 0:
            state.status = FAILURE
            state.note = f"no mass at bid {candidate} can contribute (continuation value 0)"
            return state
        mass = deficit / gain
        if mass > state.zero_mass:
            state.status = FAILURE
            state.note = (
                f"needs mass {mass} at bid {candidate} but only "
                f"{state.zero_mass} remains"
            )
            return state
        state.bids.append(candidate)
        state.masses.append(mass)
        state.zero_mass -= mass
        cursor = candidate
        if len(state.bids) > support_cap:
            state.status = CAP_EXCEEDED
            state.note = f"support exceeded cap {support_cap}"
            return state


# ---------------------------------------------------------------------------
# Infinite-support witness (three wins in a row at budget 5/4)
# ---------------------------------------------------------------------------


def witness_sequence(m: int) -> Fraction:
    """m-th term of the bid sequence 7/8, 13/16, ... = 3/4 + 2**-(m+2)."""
    if m < 1:
        raise ValueError("sequence starts at m = 1")
    return Fraction(3, 4) + Fraction(1, 2 ** (m + 2))


@dataclass(frozen=True)
class NonOptimalityWitness:
    """Certificate that a finite first-bid support is improvable.

    `gap_index` points at the support bid b_i (0-based) such that the
    sequence pair (x_k, x_{k+1}) satisfies b_i >= x_k > x_{k+1} > b_{i+1};
    inserting `x` = x_{k+1} strictly improves the strategy because
    out(x, x) == out(b_i, b_i) while out(b_i, b_i) > out(b_i, x).
    """

    gap_index: int
    sequence_index: int
    x: Fraction
    out_self: Fraction
    out_cross: Fraction


def nonoptimality_witness(
    bids: Sequence[Fraction],
    masses: Sequence[Fraction],
    budget=Fraction(5, 4),
    oracle=None,
    max_terms: int = 4096,
) -> NonOptimalityWitness | None:
    """Find a witness that a finite-support first bid in WnR(3) is not optimal.

    Scans consecutive pairs of the sequence 3/4 + 2**-(m+2) for a pair that
    straddles a gap of the support, then verifies the improvement conditions
    with exact continuation values from the two-wins staircase.
    """
    budget = Fraction(budget)
    oracle = _as_oracle(oracle if oracle is not None else Wnr2Oracle())
    bids = [Fraction(b) for b in bids]
    masses = [Fraction(m) for m in masses]
    if len(bids) != len(masses):
        raise ValueError("support and masses differ in length")
    if any(bids[i] <= bids[i + 1] for i in range(len(bids) - 1)):
        raise ValueError("support must be strictly descending")
    if any(m < 0 for m in masses) or sum(masses, Fraction(0)) > 1:
        raise ValueError("masses must be a subprobability vector")
    if not bids:
        return None

    def out(b1: Fraction, b2: Fraction) -> Fraction:
        if b1 < b2:
            return Fraction(0)
        return oracle.value(_ratio_after(budget, b1, b2))

    fence = bids + [Fraction(0)]
    for k in range(1, max_terms):
        xk, xk1 = witness_sequence(k), witness_sequence(k + 1)
        for i in range(len(bids)):
            if fence[i] >= xk > xk1 > fence[i + 1]:
                b_i = bids[i]
                if out(xk1, xk1) != out(b_i, b_i):
                    continue
                for j in range(i + 1):
                    cross = out(bids[j], xk1)
                    self_out = out(bids[j], b_i)
                    if self_out > cross:
                        return NonOptimalityWitness(
                            gap_index=i,
                            sequence_index=k,
                            x=xk1,
                            out_self=self_out,
                            out_cross=cross,
                        )
    return None

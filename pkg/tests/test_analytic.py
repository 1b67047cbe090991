from fractions import Fraction

import pytest

from allpay.analytic import (
    CAP_EXCEEDED,
    FAILURE,
    PLAYER1_WINS,
    PLAYER2_WINS,
    SUCCESS,
    Wnr2Oracle,
    first_bid_outcome,
    nonoptimality_witness,
    sweep,
    witness_sequence,
    wnr1_oracle,
    wnr2_strategies,
    wnr2_value,
)

F = Fraction


# --- the value staircase ----------------------------------------------------


@pytest.mark.parametrize(
    "budget,expected",
    [
        (F(9, 10), F(0)),
        (F(13, 10), F(1, 4)),
        (F(29, 20), F(1, 3)),
        (F(8, 5), F(1, 2)),
        (F(19, 10), F(1, 2)),
        (F(21, 10), F(1)),
    ],
)
def test_staircase_interior_points(budget, expected):
    assert wnr2_value(budget, PLAYER1_WINS).value == expected
    if F(0) < expected < F(1):
        assert wnr2_value(budget, PLAYER2_WINS).value == expected


def test_staircase_endpoint_flip_at_three_halves():
    assert wnr2_value(F(3, 2), PLAYER1_WINS).value == F(1, 3)
    assert wnr2_value(F(3, 2), PLAYER2_WINS).value == F(1, 2)


def test_staircase_tie_rules_agree_off_endpoints():
    b = F(0)
    while b <= F(5, 2):
        p1 = wnr2_value(b, PLAYER1_WINS)
        p2 = wnr2_value(b, PLAYER2_WINS)
        x = b - 1
        boundary = (
            b == 2
            or (0 < x <= 1 and (1 / x).denominator == 1)
        )
        if not boundary:
            assert p1.value == p2.value, b
        else:
            assert p2.value >= p1.value, b  # Player-2 ties shift plateaus left
        b += F(1, 40)


def test_staircase_intervals_contain_budget():
    for b in (F(11, 10), F(3, 2), F(7, 4), F(2)):
        for rule in (PLAYER1_WINS, PLAYER2_WINS):
            sv = wnr2_value(b, rule)
            assert (sv.left < b or (sv.left_closed and sv.left == b))
            from allpay.rational import is_inf

            assert (is_inf(sv.right) or b < sv.right or (sv.right_closed and b == sv.right))


def test_staircase_value_range_invariant():
    b = F(0)
    allowed = {F(0), F(1)} | {F(1, n + 1) for n in range(1, 50)}
    while b <= 3:
        assert wnr2_value(b).value in allowed
        b += F(1, 17)


def test_staircase_rejects_negative_budget_and_bad_rule():
    with pytest.raises(ValueError):
        wnr2_value(F(-1, 2))
    with pytest.raises(ValueError):
        wnr2_value(F(1, 2), "nobody-wins")


# --- constructive strategies ------------------------------------------------


def outcome_of_bid(budget: F, b1: F, b2: F) -> int:
    """1 iff Player 1 wins both biddings of the two-wins race (ties to P1)."""
    if b1 < b2:
        return 0
    rem1, rem2 = budget - b1, 1 - b2
    return 1 if rem1 >= rem2 else 0


def security_level(budget: F, strategy, grid) -> F:
    worst = None
    for b2 in grid:
        got = sum(
            p * outcome_of_bid(budget, b1, b2)
            for b1, p in zip(strategy.bids, strategy.probabilities)
        )
        worst = got if worst is None else min(worst, got)
    return worst


def test_p1_strategy_shapes_match_construction():
    p1, _ = wnr2_strategies(F(8, 5))
    assert p1.bids == (F(3, 5), F(1))  # the {x, 1} mix for x in (1/2, 1)
    assert p1.probabilities == (F(1, 2), F(1, 2))
    p1, _ = wnr2_strategies(F(4, 3))
    assert p1.bids == (F(1, 3), F(2, 3), F(1))  # {k/n} for n = 3
    assert p1.probabilities == (F(1, 3),) * 3


def test_strategy_security_levels_on_exact_grid():
    for budget, n in [(F(8, 5), 2), (F(4, 3), 3), (F(3, 2), 2), (F(17, 12), 3)]:
        p1, p2 = wnr2_strategies(budget)
        grid = [F(j, 10 * n) for j in range(10 * n + 1)]
        assert security_level(budget, p1, grid) >= F(1, n)
        # The opponent mix caps Player 1 at 1/n against every pure bid.
        for b1 in grid + [budget - F(j, 7 * n) for j in range(3)]:
            if b1 < 0 or b1 > budget:
                continue
            got = sum(
                q * outcome_of_bid(budget, b1, b2)
                for b2, q in zip(p2.bids, p2.probabilities)
            )
            assert got <= F(1, n)


def test_p2_atoms_are_legal_and_spaced():
    for budget in (F(8, 5), F(4, 3), F(2), F(13, 12)):
        _, p2 = wnr2_strategies(budget)
        assert all(F(0) <= b <= 1 for b in p2.bids)
        for a, b in zip(p2.bids, p2.bids[1:]):
            assert b > a


def test_strategies_reject_out_of_range_budget():
    with pytest.raises(ValueError):
        wnr2_strategies(F(5, 2))
    with pytest.raises(ValueError):
        wnr2_strategies(F(1))


# --- the sweeping procedure -------------------------------------------------


def test_sweep_worked_example_exact():
    state = sweep(2, F(4, 3), F(1, 3), wnr1_oracle())
    assert state.status == SUCCESS
    assert state.bids == [F(1), F(2, 3), F(1, 3)]
    assert state.masses == [F(1, 3), F(1, 3), F(1, 3)]
    assert state.zero_mass == 0


def test_sweep_success_is_sound_on_a_fine_grid():
    state = sweep(2, F(4, 3), F(1, 3), wnr1_oracle())
    oracle = wnr1_oracle()
    checkpoints = [F(j, 60) for j in range(1, 61)] + state.bids
    for b2 in checkpoints:
        out = first_bid_outcome(
            state.bids, state.masses, state.zero_mass, F(4, 3), oracle, b2
        )
        assert out >= F(1, 3), b2


def test_sweep_rejects_overambitious_target():
    state = sweep(2, F(8, 5), F(3, 5), wnr1_oracle())
    assert state.status == FAILURE
    assert "mass" in state.note


def test_sweep_validates_inputs():
    with pytest.raises(ValueError):
        sweep(1, F(4, 3), F(1, 3), wnr1_oracle())
    with pytest.raises(ValueError):
        sweep(2, F(4, 3), F(3, 2), wnr1_oracle())
    with pytest.raises(ValueError):
        sweep(2, F(4, 3), F(1, 3), wnr1_oracle(), support_cap=1)


def test_sweep_low_budget_fails_immediately():
    state = sweep(2, F(1, 2), F(1, 4), wnr1_oracle())
    assert state.status == FAILURE


def test_sweep_cascades_past_cap_at_feasible_target():
    # At targets at or below the two-wins value of the budget, the sweep keeps
    # refining the support forever: infinite-support evidence.
    state = sweep(3, F(5, 4), F(1, 4), Wnr2Oracle(), support_cap=50)
    assert state.status == CAP_EXCEEDED
    assert len(state.bids) > 50
    for a, b in zip(state.bids, state.bids[1:]):
        assert b < a  # strictly descending support


def test_sweep_wnr3_first_support_points_follow_the_paper_sequence():
    state = sweep(3, F(5, 4), F(1, 2), Wnr2Oracle(), support_cap=200)
    assert state.bids[0] == 1
    assert state.bids[1] == witness_sequence(1)  # 7/8
    assert witness_sequence(2) in state.bids  # 13/16


# --- infinite-support witness -----------------------------------------------


def test_witness_sequence_identity_and_limit():
    for m in range(1, 21):
        assert (F(5, 4) - witness_sequence(m)) / (1 - witness_sequence(m + 1)) == 2
    prev = witness_sequence(1)
    assert prev == F(7, 8)
    for m in range(2, 65):
        cur = witness_sequence(m)
        assert cur < prev
        assert cur > F(3, 4)
        prev = cur


def test_all_in_support_has_witness_at_x2():
    w = nonoptimality_witness([F(1)], [F(1)])
    assert w is not None
    assert w.x == witness_sequence(2)
    assert w.out_self > w.out_cross


def test_every_sweep_prefix_has_witness():
    state = sweep(3, F(5, 4), F(1, 2), Wnr2Oracle(), support_cap=200)
    for k in range(1, len(state.bids) + 1):
        w = nonoptimality_witness(state.bids[:k], state.masses[:k])
        assert w is not None, k
        assert w.out_self > w.out_cross
        fence = state.bids[:k] + [F(0)]
        assert fence[w.gap_index] >= witness_sequence(w.sequence_index) > w.x > fence[w.gap_index + 1]


def test_witness_rejects_unsorted_support():
    with pytest.raises(ValueError):
        nonoptimality_witness([F(1, 2), F(3, 4)], [F(1, 2), F(1, 2)])
    with pytest.raises(ValueError):
        nonoptimality_witness([F(1)], [F(3, 2)])

from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from allpay.analytic import wnr2_value
from allpay.fptas import LOWER, UPPER, _cell_matrix, approx_values, strategy_at, value_bracket
from allpay.graph import load_game, make_race_game

F = Fraction


@pytest.fixture(scope="module")
def wnr2_table():
    return approx_values(make_race_game(2, 1), F(1, 100))


@pytest.fixture(scope="module")
def g22_table():
    return approx_values(make_race_game(2, 2), F(1, 50))


def test_epsilon_must_be_unit_fraction():
    g = make_race_game(1, 1)
    with pytest.raises(ValueError):
        approx_values(g, F(3, 100))
    with pytest.raises(ValueError):
        approx_values(g, F(1, 1))


def test_rejects_cyclic_graphs():
    g = load_game(
        "vertex u\nvertex v\nleaf t1 1\nleaf t2 0\n"
        "edge u v\nedge v u\nedge u t1\nedge v t2\n"
    )
    with pytest.raises(ValueError, match="DAG"):
        approx_values(g, F(1, 10))


def test_leaf_rows_are_constant(wnr2_table):
    lo, hi = value_bracket(wnr2_table, "t1", F(0))
    assert lo == hi == 1.0
    lo, hi = value_bracket(wnr2_table, "t1", F(7, 2))
    assert lo == hi == 1.0
    lo, hi = value_bracket(wnr2_table, "t2", F(1, 3))
    assert lo == hi == 0.0


def test_brackets_contain_staircase(wnr2_table):
    for b in (F(1, 10), F(1, 2), F(9, 10), F(11, 10), F(13, 10), F(29, 20),
              F(8, 5), F(19, 10), F(21, 10), F(5, 2)):
        lo, hi = value_bracket(wnr2_table, "v2_1", b)
        truth = float(wnr2_value(b).value)
        assert lo <= truth + 1e-9, b
        assert hi >= truth - 1e-9, b


def test_theorem2_endpoint_cases(wnr2_table):
    lo, hi = value_bracket(wnr2_table, "v2_1", F(5, 2))
    assert lo == hi == 1.0
    lo, hi = value_bracket(wnr2_table, "v2_1", F(9, 10))
    assert lo <= 1e-9
    lo, hi = value_bracket(wnr2_table, "v2_1", F(13, 10))
    assert lo <= 0.25 + 1e-9 <= hi + 2e-9


def test_zero_budget_bracket(wnr2_table):
    lo, hi = value_bracket(wnr2_table, "v2_1", F(0))
    assert lo == 0.0
    assert hi >= 0.0


def test_tables_monotone_in_budget(wnr2_table, g22_table):
    for table in (wnr2_table, g22_table):
        for v in table.game.vertices:
            for arr in (table.lower[v], table.upper[v]):
                assert (np.diff(arr) >= -1e-9).all(), v


def test_lower_below_upper_after_alignment(wnr2_table):
    for v in wnr2_table.game.vertices:
        for idx in range(wnr2_table.lower_cap[v] + 1):
            b = F(idx, wnr2_table.grid)
            lo, hi = value_bracket(wnr2_table, v, b)
            assert lo <= hi + 1e-9


def test_tie_cells_route_to_the_right_player():
    # On the one-step race the win branch pays 1 and the lose branch 0, so a
    # tied cell reads 0 in the pessimistic table and 1 in the optimistic one.
    table = approx_values(make_race_game(1, 1), F(1, 10))
    p = 5
    low = _cell_matrix(table, "v1_1", p, LOWER)
    up = _cell_matrix(table, "v1_1", p, UPPER)
    for i in range(min(p, table.grid)):
        assert low[i, i] == 0.0
        assert up[i, i] == 1.0


def test_strategy_support_is_legal_and_secure(wnr2_table):
    table = wnr2_table
    k = table.grid
    for v in ("v2_1", "v1_1"):
        cap = table.lower_cap[v]
        for idx in range(0, cap, 17):
            mix = strategy_at(table, v, F(idx, k))
            assert sum(mix.probabilities) == 1
            for bid in mix.bids:
                assert bid <= F(idx, k)
                assert (bid * k).denominator == 1
            assert _security_level(table, v, idx, mix) >= table.lower[v][idx] - 1e-7


def _security_level(table, v, p, mix):
    """Replay the stored mixture against every pure grid bid, exactly."""
    k = table.grid
    succ = sorted(table.game.neighbors[v])

    def read(kind, u, idx):
        return table.read(kind, u, idx)

    worst = None
    for j in range(k + 1):
        total = 0.0
        for bid, u, prob in zip(mix.bids, mix.successors, mix.probabilities):
            i = int(bid * k)
            if i > j:  # pessimistic: ties lose
                if j == k:
                    bprime = 10**9 if p - i > 0 else 0
                else:
                    bprime = ((p - i) * k) // (k - j)
                val = read(LOWER, u, bprime)
            else:
                if j == k:
                    bprime = 10**9 if p - i > 0 else 0
                else:
                    bprime = ((p - i) * k) // (k - j)
                val = min(read(LOWER, w, bprime) for w in succ)
            total += float(prob) * val
        worst = total if worst is None else min(worst, total)
    return worst


def test_strategy_at_validates_inputs(wnr2_table):
    with pytest.raises(ValueError, match="multiple"):
        strategy_at(wnr2_table, "v2_1", F(1, 3))
    with pytest.raises(ValueError, match="threshold"):
        strategy_at(wnr2_table, "v2_1", F(21, 10))
    with pytest.raises(KeyError):
        strategy_at(wnr2_table, "nope", F(1, 2))
    with pytest.raises(KeyError):
        value_bracket(wnr2_table, "nope", F(1, 2))


def test_zero_budget_strategy_is_single_zero_bid(wnr2_table):
    mix = strategy_at(wnr2_table, "v2_1", F(0))
    assert mix.bids == (F(0),)
    assert mix.probabilities == (F(1),)


def test_fig1_mixture_shape(wnr2_table):
    # At a 1/100 grid the stored optimum at budget 1.55 recovers the shape of
    # the hand construction: two bids near {0.5, 1} at half mass each.  (On a
    # 1/20 grid the tie penalty caps the grid value at 1/3 and the optimal
    # support legitimately has three atoms instead.)
    mix = strategy_at(wnr2_table, "v2_1", F(155, 100))
    bids = sorted(float(b) for b in mix.bids)
    assert len(bids) == 2
    assert 0.45 <= bids[0] <= 0.62
    assert 0.95 <= bids[-1] <= 1.1
    masses = [float(p) for p in mix.probabilities]
    assert all(0.3 <= m <= 0.7 for m in masses)
    coarse = approx_values(make_race_game(2, 1), F(1, 20))
    mix20 = strategy_at(coarse, "v2_1", F(31, 20))
    assert sum(mix20.probabilities) == 1
    assert coarse.lower["v2_1"][31] <= wnr2_table.lower["v2_1"][155] + 1e-9


def test_grid_refinement_shrinks_brackets():
    g = make_race_game(2, 1)
    coarse = approx_values(g, F(1, 10))
    fine = approx_values(g, F(1, 20))
    worse = 0
    for tenths in range(0, 21):
        b = F(tenths, 10)
        clo, chi = value_bracket(coarse, "v2_1", b)
        flo, fhi = value_bracket(fine, "v2_1", b)
        if fhi - flo > chi - clo + 1e-9:
            worse += 1
        # one new grid shift of the coarse grid bounds any widening
        assert fhi - flo <= (chi - clo) + 0.1 + 1e-9
    assert worse <= 4


def _independent_pessimistic_oracle(g, k):
    """From-scratch grid minimax with memoization (floor rounding, P2 ties).

    Independent of the production code path: budgets are exact Fractions,
    matrices are built directly, and each game is solved by scipy.linprog.
    """
    order = []
    seen = set()

    def topo(v):
        if v in seen:
            return
        seen.add(v)
        for u in g.neighbors[v]:
            topo(u)
        order.append(v)

    for v in g.vertices:
        topo(v)

    memo = {}

    def val(v, idx):
        if v in g.weights:
            return float(g.weights[v])
        idx = min(idx, 3 * k)  # conservative cap: every race threshold <= 3 here
        if (v, idx) in memo:
            return memo[(v, idx)]
        succ = list(g.neighbors[v])
        rows = []
        for i in range(min(idx, k + 1) + 1):
            row = []
            for j in range(k + 1):
                if j == k:
                    if i > j:
                        bp = 3 * k if idx - i > 0 else 0
                        row.append(max(val(u, bp) for u in succ))
                    else:
                        bp = 3 * k if idx - i > 0 else 0
                        row.append(min(val(u, bp) for u in succ))
                    continue
                bp = ((idx - i) * k) // (k - j)
                if i > j:
                    row.append(max(val(u, bp) for u in succ))
                else:
                    row.append(min(val(u, bp) for u in succ))
            rows.append(row)
        pay = np.array(rows)
        res = linprog(
            np.concatenate([np.zeros(pay.shape[0]), [-1.0]]),
            A_ub=np.hstack([-pay.T, np.ones((pay.shape[1], 1))]),
            b_ub=np.zeros(pay.shape[1]),
            A_eq=np.concatenate([np.ones(pay.shape[0]), [0.0]])[None, :],
            b_eq=[1.0],
            bounds=[(0, None)] * pay.shape[0] + [(None, None)],
            method="highs",
        )
        memo[(v, idx)] = float(res.x[-1])
        return memo[(v, idx)]

    return val


def test_g22_matches_independent_coarse_oracle(g22_table):
    g = make_race_game(2, 2)
    oracle = _independent_pessimistic_oracle(g, 10)
    for tenths in range(0, 16):
        b = F(tenths, 10)
        lo, hi = value_bracket(g22_table, "v2_2", b)
        # The oracle's pessimistic value lower-bounds the true value, which the
        # aligned bracket must contain; allow its own one-step grid shift.
        o = oracle("v2_2", tenths)
        assert o <= hi + 0.1 + 1e-7, (b, o, lo, hi)
        assert lo <= o + 0.35 + 1e-7, (b, o, lo, hi)


def test_depth_and_caps(wnr2_table):
    assert wnr2_table.depth == 2
    assert wnr2_table.sthr["v2_1"] == 2
    assert wnr2_table.sthr["v1_1"] == 1
    assert wnr2_table.lower_cap["v2_1"] == 201
    assert wnr2_table.upper_cap["v2_1"] == 200

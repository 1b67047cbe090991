from fractions import Fraction

import pytest

from allpay.graph import (
    EMPTY_BOARD,
    GameFormatError,
    GameGraph,
    GameValidationError,
    QualitativeView,
    _board_lines,
    leaves_reachable,
    load_game,
    longest_path_to_leaf,
    make_race_game,
    make_tictactoe_game,
    race_vertex,
    save_game,
    topological_order,
)


# --- race games -------------------------------------------------------------


def test_race_2_1_is_the_two_wins_graph():
    g = make_race_game(2, 1)
    assert g.vertices == {"v2_1", "v1_1", "t1", "t2"}
    assert g.root == "v2_1"
    assert g.edges == {
        ("v2_1", "v1_1"),
        ("v2_1", "t2"),
        ("v1_1", "t1"),
        ("v1_1", "t2"),
    }
    assert g.weights == {"t1": Fraction(1), "t2": Fraction(0)}


def test_race_1_1_single_internal_vertex():
    g = make_race_game(1, 1)
    assert g.vertices == {"v1_1", "t1", "t2"}
    assert g.neighbors["v1_1"] == ("t1", "t2")


def test_race_3_2_matches_direct_enumeration():
    # Oracle: enumerate the (i, j) state space directly.
    expected = {race_vertex(i, j) for i in range(1, 4) for j in range(1, 3)}
    g = make_race_game(3, 2)
    assert g.vertices - g.leaves == expected
    assert len(expected) == 6
    assert max(longest_path_to_leaf(g).values()) == 4


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (1, 3), (3, 2), (4, 4)])
def test_race_always_dag_with_longest_path_n_plus_m_minus_1(n, m):
    g = make_race_game(n, m)
    assert g.is_dag
    assert max(longest_path_to_leaf(g).values()) == n + m - 1


def test_race_rejects_zero_sizes():
    with pytest.raises(ValueError):
        make_race_game(0, 1)
    with pytest.raises(ValueError):
        make_race_game(1, 0)


# --- tic-tac-toe ------------------------------------------------------------


def test_tictactoe_state_bound_and_root():
    g = make_tictactoe_game("win-only")
    assert len(g.vertices) <= 3**9
    assert g.root == EMPTY_BOARD
    assert g.is_dag


def test_tictactoe_never_emits_double_line_boards():
    g = make_tictactoe_game("win-only")
    for v in g.vertices - g.leaves:
        x_line, o_line = _board_lines(v)
        assert not x_line and not o_line  # internal boards are non-terminal


def test_tictactoe_every_vertex_reachable_from_empty_board():
    g = make_tictactoe_game("win-or-draw")
    preds = {v: set() for v in g.vertices}
    for src, dst in g.edges:
        preds[dst].add(src)
    seen = {EMPTY_BOARD}
    stack = [EMPTY_BOARD]
    while stack:
        v = stack.pop()
        for u in g.neighbors[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    assert seen == g.vertices


def test_tictactoe_edges_add_exactly_one_mark():
    g = make_tictactoe_game("win-only")
    for src, dst in g.edges:
        if dst in g.leaves:
            continue
        diffs = [(a, b) for a, b in zip(src, dst) if a != b]
        assert len(diffs) == 1
        assert diffs[0][0] == "." and diffs[0][1] in "XO"


def test_tictactoe_rejects_unknown_objective():
    with pytest.raises(ValueError):
        make_tictactoe_game("win-big")


# --- file format ------------------------------------------------------------


def test_save_load_round_trip_race():
    g = make_race_game(2, 1)
    assert load_game(save_game(g)) == g


def test_save_load_round_trip_weighted():
    text = """
# a quantitative game
vertex a
leaf x 3/2
leaf y -1
leaf z 2
edge a x
edge a y
edge a z
root a
"""
    g = load_game(text)
    assert g.weights["x"] == Fraction(3, 2)
    assert load_game(save_game(g)) == g


def test_duplicate_leaf_weight_rejected():
    text = "vertex a\nleaf x 1\nleaf y 1\nedge a x\nedge a y\n"
    with pytest.raises(GameValidationError, match="duplicate leaf weight"):
        load_game(text)


def test_leaf_with_outgoing_edge_rejected():
    text = "vertex a\nleaf x 1\nleaf y 0\nedge a x\nedge a y\nedge x y\n"
    with pytest.raises(GameValidationError, match="outgoing edge"):
        load_game(text)


def test_vertex_reaching_single_leaf_rejected():
    text = (
        "vertex a\nvertex b\nleaf x 1\nleaf y 0\n"
        "edge a x\nedge a y\nedge b x\n"
    )
    with pytest.raises(GameValidationError, match="fewer than two"):
        load_game(text)


def test_parse_error_carries_line_number():
    with pytest.raises(GameFormatError) as err:
        load_game("vertex a\nbogus line here\n")
    assert err.value.line == 2
    with pytest.raises(GameFormatError) as err:
        load_game("vertex a\nleaf b one\n")
    assert err.value.line == 2


def test_non_leaf_without_edges_rejected():
    with pytest.raises(GameValidationError, match="no outgoing edge"):
        load_game("vertex a\nvertex b\nleaf x 1\nleaf y 0\nedge a x\nedge a y\n")


# --- views and helpers ------------------------------------------------------


def test_qualitative_cut_partitions_leaves():
    g = load_game(
        "vertex a\nleaf x 3\nleaf y 1\nleaf z 0\nedge a x\nedge a y\nedge a z\n"
    )
    view = QualitativeView.from_cut(g, Fraction(1))
    assert view.target1 == {"x", "y"}
    assert view.target2 == {"z"}
    with pytest.raises(GameValidationError):
        QualitativeView.from_cut(g, Fraction(99))


def test_topological_order_is_deterministic_and_respects_edges():
    g = make_race_game(3, 2)
    order = topological_order(g)
    assert order == topological_order(g)
    pos = {v: i for i, v in enumerate(order)}
    for src, dst in g.edges:
        assert pos[src] < pos[dst]


def test_leaves_reachable_on_race():
    g = make_race_game(2, 2)
    reach = leaves_reachable(g)
    assert reach["v2_2"] == {"t1", "t2"}
    assert reach["t1"] == {"t1"}

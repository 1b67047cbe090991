"""Game-graph data model, generators, and the on-disk game format.

A reachability all-pay bidding game is a finite directed graph whose sinks
("leaves") carry pairwise-distinct rational weights.  Every internal vertex
must be able to reach at least two different leaves, otherwise bidding at it
would be pointless.  All types here are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .rational import parse_rational


class GameFormatError(ValueError):
    """Raised on malformed game-file text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GameValidationError(ValueError):
    """Raised when a structurally parsed graph violates a model invariant."""


@dataclass(frozen=True)
class GameGraph:
    """Directed game graph with weighted leaves.

    `neighbors` maps every vertex to a sorted tuple of successors; leaves map
    to the empty tuple.  `is_dag` is computed, never declared.
    """

    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]
    weights: Mapping[str, Fraction]
    root: str | None = None
    neighbors: Mapping[str, tuple[str, ...]] = field(init=False, repr=False)
    is_dag: bool = field(init=False)

    def __post_init__(self):
        nbrs: dict[str, list[str]] = {v: [] for v in self.vertices}
        for src, dst in self.edges:
            nbrs[src].append(dst)
        object.__setattr__(
            self, "neighbors", {v: tuple(sorted(us)) for v, us in nbrs.items()}
        )
        object.__setattr__(self, "is_dag", self._compute_dag())
        _validate(self)

    def _compute_dag(self) -> bool:
        indeg = {v: 0 for v in self.vertices}
        for _, dst in self.edges:
            indeg[dst] += 1
        stack = [v for v, d in indeg.items() if d == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for u in self.neighbors[v]:
                indeg[u] -= 1
                if indeg[u] == 0:
                    stack.append(u)
        return seen == len(self.vertices)

    @property
    def leaves(self) -> frozenset[str]:
        return frozenset(self.weights)

    def __eq__(self, other):
        if not isinstance(other, GameGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and dict(self.weights) == dict(other.weights)
            and self.root == other.root
        )

    def __hash__(self):
        return hash((self.vertices, self.edges, frozenset(self.weights.items())))


def _validate(g: GameGraph) -> None:
    for src, dst in g.edges:
        for v in (src, dst):
            if v not in g.vertices:
                raise GameValidationError(f"edge references undeclared vertex {v!r}")
    for leaf in g.weights:
        if leaf not in g.vertices:
            raise GameValidationError(f"leaf {leaf!r} is not a declared vertex")
        if g.neighbors[leaf]:
            raise GameValidationError(f"leaf {leaf!r} has an outgoing edge")
    seen_weights: dict[Fraction, str] = {}
    for leaf in sorted(g.weights):
        w = g.weights[leaf]
        if w in seen_weights:
            raise GameValidationError(
                f"duplicate leaf weight {w} on {seen_weights[w]!r} and {leaf!r}"
            )
        seen_weights[w] = leaf
    if g.root is not None and g.root not in g.vertices:
        raise GameValidationError(f"root {g.root!r} is not a declared vertex")
    leaf_reach = leaves_reachable(g)
    for v in sorted(g.vertices):
        if v in g.weights:
            continue
        if not g.neighbors[v]:
            raise GameValidationError(
                f"non-leaf vertex {v!r} has no outgoing edge and no weight"
            )
        if len(leaf_reach[v]) < 2:
            raise GameValidationError(
                f"vertex {v!r} has a path to fewer than two different leaves"
            )


def leaves_reachable(g: GameGraph) -> dict[str, frozenset[str]]:
    """Set of leaves reachable from each vertex (a leaf reaches itself)."""
    preds: dict[str, list[str]] = {v: [] for v in g.vertices}
    for src, dst in g.edges:
        preds[dst].append(src)
    reach: dict[str, set[str]] = {v: set() for v in g.vertices}
    work = []
    for leaf in g.weights:
        reach[leaf].add(leaf)
        work.append(leaf)
    while work:
        v = work.pop()
        for p in preds[v]:
            before = len(reach[p])
            reach[p] |= reach[v]
            if len(reach[p]) != before:
                work.append(p)
    return {v: frozenset(s) for v, s in reach.items()}


def topological_order(g: GameGraph) -> list[str]:
    """Deterministic topological order (sources first); rejects cyclic graphs."""
    if not g.is_dag:
        raise ValueError("graph has a directed cycle")
    indeg = {v: 0 for v in g.vertices}
    for _, dst in g.edges:
        indeg[dst] += 1
    import heapq

    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for u in g.neighbors[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(heap, u)
    return order


def longest_path_to_leaf(g: GameGraph) -> dict[str, int]:
    """Longest path (edge count) from each vertex to any leaf, on a DAG."""
    depth: dict[str, int] = {}
    for v in reversed(topological_order(g)):
        succ = g.neighbors[v]
        depth[v] = 0 if not succ else 1 + max(depth[u] for u in succ)
    return depth


def distances_to(g: GameGraph, targets: Iterable[str]) -> dict[str, int]:
    """BFS distance from every vertex to the nearest target (following edges)."""
    from collections import deque

    preds: dict[str, list[str]] = {v: [] for v in g.vertices}
    for src, dst in g.edges:
        preds[dst].append(src)
    dist = {v: -1 for v in g.vertices}
    queue = deque()
    for t in targets:
        if dist[t] == -1:
            dist[t] = 0
            queue.append(t)
    while queue:
        v = queue.popleft()
        for p in preds[v]:
            if dist[p] == -1:
                dist[p] = dist[v] + 1
                queue.append(p)
    return dist


@dataclass(frozen=True)
class QualitativeView:
    """A quantitative game cut at reward level `cut`.

    Player 1's targets are the leaves whose weight reaches the cut; they are
    never empty.  Thresholds and surely-winning analysis run on this view.
    """

    base: GameGraph
    target1: frozenset[str]
    target2: frozenset[str]
    cut: Fraction

    @staticmethod
    def from_cut(g: GameGraph, cut: Fraction | int) -> "QualitativeView":
        cut = Fraction(cut)
        t1 = frozenset(l for l, w in g.weights.items() if w >= cut)
        t2 = frozenset(g.weights) - t1
        if not t1:
            raise GameValidationError(f"no leaf has weight >= {cut}")
        return QualitativeView(g, t1, t2, cut)

    @staticmethod
    def top(g: GameGraph) -> "QualitativeView":
        """Cut at the maximal leaf weight (surely winning the best reward)."""
        return QualitativeView.from_cut(g, max(g.weights.values()))


@dataclass(frozen=True)
class BudgetState:
    """Budget pair; `renormalized` divides both by Player 2's budget."""

    budget1: Fraction
    budget2: Fraction

    def __post_init__(self):
        if self.budget1 < 0 or self.budget2 < 0:
            raise ValueError("budgets must be nonnegative")

    def renormalized(self) -> "BudgetState":
        if self.budget2 == 0:
            return self
        return BudgetState(self.budget1 / self.budget2, Fraction(1))


@dataclass(frozen=True)
class MixedBidStrategy:
    """Finite-support first-bid strategy: (bid, successor-on-win) with masses."""

    bids: tuple[Fraction, ...]
    successors: tuple[str, ...]
    probabilities: tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.bids) == len(self.successors) == len(self.probabilities)):
            raise ValueError("support arrays must have equal length")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("negative probability")
        if sum(self.probabilities, Fraction(0)) != 1:
            raise ValueError("probabilities must sum to 1")

    def support(self) -> list[tuple[Fraction, str, Fraction]]:
        return [
            (b, s, p)
            for b, s, p in zip(self.bids, self.successors, self.probabilities)
            if p > 0
        ]


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def race_vertex(i: int, j: int) -> str:
    return f"v{i}_{j}"


def make_race_game(n: int, m: int) -> GameGraph:
    """Race game G(n, m): Player 1 needs n bidding wins, Player 2 needs m.

    Internal vertices ``v{i}_{j}`` hold the wins still needed by each player;
    ``t1`` (weight 1) stands for i = 0 and ``t2`` (weight 0) for j = 0.
    WnR(n), "win n in a row", is ``make_race_game(n, 1)``.
    """
    if n < 1 or m < 1:
        raise ValueError("race game needs n >= 1 and m >= 1")
    vertices = {"t1", "t2"}
    edges = set()
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            v = race_vertex(i, j)
            vertices.add(v)
            edges.add((v, "t1" if i == 1 else race_vertex(i - 1, j)))
            edges.add((v, "t2" if j == 1 else race_vertex(i, j - 1)))
    return GameGraph(
        vertices=frozenset(vertices),
        edges=frozenset(edges),
        weights={"t1": Fraction(1), "t2": Fraction(0)},
        root=race_vertex(n, m),
    )


_LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)

EMPTY_BOARD = "." * 9


def _board_lines(board: str) -> tuple[bool, bool]:
    x_line = any(all(board[i] == "X" for i in line) for line in _LINES)
    o_line = any(all(board[i] == "O" for i in line) for line in _LINES)
    return x_line, o_line


def make_tictactoe_game(objective: str = "win-only") -> GameGraph:
    """All-pay bidding tic-tac-toe from the empty board.

    The bidding winner places either mark in any blank cell, so each
    non-terminal board has one successor per (mark, blank cell) pair.
    Terminal boards collapse onto two aggregate leaves: ``t1`` (weight 1) for
    boards with an X line -- and, under ``win-or-draw``, full boards with no
    line -- and ``t2`` (weight 0) for the rest.  Board positions from which
    only one leaf class remains reachable are strategically decided, so they
    are contracted onto the corresponding leaf; this keeps every internal
    vertex able to reach both leaves, as the graph model requires.
    """
    if objective not in ("win-only", "win-or-draw"):
        raise ValueError(f"unknown objective {objective!r}")
    draws_to_t1 = objective == "win-or-draw"

    def classify(board: str) -> str | None:
        x_line, o_line = _board_lines(board)
        if x_line and o_line:
            raise AssertionError("unreachable board expanded")
        if x_line:
            return "t1"
        if o_line:
            return "t2"
        if "." not in board:
            return "t1" if draws_to_t1 else "t2"
        return None

    # Phase 1: enumerate reachable non-terminal boards and raw transitions.
    succ: dict[str, list[str]] = {}
    stack = [EMPTY_BOARD]
    seen = {EMPTY_BOARD}
    while stack:
        board = stack.pop()
        out = []
        for cell, c in enumerate(board):
            if c != ".":
                continue
            for mark in ("X", "O"):
                child = board[:cell] + mark + board[cell + 1 :]
                out.append(child)
                if classify(child) is None and child not in seen:
                    seen.add(child)
                    stack.append(child)
        succ[board] = out

    # Phase 2: which leaf classes does each board reach?
    reach: dict[str, set[str]] = {}

    def reach_of(board: str) -> set[str]:
        got = reach.get(board)
        if got is not None:
            return got
        leaf = classify(board)
        if leaf is not None:
            got = {leaf}
        else:
            got = set()
            for child in succ[board]:
                got |= reach_of(child)
        reach[board] = got
        return got

    reach_of(EMPTY_BOARD)

    def resolved(board: str) -> str:
        """Leaf id if the board is terminal or decided, else the board itself."""
        leaf = classify(board)
        if leaf is not None:
            return leaf
        r = reach_of(board)
        if len(r) == 1:
            return next(iter(r))
        return board

    vertices = {"t1", "t2"}
    edges = set()
    for board in succ:
        if resolved(board) != board:
            continue
        vertices.add(board)
        for child in succ[board]:
            edges.add((board, resolved(child)))
    return GameGraph(
        vertices=frozenset(vertices),
        edges=frozenset(edges),
        weights={"t1": Fraction(1), "t2": Fraction(0)},
        root=EMPTY_BOARD,
    )


# ---------------------------------------------------------------------------
# Game file format
# ---------------------------------------------------------------------------


def save_game(g: GameGraph) -> str:
    """Serialize to the line-oriented game format (deterministic ordering)."""
    out = []
    for v in sorted(g.vertices - g.leaves):
        out.append(f"vertex {v}")
    for leaf in sorted(g.leaves):
        w = g.weights[leaf]
        wtext = str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"
        out.append(f"leaf {leaf} {wtext}")
    for src, dst in sorted(g.edges):
        out.append(f"edge {src} {dst}")
    if g.root is not None:
        out.append(f"root {g.root}")
    return "\n".join(out) + "\n"


def load_game(text: str) -> GameGraph:
    """Parse the game format; raises GameFormatError with a line number."""
    vertices: set[str] = set()
    weights: dict[str, Fraction] = {}
    edges: set[tuple[str, str]] = set()
    root: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "vertex":
            if len(parts) != 2:
                raise GameFormatError("expected: vertex <id>", lineno)
            if parts[1] in vertices:
                raise GameFormatError(f"duplicate vertex {parts[1]!r}", lineno)
            vertices.add(parts[1])
        elif kind == "leaf":
            if len(parts) != 3:
                raise GameFormatError("expected: leaf <id> <weight>", lineno)
            name = parts[1]
            if name in vertices:
                raise GameFormatError(f"duplicate vertex {name!r}", lineno)
            try:
                w = parse_rational(parts[2])
            except ValueError as exc:
                raise GameFormatError(str(exc), lineno) from exc
            vertices.add(name)
            weights[name] = w
        elif kind == "edge":
            if len(parts) != 3:
                raise GameFormatError("expected: edge <src> <dst>", lineno)
            edges.add((parts[1], parts[2]))
        elif kind == "root":
            if len(parts) != 2:
                raise GameFormatError("expected: root <id>", lineno)
            root = parts[1]
        else:
            raise GameFormatError(f"unknown directive {kind!r}", lineno)
    return GameGraph(
        vertices=frozenset(vertices),
        edges=frozenset(edges),
        weights=weights,
        root=root,
    )

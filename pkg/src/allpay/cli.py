"""Command-line front end: generators, solvers and playout as CSV artifacts.

Every run prints a reproducibility header (tool version, argument echo, and
the seed where one applies) as `#` comment lines ahead of the data, so
repeated runs with identical flags produce identical bytes.

Exit codes: 0 success, 1 usage error, 2 game validation/format error,
3 iterative threshold solve did not converge.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import __version__
from .analytic import (
    PLAYER1_WINS,
    PLAYER2_WINS,
    Wnr2Oracle,
    sweep,
    wnr1_oracle,
    wnr2_value,
)
from .fptas import approx_values, strategy_at, value_bracket
from .graph import (
    GameFormatError,
    GameValidationError,
    QualitativeView,
    load_game,
    make_race_game,
    make_tictactoe_game,
    save_game,
)
from .matrixgame import MatrixGame, solve_matrix_game
from .playout import PlayoutConfig, builtin_strategy, simulate
from .rational import format_rational, is_inf, parse_rational
from .surewin import thresholds_dag, thresholds_iterative

USAGE_ERROR, VALIDATION_ERROR, NO_CONVERGENCE = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _header(args: argparse.Namespace, extra: dict | None = None) -> list[str]:
    echo = " ".join(args._raw_argv)
    lines = [f"# allpay {__version__}", f"# command: {echo}"]
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {val}")
    return lines


def _emit(args, lines: list[str]):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return load_game(fh.read())


def _fmt9(x: float) -> str:
    return f"{x:.9f}"


def _cmd_gen(args) -> int:
    if args.kind == "race":
        g = make_race_game(args.n, args.m)
    else:
        g = make_tictactoe_game(args.objective)
    _emit(args, _header(args) + [save_game(g).rstrip("\n")])
    return 0


def _cmd_thresholds(args) -> int:
    g = _load(args.game)
    view = (
        QualitativeView.from_cut(g, parse_rational(args.cut))
        if args.cut
        else QualitativeView.top(g)
    )
    status = 0
    if g.is_dag and not args.iterative:
        result = thresholds_dag(view)
    else:
        result = thresholds_iterative(
            view,
            max_rounds=args.max_rounds,
            tol=parse_rational(args.tol),
        )
        if not result.converged:
            status = NO_CONVERGENCE
    lines = _header(args)
    lines.append("vertex,threshold_num,threshold_den,exact")
    exact = "true" if result.exact else "false"
    for v in sorted(result.values):
        t = result.values[v]
        if is_inf(t):
            lines.append(f"{v},inf,1,{exact}")
        else:
            lines.append(f"{v},{t.numerator},{t.denominator},{exact}")
    if status == NO_CONVERGENCE:
        lines.append(f"# not converged: residual {format_rational(result.residual)}")
    _emit(args, lines)
    return status


def _cmd_values(args) -> int:
    g = _load(args.game)
    eps = parse_rational(args.eps)
    table = approx_values(g, eps, method=args.method)
    lines = _header(args)
    if args.strategy:
        vertex, budget = args.strategy
        mix = strategy_at(table, vertex, parse_rational(budget))
        lines.append("bid,prob,successor")
        for bid, succ, prob in zip(mix.bids, mix.successors, mix.probabilities):
            lines.append(f"{_fmt9(float(bid))},{_fmt9(float(prob))},{succ}")
        _emit(args, lines)
        return 0
    lines.append("vertex,B1,lower,upper")
    for v in sorted(table.game.vertices):
        top = table.lower_cap[v]
        for idx in range(top + 1):
            budget = Fraction(idx, table.grid)
            lo, hi = value_bracket(table, v, budget)
            lines.append(f"{v},{_fmt9(float(budget))},{_fmt9(lo)},{_fmt9(hi)}")
    _emit(args, lines)
    return 0


def _cmd_wnr2(args) -> int:
    lo = parse_rational(args.start)
    hi = parse_rational(args.stop)
    step = parse_rational(args.step)
    if step <= 0 or hi < lo:
        raise SystemExit(USAGE_ERROR)
    lines = _header(args)
    lines.append("B1,value")
    b = lo
    while b <= hi:
        sv = wnr2_value(b, args.tie_rule)
        lines.append(f"{format_rational(b)},{format_rational(sv.value)}")
        b += step
    _emit(args, lines)
    return 0


def _cmd_sweep(args) -> int:
    oracle = wnr1_oracle() if args.oracle == "step1" else Wnr2Oracle()
    state = sweep(
        args.n,
        parse_rational(args.b1),
        parse_rational(args.v),
        oracle,
        support_cap=args.cap,
    )
    lines = _header(args)
    for bid, mass in state.support():
        lines.append(f"bid {format_rational(bid)} mass {format_rational(mass)}")
    lines.append(f"zero-mass {format_rational(state.zero_mass)}")
    lines.append(f"status {state.status}")
    _emit(args, lines)
    return 0


def _cmd_solve_matrix(args) -> int:
    with open(args.matrix, encoding="utf-8") as fh:
        rows = [
            [parse_rational(tok) for tok in line.split()]
            for line in fh
            if line.strip() and not line.lstrip().startswith("#")
        ]
    sol = solve_matrix_game(
        MatrixGame.from_rows(rows), tol=parse_rational(args.tol), method=args.method
    )
    lines = _header(args)
    lines.append(f"value,{_fmt9(float(sol.value))}")
    for i, p in enumerate(sol.row_strategy):
        lines.append(f"row,{i},{_fmt9(float(p))}")
    for j, q in enumerate(sol.col_strategy):
        lines.append(f"col,{j},{_fmt9(float(q))}")
    _emit(args, lines)
    return 0


def _parse_strategy_spec(spec: str) -> tuple[str, dict]:
    name, _, rest = spec.partition(":")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise SystemExit(USAGE_ERROR)
            kwargs[key] = val
    return name, kwargs


def _cmd_play(args) -> int:
    g = _load(args.game)
    root = args.root or g.root
    if root is None:
        print("play: no root given and the game file declares none", file=sys.stderr)
        return USAGE_ERROR
    b1 = parse_rational(args.b1)
    name1, kw1 = _parse_strategy_spec(args.p1)
    name2, kw2 = _parse_strategy_spec(args.p2)
    s1 = builtin_strategy(name1, g, 1, b1, kw1)
    s2 = builtin_strategy(name2, g, 2, b1, kw2)
    cfg = PlayoutConfig(
        trials=args.trials,
        seed=args.seed,
        max_rounds=args.max_rounds,
        tie_rule=args.tie_rule,
    )
    report = simulate(g, root, b1, s1, s2, cfg)
    lines = _header(args, {"seed": args.seed})
    lines.append(f"trials {report.trials}")
    lines.append(f"mean {_fmt9(report.mean)}")
    lines.append(f"wilson95 {_fmt9(report.wilson_low)} {_fmt9(report.wilson_high)}")
    for leaf in sorted(report.leaf_hits):
        lines.append(f"leaf {leaf} {report.leaf_hits[leaf]}")
    lines.append(f"illegal-bids {report.illegal_bids}")
    lines.append(f"truncations {report.truncations}")
    _emit(args, lines)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="allpay", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a game file")
    gensub = p.add_subparsers(dest="kind", required=True)
    pr = gensub.add_parser("race", help="race game G(n, m)")
    pr.add_argument("n", type=int)
    pr.add_argument("m", type=int)
    pt = gensub.add_parser("tictactoe", help="bidding tic-tac-toe")
    pt.add_argument("objective", choices=["win-only", "win-or-draw"])
    for q in (pr, pt):
        q.add_argument("--out")
        q.set_defaults(func=_cmd_gen)

    p = sub.add_parser("thresholds", help="surely-winning threshold ratios")
    p.add_argument("--game", required=True)
    p.add_argument("--cut", help="reward cut (default: top leaf weight)")
    p.add_argument("--iterative", action="store_true")
    p.add_argument("--tol", default="1/1000000000")
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("values", help="FPTAS value brackets over the budget grid")
    p.add_argument("--game", required=True)
    p.add_argument("--eps", default="1/100")
    p.add_argument("--method", choices=["fast", "exact"], default="fast")
    p.add_argument("--strategy", nargs=2, metavar=("VERTEX", "B1"))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_values)

    p = sub.add_parser("wnr2", help="exact two-wins staircase over a budget range")
    p.add_argument("start")
    p.add_argument("stop")
    p.add_argument("step")
    p.add_argument(
        "--tie-rule",
        choices=[PLAYER1_WINS, PLAYER2_WINS],
        default=PLAYER1_WINS,
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_wnr2)

    p = sub.add_parser("sweep", help="support-sweeping decision procedure")
    p.add_argument("n", type=int)
    p.add_argument("b1")
    p.add_argument("v")
    p.add_argument("--oracle", choices=["step1", "wnr2"], default="step1")
    p.add_argument("--cap", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("solve-matrix", help="zero-sum matrix game solver")
    p.add_argument("matrix", help="whitespace-separated payoff matrix file")
    p.add_argument("--tol", default="1/1000000000")
    p.add_argument("--method", choices=["exact", "fast"], default="exact")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve_matrix)

    p = sub.add_parser("play", help="Monte-Carlo playout of two strategies")
    p.add_argument("--game", required=True)
    p.add_argument("--root")
    p.add_argument("--b1", required=True)
    p.add_argument("--p1", required=True, help="NAME[:k=v,...]")
    p.add_argument("--p2", required=True, help="NAME[:k=v,...]")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument(
        "--tie-rule",
        choices=[PLAYER1_WINS, PLAYER2_WINS],
        default=PLAYER1_WINS,
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_play)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._raw_argv = argv
    try:
        return args.func(args)
    except (GameFormatError, GameValidationError) as exc:
        print(f"allpay: {exc}", file=sys.stderr)
        return VALIDATION_ERROR
    except FileNotFoundError as exc:
        print(f"allpay: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, KeyError) as exc:
        print(f"allpay: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

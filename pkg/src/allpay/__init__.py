"""All-pay bidding games on graphs: exact thresholds, value brackets, playout."""

__version__ = "0.1.0"

from .analytic import (
    NonOptimalityWitness,
    StaircaseValue,
    SweepState,
    Wnr2Oracle,
    first_bid_outcome,
    nonoptimality_witness,
    sweep,
    witness_sequence,
    wnr1_oracle,
    wnr2_strategies,
    wnr2_value,
)
from .fptas import ValueTable, approx_values, strategy_at, value_bracket
from .graph import (
    BudgetState,
    GameFormatError,
    GameGraph,
    GameValidationError,
    MixedBidStrategy,
    QualitativeView,
    load_game,
    make_race_game,
    make_tictactoe_game,
    save_game,
)
from .matrixgame import MatrixGame, MatrixSolution, solve_matrix_game
from .playout import PlayoutConfig, PlayoutReport, builtin_strategy, simulate
from .rational import INF, Ratio, is_inf
from .surewin import (
    SpoilerStrategy,
    SureWinStrategy,
    ThresholdResult,
    extract_spoiler_strategy,
    extract_sure_win_strategy,
    thresholds_dag,
    thresholds_iterative,
)

__all__ = [name for name in dir() if not name.startswith("_")]

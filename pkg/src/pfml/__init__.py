"""Exact behavioural distances, distinguishing concepts and bisimulation games
for finite fuzzy-probabilistic models."""

__version__ = "0.1.0"

from .errors import (
    IncompleteStrategy,
    LengthMismatch,
    MarginalInvalid,
    ModelError,
    NotNonexpansive,
    ParseError,
    PfmlError,
    RowSumInvalid,
    SupportTooLarge,
    UnboundVariable,
    UnknownAtom,
    UnknownRole,
    UnknownState,
    UnknownTarget,
    ValueOutOfRange,
)
from .model import (
    Model,
    disjoint_union,
    gaifman_distance,
    load_model,
    loads_model,
    make_model,
    random_model,
    random_models,
    restrict,
    save_model,
    unravel,
    validate_model,
)
from .syntax import parse_concept, parse_formula, rank, standard_translation, to_text
from .semantics import apply_diamond, eval_concept, eval_concept_at, eval_formula
from .lp import linprog, min_over_vertices, solve_kantorovich_max, solve_transport_min
from .metrics import (
    DistanceTable,
    cross_distance,
    kantorovich_table,
    logical_lb_table,
    pair_distance,
    wasserstein_table,
)
from .game import extract_strategy, game_table, game_value, verify_strategy
from .synthesis import Synthesizer, reconstruct_function, synthesize_witness

__all__ = [name for name in dir() if not name.startswith("_")]

"""Bounded Degree Network Formation (BDNF) games."""
from .graph import (
    UNREACHABLE,
    Wiring,
    all_pairs_distances,
    diameter,
    is_strongly_connected,
    reach,
    single_source_distances,
    strongly_connected_components,
)
from .game import (
    BestResponse,
    Deviation,
    GameInstance,
    StabilityResult,
    best_response,
    costs,
    is_stable,
    node_cost,
    residual_distances,
    uniform_game,
    utopian_bound,
    utopian_cost,
)

__version__ = "0.1.0"

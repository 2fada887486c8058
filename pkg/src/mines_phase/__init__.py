"""Random Minesweeper solvability: model, solver, patterns, experiments."""

__version__ = "0.1.0"

from .grid import (
    Cell,
    FLAG,
    GridDims,
    GridState,
    HIDDEN,
    MineAssignment,
    SHOWN_MINE,
    clue_plane,
    clue_value,
    flood_reveal,
    grid_distance,
    is_consistent,
    is_solved,
    neighbors,
    reveal,
)

__all__ = [
    "Cell",
    "FLAG",
    "GridDims",
    "GridState",
    "HIDDEN",
    "MineAssignment",
    "SHOWN_MINE",
    "clue_plane",
    "clue_value",
    "flood_reveal",
    "grid_distance",
    "is_consistent",
    "is_solved",
    "neighbors",
    "reveal",
]

"""Core Minesweeper model: grids, mine assignments, grid states, reveals.

Cells are ``(row, col)`` tuples, 0-based. The neighborhood ``N(c)`` of a
cell is the 3x3 block around it clipped to the board and, by convention,
*includes the cell itself*. Clue values count mines over that
neighborhood; a mined cell would count itself, but a clue is only ever
displayed on a non-mine cell, where the two conventions agree.

Grid states store one of: hidden, a clue value 0..8, a flag, or a shown
mine. States serialize to a strict text format (see ``GridState.to_text``).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

Cell = tuple[int, int]

# GridState cell encodings. Clues are stored as their value 0..8.
HIDDEN = -1
FLAG = -2
SHOWN_MINE = -3

_ASSIGN_CHARS = {False: ".", True: "*"}
_STATE_CHAR_OF = {HIDDEN: "#", FLAG: "F", SHOWN_MINE: "!"}
_STATE_VALUE_OF = {"#": HIDDEN, "F": FLAG, "!": SHOWN_MINE}


@dataclass(frozen=True)
class GridDims:
    """Rectangular board dimensions; ``n`` is the total cell count."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.rows}x{self.cols}")

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def __iter__(self) -> Iterator[int]:
        yield self.rows
        yield self.cols

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.rows and 0 <= c[1] < self.cols

    def check_in_bounds(self, c: Cell) -> None:
        if not self.in_bounds(c):
            raise ValueError(f"cell {c} out of bounds for {self.rows}x{self.cols} grid")


def neighbors(c: Cell, dims: GridDims) -> list[Cell]:
    """All cells of N(c), *including c itself*, in row-major order.

    Between 4 cells (a corner of a board at least 2x2) and 9 (interior).
    """
    dims.check_in_bounds(c)
    r, col = c
    return [
        (rr, cc)
        for rr in range(max(0, r - 1), min(dims.rows, r + 2))
        for cc in range(max(0, col - 1), min(dims.cols, col + 2))
    ]


def grid_distance(a: Cell, b: Cell) -> int:
    """Chebyshev distance: graph distance in the king-move neighbor graph."""
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@dataclass(eq=False)
class MineAssignment:
    """Ground-truth mine placement, stored as a dense boolean plane."""

    dims: GridDims
    plane: np.ndarray

    def __post_init__(self):
        self.plane = np.ascontiguousarray(self.plane, dtype=bool)
        if self.plane.shape != (self.dims.rows, self.dims.cols):
            raise ValueError(
                f"plane shape {self.plane.shape} does not match dims {tuple(self.dims)}"
            )

    @classmethod
    def empty(cls, dims: GridDims) -> "MineAssignment":
        return cls(dims, np.zeros((dims.rows, dims.cols), dtype=bool))

    @classmethod
    def from_cells(cls, dims: GridDims, cells) -> "MineAssignment":
        plane = np.zeros((dims.rows, dims.cols), dtype=bool)
        for c in cells:
            dims.check_in_bounds(c)
            plane[c] = True
        return cls(dims, plane)

    @property
    def mine_count(self) -> int:
        return int(self.plane.sum())

    def mine_cells(self) -> list[Cell]:
        """Mine cells in row-major order."""
        return [(int(r), int(c)) for r, c in np.argwhere(self.plane)]

    def is_mine(self, c: Cell) -> bool:
        self.dims.check_in_bounds(c)
        return bool(self.plane[c])

    def copy(self) -> "MineAssignment":
        return MineAssignment(self.dims, self.plane.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MineAssignment):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.plane, other.plane))

    def to_text(self) -> str:
        """Serialize: line 1 ``rows cols``, then one '.'/'*' row per line.

        A trailing newline is part of the format.
        """
        lines = [f"{self.dims.rows} {self.dims.cols}"]
        for row in self.plane:
            lines.append("".join(_ASSIGN_CHARS[bool(v)] for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MineAssignment":
        dims, rows = _parse_grid_text(text, set(".*"))
        plane = np.array([[ch == "*" for ch in line] for line in rows], dtype=bool)
        return cls(dims, plane)


@dataclass(eq=False)
class GridState:
    """Player-visible board: per-cell hidden / clue 0..8 / flag / shown mine."""

    dims: GridDims
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.int8)
        if self.values.shape != (self.dims.rows, self.dims.cols):
            raise ValueError(
                f"values shape {self.values.shape} does not match dims {tuple(self.dims)}"
            )
        bad = (self.values < SHOWN_MINE) | (self.values > 8)
        if bad.any():
            raise ValueError("grid state contains values outside {-3..8}")

    @classmethod
    def all_hidden(cls, dims: GridDims) -> "GridState":
        return cls(dims, np.full((dims.rows, dims.cols), HIDDEN, dtype=np.int8))

    def copy(self) -> "GridState":
        return GridState(self.dims, self.values.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridState):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.values, other.values))

    def value_at(self, c: Cell) -> int:
        self.dims.check_in_bounds(c)
        return int(self.values[c])

    def hidden_mask(self) -> np.ndarray:
        return self.values == HIDDEN

    def clue_mask(self) -> np.ndarray:
        return self.values >= 0

    def flag_mask(self) -> np.ndarray:
        return self.values == FLAG

    def shown_mine_mask(self) -> np.ndarray:
        return self.values == SHOWN_MINE

    def hidden_cells(self) -> list[Cell]:
        return [(int(r), int(c)) for r, c in np.argwhere(self.values == HIDDEN)]

    def to_text(self) -> str:
        """Serialize: '#' hidden, '0'..'8' clue, 'F' flag, '!' shown mine."""
        lines = [f"{self.dims.rows} {self.dims.cols}"]
        for row in self.values:
            lines.append(
                "".join(_STATE_CHAR_OF.get(int(v), str(int(v))) for v in row)
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridState":
        dims, rows = _parse_grid_text(text, set("#F!012345678"))
        values = np.array(
            [[_STATE_VALUE_OF.get(ch, None) if ch in _STATE_VALUE_OF else int(ch) for ch in line] for line in rows],
            dtype=np.int8,
        )
        return cls(dims, values)


def _parse_grid_text(text: str, alphabet: set[str]) -> tuple[GridDims, list[str]]:
    """Strict parser shared by both grid formats."""
    if not text.endswith("\n"):
        raise ValueError("grid text must end with a newline")
    lines = text.split("\n")[:-1]
    if not lines:
        raise ValueError("empty grid text")
    header = lines[0].split(" ")
    if len(header) != 2:
        raise ValueError(f"bad header line {lines[0]!r}, expected 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    dims = GridDims(rows, cols)
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"expected {rows} grid lines, got {len(body)}")
    for line in body:
        if len(line) != cols:
            raise ValueError(f"grid line {line!r} has length {len(line)}, expected {cols}")
        for ch in line:
            if ch not in alphabet:
                raise ValueError(f"unexpected character {ch!r} in grid text")
    return dims, body


def clue_plane(m: MineAssignment) -> np.ndarray:
    """Clue values of every cell as an int8 plane (3x3 box sum of mines)."""
    padded = np.pad(m.plane.astype(np.int8), 1)
    acc = np.zeros((m.dims.rows, m.dims.cols), dtype=np.int8)
    for dr in range(3):
        for dc in range(3):
            acc += padded[dr : dr + m.dims.rows, dc : dc + m.dims.cols]
    return acc


def clue_value(m: MineAssignment, c: Cell) -> int:
    """Number of mines in N(c). In 0..9; 9 only for a fully surrounded mine."""
    m.dims.check_in_bounds(c)
    r, col = c
    window = m.plane[max(0, r - 1) : r + 2, max(0, col - 1) : col + 2]
    return int(window.sum())


def is_consistent(m: MineAssignment, s: GridState) -> bool:
    """Whether every cell is hidden, a truthful clue, or a flag/mine on a mine."""
    if m.dims != s.dims:
        raise ValueError(f"dimension mismatch: {tuple(m.dims)} vs {tuple(s.dims)}")
    v = s.values
    ok = v == HIDDEN
    clues = v >= 0
    if clues.any():
        ok = ok | (clues & (v == clue_plane(m)))
    marked = (v == FLAG) | (v == SHOWN_MINE)
    if marked.any():
        ok = ok | (marked & m.plane)
    return bool(ok.all())


def reveal(m: MineAssignment, s: GridState, c: Cell) -> GridState:
    """Reveal hidden cell c: equal to s except c becomes its clue or a shown mine.

    Returns a new state; the input is untouched.
    """
    s.dims.check_in_bounds(c)
    if s.values[c] != HIDDEN:
        raise ValueError(f"cell {c} is not hidden, cannot reveal")
    if not is_consistent(m, s):
        raise ValueError("assignment and state are not consistent")
    out = s.copy()
    out.values[c] = SHOWN_MINE if m.plane[c] else clue_value(m, c)
    return out


class FloodStats(NamedTuple):
    pops: int
    pushes: int
    revealed: int


def flood_reveal(m: MineAssignment, s: GridState, start: Cell) -> GridState:
    """Reveal start, then expand through zero clues to the fixpoint.

    While some revealed cell has clue 0 with hidden neighbors, those
    neighbors are revealed. Starting on a mine reveals only the shown mine.
    """
    state, _ = flood_reveal_traced(m, s, start)
    return state


def flood_reveal_traced(
    m: MineAssignment, s: GridState, start: Cell, order: str = "fifo"
) -> tuple[GridState, FloodStats]:
    """Worklist flood fill with instrumentation.

    ``order`` selects the worklist discipline ("fifo" or "lifo"); the
    fixpoint does not depend on it. Duplicate insertions are allowed
    (at most 8 per cell) and filtered when popped, so pops <= 9n.
    """
    if order not in ("fifo", "lifo"):
        raise ValueError(f"unknown worklist order {order!r}")
    out = reveal(m, s, start)
    if out.values[start] == SHOWN_MINE:
        return out, FloodStats(pops=1, pushes=1, revealed=1)

    clues = clue_plane(m)
    values = out.values
    rows, cols = out.dims
    work: deque[tuple[int, int]] = deque()
    pops = pushes = 1
    revealed = 1

    def push_hidden_neighbors(r, c):
        nonlocal pushes
        for rr in range(max(0, r - 1), min(rows, r + 2)):
            for cc in range(max(0, c - 1), min(cols, c + 2)):
                if values[rr, cc] == HIDDEN:
                    work.append((rr, cc))
                    pushes += 1

    if values[start] == 0:
        push_hidden_neighbors(*start)
    while work:
        cell = work.popleft() if order == "fifo" else work.pop()
        pops += 1
        if values[cell] != HIDDEN:
            continue
        # A zero cell has no mine in its neighborhood, so cell is safe.
        values[cell] = clues[cell]
        revealed += 1
        if values[cell] == 0:
            push_hidden_neighbors(*cell)
    return out, FloodStats(pops=pops, pushes=pushes, revealed=revealed)


def is_solved(m: MineAssignment, s: GridState) -> bool:
    """No shown mine, and every still-hidden cell is in fact a mine."""
    if m.dims != s.dims:
        raise ValueError(f"dimension mismatch: {tuple(m.dims)} vs {tuple(s.dims)}")
    if (s.values == SHOWN_MINE).any():
        return False
    return bool(m.plane[s.values == HIDDEN].all())

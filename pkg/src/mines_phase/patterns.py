"""Mine patterns: frame normalization, occurrence scanning, envelopes.

A pattern is a mine layout on its own frame with two mine-free outer
rings on every side and at least one mine touching the third ring from
each side. The frame rules pin the layout's translation, so a finite
mine set has exactly one pattern form (``Pattern.from_mine_cells``).

The two canonical 6-mine layouts built by ``canonical_p1_p2`` are the
smallest layouts a perfect-inference player cannot finish: their
played-out state leaves a 2x2 block where the two remaining mines sit
on either the diagonal or the anti-diagonal, and every clue agrees with
both choices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grid import (
    FLAG,
    HIDDEN,
    Cell,
    GridDims,
    GridState,
    MineAssignment,
    clue_plane,
    neighbors,
)

P1_MINES = frozenset({(2, 2), (2, 5), (5, 2), (5, 5), (3, 3), (4, 4)})
P2_MINES = frozenset({(2, 2), (2, 5), (5, 2), (5, 5), (3, 4), (4, 3)})

# (row, col) -> transformed coordinates, the 8 dihedral maps of the plane.
DIHEDRAL_MAPS = (
    lambda r, c: (r, c),
    lambda r, c: (r, -c),
    lambda r, c: (-r, c),
    lambda r, c: (-r, -c),
    lambda r, c: (c, r),
    lambda r, c: (c, -r),
    lambda r, c: (-c, r),
    lambda r, c: (-c, -r),
)


@dataclass(frozen=True)
class Pattern:
    """A mine layout on a frame with the outer-ring constraints enforced."""

    dims: GridDims
    mines: frozenset[Cell]

    def __post_init__(self):
        rows, cols = self.dims
        if rows < 5 or cols < 5:
            raise ValueError("pattern frame must be at least 5x5")
        if not self.mines:
            raise ValueError("pattern must contain at least one mine")
        banned_rows = {0, 1, rows - 2, rows - 1}
        banned_cols = {0, 1, cols - 2, cols - 1}
        mine_rows = set()
        mine_cols = set()
        for r, c in self.mines:
            self.dims.check_in_bounds((r, c))
            if r in banned_rows or c in banned_cols:
                raise ValueError(f"mine {(r, c)} lies in a mine-free outer ring")
            mine_rows.add(r)
            mine_cols.add(c)
        for required, present, what in (
            (2, mine_rows, "row 2"),
            (rows - 3, mine_rows, f"row {rows - 3}"),
            (2, mine_cols, "col 2"),
            (cols - 3, mine_cols, f"col {cols - 3}"),
        ):
            if required not in present:
                raise ValueError(f"pattern has no mine on {what}")

    @property
    def mine_count(self) -> int:
        return len(self.mines)

    def sorted_mines(self) -> list[Cell]:
        return sorted(self.mines)

    def plane(self) -> np.ndarray:
        out = np.zeros((self.dims.rows, self.dims.cols), dtype=bool)
        for c in self.mines:
            out[c] = True
        return out

    @classmethod
    def from_mine_cells(cls, cells) -> "Pattern":
        """Translation-normalize an arbitrary finite mine set into a pattern."""
        cells = list(cells)
        if not cells:
            raise ValueError("pattern must contain at least one mine")
        rmin = min(r for r, _ in cells)
        cmin = min(c for _, c in cells)
        rmax = max(r for r, _ in cells)
        cmax = max(c for _, c in cells)
        dims = GridDims(rmax - rmin + 5, cmax - cmin + 5)
        mines = frozenset((r - rmin + 2, c - cmin + 2) for r, c in cells)
        if len(mines) != len(cells):
            raise ValueError("duplicate mine cells")
        return cls(dims, mines)

    def dihedral_images(self) -> list["Pattern"]:
        """The 8 reflections/rotations of this pattern, normalized; may repeat."""
        return [
            Pattern.from_mine_cells(f(r, c) for r, c in self.mines)
            for f in DIHEDRAL_MAPS
        ]

    def to_text(self) -> str:
        """Pattern file format: a '; pattern' header, then the assignment format."""
        return "; pattern\n" + MineAssignment(self.dims, self.plane()).to_text()

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        first, _, rest = text.partition("\n")
        if first.strip() != "; pattern":
            raise ValueError("pattern text must start with a '; pattern' line")
        m = MineAssignment.from_text(rest)
        return cls(m.dims, frozenset(m.mine_cells()))


def embed_pattern(p: Pattern, dims: GridDims, anchor: Cell) -> MineAssignment:
    """Place p's frame with its top-left corner at anchor on an empty board."""
    ar, ac = anchor
    if ar < 0 or ac < 0 or ar + p.dims.rows > dims.rows or ac + p.dims.cols > dims.cols:
        raise ValueError(f"pattern frame does not fit at anchor {anchor}")
    plane = np.zeros((dims.rows, dims.cols), dtype=bool)
    plane[ar : ar + p.dims.rows, ac : ac + p.dims.cols] = p.plane()
    return MineAssignment(dims, plane)


def embed_padded(p: Pattern, pad: int = 3) -> tuple[MineAssignment, Cell]:
    """Embed p in a board with `pad` extra empty rings; returns (board, anchor)."""
    dims = GridDims(p.dims.rows + 2 * pad, p.dims.cols + 2 * pad)
    return embed_pattern(p, dims, (pad, pad)), (pad, pad)


def occurrences(m: MineAssignment, p: Pattern) -> list[Cell]:
    """Top-left anchors of exact matches of p's full frame inside m.

    Exact means mines *and* empties. Driven from m's mine list: each mine
    is tried as the pattern's first (row-major) mine, so the cost scales
    with the mine count, not the board area.
    """
    fr, fc = p.dims
    rows, cols = m.dims
    if fr > rows or fc > cols or m.mine_count == 0:
        return []
    first = min(p.mines)
    mine_rc = np.argwhere(m.plane)
    cand = mine_rc - np.array(first)
    keep = (
        (cand[:, 0] >= 0)
        & (cand[:, 1] >= 0)
        & (cand[:, 0] <= rows - fr)
        & (cand[:, 1] <= cols - fc)
    )
    cand = cand[keep]
    if len(cand) == 0:
        return []
    windows = sliding_window_view(m.plane, (fr, fc))
    hits = (windows[cand[:, 0], cand[:, 1]] == p.plane()).all(axis=(1, 2))
    return [(int(r), int(c)) for r, c in cand[hits]]


def expected_occurrences(dims: GridDims, p_mine: float, p: Pattern) -> float:
    """Exact expected occurrence count under i.i.d. mines of density p_mine."""
    if not 0.0 <= p_mine <= 1.0:
        raise ValueError(f"p_mine must be a probability, got {p_mine}")
    anchors_r = max(0, dims.rows - p.dims.rows + 1)
    anchors_c = max(0, dims.cols - p.dims.cols + 1)
    k = p.mine_count
    area = p.dims.n
    return anchors_r * anchors_c * p_mine**k * (1.0 - p_mine) ** (area - k)


@dataclass(frozen=True)
class Envelope:
    """Union of the neighborhoods of a state's hidden cells."""

    cells: frozenset[Cell]
    border: frozenset[Cell]
    corners: frozenset[Cell]


def envelope(s: GridState) -> Envelope:
    """Envelope of s: cells, its border, and its corner cells.

    Border cells have fewer than 9 envelope cells in their neighborhood
    (cells clipped off by the board edge count as outside). Corner cells
    are border cells with at least two orthogonal neighbors outside.
    """
    hidden = s.hidden_mask()
    if not hidden.any():
        raise ValueError("state has no hidden cells; envelope is vacuous")
    rows, cols = s.dims
    padded = np.pad(hidden, 1)
    env = np.zeros((rows, cols), dtype=bool)
    for dr in range(3):
        for dc in range(3):
            env |= padded[dr : dr + rows, dc : dc + cols]

    env_padded = np.pad(env, 1).astype(np.int8)
    in_count = np.zeros((rows, cols), dtype=np.int8)
    for dr in range(3):
        for dc in range(3):
            in_count += env_padded[dr : dr + rows, dc : dc + cols]
    border = env & (in_count < 9)

    orth_in = (
        env_padded[:-2, 1:-1] + env_padded[2:, 1:-1] + env_padded[1:-1, :-2] + env_padded[1:-1, 2:]
    )
    corners = border & (orth_in <= 2)

    as_cells = lambda mask: frozenset((int(r), int(c)) for r, c in np.argwhere(mask))
    return Envelope(cells=as_cells(env), border=as_cells(border), corners=as_cells(corners))


def s_clue(s: GridState, c: Cell) -> int:
    """Clue value at c minus the number of flagged neighbors."""
    if s.value_at(c) < 0:
        raise ValueError(f"cell {c} is not a clue")
    flags = sum(1 for nb in neighbors(c, s.dims) if s.values[nb] == FLAG)
    return int(s.values[c]) - flags


class CheckResult(NamedTuple):
    ok: bool
    reason: str | None


def envelope_pruning_checks(s: GridState, max_flags: int | None = 5) -> CheckResult:
    """Necessary conditions for a state to be ambiguous; a sound reject filter.

    Fails when: an envelope clue has a non-positive remaining count or
    fewer than two hidden neighbors; an envelope border cell is hidden;
    an envelope corner cell is not a flag; or (when ``max_flags`` is not
    None, valid only in the at-most-6-mine regime) the state carries more
    than ``max_flags`` flags. Passing does not imply ambiguity.
    """
    env = envelope(s)
    for c in sorted(env.cells):
        if s.values[c] >= 0:
            if s_clue(s, c) <= 0:
                return CheckResult(False, f"envelope clue at {c} has no remaining mines")
            hidden_nbrs = sum(1 for nb in neighbors(c, s.dims) if s.values[nb] == HIDDEN)
            if hidden_nbrs < 2:
                return CheckResult(False, f"envelope clue at {c} pins a single hidden cell")
    for c in sorted(env.border):
        if s.values[c] == HIDDEN:
            return CheckResult(False, f"hidden envelope border cell at {c}")
    for c in sorted(env.corners):
        if s.values[c] != FLAG:
            return CheckResult(False, f"envelope corner cell at {c} is not a flag")
    if max_flags is not None:
        n_flags = int(s.flag_mask().sum())
        if n_flags > max_flags:
            return CheckResult(False, f"{n_flags} flags exceed the {max_flags}-flag bound")
    return CheckResult(True, None)


@dataclass(frozen=True)
class CanonicalPatterns:
    """The two minimal ambiguous patterns and their shared stuck state."""

    p1: Pattern
    p2: Pattern
    s_min: GridState
    s_min_anchor: Cell
    p1_embedding: MineAssignment
    p2_embedding: MineAssignment


def canonical_p1_p2(pad: int = 3) -> CanonicalPatterns:
    """Build P1, P2 and their ambiguous grid state on a padded board.

    The state is reconstructed procedurally: embed P1, reveal every
    non-mine cell outside the central 2x2 block, flag the four outer
    mines. Mistakes would be caught by the consistency checks in tests.
    """
    p1 = Pattern(GridDims(8, 8), P1_MINES)
    p2 = Pattern(GridDims(8, 8), P2_MINES)
    board1, anchor = embed_padded(p1, pad)
    board2, _ = embed_padded(p2, pad)
    ar, ac = anchor

    values = clue_plane(board1)
    for r, c in ((3, 3), (3, 4), (4, 3), (4, 4)):
        values[ar + r, ac + c] = HIDDEN
    for r, c in ((2, 2), (2, 5), (5, 2), (5, 5)):
        values[ar + r, ac + c] = FLAG
    s_min = GridState(board1.dims, values)
    return CanonicalPatterns(
        p1=p1,
        p2=p2,
        s_min=s_min,
        s_min_anchor=anchor,
        p1_embedding=board1,
        p2_embedding=board2,
    )

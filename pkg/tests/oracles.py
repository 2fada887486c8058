"""Independent brute-force reference implementations used as test oracles.

Everything here is deliberately naive: full scans, full enumerations, no
shared code with the library's optimized paths.
"""

from itertools import product

import numpy as np

from mines_phase.grid import FLAG, HIDDEN, GridState, MineAssignment


def naive_neighbors(c, dims):
    r, col = c
    return {
        (rr, cc)
        for rr in range(dims.rows)
        for cc in range(dims.cols)
        if abs(rr - r) <= 1 and abs(cc - col) <= 1
    }


def naive_clue(m: MineAssignment, c) -> int:
    return sum(1 for nb in naive_neighbors(c, m.dims) if m.plane[nb])


def naive_occurrences(m: MineAssignment, pattern) -> list:
    """All-windows scan: compare every anchor's full window to the pattern."""
    fr, fc = pattern.dims
    rows, cols = m.dims
    plane = pattern.plane()
    out = []
    for r in range(rows - fr + 1):
        for c in range(cols - fc + 1):
            if np.array_equal(m.plane[r : r + fr, c : c + fc], plane):
                out.append((r, c))
    return out


def naive_window_max(m: MineAssignment, w: int) -> int:
    rows, cols = m.dims
    best = 0
    for r in range(rows - w + 1):
        for c in range(cols - w + 1):
            best = max(best, int(m.plane[r : r + w, c : c + w].sum()))
    return best


def naive_classify(s: GridState):
    """Enumerate all 2^h assignments over *all* hidden cells of s.

    Returns (always_mine, never_mine, two_way, completion_count) where
    the count is over all hidden cells, constrained or not.
    """
    hidden = s.hidden_cells()
    h = len(hidden)
    assert h <= 20, "oracle is exponential; keep h small"
    clue_cells = [
        ((int(r), int(c)), int(s.values[r, c]))
        for r, c in np.argwhere(s.values >= 0)
    ]
    flags = {(int(r), int(c)) for r, c in np.argwhere(s.values == FLAG)}

    mine_in = {c: 0 for c in hidden}
    total = 0
    for bits in product((False, True), repeat=h):
        assignment = dict(zip(hidden, bits))
        ok = True
        for (r, c), value in clue_cells:
            count = 0
            for rr in range(max(0, r - 1), min(s.dims.rows, r + 2)):
                for cc in range(max(0, c - 1), min(s.dims.cols, c + 2)):
                    if (rr, cc) in flags:
                        count += 1
                    elif s.values[rr, cc] == HIDDEN and assignment[(rr, cc)]:
                        count += 1
            if count != value:
                ok = False
                break
        if ok:
            total += 1
            for c, bit in assignment.items():
                if bit:
                    mine_in[c] += 1

    always = {c for c in hidden if mine_in[c] == total and total > 0}
    never = {c for c in hidden if mine_in[c] == 0}
    two_way = {c for c in hidden if 0 < mine_in[c] < total}
    return always, never, two_way, total


def random_consistent_state(rng, dims, p_mine=0.25, p_reveal=0.5, p_flag=0.25) -> tuple:
    """A random (assignment, partially revealed state) pair, always consistent."""
    from mines_phase.grid import GridDims, clue_plane

    plane = rng.random((dims.rows, dims.cols)) < p_mine
    m = MineAssignment(dims, plane)
    clues = clue_plane(m)
    values = np.full((dims.rows, dims.cols), HIDDEN, dtype=np.int8)
    for r in range(dims.rows):
        for c in range(dims.cols):
            if plane[r, c]:
                if rng.random() < p_flag:
                    values[r, c] = FLAG
            elif rng.random() < p_reveal:
                values[r, c] = clues[r, c]
    return m, GridState(dims, values)

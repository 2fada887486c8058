"""Exact inference over hidden cells and the ambiguity decision.

``classify_hidden`` enumerates every assignment of mine/empty to the
hidden cells that are adjacent to at least one clue, subject to all clue
constraints, and sorts each cell into always-mine, never-mine or
two-way. Hidden cells with no clue neighbor are unconstrained and
therefore two-way. Enumeration splits the constraint graph into
connected components and backtracks with constraint propagation.

A pattern is ambiguous when a player with perfect inference cannot
finish it: ``is_ambiguous_pattern`` plays the pattern out with maximal
safe information and reports whether any two-way cell survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .grid import (
    FLAG,
    HIDDEN,
    SHOWN_MINE,
    Cell,
    GridDims,
    GridState,
    MineAssignment,
    clue_plane,
)
from .patterns import Pattern, embed_padded


class InconsistentStateError(ValueError):
    """The state admits no mine completion; cannot arise from a real board."""


class SearchBudgetExceeded(RuntimeError):
    """A constraint component exceeded the completion-search budget."""


class CompletionConstraint(NamedTuple):
    """One clue's equation: its remaining count over its hidden neighbors."""

    clue_cell: Cell
    required: int
    unknowns: frozenset[Cell]


@dataclass(frozen=True)
class InferenceReport:
    """Classification of hidden cells plus the consistent-completion count.

    ``completion_count`` counts assignments of the *constrained* hidden
    cells only; each unconstrained hidden cell would double it.
    """

    always_mine: frozenset[Cell]
    never_mine: frozenset[Cell]
    two_way: frozenset[Cell]
    completion_count: int


def build_constraints(s: GridState) -> list[CompletionConstraint]:
    """Collect one constraint per clue cell that still has hidden neighbors."""
    values = s.values
    rows, cols = s.dims
    out = []
    for r, c in np.argwhere(values >= 0):
        r, c = int(r), int(c)
        required = int(values[r, c])
        unknowns = []
        for rr in range(max(0, r - 1), min(rows, r + 2)):
            for cc in range(max(0, c - 1), min(cols, c + 2)):
                v = values[rr, cc]
                if v == HIDDEN:
                    unknowns.append((rr, cc))
                elif v == FLAG:
                    required -= 1
        if not unknowns:
            if required != 0:
                raise InconsistentStateError(
                    f"clue at {(r, c)} is unsatisfiable with no hidden neighbors"
                )
            continue
        if required < 0 or required > len(unknowns):
            raise InconsistentStateError(f"clue at {(r, c)} is unsatisfiable")
        out.append(CompletionConstraint((r, c), required, frozenset(unknowns)))
    return out


def _components(
    variables: list[Cell], constraints: list[CompletionConstraint]
) -> list[tuple[list[Cell], list[CompletionConstraint]]]:
    """Split variables/constraints into connected components (union-find)."""
    index = {v: i for i, v in enumerate(variables)}
    parent = list(range(len(variables)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for con in constraints:
        it = iter(con.unknowns)
        first = index[next(it)]
        for v in it:
            a, b = find(first), find(index[v])
            if a != b:
                parent[a] = b
    groups: dict[int, tuple[list[Cell], list[CompletionConstraint]]] = {}
    for v, i in index.items():
        groups.setdefault(find(i), ([], []))[0].append(v)
    for con in constraints:
        root = find(index[next(iter(con.unknowns))])
        groups[root][1].append(con)
    return list(groups.values())


def _enumerate_component(
    variables: list[Cell],
    constraints: list[CompletionConstraint],
    node_budget: int | None,
) -> tuple[int, dict[Cell, int]]:
    """Count all satisfying assignments and per-variable mine counts.

    Depth-first search with unit propagation; prunes a branch as soon as
    some constraint can no longer reach its required count.
    """
    # Fail-first: assign cells touching many constraints early.
    incidence: dict[Cell, list[int]] = {v: [] for v in variables}
    for j, con in enumerate(constraints):
        for v in con.unknowns:
            incidence[v].append(j)
    order = sorted(variables, key=lambda v: (-len(incidence[v]), v))
    var_index = {v: i for i, v in enumerate(order)}
    var_cons = [incidence[v] for v in order]
    con_vars = [[var_index[v] for v in con.unknowns] for con in constraints]
    required = [con.required for con in constraints]

    n = len(order)
    assign = [-1] * n
    mines_in = [0] * len(constraints)
    unassigned_in = [len(vs) for vs in con_vars]
    total = 0
    mine_counts = [0] * n
    nodes = 0

    def propagate(trail: list[int]) -> bool:
        """Apply forced values until stable; False on contradiction."""
        changed = True
        while changed:
            changed = False
            for j, con_vs in enumerate(con_vars):
                need = required[j] - mines_in[j]
                if need < 0 or need > unassigned_in[j]:
                    return False
                if unassigned_in[j] == 0:
                    continue
                if need == 0 or need == unassigned_in[j]:
                    forced = 1 if need else 0
                    for vi in con_vs:
                        if assign[vi] == -1:
                            set_var(vi, forced, trail)
                    changed = True
        return True

    def set_var(vi: int, value: int, trail: list[int]) -> None:
        assign[vi] = value
        trail.append(vi)
        for j in var_cons[vi]:
            unassigned_in[j] -= 1
            mines_in[j] += value

    def unset_all(trail: list[int]) -> None:
        for vi in reversed(trail):
            value = assign[vi]
            assign[vi] = -1
            for j in var_cons[vi]:
                unassigned_in[j] += 1
                mines_in[j] -= value

    def record_solution() -> None:
        nonlocal total
        total += 1
        for vi in range(n):
            mine_counts[vi] += assign[vi]

    def dfs() -> None:
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise SearchBudgetExceeded(
                f"completion search exceeded {node_budget} nodes"
            )
        vi = next((i for i in range(n) if assign[i] == -1), None)
        if vi is None:
            record_solution()
            return
        for value in (0, 1):
            trail: list[int] = []
            set_var(vi, value, trail)
            if propagate(trail):
                dfs()
            unset_all(trail)

    trail0: list[int] = []
    if propagate(trail0):
        dfs()
    return total, {v: mine_counts[var_index[v]] for v in order}


def classify_hidden(s: GridState, node_budget: int | None = None) -> InferenceReport:
    """Classify every hidden cell of s as always-mine, never-mine or two-way.

    Raises InconsistentStateError when no completion satisfies the clues,
    and SearchBudgetExceeded when a component blows past ``node_budget``
    backtracking nodes (a guard for adversarial inputs).
    """
    if (s.values == SHOWN_MINE).any():
        raise ValueError("state contains a shown mine")
    constraints = build_constraints(s)
    constrained = sorted({v for con in constraints for v in con.unknowns})

    always: set[Cell] = set()
    never: set[Cell] = set()
    two_way: set[Cell] = set()
    completion_count = 1
    for variables, cons in _components(constrained, constraints):
        total, mine_counts = _enumerate_component(variables, cons, node_budget)
        if total == 0:
            raise InconsistentStateError("state admits no consistent completion")
        completion_count *= total
        for v in variables:
            k = mine_counts[v]
            if k == total:
                always.add(v)
            elif k == 0:
                never.add(v)
            else:
                two_way.add(v)

    constrained_set = set(constrained)
    for c in s.hidden_cells():
        if c not in constrained_set:
            two_way.add(c)
    return InferenceReport(
        always_mine=frozenset(always),
        never_mine=frozenset(never),
        two_way=frozenset(two_way),
        completion_count=completion_count,
    )


def is_ambiguous_state(s: GridState) -> bool:
    """True when s has hidden cells, no shown mine, and all hidden are two-way."""
    if (s.values == SHOWN_MINE).any():
        return False
    hidden = s.hidden_cells()
    if not hidden:
        return False
    report = classify_hidden(s)
    return all(c in report.two_way for c in hidden)


def play_out_pattern(p: Pattern, pad: int = 3) -> tuple[GridState, MineAssignment]:
    """Play p's embedding with maximal safe information to the fixpoint.

    Reveals every non-mine cell outside mine neighborhoods, then
    repeatedly reveals never-mine cells (true values from the embedding)
    until none remain, and finally flags every always-mine cell. The
    result is the best state any inference player can reach.
    """
    board, _ = embed_padded(p, pad)
    clues = clue_plane(board)
    rows, cols = board.dims

    near_mine = np.zeros((rows, cols), dtype=bool)
    padded = np.pad(board.plane, 1)
    for dr in range(3):
        for dc in range(3):
            near_mine |= padded[dr : dr + rows, dc : dc + cols]

    values = np.where(near_mine, np.int8(HIDDEN), clues).astype(np.int8)
    state = GridState(board.dims, values)
    while True:
        report = classify_hidden(state)
        if not report.never_mine:
            break
        for c in report.never_mine:
            values[c] = clues[c]
    for c in report.always_mine:
        values[c] = FLAG
    return state, board


def is_ambiguous_pattern(p: Pattern) -> bool:
    """Whether perfect inference fails to finish p: two-way cells survive.

    If inference with maximal information cannot finish, no algorithm
    can; if it finishes, no ambiguous state is reachable by playing p.
    """
    state, _ = play_out_pattern(p)
    return bool((state.values == HIDDEN).any())


def non_monotone_witnesses() -> list[Cell]:
    """All single-mine additions to the first canonical pattern that kill it.

    Candidate cells range over the pattern's mine bounding box dilated by
    3 (additions farther away form a separate cluster and leave the
    original one, hence its ambiguity, untouched). Coordinates are in the
    8x8 frame of the pattern, so they may be negative.
    """
    from .patterns import P1_MINES

    rmin = min(r for r, _ in P1_MINES) - 3
    rmax = max(r for r, _ in P1_MINES) + 3
    cmin = min(c for _, c in P1_MINES) - 3
    cmax = max(c for _, c in P1_MINES) + 3
    witnesses = []
    for r in range(rmin, rmax + 1):
        for c in range(cmin, cmax + 1):
            if (r, c) in P1_MINES:
                continue
            grown = Pattern.from_mine_cells(P1_MINES | {(r, c)})
            if not is_ambiguous_pattern(grown):
                witnesses.append((r, c))
    return witnesses


def non_monotone_witness() -> Cell:
    """One mine addition that makes the first canonical pattern solvable."""
    witnesses = non_monotone_witnesses()
    if not witnesses:
        raise RuntimeError("no non-monotonicity witness found; this should not happen")
    return witnesses[0]

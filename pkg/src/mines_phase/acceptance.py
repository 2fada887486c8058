"""The acceptance gate: one function per criterion, pass/fail plus detail.

Each criterion pins its sizes, trial counts and tolerances here; the
pytest suite and the ``verify`` CLI subcommand both run these functions.
Oracles used for equivalence checks are naive reimplementations local to
this module (full scans and exponential enumerations), so the optimized
paths are never compared against themselves.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .ambiguity import build_constraints, classify_hidden, non_monotone_witnesses
from .enumeration import enumerate_ambiguous
from .experiments import (
    SweepConfig,
    run_lemma4,
    run_pattern_stats,
    run_sweep,
)
from .grid import (
    FLAG,
    HIDDEN,
    GridDims,
    GridState,
    MineAssignment,
    clue_plane,
)
from .patterns import Pattern, canonical_p1_p2, occurrences
from .randomgen import ProcessState, derive_trial_seed, sample_iid, window_mine_max
from .solver import Verdict, decompose_islands, island_adjacency_graph, play

MASTER_SEED = 7


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str
    elapsed: float


def _default_thread_count() -> int:
    return max(1, min(8, os.cpu_count() or 1))


# --- naive oracles (kept deliberately dumb) ---------------------------------


def _naive_occurrences(m: MineAssignment, pattern: Pattern) -> list:
    fr, fc = pattern.dims
    plane = pattern.plane()
    out = []
    for r in range(m.dims.rows - fr + 1):
        for c in range(m.dims.cols - fc + 1):
            if np.array_equal(m.plane[r : r + fr, c : c + fc], plane):
                out.append((r, c))
    return out


def _naive_window_max(m: MineAssignment, w: int) -> int:
    best = 0
    for r in range(m.dims.rows - w + 1):
        for c in range(m.dims.cols - w + 1):
            best = max(best, int(m.plane[r : r + w, c : c + w].sum()))
    return best


def _naive_classify(s: GridState):
    hidden = s.hidden_cells()
    clue_cells = [((int(r), int(c)), int(s.values[r, c])) for r, c in np.argwhere(s.values >= 0)]
    flags = {(int(r), int(c)) for r, c in np.argwhere(s.values == FLAG)}
    mine_in = {c: 0 for c in hidden}
    total = 0
    for bits in product((False, True), repeat=len(hidden)):
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
    always = {c for c in hidden if total and mine_in[c] == total}
    never = {c for c in hidden if mine_in[c] == 0}
    two_way = {c for c in hidden if 0 < mine_in[c] < total}
    return always, never, two_way, total


def _random_state(rng, dims: GridDims) -> GridState:
    plane = rng.random((dims.rows, dims.cols)) < 0.25
    m = MineAssignment(dims, plane)
    clues = clue_plane(m)
    values = np.full((dims.rows, dims.cols), HIDDEN, dtype=np.int8)
    for r in range(dims.rows):
        for c in range(dims.cols):
            if plane[r, c]:
                if rng.random() < 0.25:
                    values[r, c] = FLAG
            elif rng.random() < 0.5:
                values[r, c] = clues[r, c]
    return GridState(dims, values)


# --- criteria ----------------------------------------------------------------


def criterion_1(threads: int) -> tuple[bool, str]:
    """Minimal ambiguous patterns: exactly {P1, P2} at 6 mines, none below."""
    started = time.perf_counter()
    below = enumerate_ambiguous(5)
    found = enumerate_ambiguous(6)
    elapsed = time.perf_counter() - started
    cp = canonical_p1_p2()
    ok = below == set() and found == {cp.p1, cp.p2} and elapsed <= 1800
    return ok, (
        f"max_mines=5 -> {len(below)} patterns (want 0); "
        f"max_mines=6 -> {len(found)} patterns (want exactly P1, P2: "
        f"{found == {cp.p1, cp.p2}}); enumeration took {elapsed:.0f}s of the 1800s budget"
    )


def criterion_2(threads: int) -> tuple[bool, str]:
    """Non-monotonicity: a single added mine makes P1 solvable, within 60s."""
    started = time.perf_counter()
    witnesses = non_monotone_witnesses()
    elapsed = time.perf_counter() - started
    ok = len(witnesses) >= 1 and elapsed <= 60
    return ok, (
        f"{len(witnesses)} witness cells {witnesses} in {elapsed:.1f}s "
        "(additions in the frame of the first canonical pattern)"
    )


def criterion_3(threads: int) -> tuple[bool, str]:
    """Planted fifty-fifty success rates match 2^-k at 10^4 trials."""
    bands = {1: 0.02, 2: 0.015, 3: 0.012, 4: 0.01}
    parts = []
    ok = True
    for k, tol in bands.items():
        result = run_lemma4(k, 10_000, seed=derive_trial_seed(MASTER_SEED, 300 + k), threads=threads)
        target = 0.5**k
        hit = abs(result.rate - target) <= tol
        ok &= hit
        parts.append(f"k={k}: rate={result.rate:.4f} target={target:.4f}+-{tol} {'ok' if hit else 'MISS'}")
    return ok, "; ".join(parts)


def criterion_4(threads: int) -> tuple[bool, str]:
    """Oracle equivalence: classifier, occurrence scan, window maximum."""
    mismatches_classify = 0
    for i in range(1000):
        rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, 1000 + i))
        s = _random_state(rng, GridDims(4, 4))
        report = classify_hidden(s)
        always, never, two_way, total = _naive_classify(s)
        constrained = {v for con in build_constraints(s) for v in con.unknowns}
        unconstrained = len(s.hidden_cells()) - len(constrained)
        agree = (
            report.always_mine == frozenset(always)
            and report.never_mine == frozenset(never)
            and report.two_way == frozenset(two_way)
            and report.completion_count * 2**unconstrained == total
        )
        mismatches_classify += not agree

    cp = canonical_p1_p2()
    domino = Pattern.from_mine_cells([(0, 0), (1, 0)])
    mismatches_occ = 0
    for i in range(100):
        board = sample_iid(GridDims(64, 64), 0.15, derive_trial_seed(MASTER_SEED, 2000 + i))
        for pat in (domino, cp.p1):
            if occurrences(board, pat) != _naive_occurrences(board, pat):
                mismatches_occ += 1

    mismatches_win = 0
    for i in range(10):
        board = sample_iid(GridDims(300, 300), 0.02, derive_trial_seed(MASTER_SEED, 3000 + i))
        if window_mine_max(board, 100) != _naive_window_max(board, 100):
            mismatches_win += 1

    ok = mismatches_classify == 0 and mismatches_occ == 0 and mismatches_win == 0
    return ok, (
        f"classifier vs 2^h enumeration: {mismatches_classify}/1000 mismatches; "
        f"occurrence scan vs all-windows: {mismatches_occ}/100 boards; "
        f"window max vs full scan: {mismatches_win}/10 boards"
    )


def criterion_5(threads: int) -> tuple[bool, str]:
    """Exact-expectation agreement and Poisson-like dispersion for the domino."""
    domino = Pattern.from_mine_cells([(0, 0), (1, 0)])
    stats = run_pattern_stats(
        GridDims(256, 256), 0.05, [domino], trials=2000,
        seed=derive_trial_seed(MASTER_SEED, 5), threads=threads,
    )
    mean, exact, se, disp = stats.means[0], stats.exact_expectation[0], stats.stderr[0], stats.dispersion[0]
    mean_ok = abs(mean - exact) <= 3 * se
    disp_ok = 0.9 <= disp <= 1.1
    return mean_ok and disp_ok, (
        f"mean={mean:.3f} exact={exact:.3f} |diff|={abs(mean - exact):.3f} <= 3*SE={3 * se:.3f}: {mean_ok}; "
        f"dispersion={disp:.3f} in [0.9, 1.1]: {disp_ok}"
    )


def criterion_6(threads: int) -> tuple[bool, str]:
    """Below-criticality solving at 512x512, p=0.01, 300 trials."""
    dims = GridDims(512, 512)
    n_solved = n_oversized = 0
    hit_mine_bad = 0
    corner_mined = 0
    corner_blocked = 0
    for i in range(300):
        seed = derive_trial_seed(MASTER_SEED, 6000 + i)
        board = sample_iid(dims, 0.01, seed)
        outcome = play(board)
        corner_has_mine = bool(board.plane[0, 0])
        corner_mined += corner_has_mine
        if not corner_has_mine and board.plane[0:2, 0:2].any():
            corner_blocked += 1
        if outcome.verdict == Verdict.SOLVED:
            n_solved += 1
        elif outcome.verdict == Verdict.GAVE_UP_OVERSIZED:
            n_oversized += 1
        elif outcome.verdict == Verdict.HIT_MINE and not corner_has_mine:
            hit_mine_bad += 1
    rate = n_solved / 300
    rate_ok = rate >= 0.97
    ok = rate_ok and n_oversized == 0 and hit_mine_bad == 0
    return ok, (
        f"solve_rate={rate:.4f} (criterion: >= 0.97, analytic ceiling ~0.9606: a mine in the corner "
        f"2x2 blocks the zero flood; this run: {corner_mined} corner mines, {corner_blocked} blocked corners); "
        f"oversized={n_oversized} (want 0); off-corner mine hits={hit_mine_bad} (want 0)"
    )


def criterion_7(threads: int) -> tuple[bool, str]:
    """Linear-time contract across n = 2^16, 2^18, 2^20 at p = 0.005."""
    sizes = [(256, 256), (512, 512), (1024, 1024)]
    medians = []
    for rows, cols in sizes:
        dims = GridDims(rows, cols)
        times = []
        for rep in range(4):
            board = sample_iid(dims, 0.005, derive_trial_seed(MASTER_SEED, 7000 + rows + rep))
            started = time.perf_counter()
            play(board)
            times.append(time.perf_counter() - started)
        medians.append(sorted(times)[len(times) // 2])
    per_cell = [t / (r * c) for t, (r, c) in zip(medians, sizes)]
    raw_ratios = [medians[i + 1] / medians[i] for i in range(2)]
    cell_ratios = [per_cell[i + 1] / per_cell[i] for i in range(2)]
    ratio_ok = all(r <= 2.5 for r in cell_ratios)

    board = sample_iid(GridDims(1024, 1024), 0.005, derive_trial_seed(MASTER_SEED, 7999))
    outcome = play(board, traced=True)
    pops_ok = outcome.flood_pops is not None and outcome.flood_pops <= 9 * board.dims.n
    ok = ratio_ok and pops_ok
    return ok, (
        f"median wall {['%.0fms' % (t * 1e3) for t in medians]}; time-per-cell ratios per 4x step "
        f"{['%.2f' % r for r in cell_ratios]} (<= 2.5 each: {ratio_ok}; raw wall ratios "
        f"{['%.2f' % r for r in raw_ratios]}, ~4x is linear growth); worklist flood pops "
        f"{outcome.flood_pops} <= 9n={9 * board.dims.n}: {pops_ok}"
    )


def criterion_8(threads: int) -> tuple[bool, str]:
    """Incremental process statistics agree with recomputation; tau detector exact."""
    cp = canonical_p1_p2()
    dims = GridDims(64, 64)
    state = ProcessState.start(dims, derive_trial_seed(MASTER_SEED, 8), window=16)
    mismatches = 0
    for _ in range(dims.n // 2):
        state.step()
        full_p1 = len(occurrences(state.board, cp.p1))
        full_p2 = len(occurrences(state.board, cp.p2))
        full_w = window_mine_max(state.board, 16)
        if (
            state.occurrence_count[cp.p1] != full_p1
            or state.occurrence_count[cp.p2] != full_p2
            or state.window_max < full_w  # incremental max is over all times, >= current
            or window_mine_max(state.board, 16) > state.window_max
        ):
            mismatches += 1

    tau_errors = 0
    for i in range(100):
        rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, 8100 + i))
        anchor = (int(rng.integers(0, 48)), int(rng.integers(0, 48)))
        frame = [(anchor[0] + r, anchor[1] + c) for r, c in sorted(cp.p1.mines)]
        n_fill = int(rng.integers(0, 12))
        fillers = []
        while len(fillers) < n_fill:
            cand = (int(rng.integers(0, 64)), int(rng.integers(0, 64)))
            far_from_frame = all(max(abs(cand[0] - r), abs(cand[1] - c)) >= 12 for r, c in frame)
            far_from_fill = all(max(abs(cand[0] - r), abs(cand[1] - c)) >= 9 for r, c in fillers)
            if far_from_frame and far_from_fill:
                fillers.append(cand)
        schedule = frame + fillers
        rng.shuffle(schedule)
        expected_tau = max(i for i, cell in enumerate(schedule, start=1) if cell in frame)
        replay = ProcessState.start(dims, 0, window=None)
        for cell in schedule:
            replay.apply_event(cell)
        if replay.tau != expected_tau:
            tau_errors += 1

    ok = mismatches == 0 and tau_errors == 0
    return ok, (
        f"incremental vs recomputed occurrence counts and window max over {dims.n // 2} steps: "
        f"{mismatches} mismatches; planted-schedule hitting times: {tau_errors}/100 wrong"
    )


def criterion_9(threads: int) -> tuple[bool, str]:
    """Island structure at 512x512, p=0.01: connected mine graphs, small boxes."""
    from .solver import _flood_fast

    dims = GridDims(512, 512)
    disconnected = oversized = 0
    islands_seen = 0
    for i in range(100):
        board = sample_iid(dims, 0.01, derive_trial_seed(MASTER_SEED, 9000 + i))
        state = GridState(dims, _flood_fast(board, clue_plane(board)))
        for island in decompose_islands(state, board):
            islands_seen += 1
            if not island.fits(100):
                oversized += 1
            if not island_adjacency_graph(island, board).is_connected():
                disconnected += 1
    ok = disconnected == 0 and oversized == 0
    return ok, (
        f"{islands_seen} islands over 100 boards: {disconnected} with disconnected mine "
        f"graphs (want 0), {oversized} exceeding a 100x100 box (want 0)"
    )


def criterion_10(threads: int) -> tuple[bool, str]:
    """Degenerate exactness and bit-exact reproducibility across thread counts."""
    cfg = SweepConfig(GridDims(128, 128), (0.0, 1.0), trials=25, seed=MASTER_SEED)
    outputs = []
    for t in (1, 2, 4, 1):
        result = run_sweep(cfg, threads=t)
        outputs.append((result.to_csv(), result.to_json_lines()))
    rows = run_sweep(cfg, threads=1).rows()
    rate_p0 = rows[0][1]
    rate_p1 = rows[1][1]
    exact_ok = rate_p0 == 1.0 and rate_p1 == 0.0
    identical = all(o == outputs[0] for o in outputs[1:])
    ok = exact_ok and identical
    return ok, (
        f"solve_rate(p=0)={rate_p0} (want exactly 1.0), solve_rate(p=1)={rate_p1} (want exactly 0.0); "
        f"outputs byte-identical across thread counts 1/2/4 and reruns: {identical}"
    )


CRITERIA: list[tuple[int, str, Callable[[int], tuple[bool, str]]]] = [
    (1, "minimal ambiguous patterns are exactly P1 and P2", criterion_1),
    (2, "one added mine defeats ambiguity (non-monotonicity)", criterion_2),
    (3, "planted fifty-fifty success rates are 2^-k", criterion_3),
    (4, "oracle equivalence: classifier, scanner, window max", criterion_4),
    (5, "exact expectation and dispersion of the domino count", criterion_5),
    (6, "below-criticality solving at 512x512, p=0.01", criterion_6),
    (7, "linear-time contract of the solver", criterion_7),
    (8, "incremental process statistics and hitting-time detection", criterion_8),
    (9, "island mine graphs connected and boxed at p=0.01", criterion_9),
    (10, "degenerate endpoints and thread-count reproducibility", criterion_10),
]


def run_criterion(cid: int, threads: int | None = None) -> CriterionResult:
    threads = threads if threads is not None else _default_thread_count()
    for num, name, fn in CRITERIA:
        if num == cid:
            started = time.perf_counter()
            passed, detail = fn(threads)
            return CriterionResult(num, name, passed, detail, time.perf_counter() - started)
    raise ValueError(f"no criterion {cid}")


def run_acceptance(only: int | None = None, threads: int | None = None) -> list[CriterionResult]:
    """Run the acceptance suite, printing one PASS/FAIL line per criterion."""
    results = []
    for num, name, _ in CRITERIA:
        if only is not None and num != only:
            continue
        result = run_criterion(num, threads)
        results.append(result)
        status = "PASS" if result.passed else "FAIL"
        print(f"C{num:<2d} {status}  {name} [{result.elapsed:.1f}s]")
        print(f"     {result.detail}")
    return results

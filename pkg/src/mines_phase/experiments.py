"""Monte Carlo experiment harness: sweeps, planted boards, process runs.

Every experiment is reproducible bit for bit from (config, seed): trial
i uses the seed splitmix64(master XOR i), trials are independent, and
aggregation runs in trial order regardless of how many worker processes
computed them. Natural occurrences of the 6-mine patterns need boards of
order 4e8 cells (the per-window hit probability peaks near 2.3e-9), so
planted instances and exact expectations carry the assertions; raw
occurrence statistics on desk-scale boards are diagnostics.

Tabular output is CSV with a "; mines-phase v1" version comment;
per-trial records are JSON lines. Files are written atomically.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import GridDims, MineAssignment
from .patterns import Pattern, canonical_p1_p2, embed_pattern, expected_occurrences, occurrences
from .randomgen import (
    ProcessState,
    Stream,
    border_clearance,
    derive_trial_seed,
    sample_iid,
    splitmix64,
    window_mine_max,
)
from .solver import Verdict, play

SCHEMA_VERSION = "; mines-phase v1"
SWEEP_HEADER = "p,solve_rate,mean_p1,mean_p2,mean_window_max,ci"

# Anchors that keep 8x8 frames pairwise >= 200 cells apart on a 224x224 board.
LEMMA4_BOARD = GridDims(224, 224)
LEMMA4_ANCHORS = ((4, 4), (4, 212), (212, 4), (212, 212))


@dataclass(frozen=True)
class SweepConfig:
    dims: GridDims
    p_values: tuple[float, ...]
    trials: int
    seed: int
    solver_mode: str = "inference"  # or "guessing"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if list(self.p_values) != sorted(self.p_values):
            raise ValueError("p_values must be sorted ascending")
        if self.solver_mode not in ("inference", "guessing"):
            raise ValueError(f"unknown solver mode {self.solver_mode!r}")


@dataclass
class TrialRecord:
    trial: int
    seed: int
    p: float
    verdict: str
    reveals: int
    guess_count: int
    p1_count: int
    p2_count: int
    window_max: int | None
    border_clearance: int | None
    elapsed: float

    def to_json(self, include_timings: bool = False) -> str:
        data = {
            "trial": self.trial,
            "seed": self.seed,
            "p": self.p,
            "verdict": self.verdict,
            "reveals": self.reveals,
            "guess_count": self.guess_count,
            "p1_count": self.p1_count,
            "p2_count": self.p2_count,
            "window_max": self.window_max,
            "border_clearance": self.border_clearance,
        }
        if include_timings:
            data["elapsed"] = self.elapsed
        return json.dumps(data, sort_keys=True)


@dataclass
class ProcessExperimentRecord:
    dims: tuple[int, int]
    tau: int | None
    window_max_pre_tau: int | None
    sampled_t: list[int] = field(default_factory=list)
    verdicts: list[str] = field(default_factory=list)
    occurrence_samples: list[int] = field(default_factory=list)
    persistence: bool | None = None
    first_destruction: int | None = None


def _pool_map(fn, args, threads: int):
    """Order-preserving map; identical output for any worker count."""
    if threads <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (threads * 8))))


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mines-phase-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def default_threads() -> int:
    env = os.environ.get("MINES_PHASE_THREADS")
    if env:
        return max(1, int(env))
    return 1


def _sweep_trial(args) -> TrialRecord:
    trial_index, master, dims_t, p, mode, window = args
    dims = GridDims(*dims_t)
    seed = derive_trial_seed(master, trial_index)
    started = time.perf_counter()
    board = sample_iid(dims, p, seed)
    rng = Stream(splitmix64(seed)) if mode == "guessing" else None
    outcome = play(board, rng=rng)
    cp = canonical_p1_p2()
    p1_count = len(occurrences(board, cp.p1))
    p2_count = len(occurrences(board, cp.p2))
    wmax = window_mine_max(board, window) if window <= min(dims.rows, dims.cols) else None
    return TrialRecord(
        trial=trial_index,
        seed=seed,
        p=p,
        verdict=outcome.verdict.value,
        reveals=outcome.reveals,
        guess_count=outcome.guess_count,
        p1_count=p1_count,
        p2_count=p2_count,
        window_max=wmax,
        border_clearance=border_clearance(board),
        elapsed=time.perf_counter() - started,
    )


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[TrialRecord]

    def rows(self) -> list[tuple]:
        """One (p, solve_rate, mean_p1, mean_p2, mean_window_max, ci) per p."""
        out = []
        per_p: dict[float, list[TrialRecord]] = {}
        for rec in self.records:
            per_p.setdefault(rec.p, []).append(rec)
        for p in self.config.p_values:
            recs = sorted(per_p[p], key=lambda r: r.trial)
            n = len(recs)
            solved = sum(1 for r in recs if r.verdict == Verdict.SOLVED.value)
            rate = solved / n
            mean_p1 = sum(r.p1_count for r in recs) / n
            mean_p2 = sum(r.p2_count for r in recs) / n
            wvals = [r.window_max for r in recs if r.window_max is not None]
            mean_w = sum(wvals) / len(wvals) if wvals else None
            ci = 1.96 * math.sqrt(rate * (1.0 - rate) / n)
            out.append((p, rate, mean_p1, mean_p2, mean_w, ci))
        return out

    def to_csv(self) -> str:
        lines = [SCHEMA_VERSION, SWEEP_HEADER]
        for row in self.rows():
            lines.append(",".join(_fmt(x) for x in row))
        return "\n".join(lines) + "\n"

    def to_json_lines(self, include_timings: bool = False) -> str:
        lines = [SCHEMA_VERSION]
        lines += [r.to_json(include_timings) for r in sorted(self.records, key=lambda r: (r.p, r.trial))]
        return "\n".join(lines) + "\n"


def run_sweep(cfg: SweepConfig, threads: int = 1, window: int = 100) -> SweepResult:
    """Play ``cfg.trials`` boards at each density; aggregate per density."""
    tasks = []
    index = 0
    for p in cfg.p_values:
        for _ in range(cfg.trials):
            tasks.append((index, cfg.seed, tuple(cfg.dims), p, cfg.solver_mode, window))
            index += 1
    records = _pool_map(_sweep_trial, tasks, threads)
    return SweepResult(config=cfg, records=records)


def _pattern_count_trial(args) -> tuple[int, ...]:
    trial_index, master, dims_t, p, pattern_texts = args
    dims = GridDims(*dims_t)
    seed = derive_trial_seed(master, trial_index)
    board = sample_iid(dims, p, seed)
    patterns = [Pattern.from_text(t) for t in pattern_texts]
    return tuple(len(occurrences(board, pat)) for pat in patterns)


@dataclass
class PatternStats:
    dims: tuple[int, int]
    p: float
    trials: int
    means: list[float]
    variances: list[float]
    dispersion: list[float]
    exact_expectation: list[float]
    stderr: list[float]
    correlation: float | None


def run_pattern_stats(
    dims: GridDims,
    p: float,
    patterns: list[Pattern],
    trials: int,
    seed: int,
    threads: int = 1,
) -> PatternStats:
    """Empirical occurrence counts of i.i.d. boards vs the exact expectation."""
    texts = [pat.to_text() for pat in patterns]
    tasks = [(i, seed, tuple(dims), p, texts) for i in range(trials)]
    counts = np.array(_pool_map(_pattern_count_trial, tasks, threads), dtype=float)
    means = counts.mean(axis=0)
    variances = counts.var(axis=0, ddof=1) if trials > 1 else np.zeros(len(patterns))
    dispersion = [v / m if m > 0 else float("nan") for m, v in zip(means, variances)]
    exact = [expected_occurrences(dims, p, pat) for pat in patterns]
    stderr = [math.sqrt(v / trials) if trials > 0 else float("nan") for v in variances]
    corr = None
    if len(patterns) == 2 and trials > 1:
        if variances[0] > 0 and variances[1] > 0:
            corr = float(np.corrcoef(counts[:, 0], counts[:, 1])[0, 1])
        else:
            corr = 0.0
    return PatternStats(
        dims=tuple(dims),
        p=p,
        trials=trials,
        means=list(means),
        variances=list(variances),
        dispersion=dispersion,
        exact_expectation=exact,
        stderr=stderr,
        correlation=corr,
    )


@dataclass
class CriticalityReport:
    dims: tuple[int, int]
    c: float
    p: float
    trials: int
    stats: PatternStats
    c6_reference: float
    finite_size_ratio: list[float]

    def summary(self) -> str:
        lines = [
            f"criticality: dims={self.dims[0]}x{self.dims[1]} c={self.c} p={self.p:.6g} trials={self.trials}",
            f"  asymptotic reference per pattern: c^6 = {self.c6_reference:.6g}",
        ]
        for name, mean, var, disp, exact, ratio in zip(
            ("P1", "P2"),
            self.stats.means,
            self.stats.variances,
            self.stats.dispersion,
            self.stats.exact_expectation,
            self.finite_size_ratio,
        ):
            lines.append(
                f"  {name}: empirical mean={mean:.6g} var={var:.6g} dispersion={disp:.6g} "
                f"exact expectation={exact:.6g} (exact/c^6 = {ratio:.3g}, finite-size gap)"
            )
        lines.append(f"  sample correlation(P1, P2) = {self.stats.correlation}")
        return "\n".join(lines)


def run_criticality(
    dims: GridDims, c: float, trials: int, seed: int, threads: int = 1
) -> CriticalityReport:
    """Occurrence statistics at density c * n^(-1/6) vs exact expectations.

    The empirical mean is compared against the exact finite-board
    expectation; the asymptotic per-pattern reference c^6 is reported
    alongside because at desk scale the two differ by orders of
    magnitude (the (1-p)^58 factor and the anchor count both bite).
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    cp = canonical_p1_p2()
    p = min(1.0, c * dims.n ** (-1.0 / 6.0))
    stats = run_pattern_stats(dims, p, [cp.p1, cp.p2], trials, seed, threads)
    c6 = c**6
    ratios = [e / c6 if c6 > 0 else float("nan") for e in stats.exact_expectation]
    return CriticalityReport(
        dims=tuple(dims),
        c=c,
        p=p,
        trials=trials,
        stats=stats,
        c6_reference=c6,
        finite_size_ratio=ratios,
    )


def _lemma4_trial(args) -> tuple[bool, int]:
    trial_index, master, k = args
    seed = derive_trial_seed(master, trial_index)
    stream = Stream(seed)
    cp = canonical_p1_p2()
    plane = np.zeros((LEMMA4_BOARD.rows, LEMMA4_BOARD.cols), dtype=bool)
    for anchor in LEMMA4_ANCHORS[:k]:
        pat = cp.p1 if stream.coin() else cp.p2
        ar, ac = anchor
        plane[ar : ar + 8, ac : ac + 8] = pat.plane()
    board = MineAssignment(LEMMA4_BOARD, plane)
    outcome = play(board, rng=stream)
    return outcome.verdict == Verdict.SOLVED, outcome.guess_count


@dataclass
class Lemma4Result:
    k: int
    trials: int
    successes: int
    rate: float
    ci: float
    mean_guesses: float


def run_lemma4(k: int, trials: int, seed: int, threads: int = 1) -> Lemma4Result:
    """Plant k independent coin-flip P1/P2 frames far apart; guess them out.

    Each frame is an isolated fifty-fifty, so the success rate is exactly
    2^-k by construction (k = 0 plays an empty board and always wins).
    """
    if k < 0 or k > len(LEMMA4_ANCHORS):
        raise ValueError(f"k must be in 0..{len(LEMMA4_ANCHORS)}")
    tasks = [(i, seed, k) for i in range(trials)]
    results = _pool_map(_lemma4_trial, tasks, threads)
    successes = sum(1 for ok, _ in results if ok)
    rate = successes / trials
    return Lemma4Result(
        k=k,
        trials=trials,
        successes=successes,
        rate=rate,
        ci=1.96 * math.sqrt(rate * (1.0 - rate) / trials),
        mean_guesses=sum(g for _, g in results) / trials,
    )


def _default_samples(limit: int) -> list[int]:
    """Powers of two up to limit."""
    out = []
    t = 1
    while t <= limit:
        out.append(t)
        t *= 2
    return out


def run_hitting_time(
    dims: GridDims,
    seed: int,
    max_steps: int | None = None,
    t_samples: list[int] | None = None,
    window: int | None = 100,
    replay_events: list[tuple[int, int, int]] | None = None,
) -> ProcessExperimentRecord:
    """Run (or replay) the mine process, playing the board at sampled times.

    Stops at the hitting time tau (first tracked-pattern occurrence) or
    at ``max_steps``. In replay mode the event log drives the additions
    and tau comes from the incremental detector, which planted schedules
    cross-check against their known completion step.
    """
    if window is not None and window > min(dims.rows, dims.cols):
        window = None
    state = ProcessState.start(dims, seed, window=window)
    budget = max_steps if max_steps is not None else dims.n // 2
    if replay_events is not None:
        budget = len(replay_events)
    samples = sorted(set(t_samples)) if t_samples is not None else _default_samples(budget)
    record = ProcessExperimentRecord(dims=tuple(dims), tau=None, window_max_pre_tau=None)

    window_max_before = 0
    step_iter = iter(replay_events) if replay_events is not None else None
    while state.t < budget and state.tau is None:
        window_max_before = state.window_max
        if step_iter is not None:
            _, r, c = next(step_iter)
            state.apply_event((r, c))
        else:
            state.step()
        if state.tau is None and state.t in samples:
            outcome = play(state.board.copy())
            record.sampled_t.append(state.t)
            record.verdicts.append(outcome.verdict.value)
    record.tau = state.tau
    record.window_max_pre_tau = window_max_before if state.window is not None else None
    return record


def run_monotonicity(
    dims: GridDims,
    seed: int,
    anchor: tuple[int, int] | None = None,
    end_t: int | None = None,
    n_samples: int = 12,
) -> ProcessExperimentRecord:
    """Continue the process past a planted occurrence, watching for its death.

    Starts from a board holding one planted occurrence (the time-tau
    board of the hitting-time story), adds mines to ``end_t`` (default
    n/2), samples the total occurrence count at geometrically spaced
    times, and reports whether an occurrence was present at every sample
    plus the exact step at which the count first dropped to zero.
    """
    cp = canonical_p1_p2()
    if anchor is None:
        anchor = ((dims.rows - 8) // 2, (dims.cols - 8) // 2)
    board = embed_pattern(cp.p1, dims, anchor)
    state = ProcessState.start(dims, seed, window=None, board=board)
    tau0 = state.t
    if end_t is None:
        end_t = dims.n // 2
    if end_t < tau0:
        raise ValueError("end_t precedes the planted board's mine count")

    span = end_t - tau0
    samples: list[int] = []
    if span > 0:
        ratio = span ** (1.0 / max(1, n_samples - 1))
        samples = sorted({tau0 + min(span, max(1, round(ratio**i))) for i in range(n_samples)})
    record = ProcessExperimentRecord(
        dims=tuple(dims), tau=tau0, window_max_pre_tau=None, persistence=True
    )
    while state.t < end_t:
        state.step()
        total = sum(state.occurrence_count.values())
        if total == 0 and record.first_destruction is None:
            record.first_destruction = state.t
        if state.t in samples:
            record.sampled_t.append(state.t)
            record.occurrence_samples.append(total)
            if total == 0:
                record.persistence = False
    return record

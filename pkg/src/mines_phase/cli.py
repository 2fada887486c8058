"""Command-line interface.

Subcommands: gen, solve, enum-ambiguous, scan, sweep, criticality,
process, lemma4, verify. Exit codes: 0 success, 1 verdict-level failure
(unsolved board, failed criterion), 2 usage errors (argparse default).
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    SweepConfig,
    atomic_write,
    default_threads,
    run_criticality,
    run_hitting_time,
    run_lemma4,
    run_monotonicity,
    run_sweep,
)
from .grid import GridDims, GridState, MineAssignment
from .patterns import Pattern, occurrences
from .randomgen import parse_event_log, sample_iid
from .solver import Verdict, play


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=7, help="master seed")
    parser.add_argument("--rows", type=int, default=64)
    parser.add_argument("--cols", type=int, default=64)
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes (default: MINES_PHASE_THREADS or 1)",
    )
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _emit(args, text: str) -> None:
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def _read_board(path: str) -> MineAssignment:
    source = sys.stdin.read() if path == "-" else open(path).read()
    return MineAssignment.from_text(source)


def cmd_gen(args) -> int:
    board = sample_iid(GridDims(args.rows, args.cols), args.p, args.seed)
    _emit(args, board.to_text())
    return 0


def cmd_solve(args) -> int:
    board = _read_board(args.board)
    from .randomgen import Stream, splitmix64

    rng = Stream(splitmix64(args.seed)) if args.guess else None
    outcome = play(board, rng=rng, keep_trace=args.trace, keep_state=args.show_state)
    lines = []
    if args.trace and outcome.trace:
        lines += outcome.trace
    else:
        lines.append(outcome.verdict.name)
    lines.append(
        f"reveals={outcome.reveals} islands={len(outcome.islands)} guesses={outcome.guess_count}"
    )
    if args.show_state and outcome.final_state is not None:
        lines.append(outcome.final_state.to_text().rstrip("\n"))
    _emit(args, "\n".join(lines) + "\n")
    return 0 if outcome.verdict == Verdict.SOLVED else 1


def cmd_enum_ambiguous(args) -> int:
    from .enumeration import enumerate_ambiguous

    def progress(k, total, survivors, ambiguous):
        if args.progress:
            print(
                f"size {k}: {total} clusters, {survivors} undecided by the fast filter, "
                f"{ambiguous} ambiguous",
                file=sys.stderr,
            )

    patterns = enumerate_ambiguous(args.max_mines, on_progress=progress)
    ordered = sorted(patterns, key=lambda p: (p.mine_count, tuple(p.dims), p.sorted_mines()))
    if args.out_dir:
        import os

        os.makedirs(args.out_dir, exist_ok=True)
        for i, p in enumerate(ordered):
            atomic_write(os.path.join(args.out_dir, f"ambiguous_{i:03d}.pattern"), p.to_text())
    print(f"count={len(ordered)} max_mines={args.max_mines}")
    return 0


def cmd_scan(args) -> int:
    board = _read_board(args.board)
    pattern = Pattern.from_text(open(args.pattern).read())
    anchors = occurrences(board, pattern)
    for r, c in anchors:
        print(f"{r} {c}")
    print(f"count={len(anchors)}")
    return 0


def cmd_sweep(args) -> int:
    p_values = tuple(float(x) for x in args.p_values.split(","))
    cfg = SweepConfig(
        dims=GridDims(args.rows, args.cols),
        p_values=p_values,
        trials=args.trials,
        seed=args.seed,
        solver_mode="guessing" if args.guess else "inference",
    )
    result = run_sweep(cfg, threads=_threads(args), window=args.window)
    if args.format == "json":
        _emit(args, result.to_json_lines(include_timings=args.timings))
    else:
        _emit(args, result.to_csv())
    return 0


def cmd_criticality(args) -> int:
    report = run_criticality(
        GridDims(args.rows, args.cols), args.c, args.trials, args.seed, threads=_threads(args)
    )
    if args.format == "json":
        payload = {
            "dims": report.dims,
            "c": report.c,
            "p": report.p,
            "trials": report.trials,
            "means": report.stats.means,
            "variances": report.stats.variances,
            "dispersion": report.stats.dispersion,
            "exact_expectation": report.stats.exact_expectation,
            "c6_reference": report.c6_reference,
            "finite_size_ratio": report.finite_size_ratio,
            "correlation": report.stats.correlation,
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    else:
        _emit(args, report.summary() + "\n")
    return 0


def cmd_process(args) -> int:
    dims = GridDims(args.rows, args.cols)
    if args.mode == "monotonicity":
        record = run_monotonicity(dims, args.seed, end_t=args.steps)
    else:
        replay = None
        if args.replay:
            replay = parse_event_log(open(args.replay).read())
        record = run_hitting_time(
            dims,
            args.seed,
            max_steps=args.steps,
            window=args.window,
            replay_events=replay,
        )
    payload = {
        "dims": record.dims,
        "tau": record.tau,
        "window_max_pre_tau": record.window_max_pre_tau,
        "sampled_t": record.sampled_t,
        "verdicts": record.verdicts,
        "occurrence_samples": record.occurrence_samples,
        "persistence": record.persistence,
        "first_destruction": record.first_destruction,
    }
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return 0


def cmd_lemma4(args) -> int:
    result = run_lemma4(args.k, args.trials, args.seed, threads=_threads(args))
    payload = {
        "k": result.k,
        "trials": result.trials,
        "successes": result.successes,
        "success_rate": result.rate,
        "ci": result.ci,
        "mean_guesses": result.mean_guesses,
    }
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(only=args.only, threads=_threads(args))
    failed = [r for r in results if not r.passed]
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mines-phase",
        description="Random Minesweeper solvability: boards, solver, patterns, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random board")
    _common(p)
    p.add_argument("--p", type=float, required=True, help="mine probability")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("solve", help="play a board with the inference solver")
    _common(p)
    p.add_argument("board", help="board file in grid text format, or - for stdin")
    p.add_argument("--guess", action="store_true", help="guess on stuck islands")
    p.add_argument("--trace", action="store_true", help="print one line per action")
    p.add_argument("--show-state", action="store_true", help="print the final state")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("enum-ambiguous", help="enumerate ambiguous patterns")
    _common(p)
    p.add_argument("--max-mines", type=int, required=True)
    p.add_argument("--out-dir", default=None, help="write pattern files here")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(fn=cmd_enum_ambiguous)

    p = sub.add_parser("scan", help="find pattern occurrences in a board")
    _common(p)
    p.add_argument("board")
    p.add_argument("pattern", help="pattern file with '; pattern' header")
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("sweep", help="solve-rate sweep over mine densities")
    _common(p)
    p.add_argument("--p-values", required=True, help="comma-separated densities")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--guess", action="store_true")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--timings", action="store_true", help="include per-trial timings in JSON")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("criticality", help="occurrence statistics at p = c n^(-1/6)")
    _common(p)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(fn=cmd_criticality)

    p = sub.add_parser("process", help="mine-addition process experiments")
    _common(p)
    p.add_argument("--mode", choices=("hitting", "monotonicity"), default="hitting")
    p.add_argument("--steps", type=int, default=None, help="step budget (default n/2)")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--replay", default=None, help="replay an event log file")
    p.set_defaults(fn=cmd_process)

    p = sub.add_parser("lemma4", help="planted fifty-fifty success rates")
    _common(p)
    p.add_argument("--k", type=int, required=True, help="number of planted frames (0..4)")
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(fn=cmd_lemma4)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _common(p)
    p.add_argument("--only", type=int, default=None, help="run a single criterion 1..10")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

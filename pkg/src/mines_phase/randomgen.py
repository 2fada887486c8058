"""Seeded random boards and the one-mine-at-a-time process.

Randomness is fully deterministic and cross-platform: every stream is a
SplitMix64 sequence (increment 0x9E3779B97F4A7C15, mixing constants
0xBF58476D1CE4E5B9 and 0x94D049BB133111EB), whose i-th output is a pure
function of seed and i, so whole boards vectorize in numpy. Per-trial
seeds derive as splitmix64(master XOR trial_index).

``ProcessState`` adds mines one uniformly chosen empty cell at a time
while maintaining, incrementally: exact occurrence counts of a set of
tracked patterns (a new mine can complete an occurrence or destroy one
by landing inside an existing match's empty frame), the maximum mine
count over all w x w windows, and the first time a tracked pattern
appears (the hitting time).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Cell, GridDims, MineAssignment
from .patterns import Pattern, canonical_p1_p2, occurrences

_MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma and mix."""
    x = (x + SPLITMIX_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_trial_seed(master: int, trial_index: int) -> int:
    """Per-trial seed: splitmix64(master XOR trial_index)."""
    return splitmix64((master ^ trial_index) & _MASK64)


def _splitmix_block(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs start..start+count-1 of the stream, vectorized as uint64."""
    with np.errstate(over="ignore"):
        x = np.uint64(seed) + np.uint64(SPLITMIX_GAMMA) * (
            np.arange(start + 1, start + count + 1, dtype=np.uint64)
        )
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))


class Stream:
    """A counter-based SplitMix64 stream: sequential or block access."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.index = 0

    def next_u64(self) -> int:
        value = splitmix64((self.seed + SPLITMIX_GAMMA * self.index) & _MASK64)
        self.index += 1
        return value

    def block(self, count: int) -> np.ndarray:
        out = _splitmix_block(self.seed, self.index, count)
        self.index += count
        return out

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def coin(self) -> bool:
        return bool(self.next_u64() & 1)


def _bernoulli_threshold(p: float) -> int:
    return min(int(p * 2.0**64), _MASK64)


def sample_iid(dims: GridDims, p: float, seed: int) -> MineAssignment:
    """Each cell mined independently with probability p; one stream draw per cell."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be a probability, got {p}")
    if p == 0.0:
        return MineAssignment.empty(dims)
    draws = _splitmix_block(seed, 0, dims.n).reshape(dims.rows, dims.cols)
    if p == 1.0:
        return MineAssignment(dims, np.ones((dims.rows, dims.cols), dtype=bool))
    plane = draws < np.uint64(_bernoulli_threshold(p))
    return MineAssignment(dims, plane)


def sample_augmented(base: MineAssignment, p: float, seed: int) -> MineAssignment:
    """Keep all base mines; mine each empty cell independently with probability p."""
    extra = sample_iid(base.dims, p, seed)
    return MineAssignment(base.dims, base.plane | extra.plane)


def window_mine_max(m: MineAssignment, w: int = 100) -> int:
    """Maximum mine count over all w x w windows, via 2-d prefix sums."""
    rows, cols = m.dims
    if w < 1 or w > min(rows, cols):
        raise ValueError(f"window size {w} does not fit a {rows}x{cols} board")
    prefix = np.zeros((rows + 1, cols + 1), dtype=np.int32)
    np.cumsum(m.plane, axis=0, out=prefix[1:, 1:])
    np.cumsum(prefix[1:, 1:], axis=1, out=prefix[1:, 1:])
    sums = (
        prefix[w:, w:] - prefix[:-w, w:] - prefix[w:, :-w] + prefix[:-w, :-w]
    )
    return int(sums.max())


def border_clearance(m: MineAssignment) -> int | None:
    """Minimum Chebyshev distance from a mine to the board border; None if no mines."""
    mines = np.argwhere(m.plane)
    if len(mines) == 0:
        return None
    rows, cols = m.dims
    r = mines[:, 0]
    c = mines[:, 1]
    return int(np.minimum.reduce([r, rows - 1 - r, c, cols - 1 - c]).min())


def kappa(n: int) -> int:
    """The n^(71/84) schedule point, rounded to the nearest integer."""
    return round(n ** (71.0 / 84.0))


@dataclass
class ProcessState:
    """The mine-addition process with incremental occurrence/window stats.

    Single-owner mutable: step() adds one mine uniformly over empty
    cells. ``tau`` is the first step count at which some tracked pattern
    occurs (never reset, even if the occurrence is later destroyed).
    """

    board: MineAssignment
    t: int
    tau: int | None
    window: int | None
    window_max: int
    occurrence_count: dict[Pattern, int]
    stream: Stream
    events: list[tuple[int, int, int]] = field(default_factory=list)
    _window_counts: np.ndarray | None = None

    @classmethod
    def start(
        cls,
        dims: GridDims,
        seed: int,
        tracked: tuple[Pattern, ...] | None = None,
        window: int | None = 100,
        board: MineAssignment | None = None,
    ) -> "ProcessState":
        """Fresh process; ``board`` may carry pre-placed mines (t starts there)."""
        if tracked is None:
            cp = canonical_p1_p2()
            tracked = (cp.p1, cp.p2)
        if board is None:
            board = MineAssignment.empty(dims)
        else:
            board = board.copy()
            if board.dims != dims:
                raise ValueError("board dims mismatch")
        counts = {p: len(occurrences(board, p)) for p in tracked}
        window_counts = None
        window_max = 0
        if window is not None:
            if window > min(dims.rows, dims.cols):
                raise ValueError(f"window {window} does not fit {tuple(dims)}")
            window_counts = _window_count_plane(board, window)
            window_max = int(window_counts.max())
        t = board.mine_count
        state = cls(
            board=board,
            t=t,
            tau=t if any(counts.values()) else None,
            window=window,
            window_max=window_max,
            occurrence_count=counts,
            stream=Stream(seed),
            _window_counts=window_counts,
        )
        return state

    @property
    def dims(self) -> GridDims:
        return self.board.dims

    def step(self) -> Cell:
        """Add one mine at a uniformly random empty cell; returns the cell."""
        n = self.dims.n
        if self.t >= n:
            raise ValueError("board is full")
        while True:
            idx = self.stream.below(n)
            r, c = divmod(idx, self.dims.cols)
            if not self.board.plane[r, c]:
                break
        self._apply(r, c)
        return (r, c)

    def apply_event(self, cell: Cell) -> None:
        """Replay one recorded addition (no randomness consumed)."""
        r, c = cell
        if self.board.plane[r, c]:
            raise ValueError(f"cell {cell} already mined")
        self._apply(r, c)

    def _apply(self, r: int, c: int) -> None:
        for p, before in self._affected_matches(r, c):
            self.occurrence_count[p] -= before
        self.board.plane[r, c] = True
        self.t += 1
        for p, after in self._affected_matches(r, c):
            self.occurrence_count[p] += after
        if self.tau is None and any(self.occurrence_count.values()):
            self.tau = self.t
        if self._window_counts is not None:
            w = self.window
            rows, cols = self.dims
            r0 = max(0, r - w + 1)
            c0 = max(0, c - w + 1)
            r1 = min(r, rows - w)
            c1 = min(c, cols - w)
            if r1 >= r0 and c1 >= c0:
                sl = self._window_counts[r0 : r1 + 1, c0 : c1 + 1]
                sl += 1
                self.window_max = max(self.window_max, int(sl.max()))
        self.events.append((self.t, r, c))

    def _affected_matches(self, r: int, c: int):
        """Exact-match count, per pattern, over the anchors whose frame covers (r, c)."""
        rows, cols = self.dims
        plane = self.board.plane
        for p in self.occurrence_count:
            fr, fc = p.dims
            pplane = p.plane()
            count = 0
            for ar in range(max(0, r - fr + 1), min(r, rows - fr) + 1):
                for ac in range(max(0, c - fc + 1), min(c, cols - fc) + 1):
                    if np.array_equal(plane[ar : ar + fr, ac : ac + fc], pplane):
                        count += 1
            yield p, count

    def event_log(self) -> str:
        """Replayable log, one 't row col' line per addition."""
        return "".join(f"{t} {r} {c}\n" for t, r, c in self.events)


def parse_event_log(text: str) -> list[tuple[int, int, int]]:
    events = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        t, r, c = line.split()
        events.append((int(t), int(r), int(c)))
    return events


def _window_count_plane(m: MineAssignment, w: int) -> np.ndarray:
    """Mine count of every w x w window as an (rows-w+1, cols-w+1) array."""
    rows, cols = m.dims
    prefix = np.zeros((rows + 1, cols + 1), dtype=np.int32)
    np.cumsum(m.plane, axis=0, out=prefix[1:, 1:])
    np.cumsum(prefix[1:, 1:], axis=1, out=prefix[1:, 1:])
    return prefix[w:, w:] - prefix[:-w, w:] - prefix[w:, :-w] + prefix[:-w, :-w]


def process_step(state: ProcessState) -> ProcessState:
    """Advance the process by one mine; mutates and returns the state."""
    state.step()
    return state

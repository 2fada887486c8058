"""Exhaustive enumeration of ambiguous patterns with few mines.

Search space: connected mine clusters under the distance-3 adjacency
relation (two mines interact only when their clue regions overlap, which
requires Chebyshev distance at most 3), grown one mine at a time with
canonical-form deduplication. Disconnected layouts decompose: a layout
is ambiguous iff one of its clusters is, so connected clusters cover the
search. Levels are deduplicated under translation *and* the dihedral
group - ambiguity is invariant under the 8 plane symmetries - and every
accepted cluster is expanded back to its distinct translation-normalized
patterns on output.

Each candidate is first run through a cheap single-clue/pair-subset
solver (numba kernel). Clusters it fully solves cannot be ambiguous;
survivors are decided exactly by ``is_ambiguous_pattern``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .ambiguity import is_ambiguous_pattern
from .patterns import Pattern

MAX_ENUM_MINES = 7

# Offsets at Chebyshev distance 1..3; the interaction radius of two mines.
_OFFSETS = np.array(
    [(dr, dc) for dr in range(-3, 4) for dc in range(-3, 4) if (dr, dc) != (0, 0)],
    dtype=np.int16,
)
_SPAN = 19  # normalized coordinates stay below 3*(7-1)+1
_TRANSFORMS = (
    (1, 1, False),
    (1, -1, False),
    (-1, 1, False),
    (-1, -1, False),
    (1, 1, True),
    (1, -1, True),
    (-1, 1, True),
    (-1, -1, True),
)


def _normalize(clusters: np.ndarray) -> np.ndarray:
    return clusters - clusters.min(axis=1, keepdims=True)


def _keys_of(clusters: np.ndarray) -> np.ndarray:
    """Pack each normalized cluster into one uint64 (9 bits per cell code)."""
    codes = clusters[:, :, 0].astype(np.uint64) * _SPAN + clusters[:, :, 1].astype(np.uint64)
    codes = np.sort(codes, axis=1)
    key = np.zeros(len(clusters), dtype=np.uint64)
    for i in range(clusters.shape[1]):
        key |= codes[:, i] << np.uint64(9 * i)
    return key


def _d4_canonical_keys(clusters: np.ndarray) -> np.ndarray:
    """Minimum packed key over the 8 dihedral images of each cluster."""
    best = None
    for sr, sc, swap in _TRANSFORMS:
        t = clusters.copy()
        t[:, :, 0] *= sr
        t[:, :, 1] *= sc
        if swap:
            t = t[:, :, ::-1]
        key = _keys_of(_normalize(t))
        best = key if best is None else np.minimum(best, key)
    return best


def _decode(keys: np.ndarray, k: int) -> np.ndarray:
    clusters = np.empty((len(keys), k, 2), dtype=np.int16)
    for i in range(k):
        code = (keys >> np.uint64(9 * i)) & np.uint64(511)
        clusters[:, i, 0] = (code // _SPAN).astype(np.int16)
        clusters[:, i, 1] = (code % _SPAN).astype(np.int16)
    return clusters


def _expand_level(clusters: np.ndarray, offsets: np.ndarray, chunk: int = 20000) -> np.ndarray:
    """Grow every k-cluster by one adjacent cell; dedupe to canonical forms."""
    n, k, _ = clusters.shape
    uniques = []
    for lo in range(0, n, chunk):
        part = clusters[lo : lo + chunk]
        b = len(part)
        cand = (part[:, :, None, :] + offsets[None, None, :, :]).reshape(b, k * len(offsets), 2)
        base = np.broadcast_to(part[:, None, :, :], (b, cand.shape[1], k, 2))
        grown = np.concatenate([base, cand[:, :, None, :]], axis=2).reshape(-1, k + 1, 2)
        grown = _normalize(grown.astype(np.int16))
        codes = grown[:, :, 0].astype(np.int32) * _SPAN + grown[:, :, 1]
        codes.sort(axis=1)
        fresh = ~(codes[:, 1:] == codes[:, :-1]).any(axis=1)  # drop new-cell collisions
        uniques.append(np.unique(_d4_canonical_keys(grown[fresh])))
    merged = np.unique(np.concatenate(uniques))
    return _decode(merged, k + 1)


@njit(cache=True)
def _cheap_unsolved_one(cells, h, w):  # pragma: no cover - exercised via wrapper
    """1 when the cheap solver cannot finish this cluster, else 0.

    Local board = mine bounding box plus a 3-cell margin: hidden cells
    stay within distance 1 of a mine, so every clue that ever matters
    lies within distance 2 and the margin keeps the rule loops off the
    local border. Rules: a satisfied clue clears its hidden neighbors; a
    clue whose remaining count equals its hidden-neighbor count marks
    them as mines; and for clue pairs whose hidden sets nest, the set
    difference is forced when the count difference is 0 or its size. All
    three only derive facts that hold in every completion, so a fully
    solved board is never ambiguous.
    """
    k = cells.shape[0]
    mine = np.zeros((h, w), dtype=np.uint8)
    for i in range(k):
        mine[cells[i, 0] + 3, cells[i, 1] + 3] = 1

    clue = np.zeros((h, w), dtype=np.int8)
    near = np.zeros((h, w), dtype=np.uint8)
    for i in range(k):
        r0 = cells[i, 0] + 3
        c0 = cells[i, 1] + 3
        for rr in range(r0 - 1, r0 + 2):
            for cc in range(c0 - 1, c0 + 2):
                clue[rr, cc] += 1
                near[rr, cc] = 1

    # 0 hidden, 1 revealed, 2 known mine
    st = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            if near[r, c] == 0:
                st[r, c] = 1

    hid_r = np.empty(9, dtype=np.int8)
    hid_c = np.empty(9, dtype=np.int8)
    hid2_r = np.empty(9, dtype=np.int8)
    hid2_c = np.empty(9, dtype=np.int8)

    changed = True
    while changed:
        changed = False
        for r in range(1, h - 1):
            for c in range(1, w - 1):
                if st[r, c] != 1:
                    continue
                nhid = 0
                nmine = 0
                for rr in range(r - 1, r + 2):
                    for cc in range(c - 1, c + 2):
                        if st[rr, cc] == 0:
                            hid_r[nhid] = rr
                            hid_c[nhid] = cc
                            nhid += 1
                        elif st[rr, cc] == 2:
                            nmine += 1
                if nhid == 0:
                    continue
                s = clue[r, c] - nmine
                if s == 0:
                    for i in range(nhid):
                        st[hid_r[i], hid_c[i]] = 1
                    changed = True
                elif s == nhid:
                    for i in range(nhid):
                        st[hid_r[i], hid_c[i]] = 2
                    changed = True
                else:
                    # Pair rule: a nearby clue whose hidden set nests in ours.
                    for r1 in range(max(1, r - 2), min(h - 1, r + 3)):
                        for c1 in range(max(1, c - 2), min(w - 1, c + 3)):
                            if st[r1, c1] != 1 or (r1 == r and c1 == c):
                                continue
                            nhid1 = 0
                            nmine1 = 0
                            for rr in range(r1 - 1, r1 + 2):
                                for cc in range(c1 - 1, c1 + 2):
                                    if st[rr, cc] == 0:
                                        hid2_r[nhid1] = rr
                                        hid2_c[nhid1] = cc
                                        nhid1 += 1
                                    elif st[rr, cc] == 2:
                                        nmine1 += 1
                            if nhid1 == 0 or nhid1 >= nhid:
                                continue
                            subset = True
                            for i in range(nhid1):
                                found = False
                                for j in range(nhid):
                                    if hid_r[j] == hid2_r[i] and hid_c[j] == hid2_c[i]:
                                        found = True
                                        break
                                if not found:
                                    subset = False
                                    break
                            if not subset:
                                continue
                            s1 = clue[r1, c1] - nmine1
                            diff = nhid - nhid1
                            need = s - s1
                            if need == 0 or need == diff:
                                val = np.uint8(1) if need == 0 else np.uint8(2)
                                for j in range(nhid):
                                    inner = False
                                    for i in range(nhid1):
                                        if hid_r[j] == hid2_r[i] and hid_c[j] == hid2_c[i]:
                                            inner = True
                                            break
                                    if not inner:
                                        st[hid_r[j], hid_c[j]] = val
                                changed = True
                            if changed:
                                break
                        if changed:
                            break

    for r in range(h):
        for c in range(w):
            if st[r, c] == 0 and mine[r, c] == 0:
                return 1
    return 0


@njit(cache=True)
def _cheap_unsolved_batch(clusters):  # pragma: no cover - exercised via wrapper
    n = clusters.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        cells = clusters[i]
        h = int(cells[:, 0].max()) + 7
        w = int(cells[:, 1].max()) + 7
        out[i] = _cheap_unsolved_one(cells, h, w)
    return out


def cheap_filter_survivors(clusters: np.ndarray) -> np.ndarray:
    """Boolean mask of clusters the cheap solver could not finish."""
    if len(clusters) == 0:
        return np.zeros(0, dtype=bool)
    return _cheap_unsolved_batch(np.ascontiguousarray(clusters)).astype(bool)


def _cluster_patterns(cells: np.ndarray) -> set[Pattern]:
    """Distinct translation-normalized patterns among a cluster's 8 images."""
    base = Pattern.from_mine_cells((int(r), int(c)) for r, c in cells)
    return set(base.dihedral_images())


def enumerate_ambiguous(max_mines: int, on_progress=None) -> set[Pattern]:
    """All ambiguous connected patterns with at most ``max_mines`` mines.

    Layouts whose mine set splits into several distance-3 clusters are
    not enumerated: such a layout is ambiguous iff one cluster is, and
    each cluster appears here on its own. Refuses ``max_mines`` above 7
    (the search grows by a factor of roughly 36 per extra mine).
    """
    if max_mines < 1:
        raise ValueError("max_mines must be at least 1")
    if max_mines > MAX_ENUM_MINES:
        raise ValueError(
            f"max_mines above {MAX_ENUM_MINES} is outside the search budget; "
            "use a precomputed pattern atlas instead"
        )
    accepted: set[Pattern] = set()
    level = np.zeros((1, 1, 2), dtype=np.int16)
    for k in range(1, max_mines + 1):
        survivors = cheap_filter_survivors(level)
        n_ambiguous = 0
        for cells in level[survivors]:
            pattern = Pattern.from_mine_cells((int(r), int(c)) for r, c in cells)
            if is_ambiguous_pattern(pattern):
                accepted |= _cluster_patterns(cells)
                n_ambiguous += 1
        if on_progress is not None:
            on_progress(k, len(level), int(survivors.sum()), n_ambiguous)
        if k < max_mines:
            level = _expand_level(level, _OFFSETS)
    return accepted

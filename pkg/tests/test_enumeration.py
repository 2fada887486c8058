from itertools import combinations

import numpy as np
import pytest

from mines_phase.enumeration import (
    MAX_ENUM_MINES,
    _OFFSETS,
    _d4_canonical_keys,
    _expand_level,
    cheap_filter_survivors,
    enumerate_ambiguous,
)
from mines_phase.grid import grid_distance
from mines_phase.patterns import canonical_p1_p2


def brute_force_free_classes(k, box=7):
    """All size-k distance-3-connected clusters in a box, up to symmetry."""
    cells = [(r, c) for r in range(box) for c in range(box)]
    seen = set()
    for combo in combinations(cells, k):
        # connectivity under d<=3
        todo = [combo[0]]
        reach = {combo[0]}
        while todo:
            cur = todo.pop()
            for other in combo:
                if other not in reach and grid_distance(cur, other) <= 3:
                    reach.add(other)
                    todo.append(other)
        if len(reach) != k:
            continue
        arr = np.array(combo, dtype=np.int16).reshape(1, k, 2)
        seen.add(int(_d4_canonical_keys(arr)[0]))
    return seen


class TestLevelGrowth:
    def test_small_levels_match_brute_force(self):
        level = np.zeros((1, 1, 2), dtype=np.int16)
        expected = {1: 1, 2: 9, 3: 108}
        for k in (1, 2, 3):
            got = {int(x) for x in _d4_canonical_keys(level)}
            assert got == brute_force_free_classes(k)
            assert len(level) == expected[k]
            level = _expand_level(level, _OFFSETS)

    def test_expansion_order_invariant(self):
        level = np.zeros((1, 1, 2), dtype=np.int16)
        for _ in range(3):
            level = _expand_level(level, _OFFSETS)
        shuffled = _OFFSETS[np.random.default_rng(3).permutation(len(_OFFSETS))]
        other = np.zeros((1, 1, 2), dtype=np.int16)
        for _ in range(3):
            other = _expand_level(other, shuffled)
        assert np.array_equal(level, other)


class TestCheapFilter:
    def test_single_mine_solved(self):
        clusters = np.zeros((1, 1, 2), dtype=np.int16)
        assert not cheap_filter_survivors(clusters).any()

    def test_p1_cluster_survives(self):
        cp = canonical_p1_p2()
        cells = np.array(sorted(cp.p1.mines), dtype=np.int16) - 2
        assert cheap_filter_survivors(cells.reshape(1, 6, 2)).all()

    def test_agreement_with_exact_decision_on_survivor_free_level(self):
        # Every 2-mine cluster is cheap-solved; the exact decision agrees.
        from mines_phase.ambiguity import is_ambiguous_pattern
        from mines_phase.patterns import Pattern

        level = _expand_level(np.zeros((1, 1, 2), dtype=np.int16), _OFFSETS)
        assert not cheap_filter_survivors(level).any()
        for cells in level:
            p = Pattern.from_mine_cells((int(r), int(c)) for r, c in cells)
            assert not is_ambiguous_pattern(p)


class TestEnumerate:
    def test_max_mines_one_empty(self):
        assert enumerate_ambiguous(1) == set()

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            enumerate_ambiguous(0)
        with pytest.raises(ValueError):
            enumerate_ambiguous(MAX_ENUM_MINES + 1)

    @pytest.mark.slow
    def test_up_to_four_empty(self):
        assert enumerate_ambiguous(4) == set()

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mines_phase.grid import (
    FLAG,
    HIDDEN,
    SHOWN_MINE,
    GridDims,
    GridState,
    MineAssignment,
    clue_plane,
    clue_value,
    flood_reveal,
    flood_reveal_traced,
    grid_distance,
    is_consistent,
    is_solved,
    neighbors,
    reveal,
)
from oracles import naive_clue, naive_neighbors

dims_st = st.builds(GridDims, st.integers(1, 8), st.integers(1, 8))


def random_board(draw, max_side=8, p=0.3):
    dims = draw(dims_st)
    plane = np.array(
        [[draw(st.booleans()) if draw(st.floats(0, 1)) < p else False for _ in range(dims.cols)] for _ in range(dims.rows)]
    )
    return MineAssignment(dims, plane)


boards_st = st.builds(
    lambda dims, bits: MineAssignment(
        dims, np.array(bits[: dims.n], dtype=bool).reshape(dims.rows, dims.cols)
    ),
    dims_st,
    st.lists(st.booleans(), min_size=64, max_size=64),
)


def cells_of(dims):
    return st.tuples(st.integers(0, dims.rows - 1), st.integers(0, dims.cols - 1))


class TestNeighbors:
    def test_interior_has_nine(self):
        assert len(neighbors((2, 2), GridDims(5, 5))) == 9

    def test_corner_has_four(self):
        assert set(neighbors((0, 0), GridDims(2, 2))) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_edge_cell_3x3(self):
        assert len(neighbors((0, 1), GridDims(3, 3))) == 6

    def test_includes_self(self):
        assert (1, 1) in neighbors((1, 1), GridDims(3, 3))

    def test_out_of_bounds_rejected(self):
        with pytest.raises(ValueError):
            neighbors((3, 0), GridDims(3, 3))

    @given(dims_st, st.data())
    def test_matches_oracle(self, dims, data):
        c = data.draw(cells_of(dims))
        assert set(neighbors(c, dims)) == naive_neighbors(c, dims)


class TestDistance:
    def test_zero(self):
        assert grid_distance((0, 0), (0, 0)) == 0

    def test_diagonal_is_one(self):
        assert grid_distance((0, 0), (1, 1)) == 1

    def test_hand_value(self):
        assert grid_distance((2, 3), (5, 1)) == 3


class TestClueValue:
    def test_empty_board(self):
        m = MineAssignment.empty(GridDims(4, 4))
        assert clue_value(m, (2, 2)) == 0

    def test_adjacent_mine(self):
        m = MineAssignment.from_cells(GridDims(5, 5), [(2, 2)])
        assert clue_value(m, (1, 1)) == 1

    def test_mine_counts_itself(self):
        m = MineAssignment.from_cells(GridDims(5, 5), [(2, 2)])
        assert clue_value(m, (2, 2)) == 1

    @given(boards_st, st.data())
    def test_matches_oracle(self, m, data):
        c = data.draw(cells_of(m.dims))
        assert clue_value(m, c) == naive_clue(m, c)

    @given(boards_st)
    def test_plane_matches_pointwise(self, m):
        plane = clue_plane(m)
        for r in range(m.dims.rows):
            for c in range(m.dims.cols):
                assert plane[r, c] == clue_value(m, (r, c))


class TestConsistency:
    def test_all_hidden_always_consistent(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(1, 1)])
        assert is_consistent(m, GridState.all_hidden(m.dims))

    def test_wrong_clue_inconsistent(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = GridState.all_hidden(m.dims)
        s.values[0, 0] = 1
        assert not is_consistent(m, s)

    def test_flag_must_sit_on_mine(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = GridState.all_hidden(m.dims)
        s.values[0, 0] = FLAG
        assert not is_consistent(m, s)

    def test_dimension_mismatch_rejected(self):
        m = MineAssignment.empty(GridDims(3, 3))
        with pytest.raises(ValueError):
            is_consistent(m, GridState.all_hidden(GridDims(3, 4)))


class TestReveal:
    def test_empty_board_reveal(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = reveal(m, GridState.all_hidden(m.dims), (0, 0))
        assert s.values[0, 0] == 0

    def test_mine_reveals_shown_mine(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(1, 1)])
        s = reveal(m, GridState.all_hidden(m.dims), (1, 1))
        assert s.values[1, 1] == SHOWN_MINE

    def test_re_reveal_rejected(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = reveal(m, GridState.all_hidden(m.dims), (0, 0))
        with pytest.raises(ValueError):
            reveal(m, s, (0, 0))

    def test_inconsistent_input_rejected(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = GridState.all_hidden(m.dims)
        s.values[2, 2] = 5
        with pytest.raises(ValueError):
            reveal(m, s, (0, 0))

    @given(boards_st, st.data())
    def test_changes_only_target(self, m, data):
        c = data.draw(cells_of(m.dims))
        s = GridState.all_hidden(m.dims)
        out = reveal(m, s, c)
        diff = np.argwhere(out.values != s.values)
        assert [tuple(x) for x in diff] == [c]

    @given(boards_st, st.data())
    def test_preserves_consistency(self, m, data):
        c = data.draw(cells_of(m.dims))
        out = reveal(m, GridState.all_hidden(m.dims), c)
        assert is_consistent(m, out)


class TestFlood:
    def test_empty_board_fully_revealed(self):
        m = MineAssignment.empty(GridDims(6, 7))
        s = flood_reveal(m, GridState.all_hidden(m.dims), (3, 3))
        assert (s.values == 0).all()

    def test_single_mine_center(self):
        m = MineAssignment.from_cells(GridDims(9, 9), [(4, 4)])
        s = flood_reveal(m, GridState.all_hidden(m.dims), (0, 0))
        assert s.hidden_cells() == [(4, 4)]
        ring = [s.values[r, c] for r in (3, 4, 5) for c in (3, 4, 5) if (r, c) != (4, 4)]
        assert all(v == 1 for v in ring)

    def test_start_on_mine(self):
        m = MineAssignment.from_cells(GridDims(5, 5), [(2, 2)])
        s = flood_reveal(m, GridState.all_hidden(m.dims), (2, 2))
        assert s.values[2, 2] == SHOWN_MINE
        assert len(s.hidden_cells()) == 24

    @given(boards_st, st.data())
    def test_confluent_across_disciplines(self, m, data):
        start = data.draw(cells_of(m.dims))
        s = GridState.all_hidden(m.dims)
        fifo, _ = flood_reveal_traced(m, s, start, order="fifo")
        lifo, _ = flood_reveal_traced(m, s, start, order="lifo")
        assert fifo == lifo

    @given(boards_st, st.data())
    def test_pop_count_bounded(self, m, data):
        start = data.draw(cells_of(m.dims))
        _, stats = flood_reveal_traced(m, GridState.all_hidden(m.dims), start)
        assert stats.pops <= 9 * m.dims.n

    @given(boards_st, st.data())
    def test_preserves_consistency(self, m, data):
        start = data.draw(cells_of(m.dims))
        out = flood_reveal(m, GridState.all_hidden(m.dims), start)
        assert is_consistent(m, out)


class TestSolved:
    def test_fully_revealed_empty(self):
        m = MineAssignment.empty(GridDims(3, 3))
        s = GridState(m.dims, np.zeros((3, 3), dtype=np.int8))
        assert is_solved(m, s)

    def test_all_hidden_not_solved(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(0, 0)])
        assert not is_solved(m, GridState.all_hidden(m.dims))

    def test_hidden_mines_allowed(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(1, 1)])
        s = GridState(m.dims, clue_plane(m).astype(np.int8))
        s.values[1, 1] = HIDDEN
        assert is_solved(m, s)

    def test_shown_mine_never_solved(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(1, 1)])
        s = GridState(m.dims, clue_plane(m).astype(np.int8))
        s.values[1, 1] = SHOWN_MINE
        assert not is_solved(m, s)


class TestTextFormat:
    def test_assignment_roundtrip(self):
        m = MineAssignment.from_cells(GridDims(3, 4), [(0, 0), (2, 3)])
        text = m.to_text()
        assert text == "3 4\n*...\n....\n...*\n"
        assert MineAssignment.from_text(text) == m

    def test_state_roundtrip(self):
        m = MineAssignment.from_cells(GridDims(3, 3), [(1, 1)])
        s = GridState.all_hidden(m.dims)
        s.values[0, 0] = 1
        s.values[1, 1] = FLAG
        s.values[2, 2] = SHOWN_MINE
        text = s.to_text()
        assert text == "3 3\n1##\n#F#\n##!\n"
        assert GridState.from_text(text) == s

    def test_missing_trailing_newline_rejected(self):
        with pytest.raises(ValueError):
            MineAssignment.from_text("1 1\n.")

    def test_bad_char_rejected(self):
        with pytest.raises(ValueError):
            MineAssignment.from_text("1 2\n.x\n")

    def test_bad_line_length_rejected(self):
        with pytest.raises(ValueError):
            GridState.from_text("2 2\n##\n###\n")

    def test_one_by_one_grid_legal(self):
        m = MineAssignment.from_text("1 1\n*\n")
        assert m.mine_count == 1

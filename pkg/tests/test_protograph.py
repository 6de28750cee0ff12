"""Base matrices, edge spreading, and coupled constructions."""

import numpy as np
import pytest
from fractions import Fraction

from scpbicm.errors import InvalidLength, ShapeMismatch, SpreadingMismatch
from scpbicm.protograph import (
    BaseMatrix,
    build_tailbiting,
    build_terminated,
    code_rate,
    decompose_edge_spreading,
    dumps_base_matrix,
    dumps_coupling_spec,
    loads_base_matrix,
    loads_coupling_spec,
    regular_36,
    regular_36_coupling,
    te_rate,
)


def random_spec(rng, mp=2, np_=3, w=2):
    """Random valid edge spreading whose submatrices all keep nonzero rows."""
    base = rng.integers(2, 4, size=(mp, np_))  # row sums exceed any tested w+1
    while True:
        subs = np.zeros((w + 1, mp, np_), dtype=np.int64)
        for i in range(mp):
            for j in range(np_):
                for _ in range(base[i, j]):
                    subs[rng.integers(0, w + 1), i, j] += 1
        if all(sub.sum(axis=1).min() > 0 for sub in subs):
            return decompose_edge_spreading(BaseMatrix(base), w, list(subs))


class TestDecompose:
    def test_default_36_spreading_valid(self):
        spec = regular_36_coupling()
        assert spec.coupling_width == 2
        total = np.sum(spec.submatrices, axis=0)
        np.testing.assert_array_equal(total, [[3, 3]])

    def test_uneven_spreading_valid(self):
        spec = decompose_edge_spreading(regular_36(), 1, [[[2, 2]], [[1, 1]]])
        assert spec.coupling_width == 1

    def test_sum_mismatch_rejected(self):
        with pytest.raises(SpreadingMismatch):
            decompose_edge_spreading(regular_36(), 2, [[[1, 1]], [[1, 1]], [[2, 2]]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            decompose_edge_spreading(regular_36(), 1, [[[1, 1, 1]], [[2, 2, 2]]])

    def test_wrong_count_rejected(self):
        with pytest.raises(SpreadingMismatch):
            decompose_edge_spreading(regular_36(), 2, [[[2, 2]], [[1, 1]]])


class TestTerminated:
    def test_36_l12_shape(self):
        te = build_terminated(regular_36_coupling(), 12)
        assert (te.rows, te.cols) == (14, 24)

    def test_explicit_small_band(self):
        te = build_terminated(regular_36_coupling(), 3)
        expected = np.array(
            [
                [1, 1, 0, 0, 0, 0],
                [1, 1, 1, 1, 0, 0],
                [1, 1, 1, 1, 1, 1],
                [0, 0, 1, 1, 1, 1],
                [0, 0, 0, 0, 1, 1],
            ]
        )
        np.testing.assert_array_equal(te.entries, expected)

    def test_column_sums_preserved(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            spec = random_spec(rng)
            te = build_terminated(spec, 6)
            base_cols = spec.base.column_degrees()
            np.testing.assert_array_equal(
                te.column_degrees(), np.tile(base_cols, 6))

    def test_length_validation(self):
        with pytest.raises(InvalidLength):
            build_terminated(regular_36_coupling(), 2)


class TestTailbiting:
    def test_36_l12_shape(self):
        tb = build_tailbiting(regular_36_coupling(), 12)
        assert (tb.rows, tb.cols) == (12, 24)

    def test_fold_property(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            spec = random_spec(rng, mp=rng.integers(1, 3), w=rng.integers(1, 4))
            length = spec.coupling_width + rng.integers(1, 5)
            te = build_terminated(spec, length)
            tb = build_tailbiting(spec, length)
            mp = spec.submatrices[0].shape[0]
            folded = te.entries[: mp * length].copy()
            folded[: mp * spec.coupling_width] += te.entries[mp * length:]
            np.testing.assert_array_equal(tb.entries, folded)

    def test_wraparound_blocks(self):
        spec = regular_36_coupling()
        length, mp, np_ = 12, 1, 2
        tb = build_tailbiting(spec, length)
        w = spec.coupling_width
        for k in range(1, w + 1):
            blk = tb.entries[0:mp, (length - k) * np_:(length - k + 1) * np_]
            np.testing.assert_array_equal(blk, spec.submatrices[k])
        np.testing.assert_array_equal(tb.entries[0:mp, 0:np_], spec.submatrices[0])

    def test_degree_distribution_matches_base(self):
        tb = build_tailbiting(regular_36_coupling(), 12)
        np.testing.assert_array_equal(tb.column_degrees(), np.full(24, 3))
        np.testing.assert_array_equal(tb.row_degrees(), np.full(12, 6))


class TestRates:
    def test_te_rate_36_l12(self):
        assert te_rate(regular_36_coupling(), 12) == Fraction(5, 12)

    def test_tb_rate_36(self):
        tb = build_tailbiting(regular_36_coupling(), 12)
        assert code_rate(tb) == Fraction(1, 2)

    def test_te_rate_below_base_rate(self):
        spec = regular_36_coupling()
        r = code_rate(spec.base)
        for length in (3, 5, 12, 50, 480):
            assert te_rate(spec, length) < r

    def test_te_rate_limit(self):
        spec = regular_36_coupling()
        assert abs(float(te_rate(spec, 10**6)) - 0.5) < 1e-5

    def test_punctured_rate(self):
        base = BaseMatrix([[1, 2, 1], [1, 1, 2]], punctured=[False, True, False])
        assert code_rate(base) == Fraction(1, 2)


class TestTextFormat:
    def test_base_matrix_round_trip(self):
        base = BaseMatrix([[1, 2, 0, 1], [0, 1, 3, 1]], punctured=[False, False, True, False])
        again = loads_base_matrix(dumps_base_matrix(base))
        np.testing.assert_array_equal(again.entries, base.entries)
        np.testing.assert_array_equal(again.punctured, base.punctured)

    def test_coupling_spec_round_trip(self):
        spec = regular_36_coupling()
        again = loads_coupling_spec(dumps_coupling_spec(spec))
        assert again.coupling_width == spec.coupling_width
        for a, b in zip(again.submatrices, spec.submatrices):
            np.testing.assert_array_equal(a, b)

    def test_parse_with_comments(self):
        text = "# the (3,6) protograph\n1 2\n3 3\n"
        base = loads_base_matrix(text)
        np.testing.assert_array_equal(base.entries, [[3, 3]])


class TestValidation:
    def test_zero_row_rejected(self):
        with pytest.raises(ValueError):
            BaseMatrix([[1, 1], [0, 0]])

    def test_zero_column_rejected(self):
        with pytest.raises(ValueError):
            BaseMatrix([[1, 0], [1, 0]])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            BaseMatrix([[1, -1], [1, 1]])

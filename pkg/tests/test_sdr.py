import numpy as np
import pytest
from hypothesis import given, strategies as st

from htmseis import SDR, overlap, union


def sdr_strategy(width=10):
    return st.builds(
        lambda bits: SDR(width, bits),
        st.sets(st.integers(min_value=0, max_value=width - 1), max_size=width),
    )


class TestConstruction:
    def test_width_must_be_positive(self):
        with pytest.raises(ValueError):
            SDR(0)
        with pytest.raises(ValueError):
            SDR(-3, [])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SDR(10, [10])
        with pytest.raises(ValueError):
            SDR(10, [-1])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            SDR(10, [3, 3])

    def test_sorts_input(self):
        sdr = SDR(10, [7, 1, 4])
        assert list(sdr) == [1, 4, 7]

    def test_active_is_read_only(self):
        sdr = SDR(10, [1, 2])
        with pytest.raises(ValueError):
            sdr.active[0] = 5

    def test_from_dense_round_trip(self):
        sdr = SDR(12, [0, 5, 11])
        assert SDR.from_dense(sdr.to_dense()) == sdr

    def test_repr_debug_form(self):
        assert repr(SDR(10, [1, 2, 9])) == "width:10 active:[1,2,9]"
        assert repr(SDR(4)) == "width:4 active:[]"


class TestOverlap:
    def test_basic(self):
        assert overlap(SDR(10, [1, 2, 3]), SDR(10, [2, 3, 9])) == 2

    def test_empty(self):
        assert overlap(SDR(10), SDR(10, range(10))) == 0

    def test_identity(self):
        a = SDR(10, [5, 7])
        assert overlap(a, a) == 2

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="width mismatch"):
            overlap(SDR(10, [1]), SDR(11, [1]))

    @given(sdr_strategy(), sdr_strategy())
    def test_symmetric(self, a, b):
        assert overlap(a, b) == overlap(b, a)

    @given(sdr_strategy())
    def test_self_overlap_is_cardinality(self, a):
        assert overlap(a, a) == a.num_active


class TestUnion:
    def test_basic(self):
        assert union(SDR(10, [1, 2]), SDR(10, [2, 3])) == SDR(10, [1, 2, 3])

    def test_with_empty(self):
        assert union(SDR(10), SDR(10, [4])) == SDR(10, [4])

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="width mismatch"):
            union(SDR(10, [1]), SDR(11, [1]))

    @given(sdr_strategy())
    def test_idempotent(self, a):
        assert union(a, a) == a

    @given(sdr_strategy(), sdr_strategy())
    def test_commutative(self, a, b):
        assert union(a, b) == union(b, a)

    @given(sdr_strategy(), sdr_strategy(), sdr_strategy())
    def test_associative(self, a, b, c):
        assert union(union(a, b), c) == union(a, union(b, c))

    def test_result_sorted_ascending(self):
        u = union(SDR(10, [9, 0]), SDR(10, [5]))
        assert list(u) == [0, 5, 9]
        assert np.array_equal(u.active, np.sort(u.active))

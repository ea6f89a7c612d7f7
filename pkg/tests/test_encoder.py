import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from htmseis import ConfigError, EncoderConfig, bucket_index, bucket_midpoint, encode
from htmseis.encoder import bucket_midpoints

CFG = EncoderConfig()


def oracle_bucket(value: float, cfg: EncoderConfig = CFG) -> int:
    """Exact-arithmetic reference for the bucket formula."""
    v = min(max(value, cfg.min_val), cfg.max_val)
    scaled = (Fraction(v) - Fraction(cfg.min_val)) / (
        Fraction(cfg.max_val) - Fraction(cfg.min_val)
    )
    return math.floor(scaled * (cfg.n - cfg.w) + Fraction(1, 2))


class TestConfig:
    def test_defaults(self):
        assert CFG.n == 118 and CFG.w == 21
        assert CFG.bucket_count == 98

    def test_w_must_be_odd(self):
        with pytest.raises(ConfigError, match="odd"):
            EncoderConfig(n=118, w=20)

    def test_w_below_n(self):
        with pytest.raises(ConfigError):
            EncoderConfig(n=21, w=21)

    def test_range_ordering(self):
        with pytest.raises(ConfigError):
            EncoderConfig(min_val=2.0, max_val=-2.0)


class TestBucketIndex:
    def test_minimum_maps_to_first_bucket(self):
        assert bucket_index(-2.0, CFG) == 0

    def test_maximum_maps_to_last_bucket(self):
        assert bucket_index(2.0, CFG) == 97

    def test_zero_maps_to_49(self):
        assert oracle_bucket(0.0) == 49
        assert bucket_index(0.0, CFG) == 49

    def test_clipping_above_range(self):
        assert bucket_index(3.5, CFG) == 97

    def test_clipping_below_range(self):
        assert bucket_index(-100.0, CFG) == 0

    def test_non_finite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                bucket_index(bad, CFG)

    def test_clip_off_rejects_out_of_range(self):
        cfg = EncoderConfig(clip=False)
        with pytest.raises(ValueError):
            bucket_index(2.5, cfg)
        assert bucket_index(1.0, cfg) == oracle_bucket(1.0)

    @given(st.integers(min_value=-20000, max_value=20000))
    def test_matches_exact_arithmetic(self, k):
        # Quantized grid keeps the exact-rational oracle and the float64
        # evaluation on the same side of every bucket boundary.
        value = k / 10000.0
        assert bucket_index(value, CFG) == oracle_bucket(value)

    @given(st.floats(min_value=-3.0, max_value=3.0),
           st.floats(min_value=-3.0, max_value=3.0))
    def test_monotone(self, v1, v2):
        if v1 > v2:
            v1, v2 = v2, v1
        assert bucket_index(v1, CFG) <= bucket_index(v2, CFG)


class TestEncode:
    def test_extremes(self):
        assert list(encode(-2.0, CFG)) == list(range(0, 21))
        assert list(encode(2.0, CFG)) == list(range(97, 118))

    def test_zero(self):
        assert list(encode(0.0, CFG)) == list(range(49, 70))

    def test_always_21_active_bits(self):
        rng = np.random.default_rng(7)
        for value in rng.uniform(-6, 6, 2000):
            sdr = encode(value, CFG)
            assert sdr.num_active == CFG.w
            assert sdr.width == CFG.n

    def test_overlap_locality(self):
        base = encode(bucket_midpoint(40, CFG), CFG)
        previous = CFG.w
        for gap in range(0, 30):
            other = encode(bucket_midpoint(40 + gap, CFG), CFG)
            got = base.overlap(other)
            assert got == max(0, CFG.w - gap)
            assert got <= previous
            previous = got
        assert base.overlap(encode(bucket_midpoint(40 + CFG.w, CFG), CFG)) == 0


class TestBucketMidpoint:
    def test_ends(self):
        assert bucket_midpoint(0, CFG) == -2.0
        assert bucket_midpoint(97, CFG) == 2.0

    def test_bucket_49(self):
        expected = -2.0 + 49 * 4.0 / 97.0
        assert bucket_midpoint(49, CFG) == pytest.approx(expected, abs=1e-12)
        assert bucket_midpoint(49, CFG) == pytest.approx(0.0206185567, abs=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            bucket_midpoint(98, CFG)
        with pytest.raises(ValueError):
            bucket_midpoint(-1, CFG)

    def test_round_trip_every_bucket(self):
        for b in range(CFG.bucket_count):
            assert bucket_index(bucket_midpoint(b, CFG), CFG) == b

    def test_midpoints_array_matches_scalar(self):
        mids = bucket_midpoints(CFG)
        assert mids.shape == (98,)
        for b in (0, 1, 49, 96, 97):
            assert mids[b] == bucket_midpoint(b, CFG)

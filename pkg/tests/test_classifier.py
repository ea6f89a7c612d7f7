import numpy as np
import pytest

from htmseis import SDR, ClassifierConfig, ConfigError, SdrClassifier


def make(width=64, buckets=10, alpha=0.1, steps=1):
    cfg = ClassifierConfig(alpha=alpha, steps=steps, bucket_count=buckets,
                           input_width=width)
    fallback = np.linspace(-1.0, 1.0, buckets)
    return SdrClassifier(cfg, fallback), cfg, fallback


def sdr(bits, width=64):
    return SDR(width, bits)


class TestConfig:
    def test_negative_alpha_rejected(self):
        with pytest.raises(ConfigError):
            ClassifierConfig(alpha=-0.1)

    def test_steps_at_least_one(self):
        with pytest.raises(ConfigError):
            ClassifierConfig(steps=0)

    def test_bucket_count_at_least_two(self):
        with pytest.raises(ConfigError):
            ClassifierConfig(bucket_count=1)

    def test_fallback_shape_checked(self):
        cfg = ClassifierConfig(bucket_count=10, input_width=8)
        with pytest.raises(ValueError):
            SdrClassifier(cfg, np.zeros(9))


class TestInference:
    def test_untrained_gives_uniform(self):
        clf, cfg, fallback = make()
        res = clf.classify(sdr([1, 5, 9]), 0, 0.0, learn=False, infer=True)
        assert np.allclose(res.distribution, 1.0 / cfg.bucket_count)
        assert abs(res.distribution.sum() - 1.0) < 1e-9

    def test_untrained_prediction_falls_back_to_bucket_value(self):
        clf, cfg, fallback = make()
        res = clf.classify(sdr([0]), 0, 0.0, learn=False, infer=True)
        assert res.predicted_value == fallback[res.best_bucket]

    def test_infer_false_returns_none(self):
        clf, *_ = make()
        assert clf.classify(sdr([1]), 0, 0.0, learn=True, infer=False) is None

    def test_bucket_out_of_range(self):
        clf, *_ = make(buckets=10)
        with pytest.raises(ValueError):
            clf.classify(sdr([1]), 10, 0.0, learn=True, infer=True)

    def test_width_mismatch(self):
        clf, *_ = make(width=64)
        with pytest.raises(ValueError, match="width mismatch"):
            clf.classify(SDR(63, [1]), 0, 0.0, learn=False, infer=True)


class TestLearning:
    def test_constant_stream_converges(self):
        clf, cfg, _ = make(alpha=0.05)
        pattern = sdr([3, 17, 40])
        target_bucket, target_value = 6, 0.321
        for _ in range(5000):
            res = clf.classify(pattern, target_bucket, target_value,
                               learn=True, infer=True)
        assert res.best_bucket == target_bucket
        assert res.predicted_value == pytest.approx(target_value)

    def test_learn_false_keeps_weights_bit_identical(self):
        clf, *_ = make()
        before = clf.weights.copy()
        for _ in range(10):
            clf.classify(sdr([2, 4]), 3, 0.5, learn=False, infer=True)
        assert np.array_equal(clf.weights, before)

    def test_alpha_zero_never_changes_weights(self):
        clf, *_ = make(alpha=0.0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            bits = rng.choice(64, size=5, replace=False)
            clf.classify(sdr(sorted(bits)), int(rng.integers(10)),
                         float(rng.normal()), learn=True, infer=True)
        assert np.array_equal(clf.weights, np.zeros_like(clf.weights))

    def test_single_update_shifts_mass_toward_observed_bucket(self):
        clf, *_ = make(alpha=0.1)
        pattern = sdr([7, 8, 9])
        before = clf.classify(pattern, 4, 0.0, learn=True, infer=True)
        # history now holds `pattern`; this learn step updates on it
        clf.classify(pattern, 4, 0.0, learn=True, infer=False)
        after = clf.classify(pattern, 4, 0.0, learn=False, infer=True)
        assert after.distribution[4] > before.distribution[4]

    def test_update_targets_pattern_from_steps_ago(self):
        clf, *_ = make(alpha=0.5, steps=1)
        a, b = sdr([1]), sdr([2])
        clf.classify(a, 0, -1.0, learn=True, infer=False)   # history: [a]
        clf.classify(b, 3, 1.0, learn=True, infer=False)    # updates a -> 3
        assert np.any(clf.weights[1] != 0.0)
        assert np.argmax(clf.weights[1]) == 3
        # b's row untouched so far: it was only stored, never updated
        assert np.all(clf.weights[2][:3] <= clf.weights[2].max())

    def test_running_mean_of_bucket_values(self):
        clf, *_ = make()
        for v in (1.0, 2.0, 6.0):
            clf.classify(sdr([1]), 5, v, learn=True, infer=False)
        assert clf.bucket_means[5] == pytest.approx(3.0)
        assert clf.bucket_counts[5] == 3


class TestDistributionInvariants:
    def test_sums_to_one_under_fuzz(self):
        clf, cfg, _ = make(alpha=0.2)
        rng = np.random.default_rng(11)
        for _ in range(500):
            bits = sorted(rng.choice(64, size=int(rng.integers(0, 10)),
                                     replace=False))
            res = clf.classify(sdr(bits), int(rng.integers(10)),
                               float(rng.normal()), learn=True, infer=True)
            assert abs(res.distribution.sum() - 1.0) < 1e-9
            assert np.all(res.distribution >= 0.0)
            assert np.all(np.isfinite(clf.weights))


class TestStateRoundTrip:
    def test_resume_matches(self):
        clf, cfg, fallback = make(alpha=0.05)
        rng = np.random.default_rng(5)

        def feed(c, n):
            out = []
            for _ in range(n):
                bits = sorted(rng.choice(64, size=4, replace=False))
                out.append(c.classify(sdr(bits), int(rng.integers(10)),
                                      float(rng.normal()), learn=True, infer=True))
            return out

        feed(clf, 100)
        state = {k: (v.copy() if isinstance(v, np.ndarray) else v)
                 for k, v in clf.state_dict().items()}
        other = SdrClassifier(cfg, fallback)
        other.load_state(state)

        rng_a = np.random.default_rng(9)
        rng_b = np.random.default_rng(9)
        for _ in range(50):
            bits = sorted(rng_a.choice(64, size=4, replace=False))
            bits_b = sorted(rng_b.choice(64, size=4, replace=False))
            ra = clf.classify(sdr(bits), 3, 0.25, learn=True, infer=True)
            rb = other.classify(sdr(bits_b), 3, 0.25, learn=True, infer=True)
            assert np.array_equal(ra.distribution, rb.distribution)
            assert ra.predicted_value == rb.predicted_value

import dataclasses
import io

import numpy as np
import pytest

from htmseis import (
    SDR,
    HtmConfig,
    DetectorModel,
    SignalGenerator,
    StepRecord,
    detect_events,
    raw_anomaly,
    window_stats,
)
from htmseis.pipeline import (
    STEP_LOG_HEADER,
    format_step_record,
    read_step_log,
    write_step_log,
)


def small_config(p_jitter=0.005, synth_seed=42):
    """Reduced geometry for fast pipeline tests."""
    cfg = HtmConfig.default()
    sensor = dataclasses.replace(cfg.sensor, n=58, w=11)   # 48 buckets
    sp = dataclasses.replace(cfg.sp, input_width=58, column_count=256,
                             num_active_columns=10)
    tp = dataclasses.replace(cfg.tp, column_count=256, cells_per_column=8,
                             activation_threshold=6, min_threshold=4,
                             new_synapse_count=10, max_segments_per_cell=64)
    classifier = dataclasses.replace(cfg.classifier, bucket_count=48,
                                     input_width=256 * 8)
    synth = dataclasses.replace(cfg.synth, p_jitter=p_jitter, rng_seed=synth_seed)
    return HtmConfig(sensor=sensor, sp=sp, tp=tp, classifier=classifier,
                     synth=synth, run=cfg.run)


def rec(t, value=0.0, predicted=None, anomaly=0.0, jitter=False):
    return StepRecord(t=t, value=value, predicted_value=predicted,
                      anomaly_score=anomaly, jitter_active=jitter)


class TestRawAnomaly:
    def test_all_predicted(self):
        cols = SDR(100, range(40))
        assert raw_anomaly(cols, np.arange(40)) == 0.0

    def test_none_predicted(self):
        cols = SDR(100, range(40))
        assert raw_anomaly(cols, np.empty(0, dtype=int)) == 1.0

    def test_half_predicted(self):
        cols = SDR(100, range(40))
        assert raw_anomaly(cols, np.arange(20)) == 0.5

    def test_empty_active_returns_zero(self):
        assert raw_anomaly(SDR(100), np.empty(0, dtype=int)) == 0.0

    def test_subset_violation_rejected(self):
        cols = SDR(100, [1, 2, 3])
        with pytest.raises(ValueError, match="subset"):
            raw_anomaly(cols, [4])


class TestDetectorModel:
    def test_first_step_cold_start(self):
        model = DetectorModel(small_config())
        record = model.step(0.1, False)
        assert record.anomaly_score == 1.0
        assert record.predicted_value is None
        assert record.t == 0

    def test_predictions_appear_from_second_step(self):
        model = DetectorModel(small_config())
        model.step(0.1, False)
        record = model.step(0.2, False)
        assert record.predicted_value is not None

    def test_anomaly_always_in_unit_interval(self):
        cfg = small_config(p_jitter=0.02)
        model = DetectorModel(cfg)
        gen = SignalGenerator(cfg.synth)
        for record in model.run(gen, 600):
            assert 0.0 <= record.anomaly_score <= 1.0

    def test_deterministic_replay(self):
        def one_run():
            cfg = small_config()
            model = DetectorModel(cfg)
            gen = SignalGenerator(cfg.synth)
            return [format_step_record(r) for r in model.run(gen, 400)]

        assert one_run() == one_run()


class TestWindowStats:
    def test_window_count(self):
        records = [rec(t) for t in range(2400)]
        assert len(window_stats(records, 1200)) == 2

    def test_trailing_partial_dropped(self):
        records = [rec(t) for t in range(2999)]
        assert len(window_stats(records, 1200)) == 2

    def test_zero_anomaly(self):
        records = [rec(t, anomaly=0.0) for t in range(1200)]
        assert window_stats(records, 1200)[0].mean_anomaly == 0.0

    def test_constant_error(self):
        records = [rec(t, value=1.0, predicted=1.5) for t in range(100)]
        stats = window_stats(records, 100)[0]
        assert stats.rms_error == pytest.approx(0.5)
        assert stats.mean_abs_error == pytest.approx(0.5)

    def test_absent_predictions_excluded_from_error(self):
        records = [rec(0, value=1.0, predicted=None)]
        records += [rec(t, value=1.0, predicted=2.0) for t in range(1, 10)]
        stats = window_stats(records, 10)[0]
        assert stats.rms_error == pytest.approx(1.0)

    def test_mean_anomaly_counts_every_step(self):
        records = [rec(0, anomaly=1.0)] + [rec(t, anomaly=0.0) for t in range(1, 10)]
        assert window_stats(records, 10)[0].mean_anomaly == pytest.approx(0.1)

    def test_empty_input(self):
        assert window_stats([], 1200) == []


class TestDetectEvents:
    def test_quiet_run(self):
        records = [rec(t) for t in range(100)]
        report = detect_events(records, 0.5, 5)
        assert report.n_events == 0
        assert report.false_positive_times == []

    def test_single_event_detected_with_lag(self):
        records = [rec(t, jitter=10 <= t < 35) for t in range(100)]
        records[38] = rec(38, anomaly=0.9)  # inside end + lag window
        report = detect_events(records, 0.5, 5)
        assert report.n_events == 1
        assert report.n_detected == 1
        assert report.events[0].first_hit == 38
        assert report.false_positive_times == []

    def test_hit_after_lag_is_missed_and_false_positive(self):
        records = [rec(t, jitter=10 <= t < 35) for t in range(100)]
        records[80] = rec(80, anomaly=0.9)  # outside event + guard window
        report = detect_events(records, 0.5, 5)
        assert report.n_detected == 0
        assert report.false_positive_times == [80]

    def test_crossings_counted_once_per_excursion(self):
        records = [rec(t) for t in range(50)]
        for t in (20, 21, 22):
            records[t] = rec(t, anomaly=0.8)
        report = detect_events(records, 0.5, 5)
        assert report.false_positive_times == [20]

    def test_fp_rate_normalized_to_noise_steps(self):
        records = [rec(t) for t in range(10_000)]
        records[100] = rec(100, anomaly=1.0)
        report = detect_events(records, 0.5, 0)
        assert report.noise_steps == 10_000
        assert report.fp_per_10k == pytest.approx(1.0)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            detect_events([rec(0)], 0.0, 5)
        with pytest.raises(ValueError):
            detect_events([rec(0)], 0.5, -1)


class TestStepLogCsv:
    def test_round_trip(self):
        records = [
            rec(0, value=0.25, predicted=None, anomaly=1.0, jitter=False),
            rec(1, value=-1.5, predicted=0.125, anomaly=0.5, jitter=True),
        ]
        buf = io.StringIO()
        write_step_log(buf, records)
        parsed = read_step_log(io.StringIO(buf.getvalue()))
        assert parsed == records

    def test_header_format(self):
        buf = io.StringIO()
        write_step_log(buf, [])
        assert buf.getvalue() == STEP_LOG_HEADER + "\n"

    def test_nine_significant_digits(self):
        record = rec(0, value=1.0 / 3.0, predicted=2.0 / 3.0, anomaly=0.975)
        line = format_step_record(record)
        assert line == "0,0.333333333,0.666666667,0.975,0"

    def test_malformed_row_names_line(self):
        text = STEP_LOG_HEADER + "\n0,0.1,,1,0\nnot,a,row\n"
        with pytest.raises(ValueError, match="line 3"):
            read_step_log(io.StringIO(text))

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            read_step_log(io.StringIO("a,b,c\n"))

    def test_out_of_range_anomaly_rejected(self):
        text = STEP_LOG_HEADER + "\n0,0.1,,1.5,0\n"
        with pytest.raises(ValueError, match="line 2"):
            read_step_log(io.StringIO(text))

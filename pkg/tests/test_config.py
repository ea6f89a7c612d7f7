import dataclasses
import json

import pytest

from htmseis import ConfigError, HtmConfig
from htmseis.config import load_packaged_default


class TestDefaults:
    def test_reference_parameter_set(self):
        cfg = HtmConfig.default()
        assert (cfg.sensor.n, cfg.sensor.w) == (118, 21)
        assert (cfg.sensor.min_val, cfg.sensor.max_val) == (-2.0, 2.0)
        assert cfg.sensor.clip is True
        assert cfg.sp.column_count == 2048
        assert cfg.sp.num_active_columns == 40
        assert cfg.sp.potential_pct == 0.8
        assert cfg.sp.seed == 1956
        assert cfg.sp.syn_perm_active_inc == 0.05
        assert cfg.sp.syn_perm_connected == 0.1
        assert cfg.sp.syn_perm_inactive_dec == 0.1
        assert cfg.sp.boost_strength == 0.0
        assert cfg.tp.activation_threshold == 12
        assert cfg.tp.cells_per_column == 32
        assert cfg.tp.column_count == 2048
        assert cfg.tp.initial_perm == 0.21
        assert cfg.tp.min_threshold == 9
        assert cfg.tp.new_synapse_count == 20
        assert cfg.tp.max_segments_per_cell == 128
        assert cfg.tp.max_synapses_per_segment == 32
        assert cfg.tp.permanence_inc == 0.1
        assert cfg.tp.permanence_dec == 0.1
        assert cfg.tp.seed == 1960
        assert cfg.classifier.alpha == 0.009340
        assert cfg.classifier.steps == 1
        assert cfg.classifier.bucket_count == 98
        assert cfg.classifier.input_width == 2048 * 32
        assert cfg.synth.p_jitter == 0.005
        assert cfg.synth.n_sines == 10
        assert (cfg.synth.f_min, cfg.synth.f_max) == (0.01, 0.1)
        assert cfg.synth.duration == 25
        assert (cfg.synth.amp_min, cfg.synth.amp_max) == (0.0, 5.0)
        assert cfg.run.window_len == 1200

    def test_packaged_default_matches_code_default(self):
        assert load_packaged_default() == HtmConfig.default()


class TestCrossValidation:
    def test_encoder_width_must_match_sp_input(self):
        cfg = HtmConfig.default()
        bad = dataclasses.replace(cfg, sp=dataclasses.replace(cfg.sp, input_width=100))
        with pytest.raises(ConfigError, match="sp.input_width"):
            bad.validate()

    def test_column_counts_must_agree(self):
        cfg = HtmConfig.default()
        bad = dataclasses.replace(cfg, tp=dataclasses.replace(cfg.tp, column_count=1024))
        with pytest.raises(ConfigError, match="tp.column_count"):
            bad.validate()

    def test_classifier_width_must_match_cell_space(self):
        cfg = HtmConfig.default()
        bad = dataclasses.replace(
            cfg, classifier=dataclasses.replace(cfg.classifier, input_width=2048)
        )
        with pytest.raises(ConfigError, match="classifier.input_width"):
            bad.validate()

    def test_bucket_count_must_match_encoder(self):
        cfg = HtmConfig.default()
        bad = dataclasses.replace(
            cfg, classifier=dataclasses.replace(cfg.classifier, bucket_count=97)
        )
        with pytest.raises(ConfigError, match="bucket_count"):
            bad.validate()


class TestJson:
    def test_round_trip(self):
        cfg = HtmConfig.default()
        assert HtmConfig.from_json(cfg.to_json()) == cfg

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            HtmConfig.from_json(json.dumps({"sensors": {}}))

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown field"):
            HtmConfig.from_json(json.dumps({"sensor": {"m": 3}}))

    def test_invalid_json_rejected(self):
        with pytest.raises(ConfigError, match="not valid JSON"):
            HtmConfig.from_json("{nope")

    def test_partial_sections_use_defaults(self):
        cfg = HtmConfig.from_json(json.dumps({"synth": {"rng_seed": 99}}))
        assert cfg.synth.rng_seed == 99
        assert cfg.sp.seed == 1956

    def test_field_errors_name_the_field(self):
        with pytest.raises(ConfigError, match="sensor.w"):
            HtmConfig.from_json(json.dumps({"sensor": {"w": 20}}))


class TestHash:
    def test_stable_across_instances(self):
        assert HtmConfig.default().config_hash() == HtmConfig.default().config_hash()

    def test_sensitive_to_any_field(self):
        cfg = HtmConfig.default()
        other = cfg.replace(synth=dataclasses.replace(cfg.synth, rng_seed=1))
        assert cfg.config_hash() != other.config_hash()

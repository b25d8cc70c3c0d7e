import math

import pytest
from hypothesis import given, strategies as st

from impsy.core import (
    ConfigError,
    ContinuousFrame,
    InteractionMode,
    RouteKind,
    clamp_frame,
    config_to_dict,
    validate_config,
)
from conftest import daw_config_dict, minimal_config_dict, write_model


class TestClampFrame:
    def test_clips_value_and_negative_dt(self):
        out = clamp_frame(ContinuousFrame((1.3,), -0.2), dt_max=5.0)
        assert out.values == (1.0,)
        assert out.dt == 0.0

    def test_identity_inside_range(self):
        frame = ContinuousFrame((0.5,), 0.5)
        assert clamp_frame(frame, dt_max=5.0) == frame

    def test_caps_dt(self):
        assert clamp_frame(ContinuousFrame((0.5,), 60.0), dt_max=5.0).dt == 5.0

    @given(
        values=st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=8),
        dt=st.floats(-10, 100, allow_nan=False),
    )
    def test_idempotent_and_in_range(self, values, dt):
        once = clamp_frame(ContinuousFrame(tuple(values), dt))
        assert clamp_frame(once) == once
        assert all(0.0 <= v <= 1.0 for v in once.values)
        assert 0.0 <= once.dt <= 5.0

    @given(
        a=st.lists(st.floats(-2, 3, allow_nan=False), min_size=3, max_size=3),
        b=st.lists(st.floats(-2, 3, allow_nan=False), min_size=3, max_size=3),
    )
    def test_monotone_per_coordinate(self, a, b):
        lo = [min(x, y) for x, y in zip(a, b)]
        hi = [max(x, y) for x, y in zip(a, b)]
        f_lo = clamp_frame(ContinuousFrame(tuple(lo), 0.0))
        f_hi = clamp_frame(ContinuousFrame(tuple(hi), 0.0))
        assert all(x <= y for x, y in zip(f_lo.values, f_hi.values))


class TestValidateConfig:
    def test_minimal_config_fills_defaults(self):
        cfg = validate_config(minimal_config_dict())
        assert cfg.dimension == 1
        assert cfg.interaction.mode is InteractionMode.CALL_AND_RESPONSE
        assert cfg.interaction.switchover_s == 2.0
        assert cfg.interaction.tick_hz == 100.0
        assert cfg.dt_max == 5.0
        assert cfg.gate_s == 0.25
        assert cfg.outputs[0].out_lo == 0 and cfg.outputs[0].out_hi == 127
        assert cfg.outputs[0].velocity == 100
        assert cfg.sampling.pi_temp == 1.0 and cfg.sampling.sigma_temp == 1.0

    def test_dim_equal_to_dimension_rejected(self):
        raw = daw_config_dict()
        raw["outputs"][0]["dim"] = 8  # valid dims are 0..7
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert any("out of range" in v for v in err.value.violations)

    def test_daw_preset_validates(self):
        cfg = validate_config(daw_config_dict())
        assert len(cfg.inputs) == 8
        assert len(cfg.outputs) == 8
        note_routes = [r for r in cfg.outputs if r.kind is RouteKind.NOTE_ON]
        cc_routes = [r for r in cfg.outputs if r.kind is RouteKind.CONTROL_CHANGE]
        assert len(note_routes) == 4 and len(cc_routes) == 4

    def test_duplicate_input_route_rejected(self):
        raw = minimal_config_dict()
        raw["dimension"] = 2
        raw["inputs"].append(dict(raw["inputs"][0], dim=1))
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert any("duplicate input route" in v for v in err.value.violations)

    def test_out_lo_above_out_hi_rejected(self):
        raw = minimal_config_dict()
        raw["outputs"][0].update(out_lo=20, out_hi=10)
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert any("out_lo" in v for v in err.value.violations)

    def test_unknown_enum_rejected(self):
        raw = minimal_config_dict()
        raw["inputs"][0]["kind"] = "aftertouch"
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert any("unknown kind" in v for v in err.value.violations)

    def test_unknown_key_rejected(self):
        raw = minimal_config_dict()
        raw["switchover"] = 0.1  # typo for interaction.switchover_s
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert any("unknown key" in v for v in err.value.violations)

    def test_all_violations_reported_together(self):
        raw = minimal_config_dict()
        raw["inputs"][0]["channel"] = 99
        raw["outputs"][0].update(out_lo=20, out_hi=10)
        raw["bogus"] = 1
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        assert len(err.value.violations) == 3

    def test_model_dimension_mismatch_rejected(self, tmp_path):
        write_model(tmp_path / "model.mdrn", D=4)
        raw = daw_config_dict()  # declares dimension 8
        with pytest.raises(ConfigError) as err:
            validate_config(raw, base_dir=tmp_path)
        assert any("dimension 4" in v for v in err.value.violations)

    def test_model_dimension_match_accepted(self, tmp_path):
        write_model(tmp_path / "model.mdrn", D=8, H=4)
        assert validate_config(daw_config_dict(), base_dir=tmp_path).dimension == 8

    def test_idempotent_and_round_trips(self):
        cfg = validate_config(daw_config_dict())
        again = validate_config(config_to_dict(cfg))
        assert again == cfg

    @given(
        switchover=st.floats(0.01, 10, allow_nan=False),
        mode=st.sampled_from([m.value for m in InteractionMode]),
        seed=st.one_of(st.none(), st.integers(0, 2**31)),
        out_lo=st.integers(0, 127),
        span=st.integers(0, 127),
    )
    def test_round_trip_property(self, switchover, mode, seed, out_lo, span):
        raw = minimal_config_dict(
            interaction={"mode": mode, "switchover_s": switchover},
            rng_seed=seed,
        )
        raw["outputs"][0].update(out_lo=out_lo, out_hi=min(127, out_lo + span))
        cfg = validate_config(raw)
        assert validate_config(config_to_dict(cfg)) == cfg

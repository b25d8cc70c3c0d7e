import numpy as np
import pytest

from impsy import mdrnn
from impsy.core import ConfigError, validate_config
from impsy.mdrnn.weights import load_weights, save_weights
from impsy.weightfile import WeightFileError, read_header
from conftest import daw_config_dict, write_model


class TestWeightRoundTrip:
    def test_save_load_bitwise_equal(self, tmp_path, tiny_params):
        path = tmp_path / "model.mdrn"
        save_weights(tiny_params, path)
        loaded = load_weights(path)
        assert (loaded.D, loaded.L, loaded.H, loaded.K) == (
            tiny_params.D, tiny_params.L, tiny_params.H, tiny_params.K
        )
        for (name_a, a), (name_b, b) in zip(tiny_params.tensors(), loaded.tensors()):
            assert name_a == name_b
            assert a.dtype == np.float64
            assert np.array_equal(a, b)

    def test_header_self_describes(self, tmp_path, tiny_params):
        path = tmp_path / "model.mdrn"
        save_weights(tiny_params, path)
        version, d, l, h, k = read_header(path)
        assert (version, d, l, h, k) == (1, 1, 2, 8, 3)

    def test_truncated_file_fails_checksum(self, tmp_path, tiny_params):
        path = tmp_path / "model.mdrn"
        save_weights(tiny_params, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 100])
        with pytest.raises(WeightFileError, match="checksum"):
            load_weights(path)

    def test_flipped_byte_fails_checksum(self, tmp_path, tiny_params):
        path = tmp_path / "model.mdrn"
        save_weights(tiny_params, path)
        blob = bytearray(path.read_bytes())
        blob[40] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(WeightFileError, match="checksum"):
            load_weights(path)

    def test_not_a_weight_file(self, tmp_path):
        path = tmp_path / "noise.mdrn"
        path.write_bytes(b"definitely not weights" * 10)
        with pytest.raises(WeightFileError):
            load_weights(path)

    def test_dim_mismatch_caught_at_config_validation(self, tmp_path):
        write_model(tmp_path / "model.mdrn", D=4)
        raw = daw_config_dict()  # D=8 config
        with pytest.raises(ConfigError) as err:
            validate_config(raw, base_dir=tmp_path)
        assert any("dimension" in v for v in err.value.violations)

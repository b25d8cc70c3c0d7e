import numpy as np
import pytest

from impsy import mdrnn
from impsy.core import validate_config
from impsy.mdrnn.weights import save_weights


def minimal_config_dict(model_file="model.mdrn", **overrides):
    """Smallest legal config: D=1, one CC input, one note output."""
    raw = {
        "dimension": 1,
        "model_file": model_file,
        "inputs": [
            {"device": "knobs", "kind": "control_change", "channel": 0, "number": 1, "dim": 0},
        ],
        "outputs": [
            {"device": "synth", "kind": "note_on", "channel": 0, "number": 0, "dim": 0},
        ],
    }
    raw.update(overrides)
    return raw


def daw_config_dict(model_file="model.mdrn", **overrides):
    """The 8-in / 4+4-out DAW routing preset: 8 CC inputs onto dims 0..7,
    four channels of notes plus four channels of control data back out."""
    raw = {
        "dimension": 8,
        "model_file": model_file,
        "inputs": [
            {"device": "daw", "kind": "control_change", "channel": 0, "number": 1 + d, "dim": d}
            for d in range(8)
        ],
        "outputs": (
            [
                {"device": "daw", "kind": "note_on", "channel": ch, "number": 0,
                 "dim": ch, "out_lo": 36, "out_hi": 96}
                for ch in range(4)
            ]
            + [
                {"device": "daw", "kind": "control_change", "channel": 4 + i, "number": 1,
                 "dim": 4 + i}
                for i in range(4)
            ]
        ),
    }
    raw.update(overrides)
    return raw


@pytest.fixture
def tiny_params():
    return mdrnn.init_params(D=1, L=2, H=8, K=3, rng=np.random.default_rng(7))


def write_model(path, D=1, L=2, H=8, K=3, seed=7):
    params = mdrnn.init_params(D=D, L=L, H=H, K=K, rng=np.random.default_rng(seed))
    save_weights(params, path)
    return params


@pytest.fixture
def workspace(tmp_path):
    """tmp dir with a D=1 model file and a validated minimal config."""
    write_model(tmp_path / "model.mdrn", D=1)
    raw = minimal_config_dict()
    cfg = validate_config(raw, base_dir=tmp_path)
    return tmp_path, raw, cfg

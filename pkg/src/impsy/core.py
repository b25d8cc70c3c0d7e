"""Shared domain types and the engine configuration schema.

Everything in this module is an immutable value object: a config is
validated once and then shared freely between the engine loop, the web
service, and the CLI.  Mutation happens by validating a new document and
swapping it in at a tick boundary.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import weightfile

DT_MAX_DEFAULT = 5.0
SWITCHOVER_DEFAULT_S = 2.0
TICK_HZ_DEFAULT = 100.0
GATE_DEFAULT_S = 0.25
VELOCITY_DEFAULT = 100

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A config document failed validation.

    ``violations`` carries every problem found, one human-readable string
    each, so a form UI can render them all at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class RouteKind(str, enum.Enum):
    NOTE_ON = "note_on"
    CONTROL_CHANGE = "control_change"


class InteractionMode(str, enum.Enum):
    CALL_AND_RESPONSE = "call_and_response"
    AI_ONLY = "ai_only"
    HUMAN_ONLY = "human_only"


@dataclass(frozen=True)
class ContinuousFrame:
    """One step of performance state: D values in [0, 1] plus the delay in
    seconds until the step takes effect."""

    values: tuple[float, ...]
    dt: float

    @property
    def dimension(self) -> int:
        return len(self.values)


def clamp_frame(frame: ContinuousFrame, dt_max: float = DT_MAX_DEFAULT) -> ContinuousFrame:
    """Clip every value into [0, 1] and dt into [0, dt_max]."""
    values = tuple(min(1.0, max(0.0, float(v))) for v in frame.values)
    dt = min(float(dt_max), max(0.0, float(frame.dt)))
    return ContinuousFrame(values=values, dt=dt)


def initial_frame(dimension: int) -> ContinuousFrame:
    """The neutral frame every session starts from: mid-range, no delay."""
    return ContinuousFrame(values=(0.5,) * dimension, dt=0.0)


@dataclass(frozen=True)
class RouteIn:
    """Maps one incoming MIDI source onto a model dimension."""

    device: str
    kind: RouteKind
    channel: int
    number: int  # CC number; ignored for note_on routes
    dim: int


@dataclass(frozen=True)
class RouteOut:
    """Maps one model dimension onto an outgoing MIDI message.

    Emitted data bytes are always inside [out_lo, out_hi], which is how
    range-restricted sinks (LED rings and the like) are driven.
    """

    device: str
    kind: RouteKind
    channel: int
    number: int
    dim: int
    out_lo: int = 0
    out_hi: int = 127
    velocity: int = VELOCITY_DEFAULT  # note_on routes only


@dataclass(frozen=True)
class InteractionConfig:
    mode: InteractionMode = InteractionMode.CALL_AND_RESPONSE
    switchover_s: float = SWITCHOVER_DEFAULT_S
    tick_hz: float = TICK_HZ_DEFAULT


@dataclass(frozen=True)
class SamplingConfig:
    """Diversity controls for generation: pi_temp reshapes the component
    choice, sigma_temp scales the per-component spread."""

    pi_temp: float = 1.0
    sigma_temp: float = 1.0


@dataclass(frozen=True)
class NetConfig:
    osc_enabled: bool = False
    osc_host: str = "127.0.0.1"
    osc_port: int = 5005
    websocket_enabled: bool = True


@dataclass(frozen=True)
class EngineConfig:
    dimension: int
    model_file: str
    inputs: tuple[RouteIn, ...] = ()
    outputs: tuple[RouteOut, ...] = ()
    interaction: InteractionConfig = field(default_factory=InteractionConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    net: NetConfig = field(default_factory=NetConfig)
    log_dir: str = "logs"
    rng_seed: Optional[int] = None
    dt_max: float = DT_MAX_DEFAULT
    gate_s: float = GATE_DEFAULT_S
    passthrough_device: Optional[str] = None


# --- validation -----------------------------------------------------------

_TOP_KEYS = {
    "dimension", "model_file", "inputs", "outputs", "interaction", "sampling",
    "net", "log_dir", "rng_seed", "dt_max", "gate_s", "passthrough_device",
}
_IN_KEYS = {"device", "kind", "channel", "number", "dim"}
_OUT_KEYS = _IN_KEYS | {"out_lo", "out_hi", "velocity"}
_INTERACTION_KEYS = {"mode", "switchover_s", "tick_hz"}
_SAMPLING_KEYS = {"pi_temp", "sigma_temp"}
_NET_KEYS = {"osc_enabled", "osc_host", "osc_port", "websocket_enabled"}


def _check_keys(section: dict, allowed: set, where: str, errs: list) -> None:
    for key in section:
        if key not in allowed:
            errs.append(f"{where}: unknown key {key!r}")


def _as_int(value, where: str, errs: list, lo=None, hi=None) -> Optional[int]:
    if isinstance(value, bool) or not isinstance(value, int):
        errs.append(f"{where}: expected an integer, got {value!r}")
        return None
    if lo is not None and value < lo or hi is not None and value > hi:
        errs.append(f"{where}: {value} outside {lo}..{hi}")
        return None
    return value


def _as_number(value, where: str, errs: list) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errs.append(f"{where}: expected a number, got {value!r}")
        return None
    return float(value)


def _as_kind(value, where: str, errs: list) -> Optional[RouteKind]:
    try:
        return RouteKind(value)
    except ValueError:
        choices = ", ".join(k.value for k in RouteKind)
        errs.append(f"{where}: unknown kind {value!r} (expected one of: {choices})")
        return None


def _route_in(raw, index: int, dimension: int, errs: list) -> Optional[RouteIn]:
    where = f"inputs[{index}]"
    if not isinstance(raw, dict):
        errs.append(f"{where}: expected an object")
        return None
    _check_keys(raw, _IN_KEYS, where, errs)
    missing = _IN_KEYS - set(raw)
    if missing:
        errs.append(f"{where}: missing keys: {', '.join(sorted(missing))}")
        return None
    before = len(errs)
    device = raw["device"] if isinstance(raw["device"], str) else None
    if device is None:
        errs.append(f"{where}.device: expected a string")
    kind = _as_kind(raw["kind"], f"{where}.kind", errs)
    channel = _as_int(raw["channel"], f"{where}.channel", errs, 0, 15)
    number = _as_int(raw["number"], f"{where}.number", errs, 0, 127)
    dim = _as_int(raw["dim"], f"{where}.dim", errs)
    if dim is not None and not 0 <= dim < dimension:
        errs.append(
            f"{where}.dim: dimension {dim} out of range (valid dims are 0..{dimension - 1})"
        )
        dim = None
    if len(errs) > before:
        return None
    return RouteIn(device=device, kind=kind, channel=channel, number=number, dim=dim)


def _route_out(raw, index: int, dimension: int, errs: list) -> Optional[RouteOut]:
    where = f"outputs[{index}]"
    if not isinstance(raw, dict):
        errs.append(f"{where}: expected an object")
        return None
    _check_keys(raw, _OUT_KEYS, where, errs)
    missing = _IN_KEYS - set(raw)
    if missing:
        errs.append(f"{where}: missing keys: {', '.join(sorted(missing))}")
        return None
    before = len(errs)
    device = raw["device"] if isinstance(raw["device"], str) else None
    if device is None:
        errs.append(f"{where}.device: expected a string")
    kind = _as_kind(raw["kind"], f"{where}.kind", errs)
    channel = _as_int(raw["channel"], f"{where}.channel", errs, 0, 15)
    number = _as_int(raw["number"], f"{where}.number", errs, 0, 127)
    dim = _as_int(raw["dim"], f"{where}.dim", errs)
    if dim is not None and not 0 <= dim < dimension:
        errs.append(
            f"{where}.dim: dimension {dim} out of range (valid dims are 0..{dimension - 1})"
        )
        dim = None
    out_lo = _as_int(raw.get("out_lo", 0), f"{where}.out_lo", errs, 0, 127)
    out_hi = _as_int(raw.get("out_hi", 127), f"{where}.out_hi", errs, 0, 127)
    if out_lo is not None and out_hi is not None and out_lo > out_hi:
        errs.append(f"{where}: out_lo {out_lo} > out_hi {out_hi}")
    # velocity 0 is note-off on the wire, so it is not a legal note velocity
    velocity = _as_int(raw.get("velocity", VELOCITY_DEFAULT), f"{where}.velocity", errs, 1, 127)
    if len(errs) > before:
        return None
    return RouteOut(
        device=device, kind=kind, channel=channel, number=number, dim=dim,
        out_lo=out_lo, out_hi=out_hi, velocity=velocity,
    )


def validate_config(raw: dict, base_dir: Optional[Path] = None) -> EngineConfig:
    """Validate a parsed config document into an EngineConfig.

    Unknown keys are rejected everywhere (catches typos before they turn
    into silent misrouting on stage).  All violations are collected and
    raised together as a ConfigError.  ``base_dir`` anchors the model-file
    dimension check when the document uses relative paths.
    """
    errs: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["config: expected a JSON object at top level"])
    _check_keys(raw, _TOP_KEYS, "config", errs)

    dimension = _as_int(raw.get("dimension"), "dimension", errs, lo=1)
    model_file = raw.get("model_file")
    if not isinstance(model_file, str) or not model_file:
        errs.append("model_file: expected a non-empty path string")
        model_file = ""
    log_dir = raw.get("log_dir", "logs")
    if not isinstance(log_dir, str) or not log_dir:
        errs.append("log_dir: expected a non-empty path string")
        log_dir = "logs"
    rng_seed = raw.get("rng_seed")
    if rng_seed is not None:
        rng_seed = _as_int(rng_seed, "rng_seed", errs)
    dt_max = _as_number(raw.get("dt_max", DT_MAX_DEFAULT), "dt_max", errs)
    if dt_max is not None and dt_max <= 0:
        errs.append(f"dt_max: must be > 0, got {dt_max}")
    gate_s = _as_number(raw.get("gate_s", GATE_DEFAULT_S), "gate_s", errs)
    if gate_s is not None and gate_s <= 0:
        errs.append(f"gate_s: must be > 0, got {gate_s}")
    passthrough_device = raw.get("passthrough_device")
    if passthrough_device is not None and not isinstance(passthrough_device, str):
        errs.append("passthrough_device: expected a device selector string or null")
        passthrough_device = None

    inter_raw = raw.get("interaction", {})
    interaction = InteractionConfig()
    if not isinstance(inter_raw, dict):
        errs.append("interaction: expected an object")
    else:
        _check_keys(inter_raw, _INTERACTION_KEYS, "interaction", errs)
        try:
            mode = InteractionMode(inter_raw.get("mode", InteractionMode.CALL_AND_RESPONSE.value))
        except ValueError:
            choices = ", ".join(m.value for m in InteractionMode)
            errs.append(
                f"interaction.mode: unknown mode {inter_raw.get('mode')!r}"
                f" (expected one of: {choices})"
            )
            mode = InteractionMode.CALL_AND_RESPONSE
        switchover = _as_number(
            inter_raw.get("switchover_s", SWITCHOVER_DEFAULT_S), "interaction.switchover_s", errs
        )
        if switchover is not None and switchover <= 0:
            errs.append(f"interaction.switchover_s: must be > 0, got {switchover}")
            switchover = None
        tick_hz = _as_number(inter_raw.get("tick_hz", TICK_HZ_DEFAULT), "interaction.tick_hz", errs)
        if tick_hz is not None and tick_hz <= 0:
            errs.append(f"interaction.tick_hz: must be > 0, got {tick_hz}")
            tick_hz = None
        if switchover is not None and tick_hz is not None:
            interaction = InteractionConfig(mode=mode, switchover_s=switchover, tick_hz=tick_hz)

    samp_raw = raw.get("sampling", {})
    sampling = SamplingConfig()
    if not isinstance(samp_raw, dict):
        errs.append("sampling: expected an object")
    else:
        _check_keys(samp_raw, _SAMPLING_KEYS, "sampling", errs)
        pi_temp = _as_number(samp_raw.get("pi_temp", 1.0), "sampling.pi_temp", errs)
        if pi_temp is not None and pi_temp <= 0:
            errs.append(f"sampling.pi_temp: must be > 0, got {pi_temp}")
            pi_temp = None
        sigma_temp = _as_number(samp_raw.get("sigma_temp", 1.0), "sampling.sigma_temp", errs)
        if sigma_temp is not None and sigma_temp < 0:
            errs.append(f"sampling.sigma_temp: must be >= 0, got {sigma_temp}")
            sigma_temp = None
        if pi_temp is not None and sigma_temp is not None:
            sampling = SamplingConfig(pi_temp=pi_temp, sigma_temp=sigma_temp)

    net_raw = raw.get("net", {})
    net = NetConfig()
    if not isinstance(net_raw, dict):
        errs.append("net: expected an object")
    else:
        _check_keys(net_raw, _NET_KEYS, "net", errs)
        osc_enabled = net_raw.get("osc_enabled", False)
        ws_enabled = net_raw.get("websocket_enabled", True)
        if not isinstance(osc_enabled, bool):
            errs.append("net.osc_enabled: expected true/false")
            osc_enabled = False
        if not isinstance(ws_enabled, bool):
            errs.append("net.websocket_enabled: expected true/false")
            ws_enabled = True
        osc_host = net_raw.get("osc_host", "127.0.0.1")
        if not isinstance(osc_host, str):
            errs.append("net.osc_host: expected a string")
            osc_host = "127.0.0.1"
        osc_port = _as_int(net_raw.get("osc_port", 5005), "net.osc_port", errs, 1, 65535)
        net = NetConfig(
            osc_enabled=osc_enabled, osc_host=osc_host,
            osc_port=osc_port if osc_port is not None else 5005,
            websocket_enabled=ws_enabled,
        )

    dim_ok = dimension is not None
    inputs: list[RouteIn] = []
    raw_inputs = raw.get("inputs", [])
    if not isinstance(raw_inputs, list):
        errs.append("inputs: expected a list")
    elif dim_ok:
        for i, item in enumerate(raw_inputs):
            route = _route_in(item, i, dimension, errs)
            if route is not None:
                inputs.append(route)
        seen = {}
        for i, route in enumerate(inputs):
            key = (route.device, route.kind, route.channel, route.number)
            if key in seen:
                errs.append(
                    f"inputs[{i}]: duplicate input route for device={route.device!r}"
                    f" kind={route.kind.value} channel={route.channel} number={route.number}"
                    f" (first at inputs[{seen[key]}])"
                )
            else:
                seen[key] = i

    outputs: list[RouteOut] = []
    raw_outputs = raw.get("outputs", [])
    if not isinstance(raw_outputs, list):
        errs.append("outputs: expected a list")
    elif dim_ok:
        for i, item in enumerate(raw_outputs):
            route = _route_out(item, i, dimension, errs)
            if route is not None:
                outputs.append(route)

    if dim_ok and model_file:
        model_path = Path(model_file)
        if base_dir is not None and not model_path.is_absolute():
            model_path = Path(base_dir) / model_path
        if model_path.exists():
            try:
                _, d, _, _, _ = weightfile.read_header(model_path)
            except weightfile.WeightFileError as exc:
                errs.append(f"model_file: {exc}")
            else:
                if d != dimension:
                    errs.append(
                        f"model_file: model has dimension {d} but config declares {dimension}"
                    )

    if errs:
        raise ConfigError(errs)
    return EngineConfig(
        dimension=dimension,
        model_file=model_file,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        interaction=interaction,
        sampling=sampling,
        net=net,
        log_dir=log_dir,
        rng_seed=rng_seed,
        dt_max=dt_max,
        gate_s=gate_s,
        passthrough_device=passthrough_device,
    )


# --- serialization --------------------------------------------------------

def config_to_dict(cfg: EngineConfig) -> dict:
    """Render a validated config back into its JSON document form, with
    every default made explicit so the round trip is exact."""
    return {
        "dimension": cfg.dimension,
        "model_file": cfg.model_file,
        "inputs": [
            {
                "device": r.device, "kind": r.kind.value, "channel": r.channel,
                "number": r.number, "dim": r.dim,
            }
            for r in cfg.inputs
        ],
        "outputs": [
            {
                "device": r.device, "kind": r.kind.value, "channel": r.channel,
                "number": r.number, "dim": r.dim, "out_lo": r.out_lo,
                "out_hi": r.out_hi, "velocity": r.velocity,
            }
            for r in cfg.outputs
        ],
        "interaction": {
            "mode": cfg.interaction.mode.value,
            "switchover_s": cfg.interaction.switchover_s,
            "tick_hz": cfg.interaction.tick_hz,
        },
        "sampling": {
            "pi_temp": cfg.sampling.pi_temp,
            "sigma_temp": cfg.sampling.sigma_temp,
        },
        "net": {
            "osc_enabled": cfg.net.osc_enabled,
            "osc_host": cfg.net.osc_host,
            "osc_port": cfg.net.osc_port,
            "websocket_enabled": cfg.net.websocket_enabled,
        },
        "log_dir": cfg.log_dir,
        "rng_seed": cfg.rng_seed,
        "dt_max": cfg.dt_max,
        "gate_s": cfg.gate_s,
        "passthrough_device": cfg.passthrough_device,
    }


def save_config(cfg: EngineConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")


def load_config_dict(path) -> dict:
    """Parse the config file into a raw document (validation is separate)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc}"]) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config file {path} is not valid JSON: {exc}"]) from exc


def load_config(path) -> EngineConfig:
    return validate_config(load_config_dict(path), base_dir=Path(path).resolve().parent)


def config_json_schema() -> dict:
    """JSON-schema description of the config document (served by the API)."""
    route_common = {
        "device": {"type": "string"},
        "kind": {"enum": [k.value for k in RouteKind]},
        "channel": {"type": "integer", "minimum": 0, "maximum": 15},
        "number": {"type": "integer", "minimum": 0, "maximum": 127},
        "dim": {"type": "integer", "minimum": 0},
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "EngineConfig",
        "version": CONFIG_SCHEMA_VERSION,
        "type": "object",
        "additionalProperties": False,
        "required": ["dimension", "model_file"],
        "properties": {
            "dimension": {"type": "integer", "minimum": 1},
            "model_file": {"type": "string"},
            "inputs": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": sorted(_IN_KEYS),
                    "properties": dict(route_common),
                },
            },
            "outputs": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": sorted(_IN_KEYS),
                    "properties": {
                        **route_common,
                        "out_lo": {"type": "integer", "minimum": 0, "maximum": 127},
                        "out_hi": {"type": "integer", "minimum": 0, "maximum": 127},
                        "velocity": {"type": "integer", "minimum": 1, "maximum": 127},
                    },
                },
            },
            "interaction": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "mode": {"enum": [m.value for m in InteractionMode]},
                    "switchover_s": {"type": "number", "exclusiveMinimum": 0},
                    "tick_hz": {"type": "number", "exclusiveMinimum": 0},
                },
            },
            "sampling": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "pi_temp": {"type": "number", "exclusiveMinimum": 0},
                    "sigma_temp": {"type": "number", "minimum": 0},
                },
            },
            "net": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "osc_enabled": {"type": "boolean"},
                    "osc_host": {"type": "string"},
                    "osc_port": {"type": "integer", "minimum": 1, "maximum": 65535},
                    "websocket_enabled": {"type": "boolean"},
                },
            },
            "log_dir": {"type": "string"},
            "rng_seed": {"type": ["integer", "null"]},
            "dt_max": {"type": "number", "exclusiveMinimum": 0},
            "gate_s": {"type": "number", "exclusiveMinimum": 0},
            "passthrough_device": {"type": ["string", "null"]},
        },
    }

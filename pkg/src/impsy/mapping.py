"""Translation between MIDI events and model dimensions.

Inbound: the first matching route wins, non-matching traffic can be
forwarded verbatim to a passthrough device, and anything else is counted
as dropped - matched + passed + dropped always equals messages seen.
Outbound: linear scaling into each route's [out_lo, out_hi] window with
round-half-up, plus de-duplication of unchanged control values so dense
generation does not flood the wire.
"""

from __future__ import annotations

from typing import Optional

from .core import ContinuousFrame, EngineConfig, RouteIn, RouteKind, RouteOut
from .midi.codec import MessageKind, MidiMessage, control_change, note_on
from .midi.devices import TimedMidi, match_device

_KIND_BY_ROUTE = {
    RouteKind.NOTE_ON: MessageKind.NOTE_ON,
    RouteKind.CONTROL_CHANGE: MessageKind.CONTROL_CHANGE,
}


def matches_route_in(message: MidiMessage, route: RouteIn, device: str = "") -> bool:
    if message.kind is not _KIND_BY_ROUTE[route.kind]:
        return False
    if message.channel != route.channel:
        return False
    if route.kind is RouteKind.CONTROL_CHANGE and message.data1 != route.number:
        return False
    if device and match_device(route.device, [device]) is None:
        return False
    return True


def scale_in(message: MidiMessage, route: RouteIn) -> tuple[int, float]:
    """MIDI data byte -> (dim, value in [0, 1])."""
    if not matches_route_in(message, route):
        raise ValueError("message does not match route")
    if route.kind is RouteKind.NOTE_ON:
        return route.dim, message.data1 / 127.0
    return route.dim, message.data2 / 127.0


def scale_out(value: float, route: RouteOut) -> MidiMessage:
    """Value in [0, 1] -> MIDI message with the data byte inside the
    route's output window (round-half-up, then clamped)."""
    span = route.out_hi - route.out_lo
    data = int(route.out_lo + value * span + 0.5)  # half-up for non-negative operands
    data = min(route.out_hi, max(route.out_lo, data))
    if route.kind is RouteKind.NOTE_ON:
        return note_on(route.channel, data, route.velocity)
    return control_change(route.channel, route.number, data)


def route_inbound(
    event: TimedMidi, config: EngineConfig
) -> Optional[tuple[int, float, float]]:
    """First matching input route wins; None when nothing matches."""
    for route in config.inputs:
        if matches_route_in(event.message, route, event.device):
            dim, value = scale_in(event.message, route)
            return dim, value, event.at
    return None


class InboundRouter:
    """Stateful wrapper adding the passthrough decision and counters."""

    def __init__(self, config: EngineConfig):
        self._config = config
        self.matched = 0
        self.passed = 0
        self.dropped = 0

    def apply_config(self, config: EngineConfig) -> None:
        self._config = config

    def route(self, event: TimedMidi) -> tuple[Optional[tuple[int, float, float]], bool]:
        """Returns ((dim, value, at) | None, forward_verbatim)."""
        hit = route_inbound(event, self._config)
        if hit is not None:
            self.matched += 1
            return hit, False
        if self._config.passthrough_device is not None:
            self.passed += 1
            return None, True
        self.dropped += 1
        return None, False


class OutboundRouter:
    """Maps frames to per-route messages, suppressing unchanged CC values.

    Tracks the last data byte emitted per route; note that the caller must
    confirm emission via mark_emitted because scheduled messages can still
    be canceled by steal-back.
    """

    def __init__(self, config: EngineConfig):
        self._config = config
        self._last_cc: dict[int, int] = {}

    def apply_config(self, config: EngineConfig) -> None:
        self._config = config
        self._last_cc.clear()

    def reset(self) -> None:
        self._last_cc.clear()

    def route(self, frame: ContinuousFrame) -> list[tuple[int, RouteOut, MidiMessage]]:
        out = []
        for index, route in enumerate(self._config.outputs):
            message = scale_out(frame.values[route.dim], route)
            if route.kind is RouteKind.CONTROL_CHANGE and self._last_cc.get(index) == message.data2:
                continue
            out.append((index, route, message))
        return out

    def mark_emitted(self, index: int, message: MidiMessage) -> None:
        route = self._config.outputs[index]
        if route.kind is RouteKind.CONTROL_CHANGE:
            self._last_cc[index] = message.data2

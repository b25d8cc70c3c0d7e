"""Byte-exact MIDI 1.0 channel-message codec.

The parser is an incremental state machine: bytes can arrive split at any
boundary and the output is identical to single-shot parsing.  Running
status is honored, real-time bytes (0xF8-0xFF) pass straight through
without disturbing it, note-on with velocity 0 is normalized to note-off,
and stray data bytes are dropped and counted rather than raised - a live
stream has to survive line noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class MessageKind(enum.Enum):
    NOTE_ON = "note_on"
    NOTE_OFF = "note_off"
    CONTROL_CHANGE = "control_change"
    OTHER = "other_passthrough"


@dataclass(frozen=True)
class MidiMessage:
    kind: MessageKind
    channel: int = 0
    data1: int = 0
    data2: int = 0
    raw: bytes = b""  # original bytes, set for OTHER passthrough


def note_on(channel: int, note: int, velocity: int) -> MidiMessage:
    return MidiMessage(MessageKind.NOTE_ON, channel, note, velocity)


def note_off(channel: int, note: int, velocity: int = 0) -> MidiMessage:
    return MidiMessage(MessageKind.NOTE_OFF, channel, note, velocity)


def control_change(channel: int, number: int, value: int) -> MidiMessage:
    return MidiMessage(MessageKind.CONTROL_CHANGE, channel, number, value)


_STATUS_NOTE_OFF = 0x80
_STATUS_NOTE_ON = 0x90
_STATUS_POLY_PRESSURE = 0xA0
_STATUS_CONTROL = 0xB0
_STATUS_PROGRAM = 0xC0
_STATUS_CHAN_PRESSURE = 0xD0
_STATUS_PITCH_BEND = 0xE0

# data bytes per channel voice status family
_VOICE_DATA_LEN = {
    _STATUS_NOTE_OFF: 2, _STATUS_NOTE_ON: 2, _STATUS_POLY_PRESSURE: 2,
    _STATUS_CONTROL: 2, _STATUS_PROGRAM: 1, _STATUS_CHAN_PRESSURE: 1,
    _STATUS_PITCH_BEND: 2,
}
# data bytes per system common status (0xF1..0xF6); F0/F7 handled as sysex
_SYSTEM_DATA_LEN = {0xF1: 1, 0xF2: 2, 0xF3: 1, 0xF4: 0, 0xF5: 0, 0xF6: 0}


def _build(status: int, data: list[int]) -> MidiMessage:
    family = status & 0xF0
    channel = status & 0x0F
    if family == _STATUS_NOTE_ON:
        if data[1] == 0:
            return MidiMessage(MessageKind.NOTE_OFF, channel, data[0], 0)
        return MidiMessage(MessageKind.NOTE_ON, channel, data[0], data[1])
    if family == _STATUS_NOTE_OFF:
        return MidiMessage(MessageKind.NOTE_OFF, channel, data[0], data[1])
    if family == _STATUS_CONTROL:
        return MidiMessage(MessageKind.CONTROL_CHANGE, channel, data[0], data[1])
    raw = bytes([status, *data])
    d2 = data[1] if len(data) > 1 else 0
    return MidiMessage(MessageKind.OTHER, channel, data[0], d2, raw=raw)


class StreamParser:
    """Incremental parser; feed() arbitrary chunks, collect messages."""

    def __init__(self):
        self._status = 0  # current running status, 0 = none
        self._data: list[int] = []
        self._in_sysex = False
        self._system_pending = 0  # data bytes still owed to a system common msg
        self.stray_bytes = 0  # data bytes with no status to attach to
        self.sysex_bytes = 0

    def feed(self, chunk: bytes) -> list[MidiMessage]:
        out: list[MidiMessage] = []
        for byte in chunk:
            if byte >= 0xF8:  # real-time: emit immediately, disturb nothing
                out.append(MidiMessage(MessageKind.OTHER, 0, 0, 0, raw=bytes([byte])))
                continue
            if byte >= 0x80:
                # any non-realtime status terminates a sysex in progress
                self._in_sysex = False
                self._system_pending = 0
                if byte == 0xF0:
                    self._in_sysex = True
                    self._status = 0
                elif byte >= 0xF1:
                    # system common: cancels running status; swallow its data
                    self._status = 0
                    self._system_pending = _SYSTEM_DATA_LEN.get(byte, 0)
                else:
                    self._status = byte
                    self._data = []
                continue
            # data byte
            if self._in_sysex:
                self.sysex_bytes += 1
                continue
            if self._system_pending > 0:
                self._system_pending -= 1
                continue
            if self._status == 0:
                self.stray_bytes += 1
                continue
            self._data.append(byte)
            if len(self._data) == _VOICE_DATA_LEN[self._status & 0xF0]:
                out.append(_build(self._status, self._data))
                self._data = []  # running status stays armed
        return out


def serialize(message: MidiMessage) -> bytes:
    """Canonical wire bytes; an explicit status byte on every message
    (running status is never emitted, for maximum device compatibility)."""
    if message.kind is MessageKind.OTHER:
        if not message.raw:
            raise ValueError("passthrough message has no raw bytes")
        return message.raw
    status = {
        MessageKind.NOTE_ON: _STATUS_NOTE_ON,
        MessageKind.NOTE_OFF: _STATUS_NOTE_OFF,
        MessageKind.CONTROL_CHANGE: _STATUS_CONTROL,
    }[message.kind]
    if not 0 <= message.channel <= 15:
        raise ValueError(f"channel {message.channel} outside 0..15")
    for name, value in (("data1", message.data1), ("data2", message.data2)):
        if not 0 <= value <= 127:
            raise ValueError(f"{name} {value} outside 0..127")
    return bytes([status | message.channel, message.data1, message.data2])
